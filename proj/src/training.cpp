#include "eud/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <json.hpp>

#include "eud/error.hpp"
#include "eud/metrics.hpp"

namespace eud {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ArcSet unlabeled(const LabeledArcSet& arcs) {
  ArcSet out;
  for (const auto& a : arcs) out.insert({a.head, a.dep});
  return out;
}

void set_zero(ModelParams& params) {
  for (auto& t : tensors(params)) std::fill(t.values.begin(), t.values.end(), 0.0);
}

void scale(ModelParams& params, double factor) {
  for (auto& t : tensors(params))
    for (double& v : t.values) v *= factor;
}

/// Interleaving of a mixture: (from_high, index) in final order.
std::vector<std::pair<bool, std::size_t>> mix_order(std::size_t low, std::size_t high, std::uint64_t seed) {
  if (low == 0) throw DataError("low-resource dataset is empty");
  std::vector<std::pair<bool, std::size_t>> order;
  const std::size_t copies = high / low;
  order.reserve(high + copies * low);
  for (std::size_t i = 0; i < high; ++i) order.emplace_back(true, i);
  for (std::size_t c = 0; c < copies; ++c)
    for (std::size_t i = 0; i < low; ++i) order.emplace_back(false, i);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

bool is_masked(const Sentence& s) {
  const auto* value = s.find_metadata(kMaskedLabelsKey);
  return value && *value == std::optional<std::string>(kMaskedLabelsValue);
}

}  // namespace

TrainingExample make_example(const Sentence& sentence, bool labels_masked) {
  DepGraph g = graph_of(sentence);
  g = merge_multi_arcs(collapse_empty_nodes(g));
  TrainingExample ex;
  ex.words = sentence.words();
  ex.labels_masked = labels_masked;
  for (const auto& arc : g.arcs) {
    if (arc.head == arc.dep || arc.dep.is_root()) continue;
    ex.gold_arcs.insert({arc.head.word_index, arc.dep.word_index, arc.label});
  }
  return ex;
}

std::vector<TrainingExample> make_examples(const std::vector<Sentence>& sentences) {
  std::vector<TrainingExample> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(make_example(s, is_masked(s)));
  return out;
}

ArcLoss arc_loss(const ArcProbabilities& probs, const ArcSet& gold) {
  const Index nodes = probs.nodes();
  ArcLoss loss;
  loss.d_logits = MatrixXd::Zero(nodes, nodes);
  for (Index i = 0; i < nodes; ++i) {
    for (Index j = 1; j < nodes; ++j) {
      if (i == j) continue;
      const double target = gold.count({static_cast<int>(i), static_cast<int>(j)}) ? 1.0 : 0.0;
      const double p = probs.probs(i, j);
      const double clamped = std::clamp(p, kLossEpsilon, 1.0 - kLossEpsilon);
      loss.value -= target > 0.0 ? std::log(clamped) : std::log1p(-clamped);
      if (p == clamped) loss.d_logits(i, j) = p - target;
    }
  }
  return loss;
}

LabelLoss label_loss(const MatrixStack<double>& label_scores, const LabeledArcSet& gold,
                     const std::vector<std::string>& label_set) {
  LabelLoss loss;
  if (label_scores.empty()) {
    if (!gold.empty()) throw VocabularyError("model has no labels");
    return loss;
  }
  const Index nodes = label_scores.front().rows();
  loss.d_scores = zero_stack<double>(static_cast<Index>(label_scores.size()), nodes, nodes);
  for (const auto& arc : gold) {
    auto it = std::find(label_set.begin(), label_set.end(), arc.label);
    if (it == label_set.end()) throw VocabularyError("unknown label '" + arc.label + "'");
    const auto gold_index = static_cast<Index>(it - label_set.begin());
    VectorXd s(static_cast<Index>(label_scores.size()));
    for (Index l = 0; l < s.size(); ++l) s(l) = label_scores[l](arc.head, arc.dep);
    const double top = s.maxCoeff();
    const double log_norm = top + std::log((s.array() - top).exp().sum());
    loss.value -= s(gold_index) - log_norm;
    for (Index l = 0; l < s.size(); ++l)
      loss.d_scores[l](arc.head, arc.dep) += std::exp(s(l) - log_norm) - (l == gold_index ? 1.0 : 0.0);
  }
  return loss;
}

double combined_loss(double arc, double label, double lambda) { return lambda * label + (1.0 - lambda) * arc; }

SentenceLoss accumulate_gradient(const ModelParams& params, const TrainingExample& example, const TrainConfig& config,
                                 const VectorXd& row_scale, ModelParams& grads) {
  const ScoringTrace trace = score_with_trace(params, lookup(params, example.words), row_scale);
  const auto q = mfvi_trace(trace.potentials, config.mfvi_iterations);
  ArcLoss arc = arc_loss({q.back(), config.mfvi_iterations}, unlabeled(example.gold_arcs));

  SentenceLoss out;
  out.arc = arc.value;
  MatrixStack<double> d_scores;
  if (!example.labels_masked) {
    LabelLoss label = label_loss(trace.potentials.label_scores, example.gold_arcs, params.labels);
    out.label = label.value;
    d_scores = std::move(label.d_scores);
    for (auto& m : d_scores) m *= config.lambda;
  }
  out.total = combined_loss(out.arc, out.label, config.lambda);

  arc.d_logits *= 1.0 - config.lambda;
  const PotentialGradient<double> d_pot = mfvi_backward(trace.potentials, q, arc.d_logits);
  backpropagate(params, trace, d_pot, d_scores, grads);
  return out;
}

SentenceLoss example_loss(const ModelParams& params, const TrainingExample& example, const TrainConfig& config) {
  const PotentialSet pot = score_potentials(params, encode_tokens(params, example.words));
  SentenceLoss out;
  out.arc = arc_loss(mfvi(pot, config.mfvi_iterations), unlabeled(example.gold_arcs)).value;
  if (!example.labels_masked) out.label = label_loss(pot.label_scores, example.gold_arcs, params.labels).value;
  out.total = combined_loss(out.arc, out.label, config.lambda);
  return out;
}

AdamState AdamState::for_params(const ModelParams& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const TrainConfig& config,
               double learning_rate) {
  const auto g = tensors(grads);
  for (const auto& t : g)
    for (double v : t.values)
      if (!std::isfinite(v)) throw NumericError("non-finite gradient in tensor '" + t.name + "'");

  auto p = tensors(params);
  auto m = tensors(state.first_moment);
  auto v = tensors(state.second_moment);
  ++state.step;
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].values.size(); ++i) {
      const double grad = g[t].values[i];
      double& mi = m[t].values[i];
      double& vi = v[t].values[i];
      mi = b1 * mi + (1.0 - b1) * grad;
      vi = b2 * vi + (1.0 - b2) * grad * grad;
      p[t].values[i] -= learning_rate * (mi / c1) / (std::sqrt(vi / c2) + config.adam_epsilon);
    }
  }
}

std::vector<TrainingExample> upsample_mix(const std::vector<TrainingExample>& low,
                                          const std::vector<TrainingExample>& high, std::uint64_t seed) {
  std::vector<TrainingExample> out;
  for (const auto& [from_high, i] : mix_order(low.size(), high.size(), seed)) {
    out.push_back(from_high ? high[i] : low[i]);
    out.back().labels_masked = from_high;
  }
  return out;
}

std::vector<Sentence> upsample_mix_sentences(const std::vector<Sentence>& low, const std::vector<Sentence>& high,
                                             std::uint64_t seed) {
  std::vector<Sentence> out;
  for (const auto& [from_high, i] : mix_order(low.size(), high.size(), seed)) {
    out.push_back(from_high ? high[i] : low[i]);
    auto& meta = out.back().metadata;
    meta.erase(std::remove_if(meta.begin(), meta.end(), [](const Comment& c) { return c.key == kMaskedLabelsKey; }),
               meta.end());
    if (from_high) out.back().set_metadata(kMaskedLabelsKey, std::string(kMaskedLabelsValue));
  }
  return out;
}

std::pair<std::vector<Sentence>, std::vector<Sentence>> split_dev(const std::vector<Sentence>& sentences) {
  std::pair<std::vector<Sentence>, std::vector<Sentence>> halves;
  for (std::size_t i = 0; i < sentences.size(); ++i) (i % 2 == 0 ? halves.first : halves.second).push_back(sentences[i]);
  return halves;
}

ModelParams initial_params(const std::vector<TrainingExample>& corpus, const TrainConfig& config) {
  Vocabulary vocab;
  std::set<std::string> labels;
  for (const auto& ex : corpus) {
    for (const auto& w : ex.words) vocab.add(w);
    if (!ex.labels_masked)
      for (const auto& a : ex.gold_arcs) labels.insert(a.label);
  }
  ModelParams params = ModelParams::zeros(config.dims, config.structures, std::move(vocab),
                                          std::vector<std::string>(labels.begin(), labels.end()));
  initialize_uniform(params, config.seed);
  return params;
}

std::vector<std::vector<std::size_t>> pack_batches(const std::vector<TrainingExample>& corpus, int batch_tokens) {
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t n = corpus[i].words.size();
    if (!current.empty() && tokens + n > static_cast<std::size_t>(batch_tokens)) {
      batches.push_back(std::move(current));
      current.clear();
      tokens = 0;
    }
    current.push_back(i);
    tokens += n;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

double evaluate_lf1(const ModelParams& params, const std::vector<TrainingExample>& examples,
                    const ParseOptions& options) {
  std::vector<DepGraph> gold, pred;
  for (const auto& ex : examples) {
    const int n = static_cast<int>(ex.words.size());
    gold.push_back(to_graph(ex.gold_arcs, n));
    pred.push_back(to_graph(parse_sentence(params, ex.words, options).arcs, n));
  }
  return lf1(gold, pred).f1;
}

TrainResult train(const std::vector<TrainingExample>& corpus, const std::vector<TrainingExample>& dev,
                  const TrainConfig& config) {
  return train(corpus, dev, config, initial_params(corpus, config));
}

TrainResult train(const std::vector<TrainingExample>& corpus, const std::vector<TrainingExample>& dev,
                  const TrainConfig& config, ModelParams initial) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  if (config.lambda < 0.0 || config.lambda > 1.0) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (config.batch_tokens < 1) throw std::invalid_argument("batch_tokens must be positive");

  TrainResult result;
  ModelParams params = std::move(initial);
  AdamState adam = AdamState::for_params(params);
  ModelParams grads = params.zeros_like();
  std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto batches = pack_batches(corpus, config.batch_tokens);

  double lr = config.learning_rate;
  double best_lf1 = -1.0;
  int stale = 0;
  result.params = params;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      set_zero(grads);
      for (std::size_t idx : batch) {
        const auto& ex = corpus[idx];
        VectorXd row_scale = VectorXd::Ones(static_cast<Index>(ex.words.size()));
        if (config.dropout_rate > 0.0)
          for (Index t = 0; t < row_scale.size(); ++t)
            row_scale(t) = unit(dropout_rng) < config.dropout_rate ? 0.0 : 1.0 / (1.0 - config.dropout_rate);
        loss_sum += accumulate_gradient(params, ex, config, row_scale, grads).total;
      }
      scale(grads, 1.0 / static_cast<double>(batch.size()));
      adam_step(params, grads, adam, config, lr);
    }

    EpochRecord record{epoch, loss_sum / static_cast<double>(corpus.size()), 0.0, lr};
    if (dev.empty()) {
      result.params = params;
      result.best_epoch = epoch;
    } else {
      record.dev_lf1 = evaluate_lf1(params, dev, config.dev_parse);
      if (record.dev_lf1 > best_lf1) {
        best_lf1 = record.dev_lf1;
        result.params = params;
        result.best_epoch = epoch;
        stale = 0;
      } else if (++stale >= config.lr_patience) {
        lr *= config.lr_decay;
        stale = 0;
      }
    }
    result.history.push_back(record);
  }
  return result;
}

void write_history(const std::vector<EpochRecord>& history, std::ostream& out) {
  for (const auto& r : history) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["dev_lf1"] = r.dev_lf1;
    j["lr"] = r.learning_rate;
    out << j.dump() << '\n';
  }
}

}  // namespace eud

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "eud/conllu.hpp"
#include "eud/inference.hpp"
#include "eud/metrics.hpp"
#include "eud/mfvi.hpp"
#include "eud/training.hpp"
#include "generators.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace eud;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double limit_seconds;  // 0 = no limit
  std::function<Outcome()> run;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("eud-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path toy_corpus() { return fs::path(TEST_DATA_DIR) / "toy.conllu"; }

/// Runs eudparse with the given arguments; stdout goes to `stdout_path` when set.
int eudparse(const std::string& args, const fs::path& stdout_path = {}) {
  std::string cmd = std::string("\"") + EUDPARSE_PATH + "\" " + args;
  cmd += stdout_path.empty() ? " > /dev/null" : " > \"" + stdout_path.string() + "\"";
  cmd += " 2>> \"" + (work_dir() / "stderr.log").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::map<std::string, double> parse_machine_report(const std::string& line) {
  std::map<std::string, double> out;
  std::istringstream in(line);
  std::string item;
  while (in >> item) {
    const auto eq = item.find('=');
    if (eq != std::string::npos) out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return out;
}

/// Graph written by the parse command for one parsed sentence.
DepGraph output_graph(const ParseResult& result, int n_words) {
  return expand_empty_nodes(split_multi_arcs(to_graph(result.arcs, n_words)));
}

Outcome transform_round_trips() {
  std::mt19937_64 rng(2024);
  const int trials = 1000;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    const DepGraph collapsed = testing::random_collapsed_graph(rng);
    failures += !(collapse_empty_nodes(expand_empty_nodes(collapsed)) == collapsed);
    const DepGraph with_empty = testing::random_empty_node_graph(rng);
    failures += !(expand_empty_nodes(collapse_empty_nodes(with_empty)) == with_empty);
    const DepGraph multi = testing::random_multigraph(rng);
    failures += !(split_multi_arcs(merge_multi_arcs(multi)) == multi);
    const DepGraph merged = merge_multi_arcs(testing::random_multigraph(rng));
    failures += !(merge_multi_arcs(split_multi_arcs(merged)) == merged);
  }
  return {failures == 0, std::to_string(4 * trials) + " graphs, " + std::to_string(failures) + " failures"};
}

Outcome decoder_exactness() {
  std::mt19937_64 rng(77);
  int checked = 0, failures = 0;
  for (int n = 2; n <= 5; ++n) {
    for (int t = 0; t < 200; ++t) {
      const Eigen::MatrixXd p = testing::random_probs(rng, n);
      const Eigen::MatrixXd w = tree_weights(p);
      const ArcSet mst = mst_decode(p);
      const ArcSet eisner = eisner_decode(p);
      failures += arc_set_weight(w, mst) != testing::brute_force_best(w, false).weight;
      failures += arc_set_weight(w, eisner) != testing::brute_force_best(w, true).weight;
      failures += !root_reachable(n + 1, mst) || !root_reachable(n + 1, eisner);
      checked += 2;
    }
  }
  return {failures == 0, std::to_string(checked) + " decodes, " + std::to_string(failures) + " mismatches"};
}

Outcome mfvi_reduction() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 3.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = testing::uniform(rng, 1, 8);
    PotentialSet pot;
    pot.unary = Eigen::MatrixXd::Constant(n + 1, n + 1, kNegInf<double>);
    for (int i = 0; i <= n; ++i)
      for (int j = 1; j <= n; ++j)
        if (i != j) pot.unary(i, j) = normal(rng);
    if (t % 2 == 0)
      for (auto& stack : pot.binary) stack = zero_stack<double>(n + 1, n + 1, n + 1);
    for (int iterations : {0, 1, 3, 10}) {
      const Eigen::MatrixXd probs = mfvi(pot, iterations).probs;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          const double expected = admissible(i, j) ? 1.0 / (1.0 + std::exp(-pot.unary(i, j))) : 0.0;
          worst = std::max(worst, std::abs(probs(i, j) - expected));
        }
    }
  }
  return {worst <= 1e-12, "max abs diff " + fmt("%.3g", worst)};
}

Outcome gradient_correctness() {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) worst = std::max(worst, testing::end_to_end_gradient_error(rng));
  return {worst < 1e-4, "20 instances, max relative error " + fmt("%.3g", worst)};
}

Outcome loss_closed_forms() {
  double worst = 0.0;
  for (int n = 1; n <= 10; ++n) {
    ArcProbabilities p;
    p.probs = Eigen::MatrixXd::Zero(n + 1, n + 1);
    ArcSet gold;
    for (int i = 0; i <= n; ++i)
      for (int j = 1; j <= n; ++j)
        if (i != j) p.probs(i, j) = 0.5;
    for (int j = 1; j <= n; ++j) gold.insert({j - 1, j});
    const double m = static_cast<double>(n) * n;
    worst = std::max(worst, std::abs(arc_loss(p, gold).value - m * std::log(2.0)));
  }
  for (int labels = 1; labels <= 8; ++labels) {
    std::vector<std::string> set;
    for (int l = 0; l < labels; ++l) set.push_back("l" + std::to_string(l));
    const auto scores = zero_stack<double>(labels, 7, 7);
    LabeledArcSet gold;
    for (int k = 1; k <= 6; ++k) gold.insert({k - 1, k, set[static_cast<std::size_t>(k % labels)]});
    worst = std::max(worst, std::abs(label_loss(scores, gold, set).value - 6.0 * std::log(labels)));
  }
  return {worst <= 1e-9, "max abs error " + fmt("%.3g", worst)};
}

Outcome mixture_counts() {
  auto examples = [](std::size_t count, const std::string& tag) {
    std::vector<TrainingExample> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i].words = {tag, std::to_string(i)};
    return out;
  };
  std::string detail;
  bool pass = true;
  const auto low = examples(400, "low");
  for (const auto& [high_size, expected] : std::vector<std::pair<std::size_t, std::size_t>>{{12543, 12400},
                                                                                           {102131, 102000}}) {
    const auto mix = upsample_mix(low, examples(high_size, "high"), 1);
    std::size_t copies = 0, masked = 0;
    std::map<std::string, int> per_sentence;
    for (const auto& ex : mix) {
      if (ex.words[0] == "low") {
        ++copies;
        ++per_sentence[ex.words[1]];
      }
      masked += ex.labels_masked;
    }
    bool even = per_sentence.size() == 400;
    for (const auto& entry : per_sentence) even = even && entry.second == static_cast<int>(expected / 400);
    pass = pass && copies == expected && masked == high_size && mix.size() == high_size + expected && even;
    if (!detail.empty()) detail += "; ";
    detail += "(400, " + std::to_string(high_size) + ") -> " + std::to_string(copies) + " copies";
  }
  return {pass, detail};
}

std::vector<std::vector<std::string>> toy_sentences(const std::vector<TrainingExample>& corpus, int count) {
  std::vector<std::string> vocab;
  for (const auto& ex : corpus) vocab.insert(vocab.end(), ex.words.begin(), ex.words.end());
  vocab.push_back("unseen");
  std::mt19937_64 rng(31);
  std::vector<std::vector<std::string>> out;
  for (int s = 0; s < count; ++s) {
    std::vector<std::string> words;
    const int n = testing::uniform(rng, 1, 20);
    for (int i = 0; i < n; ++i)
      words.push_back(vocab[static_cast<std::size_t>(testing::uniform(rng, 0, static_cast<int>(vocab.size()) - 1))]);
    out.push_back(std::move(words));
  }
  return out;
}

Outcome connectivity_contract() {
  const auto corpus = make_examples(parse_conllu(read_file(toy_corpus())));
  const auto sentences = toy_sentences(corpus, 100);

  std::vector<std::pair<std::string, ModelParams>> models;
  TrainConfig config;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    config.seed = seed;
    ModelParams p = initial_params(corpus, config);
    models.emplace_back("random-" + std::to_string(seed), p);
    initialize_uniform(p, seed, 1.0);
    models.emplace_back("random-wide-" + std::to_string(seed), p);
  }
  config.seed = 1;
  config.epochs = 20;
  config.learning_rate = 1e-2;
  config.batch_tokens = 40;
  models.emplace_back("trained", train(corpus, {}, config).params);

  bool pass = true;
  double worst_tree = 1.0, worst_argmax = 1.0;
  for (const auto& [name, params] : models) {
    for (DecodeMode mode : {DecodeMode::mst, DecodeMode::eisner, DecodeMode::argmax}) {
      ParseOptions options;
      options.mode = mode;
      std::vector<DepGraph> graphs;
      const auto results = parse_all(params, sentences, options, 1);
      for (std::size_t s = 0; s < sentences.size(); ++s)
        graphs.push_back(output_graph(results[s], static_cast<int>(sentences[s].size())));
      const double rate = connectivity_rate(graphs);
      if (mode == DecodeMode::argmax) {
        worst_argmax = std::min(worst_argmax, rate);
      } else {
        worst_tree = std::min(worst_tree, rate);
        pass = pass && rate == 1.0;
      }
    }
  }
  return {pass, std::to_string(models.size()) + " models x 100 sentences; mst/eisner min rate " +
                    fmt("%.4f", worst_tree) + ", argmax min rate " + fmt("%.4f", worst_argmax)};
}

Outcome memorization() {
  const fs::path dir = work_dir() / "memorize";
  fs::create_directories(dir);
  const fs::path model = dir / "toy.model", pred = dir / "pred.conllu", report = dir / "report.txt";
  int rc = eudparse("train --train " + q(toy_corpus()) + " --dev " + q(toy_corpus()) + " --model " + q(model) +
                    " --history " + q(dir / "history.jsonl") +
                    " --epochs 200 --lr 0.01 --dropout 0 --batch-tokens 40 --patience 20 --seed 1");
  if (rc != 0) return {false, "train exited with " + std::to_string(rc)};
  rc = eudparse("parse --model " + q(model) + " -i " + q(toy_corpus()) + " -o " + q(pred));
  if (rc != 0) return {false, "parse exited with " + std::to_string(rc)};
  rc = eudparse("eval --machine --gold " + q(toy_corpus()) + " --pred " + q(pred), report);
  if (rc != 0) return {false, "eval exited with " + std::to_string(rc)};
  const auto scores = parse_machine_report(read_file(report));
  const double lf = scores.count("lf1_f1") ? scores.at("lf1_f1") : 0.0;
  const double el = scores.count("elas_f1") ? scores.at("elas_f1") : 0.0;
  return {lf >= 0.99 && el >= 0.99, "train-set LF1 " + fmt("%.4f", lf) + ", ELAS " + fmt("%.4f", el)};
}

Outcome second_order_effect() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto train_set = testing::sibling_corpus(100 + seed, 200);
    const auto test_set = testing::sibling_corpus(900 + seed, 100);
    double scores[2];
    for (int second = 0; second < 2; ++second) {
      TrainConfig config;
      config.dims = {32, 32, 8};
      config.epochs = 60;
      config.learning_rate = 1e-2;
      config.batch_tokens = 100;
      config.dropout_rate = 0.0;
      config.seed = seed;
      if (!second) config.structures = StructureSet::none();
      scores[second] = evaluate_lf1(train(train_set, {}, config).params, test_set, ParseOptions{});
    }
    pass = pass && scores[1] > scores[0];
    if (!detail.empty()) detail += "; ";
    detail += "seed " + std::to_string(seed) + ": " + fmt("%.4f", scores[1]) + " vs " + fmt("%.4f", scores[0]);
  }
  return {pass, "held-out LF1 second vs first order, " + detail};
}

Outcome determinism() {
  const fs::path dir = work_dir() / "determinism";
  fs::create_directories(dir);
  const std::string toy = q(toy_corpus());
  std::vector<std::string> failed;
  int compared = 0;

  auto twice = [&](const std::string& name, const std::function<int(int)>& run,
                   const std::function<std::vector<fs::path>(int)>& outputs) {
    if (run(0) != 0 || run(1) != 0) {
      failed.push_back(name + " (exit status)");
      return;
    }
    const auto a = outputs(0), b = outputs(1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ++compared;
      const std::string x = read_file(a[i]), y = read_file(b[i]);
      if (x.empty() || x != y) failed.push_back(name);
    }
  };
  auto out = [&](const std::string& stem) {
    return [&dir, stem](int k) { return std::vector<fs::path>{dir / (stem + std::to_string(k))}; };
  };

  for (const char* cmd : {"collapse", "expand", "merge", "split"})
    twice(cmd, [&, cmd](int k) {
      return eudparse(std::string(cmd) + " -i " + toy + " -o " + q(dir / (std::string(cmd) + std::to_string(k))));
    }, out(cmd));

  twice("train",
        [&](int k) {
          return eudparse("train --train " + toy + " --dev " + toy + " --epochs 3 --seed 5 --model " +
                          q(dir / ("model" + std::to_string(k))) + " --history " +
                          q(dir / ("history" + std::to_string(k))));
        },
        [&](int k) {
          return std::vector<fs::path>{dir / ("model" + std::to_string(k)), dir / ("history" + std::to_string(k))};
        });

  const std::string model = q(dir / "model0");
  for (const char* mode : {"mst", "eisner", "argmax"}) {
    const std::string stem = std::string("parse-") + mode;
    twice(stem, [&, mode, stem](int k) {
      return eudparse("parse --model " + model + " --mode " + mode + " --jobs 1 -i " + toy + " -o " +
                      q(dir / (stem + std::to_string(k))));
    }, out(stem));
    if (eudparse("parse --model " + model + " --mode " + mode + " --jobs 4 -i " + toy + " -o " +
                 q(dir / (stem + "-jobs4"))) != 0 ||
        read_file(dir / (stem + "-jobs4")) != read_file(dir / (stem + "0")))
      failed.push_back(stem + " (--jobs 4 vs 1)");
    ++compared;
  }

  twice("eval", [&](int k) {
    return eudparse("eval --gold " + toy + " --pred " + q(dir / "parse-mst0"), dir / ("eval" + std::to_string(k)));
  }, out("eval"));
  twice("mix", [&](int k) {
    return eudparse("mix --low " + q(dir / "split0") + " --high " + toy + " --seed 9 -o " +
                    q(dir / ("mix" + std::to_string(k))));
  }, out("mix"));
  twice("split-dev",
        [&](int k) {
          return eudparse("split-dev -i " + toy + " --dev-out " + q(dir / ("dev" + std::to_string(k))) +
                          " --test-out " + q(dir / ("test" + std::to_string(k))));
        },
        [&](int k) {
          return std::vector<fs::path>{dir / ("dev" + std::to_string(k)), dir / ("test" + std::to_string(k))};
        });

  std::string detail = std::to_string(compared) + " output comparisons";
  for (const auto& f : failed) detail += "; differs: " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"transform round-trips", 10.0, transform_round_trips},
      {"decoder exactness", 30.0, decoder_exactness},
      {"mfvi reduction", 0.0, mfvi_reduction},
      {"gradient correctness", 0.0, gradient_correctness},
      {"loss closed forms", 0.0, loss_closed_forms},
      {"mixture counts", 0.0, mixture_counts},
      {"connectivity contract", 0.0, connectivity_contract},
      {"memorization run", 300.0, memorization},
      {"second-order effect", 0.0, second_order_effect},
      {"determinism", 0.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0.0 && seconds >= c.limit_seconds) {
      outcome.pass = false;
      outcome.detail += "; over the " + fmt("%.0f", c.limit_seconds) + " s limit";
    }
    failures += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << outcome.detail << " ["
              << fmt("%.1f", seconds) << " s]" << std::endl;
  }
  std::error_code ec;
  fs::remove_all(work_dir(), ec);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}

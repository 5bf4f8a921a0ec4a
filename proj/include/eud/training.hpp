// Losses, optimizer, dataset mixing and the training loop.
#ifndef EUD_TRAINING_HPP
#define EUD_TRAINING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eud/conllu.hpp"
#include "eud/inference.hpp"
#include "eud/model.hpp"

namespace eud {

struct TrainConfig {
  double lambda = 0.10;
  double learning_rate = 2e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.9;
  double adam_epsilon = 1e-8;
  double lr_decay = 0.5;
  int lr_patience = 2;  // epochs without dev improvement before decaying
  int batch_tokens = 2000;
  int epochs = 30;
  int mfvi_iterations = 3;
  double dropout_rate = 0.33;
  std::uint64_t seed = 1;

  ModelDims dims = ModelDims::desk();
  StructureSet structures;
  ParseOptions dev_parse;  // decoding used for dev LF1
};

/// Metadata key marking sentences whose labels only feed the arc loss.
inline constexpr const char* kMaskedLabelsKey = "eud_labels";
inline constexpr const char* kMaskedLabelsValue = "masked";

struct TrainingExample {
  std::vector<std::string> words;
  LabeledArcSet gold_arcs;  // collapsed, multi-arcs merged
  bool labels_masked = false;
};

/// Collapses empty nodes and merges multi-arcs. Arcs that cannot be scored
/// (self loops) are dropped.
TrainingExample make_example(const Sentence& sentence, bool labels_masked = false);
std::vector<TrainingExample> make_examples(const std::vector<Sentence>& sentences);

/// Loss value with gradient; for arc_loss the gradient is with respect to
/// the final MFVI logits.
struct ArcLoss {
  double value = 0.0;
  Eigen::MatrixXd d_logits;
};

struct LabelLoss {
  double value = 0.0;
  MatrixStack<double> d_scores;
};

inline constexpr double kLossEpsilon = 1e-12;

ArcLoss arc_loss(const ArcProbabilities& probs, const ArcSet& gold);
LabelLoss label_loss(const MatrixStack<double>& label_scores, const LabeledArcSet& gold,
                     const std::vector<std::string>& label_set);
double combined_loss(double arc, double label, double lambda);

struct SentenceLoss {
  double arc = 0.0;
  double label = 0.0;
  double total = 0.0;
};

/// Loss of one example, adding gradients (through the unrolled MFVI) into
/// `grads`. `row_scale` holds per-word dropout multipliers.
SentenceLoss accumulate_gradient(const ModelParams& params, const TrainingExample& example, const TrainConfig& config,
                                 const Eigen::VectorXd& row_scale, ModelParams& grads);

/// Loss without dropout or gradients.
SentenceLoss example_loss(const ModelParams& params, const TrainingExample& example, const TrainConfig& config);

struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  long step = 0;

  static AdamState for_params(const ModelParams& params);
};

/// Bias-corrected Adam update. Throws NumericError on non-finite gradients.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const TrainConfig& config,
               double learning_rate);

/// `high` with labels masked plus floor(|high| / |low|) copies of `low`,
/// shuffled with `seed`.
std::vector<TrainingExample> upsample_mix(const std::vector<TrainingExample>& low,
                                          const std::vector<TrainingExample>& high, std::uint64_t seed);

/// Sentence-level counterpart of upsample_mix used by the `mix` command;
/// masked sentences carry the kMaskedLabelsKey metadata line.
std::vector<Sentence> upsample_mix_sentences(const std::vector<Sentence>& low, const std::vector<Sentence>& high,
                                             std::uint64_t seed);

/// Even-indexed sentences form the dev half, odd-indexed the test half.
std::pair<std::vector<Sentence>, std::vector<Sentence>> split_dev(const std::vector<Sentence>& sentences);

/// Vocabulary from all words; labels (sorted) from unmasked gold arcs.
ModelParams initial_params(const std::vector<TrainingExample>& corpus, const TrainConfig& config);

/// Consecutive batches, each holding at most `batch_tokens` words (a
/// longer sentence forms its own batch).
std::vector<std::vector<std::size_t>> pack_batches(const std::vector<TrainingExample>& corpus, int batch_tokens);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_lf1 = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

/// LF1 of the model's parses against the examples' gold arcs.
double evaluate_lf1(const ModelParams& params, const std::vector<TrainingExample>& examples,
                    const ParseOptions& options);

TrainResult train(const std::vector<TrainingExample>& corpus, const std::vector<TrainingExample>& dev,
                  const TrainConfig& config);
TrainResult train(const std::vector<TrainingExample>& corpus, const std::vector<TrainingExample>& dev,
                  const TrainConfig& config, ModelParams initial);

/// One JSON object per line: epoch, train_loss, dev_lf1, lr.
void write_history(const std::vector<EpochRecord>& history, std::ostream& out);

}  // namespace eud

#endif  // EUD_TRAINING_HPP

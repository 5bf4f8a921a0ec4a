// Trainable scorers: a context-window token encoder feeding biaffine arc and
// label scorers and trilinear second-order scorers.
#ifndef EUD_MODEL_HPP
#define EUD_MODEL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "eud/mfvi.hpp"
#include "eud/potentials.hpp"

namespace eud {

struct ModelDims {
  int embedding = 64;  // d_e, equal to the encoder output size
  int unary = 64;      // arc and label FFN size
  int binary = 32;     // trilinear FFN size

  static ModelDims desk() { return {}; }
  /// Hidden sizes of the published system (unary 500, binary 150).
  static ModelDims paper() { return {64, 500, 150}; }
  bool operator==(const ModelDims&) const = default;
};

/// Word to row index; row 0 is reserved for unknown words.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr const char* kUnknownToken = "<unk>";

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);

  int index(const std::string& word) const;
  int add(const std::string& word);
  const std::vector<std::string>& words() const { return words_; }
  int size() const { return static_cast<int>(words_.size()); }
  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/// relu(W x + b), applied row-wise to a matrix of inputs.
struct Affine {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  static Affine zeros(int out, int in) { return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)}; }
  Eigen::MatrixXd pre_activation(const Eigen::MatrixXd& rows) const {
    return (rows * weight.transpose()).rowwise() + bias.transpose();
  }
  bool operator==(const Affine&) const = default;
};

struct ModelParams {
  ModelDims dims;
  StructureSet structures;
  Vocabulary vocab;
  std::vector<std::string> labels;

  Eigen::MatrixXd embeddings;  // |V| x d_e
  Eigen::VectorXd root;        // encoder output for node 0

  Affine arc_head, arc_dep;
  Eigen::MatrixXd arc_biaffine;  // (d_u+1) x (d_u+1)

  Affine label_head, label_dep;
  MatrixStack<double> label_biaffine;  // L slices of (d_u+1) x (d_u+1)

  Affine tri_head, tri_dep, tri_sib;
  std::array<MatrixStack<double>, 3> trilinear;  // per structure: d_b slices of d_b x d_b, [a](b, c)

  /// All-zero parameters with the given shapes.
  static ModelParams zeros(ModelDims dims, StructureSet structures, Vocabulary vocab,
                           std::vector<std::string> labels);
  ModelParams zeros_like() const;

  int label_index(const std::string& label) const;  // -1 when absent

  bool operator==(const ModelParams&) const = default;
};

struct NamedTensor {
  std::string name;
  std::span<double> values;
};

struct ConstNamedTensor {
  std::string name;
  std::span<const double> values;
};

/// Every trainable tensor in a fixed order (the initialization and
/// serialization order).
std::vector<NamedTensor> tensors(ModelParams& params);
std::vector<ConstNamedTensor> tensors(const ModelParams& params);

/// Fills every tensor uniformly in [-scale, scale].
void initialize_uniform(ModelParams& params, std::uint64_t seed, double scale = 0.1);

struct TokenEncoding {
  Eigen::MatrixXd vectors;  // (n+1) x d_r, row 0 = root
};

TokenEncoding encode_tokens(const ModelParams& params, const std::vector<std::string>& words);

Eigen::MatrixXd score_unary(const ModelParams& params, const TokenEncoding& enc);
std::array<MatrixStack<double>, 3> score_binary(const ModelParams& params, const TokenEncoding& enc,
                                                StructureSet types);
MatrixStack<double> score_labels(const ModelParams& params, const TokenEncoding& enc);

/// Softmax over labels for one (head, dep) cell.
Eigen::VectorXd label_distribution(const MatrixStack<double>& label_scores, Eigen::Index head, Eigen::Index dep);

/// All potentials for a sentence using the model's enabled structures.
PotentialSet score_potentials(const ModelParams& params, const TokenEncoding& enc);

/// Intermediate values of one scoring pass, kept for the reverse pass.
struct ScoringTrace {
  std::vector<int> ids;          // vocabulary rows of words 1..n
  Eigen::VectorXd row_scale;     // dropout scale per word (1 = kept)
  Eigen::MatrixXd encoded;       // (n+1) x d_r
  Eigen::MatrixXd arc_head_pre, arc_dep_pre, label_head_pre, label_dep_pre;
  Eigen::MatrixXd arc_head_aug, arc_dep_aug, label_head_aug, label_dep_aug;  // relu + trailing 1
  Eigen::MatrixXd tri_head_pre, tri_dep_pre, tri_sib_pre;
  Eigen::MatrixXd tri_head_out, tri_dep_out, tri_sib_out;
  PotentialSet potentials;
};

std::vector<int> lookup(const ModelParams& params, const std::vector<std::string>& words);

/// Forward pass; `row_scale` multiplies each word's embedding (dropout).
ScoringTrace score_with_trace(const ModelParams& params, std::vector<int> ids, Eigen::VectorXd row_scale);

/// Accumulates parameter gradients into `grads` given gradients with respect
/// to the potentials. `d_label_scores` may be empty.
void backpropagate(const ModelParams& params, const ScoringTrace& trace, const PotentialGradient<double>& d_pot,
                   const MatrixStack<double>& d_label_scores, ModelParams& grads);

void save_model(const ModelParams& params, std::ostream& out);
ModelParams load_model(std::istream& in);  // throws ModelFormatError
void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

}  // namespace eud

#endif  // EUD_MODEL_HPP

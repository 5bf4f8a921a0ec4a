// Score containers shared by the model, inference and training code.
// Node 0 is the artificial root; nodes 1..n are the words of the sentence.
#ifndef EUD_POTENTIALS_HPP
#define EUD_POTENTIALS_HPP

#include <Eigen/Dense>

#include <array>
#include <compare>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace eud {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// A 3-tensor stored as a stack of matrix slices: stack[a](b, c).
template <typename Scalar>
using MatrixStack = std::vector<Matrix<Scalar>>;

template <typename Scalar>
MatrixStack<Scalar> zero_stack(Eigen::Index slices, Eigen::Index rows, Eigen::Index cols) {
  return MatrixStack<Scalar>(static_cast<std::size_t>(slices), Matrix<Scalar>::Zero(rows, cols));
}

/// Second-order structures scored by the trilinear potentials.
///  sibling:     arcs i->j and i->k        psi(i, j, k), symmetric in (j, k)
///  coparent:    arcs i->j and k->j        psi(i, j, k), symmetric in (i, k)
///  grandparent: arcs i->j and j->k        psi(i, j, k)
enum class Structure { sibling = 0, coparent = 1, grandparent = 2 };

inline constexpr std::array<Structure, 3> kAllStructures = {Structure::sibling, Structure::coparent,
                                                            Structure::grandparent};

inline const char* structure_name(Structure s) {
  switch (s) {
    case Structure::sibling: return "sibling";
    case Structure::coparent: return "coparent";
    case Structure::grandparent: return "grandparent";
  }
  return "?";
}

struct StructureSet {
  std::array<bool, 3> enabled{true, true, true};

  static StructureSet none() { return StructureSet{{false, false, false}}; }
  bool has(Structure s) const { return enabled[static_cast<int>(s)]; }
  void set(Structure s, bool on) { enabled[static_cast<int>(s)] = on; }
  bool any() const { return enabled[0] || enabled[1] || enabled[2]; }
  bool operator==(const StructureSet&) const = default;
};

template <typename Scalar>
inline constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

/// Cells that can hold an arc: no self loops, nothing enters the root.
constexpr bool admissible(Eigen::Index head, Eigen::Index dep) { return head != dep && dep != 0; }

template <typename Scalar>
struct BasicPotentialSet {
  Matrix<Scalar> unary;  // unary(i, j): head i, dependent j; -inf off the admissible cells
  std::array<MatrixStack<Scalar>, 3> binary;  // empty stack = structure disabled; binary[s][i](j, k)
  MatrixStack<Scalar> label_scores;           // label_scores[l](i, j)

  Eigen::Index nodes() const { return unary.rows(); }
  bool has(Structure s) const { return !binary[static_cast<int>(s)].empty(); }
  const MatrixStack<Scalar>& operator[](Structure s) const { return binary[static_cast<int>(s)]; }
  MatrixStack<Scalar>& operator[](Structure s) { return binary[static_cast<int>(s)]; }
};

using PotentialSet = BasicPotentialSet<double>;

template <typename Scalar>
struct BasicArcProbabilities {
  Matrix<Scalar> probs;
  int iterations_run = 0;

  Eigen::Index nodes() const { return probs.rows(); }
  Eigen::Index words() const { return probs.rows() - 1; }
};

using ArcProbabilities = BasicArcProbabilities<double>;

/// Unlabeled arc between node indices.
struct Arc {
  int head = 0;
  int dep = 0;
  auto operator<=>(const Arc&) const = default;
};

using ArcSet = std::set<Arc>;

struct LabeledArc {
  int head = 0;
  int dep = 0;
  std::string label;
  auto operator<=>(const LabeledArc&) const = default;
};

using LabeledArcSet = std::set<LabeledArc>;

}  // namespace eud

#endif  // EUD_POTENTIALS_HPP

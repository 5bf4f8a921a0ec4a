// Mean-field variational inference over unary and second-order arc potentials,
// plus the reverse pass through the unrolled iterations.
#ifndef EUD_MFVI_HPP
#define EUD_MFVI_HPP

#include <cmath>
#include <type_traits>
#include <vector>

#include "eud/potentials.hpp"

namespace eud {

template <typename Scalar>
  requires(!std::is_base_of_v<Eigen::EigenBase<Scalar>, Scalar>)
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

template <typename Derived>
Matrix<typename Derived::Scalar> sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return sigmoid(v); });
}

namespace detail {

/// Second-order message into cell (i, j) given the current posteriors q.
template <typename Scalar>
Scalar mfvi_message(const BasicPotentialSet<Scalar>& pot, const Matrix<Scalar>& q, Eigen::Index i,
                    Eigen::Index j) {
  const Eigen::Index nodes = pot.nodes();
  const bool sib = pot.has(Structure::sibling);
  const bool cop = pot.has(Structure::coparent);
  const bool gp = pot.has(Structure::grandparent);
  Scalar sum(0);
  for (Eigen::Index k = 0; k < nodes; ++k) {
    if (k == i || k == j) continue;
    if (sib) sum += q(i, k) * pot[Structure::sibling][i](j, k);
    if (cop) sum += q(k, j) * pot[Structure::coparent][i](j, k);
    if (gp) sum += q(j, k) * pot[Structure::grandparent][i](j, k) + q(k, i) * pot[Structure::grandparent][k](i, j);
  }
  return sum;
}

template <typename Scalar>
Matrix<Scalar> initial_posteriors(const Matrix<Scalar>& unary) {
  const Eigen::Index nodes = unary.rows();
  Matrix<Scalar> q = Matrix<Scalar>::Zero(nodes, nodes);
  for (Eigen::Index i = 0; i < nodes; ++i)
    for (Eigen::Index j = 1; j < nodes; ++j)
      if (i != j) q(i, j) = sigmoid(unary(i, j));
  return q;
}

}  // namespace detail

/// Runs `iterations` mean-field updates and returns every intermediate
/// posterior matrix: trace[0] = sigmoid(unary), trace.back() = final.
template <typename Scalar>
std::vector<Matrix<Scalar>> mfvi_trace(const BasicPotentialSet<Scalar>& pot, int iterations) {
  std::vector<Matrix<Scalar>> trace;
  trace.reserve(static_cast<std::size_t>(iterations) + 1);
  trace.push_back(detail::initial_posteriors(pot.unary));
  const Eigen::Index nodes = pot.nodes();
  const bool second_order = pot.has(Structure::sibling) || pot.has(Structure::coparent) ||
                            pot.has(Structure::grandparent);
  for (int t = 1; t <= iterations; ++t) {
    const Matrix<Scalar>& prev = trace.back();
    Matrix<Scalar> next = Matrix<Scalar>::Zero(nodes, nodes);
    for (Eigen::Index i = 0; i < nodes; ++i) {
      for (Eigen::Index j = 1; j < nodes; ++j) {
        if (i == j) continue;
        Scalar logit = pot.unary(i, j);
        if (second_order) logit += detail::mfvi_message(pot, prev, i, j);
        next(i, j) = sigmoid(logit);
      }
    }
    trace.push_back(std::move(next));
  }
  return trace;
}

template <typename Scalar>
BasicArcProbabilities<Scalar> mfvi(const BasicPotentialSet<Scalar>& pot, int iterations) {
  auto trace = mfvi_trace(pot, iterations);
  return {std::move(trace.back()), iterations};
}

template <typename Scalar>
struct PotentialGradient {
  Matrix<Scalar> unary;
  std::array<MatrixStack<Scalar>, 3> binary;
};

/// Reverse pass through the unrolled updates. `d_final_logits` is the loss
/// gradient with respect to the pre-sigmoid logits of the last iterate
/// (only admissible cells are read).
template <typename Scalar>
PotentialGradient<Scalar> mfvi_backward(const BasicPotentialSet<Scalar>& pot,
                                        const std::vector<Matrix<Scalar>>& trace,
                                        const Matrix<Scalar>& d_final_logits) {
  const Eigen::Index nodes = pot.nodes();
  PotentialGradient<Scalar> grad;
  grad.unary = Matrix<Scalar>::Zero(nodes, nodes);
  for (Structure s : kAllStructures)
    if (pot.has(s)) grad.binary[static_cast<int>(s)] = zero_stack<Scalar>(nodes, nodes, nodes);

  const bool sib = pot.has(Structure::sibling);
  const bool cop = pot.has(Structure::coparent);
  const bool gp = pot.has(Structure::grandparent);
  auto& d_sib = grad.binary[0];
  auto& d_cop = grad.binary[1];
  auto& d_gp = grad.binary[2];

  Matrix<Scalar> d_logits = Matrix<Scalar>::Zero(nodes, nodes);
  for (Eigen::Index i = 0; i < nodes; ++i)
    for (Eigen::Index j = 1; j < nodes; ++j)
      if (i != j) d_logits(i, j) = d_final_logits(i, j);

  for (std::size_t t = trace.size() - 1; t >= 1; --t) {
    const Matrix<Scalar>& q = trace[t - 1];
    Matrix<Scalar> d_q = Matrix<Scalar>::Zero(nodes, nodes);
    grad.unary += d_logits;
    for (Eigen::Index i = 0; i < nodes; ++i) {
      for (Eigen::Index j = 1; j < nodes; ++j) {
        const Scalar g = d_logits(i, j);
        if (i == j || g == Scalar(0)) continue;
        for (Eigen::Index k = 0; k < nodes; ++k) {
          if (k == i || k == j) continue;
          if (sib) {
            d_sib[i](j, k) += g * q(i, k);
            d_q(i, k) += g * pot[Structure::sibling][i](j, k);
          }
          if (cop) {
            d_cop[i](j, k) += g * q(k, j);
            d_q(k, j) += g * pot[Structure::coparent][i](j, k);
          }
          if (gp) {
            d_gp[i](j, k) += g * q(j, k);
            d_q(j, k) += g * pot[Structure::grandparent][i](j, k);
            d_gp[k](i, j) += g * q(k, i);
            d_q(k, i) += g * pot[Structure::grandparent][k](i, j);
          }
        }
      }
    }
    d_logits.setZero();
    for (Eigen::Index i = 0; i < nodes; ++i)
      for (Eigen::Index j = 1; j < nodes; ++j)
        if (i != j) d_logits(i, j) = d_q(i, j) * q(i, j) * (Scalar(1) - q(i, j));
  }
  grad.unary += d_logits;
  return grad;
}

}  // namespace eud

#endif  // EUD_MFVI_HPP

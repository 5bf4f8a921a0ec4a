// Graph decoders over arc posteriors: thresholding, maximum spanning
// arborescence (Chu-Liu-Edmonds), projective trees (Eisner), augmentation and
// label assignment.
#ifndef EUD_DECODE_HPP
#define EUD_DECODE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "eud/potentials.hpp"

namespace eud {

inline constexpr double kTreeEpsilon = 1e-12;

/// Log-odds of the clamped posteriors; -inf on inadmissible cells.
template <typename Derived>
Matrix<typename Derived::Scalar> tree_weights(const Eigen::MatrixBase<Derived>& probs,
                                              typename Derived::Scalar eps = kTreeEpsilon) {
  using Scalar = typename Derived::Scalar;
  using std::log;
  const Eigen::Index nodes = probs.rows();
  Matrix<Scalar> w = Matrix<Scalar>::Constant(nodes, nodes, kNegInf<Scalar>);
  for (Eigen::Index i = 0; i < nodes; ++i)
    for (Eigen::Index j = 1; j < nodes; ++j)
      if (i != j) {
        Scalar p = std::clamp(probs(i, j), eps, Scalar(1) - eps);
        w(i, j) = log(p / (Scalar(1) - p));
      }
  return w;
}

/// Sum of arc weights in ArcSet order.
template <typename Derived>
typename Derived::Scalar arc_set_weight(const Eigen::MatrixBase<Derived>& weights, const ArcSet& arcs) {
  typename Derived::Scalar total(0);
  for (const Arc& a : arcs) total += weights(a.head, a.dep);
  return total;
}

inline ArcSet arcs_of_heads(const std::vector<int>& heads) {
  ArcSet arcs;
  for (std::size_t d = 1; d < heads.size(); ++d) arcs.insert({heads[d], static_cast<int>(d)});
  return arcs;
}

/// True when every node 1..nodes-1 is reachable from node 0.
inline bool root_reachable(Eigen::Index nodes, const ArcSet& arcs) {
  std::vector<std::vector<int>> children(static_cast<std::size_t>(nodes));
  for (const Arc& a : arcs)
    if (a.head < nodes && a.dep < nodes) children[a.head].push_back(a.dep);
  std::vector<bool> seen(static_cast<std::size_t>(nodes), false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : children[u])
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

/// Maximum spanning arborescence rooted at node 0 by recursive cycle
/// contraction. Returns heads[v] for every node (heads[0] = -1).
template <typename Scalar>
std::vector<int> chu_liu_edmonds(const Matrix<Scalar>& w) {
  const int n = static_cast<int>(w.rows());
  std::vector<int> heads(n, -1);
  for (int v = 1; v < n; ++v) {
    Scalar best = kNegInf<Scalar>;
    for (int u = 0; u < n; ++u)
      if (u != v && (heads[v] < 0 || w(u, v) > best)) {
        best = w(u, v);
        heads[v] = u;
      }
  }

  std::vector<int> cycle;
  std::vector<int> color(n, 0);  // 0 unvisited, 1 on current walk, 2 done
  color[0] = 2;
  for (int start = 1; start < n && cycle.empty(); ++start) {
    int v = start;
    while (color[v] == 0) {
      color[v] = 1;
      v = heads[v];
    }
    if (color[v] == 1) {
      int u = v;
      do {
        cycle.push_back(u);
        u = heads[u];
      } while (u != v);
    }
    for (v = start; color[v] == 1; v = heads[v]) color[v] = 2;
  }
  if (cycle.empty()) return heads;

  std::vector<bool> in_cycle(n, false);
  for (int v : cycle) in_cycle[v] = true;
  std::vector<int> to_new(n, -1), to_old;
  for (int v = 0; v < n; ++v)
    if (!in_cycle[v]) {
      to_new[v] = static_cast<int>(to_old.size());
      to_old.push_back(v);
    }
  const int c = static_cast<int>(to_old.size());
  Matrix<Scalar> w2 = Matrix<Scalar>::Constant(c + 1, c + 1, kNegInf<Scalar>);
  std::vector<int> enter(n, -1), leave(n, -1);
  for (int u : to_old)
    for (int v : to_old)
      if (u != v) w2(to_new[u], to_new[v]) = w(u, v);
  for (int u : to_old) {
    for (int v : cycle) {
      Scalar score = w(u, v) - w(heads[v], v);
      if (enter[u] < 0 || score > w2(to_new[u], c)) {
        w2(to_new[u], c) = score;
        enter[u] = v;
      }
    }
  }
  for (int v : to_old) {
    if (v == 0) continue;
    for (int u : cycle)
      if (leave[v] < 0 || w(u, v) > w2(c, to_new[v])) {
        w2(c, to_new[v]) = w(u, v);
        leave[v] = u;
      }
  }

  std::vector<int> sub = chu_liu_edmonds(w2);
  for (int v : to_old) {
    if (v == 0) continue;
    int h = sub[to_new[v]];
    heads[v] = h == c ? leave[v] : to_old[h];
  }
  int entering = to_old[sub[c]];
  heads[enter[entering]] = entering;
  return heads;
}

/// Maximum spanning arborescence with exactly one dependent of the root.
template <typename Derived>
ArcSet mst_decode(const Eigen::MatrixBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index nodes = probs.rows();
  if (nodes <= 1) return {};
  const Matrix<Scalar> w = tree_weights(probs);
  ArcSet best;
  Scalar best_weight = kNegInf<Scalar>;
  for (Eigen::Index child = 1; child < nodes; ++child) {
    Matrix<Scalar> restricted = w;
    restricted.row(0).setConstant(kNegInf<Scalar>);
    restricted(0, child) = w(0, child);
    ArcSet arcs = arcs_of_heads(chu_liu_edmonds(restricted));
    Scalar weight = arc_set_weight(w, arcs);
    if (best.empty() || weight > best_weight) {
      best = std::move(arcs);
      best_weight = weight;
    }
  }
  return best;
}

/// Maximum projective tree with a single root attachment, O(n^3) span DP
/// over words 1..n followed by the choice of the root's dependent.
template <typename Derived>
ArcSet eisner_decode(const Eigen::MatrixBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(probs.rows()) - 1;
  if (n <= 0) return {};
  const Matrix<Scalar> w = tree_weights(probs);

  // Tables indexed [s][t] over word positions 1..n; dir 0 = head at t (left
  // arcs), dir 1 = head at s (right arcs).
  const int size = n + 1;
  auto table = [&] { return std::vector<Scalar>(static_cast<std::size_t>(size * size * 2), Scalar(0)); };
  auto at = [size](int s, int t, int dir) { return static_cast<std::size_t>((s * size + t) * 2 + dir); };
  std::vector<Scalar> complete = table(), incomplete = table();
  std::vector<int> complete_split(complete.size(), -1), incomplete_split(incomplete.size(), -1);

  for (int len = 1; len < n; ++len) {
    for (int s = 1; s + len <= n; ++s) {
      const int t = s + len;
      Scalar best = kNegInf<Scalar>;
      int arg = -1;
      for (int r = s; r < t; ++r) {
        Scalar v = complete[at(s, r, 1)] + complete[at(r + 1, t, 0)];
        if (arg < 0 || v > best) {
          best = v;
          arg = r;
        }
      }
      incomplete[at(s, t, 0)] = best + w(t, s);
      incomplete[at(s, t, 1)] = best + w(s, t);
      incomplete_split[at(s, t, 0)] = incomplete_split[at(s, t, 1)] = arg;

      best = kNegInf<Scalar>;
      arg = -1;
      for (int r = s; r < t; ++r) {
        Scalar v = complete[at(s, r, 0)] + incomplete[at(r, t, 0)];
        if (arg < 0 || v > best) {
          best = v;
          arg = r;
        }
      }
      complete[at(s, t, 0)] = best;
      complete_split[at(s, t, 0)] = arg;

      best = kNegInf<Scalar>;
      arg = -1;
      for (int r = s + 1; r <= t; ++r) {
        Scalar v = incomplete[at(s, r, 1)] + complete[at(r, t, 1)];
        if (arg < 0 || v > best) {
          best = v;
          arg = r;
        }
      }
      complete[at(s, t, 1)] = best;
      complete_split[at(s, t, 1)] = arg;
    }
  }

  int root_child = -1;
  Scalar best = kNegInf<Scalar>;
  for (int r = 1; r <= n; ++r) {
    Scalar v = w(0, r) + complete[at(1, r, 0)] + complete[at(r, n, 1)];
    if (root_child < 0 || v > best) {
      best = v;
      root_child = r;
    }
  }

  std::vector<int> heads(static_cast<std::size_t>(size), -1);
  heads[root_child] = 0;
  struct Span {
    int s, t, dir;
    bool complete;
  };
  std::vector<Span> stack{{1, root_child, 0, true}, {root_child, n, 1, true}};
  while (!stack.empty()) {
    Span sp = stack.back();
    stack.pop_back();
    if (sp.s == sp.t) continue;
    if (sp.complete) {
      int r = complete_split[at(sp.s, sp.t, sp.dir)];
      if (sp.dir == 0) {
        stack.push_back({sp.s, r, 0, true});
        stack.push_back({r, sp.t, 0, false});
      } else {
        stack.push_back({sp.s, r, 1, false});
        stack.push_back({r, sp.t, 1, true});
      }
    } else {
      int r = incomplete_split[at(sp.s, sp.t, sp.dir)];
      if (sp.dir == 0)
        heads[sp.s] = sp.t;
      else
        heads[sp.t] = sp.s;
      stack.push_back({sp.s, r, 1, true});
      stack.push_back({r + 1, sp.t, 0, true});
    }
  }
  return arcs_of_heads(heads);
}

template <typename Derived>
ArcSet argmax_decode(const Eigen::MatrixBase<Derived>& probs, typename Derived::Scalar threshold) {
  ArcSet arcs;
  const Eigen::Index nodes = probs.rows();
  for (Eigen::Index i = 0; i < nodes; ++i)
    for (Eigen::Index j = 1; j < nodes; ++j)
      if (i != j && probs(i, j) > threshold) arcs.insert({static_cast<int>(i), static_cast<int>(j)});
  return arcs;
}

/// Backbone plus every admissible cell whose posterior exceeds the threshold.
template <typename Derived>
ArcSet augment(const ArcSet& backbone, const Eigen::MatrixBase<Derived>& probs,
               typename Derived::Scalar threshold) {
  ArcSet arcs = argmax_decode(probs, threshold);
  arcs.insert(backbone.begin(), backbone.end());
  return arcs;
}

/// Highest-scoring label per arc; ties go to the lowest label index.
template <typename Scalar>
LabeledArcSet assign_labels(const ArcSet& arcs, const MatrixStack<Scalar>& label_scores,
                            const std::vector<std::string>& label_set) {
  LabeledArcSet out;
  for (const Arc& a : arcs) {
    std::size_t best = 0;
    for (std::size_t l = 1; l < label_scores.size(); ++l)
      if (label_scores[l](a.head, a.dep) > label_scores[best](a.head, a.dep)) best = l;
    out.insert({a.head, a.dep, label_set.at(best)});
  }
  return out;
}

}  // namespace eud

#endif  // EUD_DECODE_HPP

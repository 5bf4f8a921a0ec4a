// Random instance generators shared by the unit and acceptance tests.
#ifndef EUD_TESTS_GENERATORS_HPP
#define EUD_TESTS_GENERATORS_HPP

#include <random>
#include <set>
#include <string>
#include <vector>

#include "eud/conllu.hpp"
#include "eud/model.hpp"

namespace eud::testing {

inline const std::vector<std::string>& label_pool() {
  static const std::vector<std::string> pool = {"nsubj", "obj", "obl", "advcl", "conj", "nmod:poss", "acl:relcl", "punct"};
  return pool;
}

inline std::string pick_label(std::mt19937_64& rng) {
  return label_pool()[std::uniform_int_distribution<std::size_t>(0, label_pool().size() - 1)(rng)];
}

inline int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Regular-node graph with parallel arcs (no reserved symbols in labels).
inline DepGraph random_multigraph(std::mt19937_64& rng) {
  DepGraph g;
  g.n_words = uniform(rng, 1, 8);
  const int arcs = uniform(rng, 0, 3 * g.n_words);
  for (int a = 0; a < arcs; ++a) {
    int dep = uniform(rng, 1, g.n_words);
    int head = uniform(rng, 0, g.n_words);
    if (head == dep) continue;
    const int parallel = uniform(rng, 1, 3);
    for (int p = 0; p < parallel; ++p) g.add({NodeId{head, 0}, NodeId{dep, 0}, pick_label(rng)});
  }
  return g;
}

/// Graph in collapsed form: regular arcs plus "in>out" arcs.
inline DepGraph random_collapsed_graph(std::mt19937_64& rng) {
  DepGraph g;
  g.n_words = uniform(rng, 1, 8);
  const int arcs = uniform(rng, 0, 3 * g.n_words);
  for (int a = 0; a < arcs; ++a) {
    int dep = uniform(rng, 1, g.n_words);
    int head = uniform(rng, 0, g.n_words);
    if (head == dep) continue;
    std::string label = pick_label(rng);
    if (uniform(rng, 0, 2) == 0) label += kCollapseSeparator + pick_label(rng);
    g.add({NodeId{head, 0}, NodeId{dep, 0}, label});
  }
  return g;
}

/// Graph with empty nodes that each have one parent, distinct (parent,
/// label) pairs, and ids numbered per parent word in order of appearance.
inline DepGraph random_empty_node_graph(std::mt19937_64& rng) {
  DepGraph g;
  g.n_words = uniform(rng, 1, 8);
  std::vector<int> next_sub(static_cast<std::size_t>(g.n_words) + 1, 0);
  std::set<std::pair<int, std::string>> used;
  const int steps = uniform(rng, 1, 3 * g.n_words);
  for (int s = 0; s < steps; ++s) {
    const int head = uniform(rng, 0, g.n_words);
    if (uniform(rng, 0, 2) == 0) {
      std::string in_label = pick_label(rng);
      if (!used.insert({head, in_label}).second) continue;
      NodeId empty{head, ++next_sub[head]};
      g.empty_nodes.push_back(empty);
      g.add({NodeId{head, 0}, empty, in_label});
      const int children = uniform(rng, 1, 3);
      for (int c = 0; c < children; ++c) g.add({empty, NodeId{uniform(rng, 1, g.n_words), 0}, pick_label(rng)});
    } else {
      const int dep = uniform(rng, 1, g.n_words);
      if (dep != head) g.add({NodeId{head, 0}, NodeId{dep, 0}, pick_label(rng)});
    }
  }
  return g;
}

/// Random posterior matrix over n words (admissible cells only).
inline Eigen::MatrixXd random_probs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unit(0.001, 0.999);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      if (i != j) p(i, j) = unit(rng);
  return p;
}

/// Small model with random weights in [-1, 1].
inline ModelParams random_model(std::uint64_t seed, ModelDims dims, int labels,
                                StructureSet structures = StructureSet{}, double scale = 1.0) {
  Vocabulary vocab({"a", "b", "c", "d", "e", "f"});
  std::vector<std::string> label_set;
  for (int l = 0; l < labels; ++l) label_set.push_back("l" + std::to_string(l));
  ModelParams p = ModelParams::zeros(dims, structures, vocab, label_set);
  initialize_uniform(p, seed, scale);
  return p;
}

inline std::vector<std::string> random_words(std::mt19937_64& rng, int n) {
  static const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "zzz"};
  std::vector<std::string> w;
  for (int i = 0; i < n; ++i) w.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
  return w;
}

}  // namespace eud::testing

#endif  // EUD_TESTS_GENERATORS_HPP

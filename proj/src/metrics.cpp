#include "eud/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace eud {

namespace {

bool has_empty_nodes(const DepGraph& g) {
  if (!g.empty_nodes.empty()) return true;
  return std::any_of(g.arcs.begin(), g.arcs.end(),
                     [](const GraphArc& a) { return a.head.is_empty() || a.dep.is_empty(); });
}

template <typename Normalize>
ScoreReport score(const std::vector<DepGraph>& gold, const std::vector<DepGraph>& pred, Normalize normalize) {
  if (gold.size() != pred.size())
    throw AlignmentError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                         std::to_string(pred.size()));
  ScoreReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].n_words != pred[s].n_words)
      throw AlignmentError("sentence " + std::to_string(s + 1) + ": gold has " + std::to_string(gold[s].n_words) +
                           " words, prediction has " + std::to_string(pred[s].n_words));
    const DepGraph g = normalize(gold[s]);
    const DepGraph p = normalize(pred[s]);
    const std::set<GraphArc> gold_arcs(g.arcs.begin(), g.arcs.end());
    r.gold += static_cast<long>(gold_arcs.size());
    r.predicted += static_cast<long>(std::set<GraphArc>(p.arcs.begin(), p.arcs.end()).size());
    for (const auto& a : std::set<GraphArc>(p.arcs.begin(), p.arcs.end())) r.correct += gold_arcs.count(a);
  }
  r.precision = r.predicted ? static_cast<double>(r.correct) / static_cast<double>(r.predicted) : 0.0;
  r.recall = r.gold ? static_cast<double>(r.correct) / static_cast<double>(r.gold) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.connectivity_rate = connectivity_rate(pred);
  return r;
}

}  // namespace

DepGraph normalize_for_elas(const DepGraph& g) {
  return split_multi_arcs(has_empty_nodes(g) ? collapse_empty_nodes(g) : g);
}

DepGraph normalize_for_lf1(const DepGraph& g) { return merge_multi_arcs(normalize_for_elas(g)); }

ScoreReport elas(const std::vector<DepGraph>& gold, const std::vector<DepGraph>& pred) {
  return score(gold, pred, normalize_for_elas);
}

ScoreReport lf1(const std::vector<DepGraph>& gold, const std::vector<DepGraph>& pred) {
  return score(gold, pred, normalize_for_lf1);
}

bool is_connected(const DepGraph& g) {
  std::map<NodeId, std::vector<NodeId>> children;
  for (const auto& a : g.arcs) children[a.head].push_back(a.dep);
  std::set<NodeId> seen{NodeId{}};
  std::vector<NodeId> stack{NodeId{}};
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (const auto& v : children[u])
      if (seen.insert(v).second) stack.push_back(v);
  }
  for (int w = 1; w <= g.n_words; ++w)
    if (!seen.count(NodeId{w, 0})) return false;
  for (const auto& e : g.empty_nodes)
    if (!seen.count(e)) return false;
  return true;
}

double connectivity_rate(const std::vector<DepGraph>& pred) {
  if (pred.empty()) return 1.0;
  const auto connected = std::count_if(pred.begin(), pred.end(), is_connected);
  return static_cast<double>(connected) / static_cast<double>(pred.size());
}

std::string format_report(const std::string& name, const ScoreReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s\n  precision  %.4f\n  recall     %.4f\n  f1         %.4f\n  correct %ld  predicted %ld  gold %ld\n",
                name.c_str(), r.precision, r.recall, r.f1, r.correct, r.predicted, r.gold);
  return buf;
}

std::string format_report_machine(const std::string& prefix, const ScoreReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s_p=%.4f %s_r=%.4f %s_f1=%.4f %s_correct=%ld %s_predicted=%ld %s_gold=%ld",
                prefix.c_str(), r.precision, prefix.c_str(), r.recall, prefix.c_str(), r.f1, prefix.c_str(),
                r.correct, prefix.c_str(), r.predicted, prefix.c_str(), r.gold);
  return buf;
}

}  // namespace eud

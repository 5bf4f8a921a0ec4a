#ifndef EUD_METRICS_HPP
#define EUD_METRICS_HPP

#include <string>
#include <vector>

#include "eud/conllu.hpp"

namespace eud {

struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long correct = 0;
  long predicted = 0;
  long gold = 0;
  double connectivity_rate = 0.0;  // over the predicted graphs
};

/// Micro-averaged labeled P/R/F1 on collapsed graphs with multi-arcs split.
ScoreReport elas(const std::vector<DepGraph>& gold, const std::vector<DepGraph>& pred);

/// Same counting on the merged, collapsed representation the parser emits.
ScoreReport lf1(const std::vector<DepGraph>& gold, const std::vector<DepGraph>& pred);

/// True when every word and empty node is reachable from the root.
bool is_connected(const DepGraph& g);
double connectivity_rate(const std::vector<DepGraph>& pred);

/// Collapses (when empty nodes are present) and splits multi-arcs.
DepGraph normalize_for_elas(const DepGraph& g);
/// Collapses (when empty nodes are present) and merges multi-arcs.
DepGraph normalize_for_lf1(const DepGraph& g);

/// Human-readable block with 4-decimal ratios and counts.
std::string format_report(const std::string& name, const ScoreReport& report);
/// One line of key=value pairs, keys prefixed with `prefix`.
std::string format_report_machine(const std::string& prefix, const ScoreReport& report);

}  // namespace eud

#endif  // EUD_METRICS_HPP

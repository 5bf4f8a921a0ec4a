#include <algorithm>
#include <map>

#include "eud/conllu.hpp"

namespace eud {

namespace {

void reject_symbol(const DepGraph& g, char symbol) {
  for (const auto& arc : g.arcs)
    if (arc.label.find(symbol) != std::string::npos)
      throw ReservedSymbolError("label '" + arc.label + "' on arc " + arc.head.str() + "->" + arc.dep.str() +
                                " contains reserved '" + std::string(1, symbol) + "'");
}

}  // namespace

DepGraph merge_multi_arcs(const DepGraph& g) {
  reject_symbol(g, kMergeSeparator);
  DepGraph out{g.n_words, g.empty_nodes, {}};
  std::map<std::pair<NodeId, NodeId>, std::size_t> slot;
  for (const auto& arc : g.arcs) {
    auto [it, fresh] = slot.try_emplace({arc.head, arc.dep}, out.arcs.size());
    if (fresh) {
      out.arcs.push_back(arc);
    } else {
      auto& label = out.arcs[it->second].label;
      label += kMergeSeparator;
      label += arc.label;
    }
  }
  return out;
}

DepGraph split_multi_arcs(const DepGraph& g) {
  DepGraph out{g.n_words, g.empty_nodes, {}};
  for (const auto& arc : g.arcs) {
    std::size_t start = 0;
    while (true) {
      auto pos = arc.label.find(kMergeSeparator, start);
      auto part = arc.label.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      if (part.empty()) throw FormatError("empty '+' segment in label '" + arc.label + "'");
      out.add({arc.head, arc.dep, std::move(part)});
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }
  return out;
}

DepGraph collapse_empty_nodes(const DepGraph& g) {
  reject_symbol(g, kCollapseSeparator);
  std::vector<NodeId> empties = g.empty_nodes;
  for (const auto& arc : g.arcs)
    for (const NodeId& id : {arc.head, arc.dep})
      if (id.is_empty() && std::find(empties.begin(), empties.end(), id) == empties.end()) empties.push_back(id);
  if (empties.empty()) return g;

  std::map<NodeId, std::vector<const GraphArc*>> outgoing;
  std::map<NodeId, int> incoming;
  for (const auto& arc : g.arcs) {
    if (arc.head.is_empty() && arc.dep.is_empty())
      throw StructureError("arc between empty nodes " + arc.head.str() + " and " + arc.dep.str());
    if (arc.head.is_empty()) outgoing[arc.head].push_back(&arc);
    if (arc.dep.is_empty()) ++incoming[arc.dep];
  }
  for (const auto& e : empties)
    if (!incoming.count(e) || !outgoing.count(e))
      throw StructureError("empty node " + e.str() + " lacks a parent or a child");

  DepGraph out{g.n_words, {}, {}};
  for (const auto& arc : g.arcs) {
    if (arc.head.is_empty()) continue;
    if (!arc.dep.is_empty()) {
      out.add(arc);
      continue;
    }
    for (const GraphArc* child : outgoing[arc.dep])
      out.add({arc.head, child->dep, arc.label + kCollapseSeparator + child->label});
  }
  return out;
}

DepGraph expand_empty_nodes(const DepGraph& g) {
  DepGraph out{g.n_words, g.empty_nodes, {}};
  std::map<int, int> next_sub;
  for (const auto& e : g.empty_nodes) next_sub[e.word_index] = std::max(next_sub[e.word_index], e.empty_sub_index);

  std::map<std::pair<NodeId, std::string>, NodeId> groups;
  for (const auto& arc : g.arcs) {
    auto sep = arc.label.find(kCollapseSeparator);
    if (sep == std::string::npos) {
      out.add(arc);
      continue;
    }
    if (arc.label.find(kCollapseSeparator, sep + 1) != std::string::npos)
      throw FormatError("unsupported empty-node depth in label '" + arc.label + "'");
    std::string in_label = arc.label.substr(0, sep);
    std::string out_label = arc.label.substr(sep + 1);
    if (in_label.empty() || out_label.empty())
      throw FormatError("empty '>' segment in label '" + arc.label + "'");

    auto [it, fresh] = groups.try_emplace({arc.head, in_label}, NodeId{});
    if (fresh) {
      it->second = NodeId{arc.head.word_index, ++next_sub[arc.head.word_index]};
      out.empty_nodes.push_back(it->second);
      out.add({arc.head, it->second, in_label});
    }
    out.add({it->second, arc.dep, out_label});
  }
  std::sort(out.empty_nodes.begin(), out.empty_nodes.end());
  return out;
}

}  // namespace eud

// CoNLL-U reading/writing with enhanced dependencies, plus the reversible
// graph transforms used to turn EUD graphs into bi-lexical graphs and back.
#ifndef EUD_CONLLU_HPP
#define EUD_CONLLU_HPP

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eud/error.hpp"

namespace eud {

/// Node identifier: "i" for regular words, "i.k" for empty nodes, "0" for root.
struct NodeId {
  int word_index = 0;
  int empty_sub_index = 0;

  constexpr bool is_root() const { return word_index == 0 && empty_sub_index == 0; }
  constexpr bool is_empty() const { return empty_sub_index > 0; }

  auto operator<=>(const NodeId&) const = default;

  std::string str() const;
  static NodeId parse(std::string_view text);  // throws FormatError
};

struct EnhancedDep {
  NodeId head;
  std::string label;
  bool operator==(const EnhancedDep&) const = default;
};

struct Token {
  NodeId id;
  std::string form, lemma, upos, xpos, feats;
  std::optional<int> basic_head;
  std::optional<std::string> basic_deprel;
  std::vector<EnhancedDep> enhanced_deps;
  std::string misc;

  bool operator==(const Token&) const = default;
};

/// A multiword-token range line ("1-2"), kept verbatim. `before_token` is the
/// index in Sentence::tokens of the row that follows it.
struct RangeLine {
  std::size_t before_token = 0;
  std::string raw;
  bool operator==(const RangeLine&) const = default;
};

struct Comment {
  std::string key;
  std::optional<std::string> value;
  bool operator==(const Comment&) const = default;
};

struct Sentence {
  std::vector<Comment> metadata;
  std::vector<Token> tokens;
  std::vector<RangeLine> ranges;

  std::vector<std::string> words() const;  // forms of regular tokens
  std::size_t word_count() const;
  const std::optional<std::string>* find_metadata(std::string_view key) const;
  void set_metadata(std::string key, std::optional<std::string> value);

  bool operator==(const Sentence&) const = default;
};

std::vector<Sentence> parse_conllu(std::string_view text);
std::string write_conllu(const std::vector<Sentence>& sentences);

/// Sort each token's DEPS the way write_conllu emits them.
void canonicalize_deps(Sentence& sentence);

struct GraphArc {
  NodeId head;
  NodeId dep;
  std::string label;

  auto operator<=>(const GraphArc&) const = default;
};

/// Labeled directed graph over root, words and empty nodes. Arcs keep their
/// insertion order (merge order depends on it) but compare as a set.
struct DepGraph {
  int n_words = 0;
  std::vector<NodeId> empty_nodes;
  std::vector<GraphArc> arcs;

  bool contains(const GraphArc& arc) const;
  /// Appends unless already present. Returns false on duplicates.
  bool add(GraphArc arc);
  std::vector<GraphArc> sorted_arcs() const;

  friend bool operator==(const DepGraph& a, const DepGraph& b);
};

DepGraph graph_of(const Sentence& sentence);

/// Replaces the enhanced layer of `sentence` with `graph`: DEPS columns are
/// rewritten, empty-node rows missing from the graph are dropped and new
/// empty nodes are inserted with `_` columns.
Sentence with_graph(const Sentence& sentence, const DepGraph& graph);

inline constexpr char kMergeSeparator = '+';
inline constexpr char kCollapseSeparator = '>';

DepGraph merge_multi_arcs(const DepGraph& g);
DepGraph split_multi_arcs(const DepGraph& g);
DepGraph collapse_empty_nodes(const DepGraph& g);
DepGraph expand_empty_nodes(const DepGraph& g);

}  // namespace eud

#endif  // EUD_CONLLU_HPP

#include "eud/conllu.hpp"

#include <algorithm>
#include <charconv>
#include <map>

namespace eud {

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && out >= 0;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<std::string> underscore_to_absent(std::string_view text) {
  if (text == "_") return std::nullopt;
  return std::string(text);
}

Comment parse_comment(std::string_view body) {
  if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
  auto eq = body.find(" = ");
  if (eq == std::string_view::npos) return {std::string(body), std::nullopt};
  return {std::string(body.substr(0, eq)), std::string(body.substr(eq + 3))};
}

Token parse_token(const std::vector<std::string_view>& cols, std::size_t line_no) {
  Token tok;
  try {
    tok.id = NodeId::parse(cols[0]);
  } catch (const FormatError& e) {
    throw ParseError(line_no, e.what());
  }
  tok.form = cols[1];
  tok.lemma = cols[2];
  tok.upos = cols[3];
  tok.xpos = cols[4];
  tok.feats = cols[5];
  if (cols[6] != "_") {
    int head = 0;
    if (!parse_int(cols[6], head)) throw ParseError(line_no, "non-numeric HEAD '" + std::string(cols[6]) + "'");
    tok.basic_head = head;
  }
  tok.basic_deprel = underscore_to_absent(cols[7]);
  if (cols[8] != "_") {
    for (auto item : split(cols[8], '|')) {
      auto colon = item.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "DEPS item without ':' '" + std::string(item) + "'");
      EnhancedDep dep;
      try {
        dep.head = NodeId::parse(item.substr(0, colon));
      } catch (const FormatError& e) {
        throw ParseError(line_no, e.what());
      }
      dep.label = item.substr(colon + 1);
      if (std::find(tok.enhanced_deps.begin(), tok.enhanced_deps.end(), dep) != tok.enhanced_deps.end())
        throw ParseError(line_no, "duplicate DEPS item '" + std::string(item) + "'");
      tok.enhanced_deps.push_back(std::move(dep));
    }
  }
  tok.misc = cols[9];
  return tok;
}

void check_order(const Sentence& s, std::size_t line_no) {
  const Token& tok = s.tokens.back();
  int last_word = 0;
  int last_sub = 0;
  for (std::size_t i = 0; i + 1 < s.tokens.size(); ++i) {
    const auto& id = s.tokens[i].id;
    if (id.is_empty()) {
      last_sub = id.empty_sub_index;
    } else {
      last_word = id.word_index;
      last_sub = 0;
    }
  }
  if (!tok.id.is_empty()) {
    if (tok.id.word_index != last_word + 1)
      throw ParseError(line_no, "word id " + tok.id.str() + " out of sequence");
  } else if (tok.id.word_index != last_word || tok.id.empty_sub_index != last_sub + 1) {
    throw ParseError(line_no, "empty node id " + tok.id.str() + " out of sequence");
  }
}

void write_token(std::string& out, const Token& tok) {
  out += tok.id.str();
  for (const std::string* col : {&tok.form, &tok.lemma, &tok.upos, &tok.xpos, &tok.feats}) {
    out += '\t';
    out += *col;
  }
  out += '\t';
  out += tok.basic_head ? std::to_string(*tok.basic_head) : "_";
  out += '\t';
  out += tok.basic_deprel.value_or("_");
  out += '\t';
  if (tok.enhanced_deps.empty()) {
    out += '_';
  } else {
    auto deps = tok.enhanced_deps;
    std::stable_sort(deps.begin(), deps.end(),
                     [](const EnhancedDep& a, const EnhancedDep& b) { return a.head < b.head; });
    for (std::size_t i = 0; i < deps.size(); ++i) {
      if (i) out += '|';
      out += deps[i].head.str();
      out += ':';
      out += deps[i].label;
    }
  }
  out += '\t';
  out += tok.misc;
  out += '\n';
}

}  // namespace

std::string NodeId::str() const {
  if (empty_sub_index == 0) return std::to_string(word_index);
  return std::to_string(word_index) + "." + std::to_string(empty_sub_index);
}

NodeId NodeId::parse(std::string_view text) {
  NodeId id;
  auto dot = text.find('.');
  bool ok = dot == std::string_view::npos
                ? parse_int(text, id.word_index)
                : parse_int(text.substr(0, dot), id.word_index) &&
                      parse_int(text.substr(dot + 1), id.empty_sub_index) && id.empty_sub_index > 0;
  if (!ok) throw FormatError("invalid node id '" + std::string(text) + "'");
  return id;
}

std::vector<std::string> Sentence::words() const {
  std::vector<std::string> out;
  for (const auto& tok : tokens)
    if (!tok.id.is_empty()) out.push_back(tok.form);
  return out;
}

std::size_t Sentence::word_count() const {
  return std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return !t.id.is_empty(); });
}

const std::optional<std::string>* Sentence::find_metadata(std::string_view key) const {
  for (const auto& c : metadata)
    if (c.key == key) return &c.value;
  return nullptr;
}

void Sentence::set_metadata(std::string key, std::optional<std::string> value) {
  for (auto& c : metadata) {
    if (c.key == key) {
      c.value = std::move(value);
      return;
    }
  }
  metadata.push_back({std::move(key), std::move(value)});
}

std::vector<Sentence> parse_conllu(std::string_view text) {
  std::vector<Sentence> out;
  Sentence current;
  bool open = false;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (open) out.push_back(std::move(current));
    current = Sentence{};
    open = false;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      flush();
      continue;
    }
    open = true;
    if (line.front() == '#') {
      current.metadata.push_back(parse_comment(line.substr(1)));
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 10)
      throw ParseError(line_no, "expected 10 columns, found " + std::to_string(cols.size()));
    if (cols[0].find('-') != std::string_view::npos) {
      auto dash = cols[0].find('-');
      int a = 0, b = 0;
      if (!parse_int(cols[0].substr(0, dash), a) || !parse_int(cols[0].substr(dash + 1), b))
        throw ParseError(line_no, "invalid range id '" + std::string(cols[0]) + "'");
      current.ranges.push_back({current.tokens.size(), std::string(line)});
      continue;
    }
    current.tokens.push_back(parse_token(cols, line_no));
    check_order(current, line_no);
  }
  flush();
  return out;
}

std::string write_conllu(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    for (const auto& c : s.metadata) {
      out += "# ";
      out += c.key;
      if (c.value) {
        out += " = ";
        out += *c.value;
      }
      out += '\n';
    }
    std::size_t r = 0;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      for (; r < s.ranges.size() && s.ranges[r].before_token == i; ++r) {
        out += s.ranges[r].raw;
        out += '\n';
      }
      write_token(out, s.tokens[i]);
    }
    for (; r < s.ranges.size(); ++r) {
      out += s.ranges[r].raw;
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

void canonicalize_deps(Sentence& sentence) {
  for (auto& tok : sentence.tokens)
    std::stable_sort(tok.enhanced_deps.begin(), tok.enhanced_deps.end(),
                     [](const EnhancedDep& a, const EnhancedDep& b) { return a.head < b.head; });
}

bool DepGraph::contains(const GraphArc& arc) const {
  return std::find(arcs.begin(), arcs.end(), arc) != arcs.end();
}

bool DepGraph::add(GraphArc arc) {
  if (contains(arc)) return false;
  arcs.push_back(std::move(arc));
  return true;
}

std::vector<GraphArc> DepGraph::sorted_arcs() const {
  auto out = arcs;
  std::sort(out.begin(), out.end());
  return out;
}

bool operator==(const DepGraph& a, const DepGraph& b) {
  if (a.n_words != b.n_words) return false;
  auto ea = a.empty_nodes, eb = b.empty_nodes;
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb && a.sorted_arcs() == b.sorted_arcs();
}

DepGraph graph_of(const Sentence& sentence) {
  DepGraph g;
  for (const auto& tok : sentence.tokens) {
    if (tok.id.is_empty())
      g.empty_nodes.push_back(tok.id);
    else
      ++g.n_words;
    for (const auto& dep : tok.enhanced_deps) g.add({dep.head, tok.id, dep.label});
  }
  return g;
}

Sentence with_graph(const Sentence& sentence, const DepGraph& graph) {
  if (static_cast<int>(sentence.word_count()) != graph.n_words)
    throw AlignmentError("graph has " + std::to_string(graph.n_words) + " words, sentence has " +
                         std::to_string(sentence.word_count()));

  std::map<NodeId, Token> rows;
  for (const auto& tok : sentence.tokens)
    if (!tok.id.is_empty()) rows.emplace(tok.id, tok);
  for (const auto& id : graph.empty_nodes) {
    auto it = std::find_if(sentence.tokens.begin(), sentence.tokens.end(),
                           [&](const Token& t) { return t.id == id; });
    if (it != sentence.tokens.end()) {
      rows.emplace(id, *it);
    } else {
      Token tok;
      tok.id = id;
      tok.form = tok.lemma = tok.upos = tok.xpos = tok.feats = tok.misc = "_";
      rows.emplace(id, std::move(tok));
    }
  }
  for (auto& [id, tok] : rows) tok.enhanced_deps.clear();
  for (const auto& arc : graph.arcs) {
    auto it = rows.find(arc.dep);
    if (it == rows.end()) throw StructureError("arc into unknown node " + arc.dep.str());
    it->second.enhanced_deps.push_back({arc.head, arc.label});
  }

  Sentence out;
  out.metadata = sentence.metadata;
  // Range lines are anchored to the regular word that follows them.
  std::vector<std::pair<NodeId, std::string>> anchored;
  for (const auto& r : sentence.ranges) {
    NodeId anchor{graph.n_words + 1, 0};
    if (r.before_token < sentence.tokens.size()) anchor = sentence.tokens[r.before_token].id;
    anchored.emplace_back(anchor, r.raw);
  }
  for (auto& [id, tok] : rows) {
    for (const auto& [anchor, raw] : anchored)
      if (anchor == id) out.ranges.push_back({out.tokens.size(), raw});
    out.tokens.push_back(std::move(tok));
  }
  for (const auto& [anchor, raw] : anchored)
    if (anchor.word_index > graph.n_words) out.ranges.push_back({out.tokens.size(), raw});
  return out;
}

}  // namespace eud

#include "eud/inference.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "eud/error.hpp"

namespace eud {

std::string_view mode_name(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::argmax: return "argmax";
    case DecodeMode::mst: return "mst";
    case DecodeMode::eisner: return "eisner";
  }
  return "?";
}

std::optional<DecodeMode> parse_mode(std::string_view name) {
  for (DecodeMode m : {DecodeMode::argmax, DecodeMode::mst, DecodeMode::eisner})
    if (mode_name(m) == name) return m;
  return std::nullopt;
}

ArcSet decode_arcs(const ArcProbabilities& probs, const ParseOptions& options, ArcSet* backbone) {
  ArcSet tree;
  switch (options.mode) {
    case DecodeMode::argmax:
      if (backbone) backbone->clear();
      return argmax_decode(probs.probs, options.threshold);
    case DecodeMode::mst: tree = mst_decode(probs.probs); break;
    case DecodeMode::eisner: tree = eisner_decode(probs.probs); break;
  }
  ArcSet arcs = augment(tree, probs.probs, options.threshold);
  if (backbone) *backbone = std::move(tree);
  return arcs;
}

ParseResult parse_sentence(const ModelParams& params, const std::vector<std::string>& words,
                           const ParseOptions& options) {
  if (words.empty()) throw DataError("cannot parse an empty sentence");
  const TokenEncoding enc = encode_tokens(params, words);
  const PotentialSet potentials = score_potentials(params, enc);
  const ArcProbabilities probs = mfvi(potentials, options.iterations);
  ParseResult result;
  result.mode = options.mode;
  const ArcSet arcs = decode_arcs(probs, options, &result.backbone);
  result.arcs = assign_labels(arcs, potentials.label_scores, params.labels);
  return result;
}

std::vector<ParseResult> parse_all(const ModelParams& params, const std::vector<std::vector<std::string>>& sentences,
                                   const ParseOptions& options, int jobs) {
  std::vector<ParseResult> results(sentences.size());
  std::vector<std::exception_ptr> errors(sentences.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sentences.size(); i = next++) {
      try {
        results[i] = parse_sentence(params, sentences[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (threads == 1 || sentences.size() < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, sentences.size()); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

DepGraph to_graph(const LabeledArcSet& arcs, int n_words) {
  DepGraph g;
  g.n_words = n_words;
  for (const auto& a : arcs) g.add({NodeId{a.head, 0}, NodeId{a.dep, 0}, a.label});
  return g;
}

}  // namespace eud

// End-to-end sentence parsing: scores -> MFVI -> decoding -> labels.
#ifndef EUD_INFERENCE_HPP
#define EUD_INFERENCE_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eud/conllu.hpp"
#include "eud/decode.hpp"
#include "eud/model.hpp"

namespace eud {

enum class DecodeMode { argmax, mst, eisner };

std::string_view mode_name(DecodeMode mode);
std::optional<DecodeMode> parse_mode(std::string_view name);

struct ParseOptions {
  DecodeMode mode = DecodeMode::mst;
  int iterations = 3;
  double threshold = 0.5;
};

struct ParseResult {
  LabeledArcSet arcs;
  ArcSet backbone;  // empty in argmax mode
  DecodeMode mode = DecodeMode::mst;
};

/// Decodes arcs from posteriors in the requested mode: argmax thresholding,
/// or a spanning tree augmented with every arc above the threshold.
ArcSet decode_arcs(const ArcProbabilities& probs, const ParseOptions& options, ArcSet* backbone = nullptr);

ParseResult parse_sentence(const ModelParams& params, const std::vector<std::string>& words,
                           const ParseOptions& options);

/// Parses every sentence; `jobs` > 1 spreads sentences over threads. Output
/// order always follows input order.
std::vector<ParseResult> parse_all(const ModelParams& params, const std::vector<std::vector<std::string>>& sentences,
                                   const ParseOptions& options, int jobs = 1);

/// Node indices become word ids; node 0 is the root.
DepGraph to_graph(const LabeledArcSet& arcs, int n_words);

}  // namespace eud

#endif  // EUD_INFERENCE_HPP

// eudparse: command-line front end for transforming, training, parsing,
// mixing and scoring enhanced dependency graphs.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include "eud/conllu.hpp"
#include "eud/error.hpp"
#include "eud/inference.hpp"
#include "eud/metrics.hpp"
#include "eud/model.hpp"
#include "eud/training.hpp"

namespace {

class FileError : public eud::DataError {
 public:
  using eud::DataError::DataError;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write " + path);
  out << text;
}

std::vector<eud::Sentence> read_corpus(const std::string& path) { return eud::parse_conllu(read_text(path)); }

std::string transform_corpus(const std::string& input, const std::function<eud::DepGraph(const eud::DepGraph&)>& fn) {
  auto sentences = read_corpus(input);
  for (auto& s : sentences) s = eud::with_graph(s, fn(eud::graph_of(s)));
  return eud::write_conllu(sentences);
}

eud::StructureSet parse_structures(const std::string& spec) {
  auto set = eud::StructureSet::none();
  if (spec == "none" || spec.empty()) return set;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    bool known = false;
    for (auto s : eud::kAllStructures)
      if (item == eud::structure_name(s)) {
        set.set(s, true);
        known = true;
      }
    if (!known) throw UsageError("unknown structure '" + item + "' (expected sibling, coparent, grandparent or none)");
  }
  return set;
}

eud::DecodeMode require_mode(const std::string& name) {
  auto mode = eud::parse_mode(name);
  if (!mode) throw UsageError("unknown mode '" + name + "' (expected argmax, mst or eisner)");
  return *mode;
}

struct TransformArgs {
  std::string input = "-";
  std::string output = "-";
};

struct TrainArgs {
  std::vector<std::string> train_files;
  std::string dev_file;
  std::string model;
  std::string history;
  std::string profile = "desk";
  std::string structures = "sibling,coparent,grandparent";
  std::string mode = "mst";
  int embedding = 0, unary = 0, binary = 0;
  eud::TrainConfig config;
};

struct ParseArgs {
  std::string model;
  std::string input = "-";
  std::string output = "-";
  std::string mode = "mst";
  double threshold = 0.5;
  int iterations = 3;
  int jobs = 1;
  bool raw = false;
};

struct EvalArgs {
  std::string gold;
  std::string pred;
  bool machine = false;
};

struct MixArgs {
  std::string low;
  std::string high;
  std::string output = "-";
  std::uint64_t seed = 1;
};

struct SplitDevArgs {
  std::string input = "-";
  std::string dev_out;
  std::string test_out;
};

void run_train(TrainArgs& args) {
  auto& config = args.config;
  if (args.profile == "paper")
    config.dims = eud::ModelDims::paper();
  else if (args.profile != "desk")
    throw UsageError("unknown profile '" + args.profile + "' (expected desk or paper)");
  if (args.embedding > 0) config.dims.embedding = args.embedding;
  if (args.unary > 0) config.dims.unary = args.unary;
  if (args.binary > 0) config.dims.binary = args.binary;
  config.structures = parse_structures(args.structures);
  config.dev_parse.mode = require_mode(args.mode);
  config.dev_parse.iterations = config.mfvi_iterations;
  if (config.lambda < 0.0 || config.lambda > 1.0) throw UsageError("--lambda must lie in [0, 1]");
  if (config.batch_tokens < 1) throw UsageError("--batch-tokens must be positive");

  std::vector<eud::Sentence> train_sentences;
  for (const auto& f : args.train_files) {
    auto part = read_corpus(f);
    train_sentences.insert(train_sentences.end(), part.begin(), part.end());
  }
  const auto corpus = eud::make_examples(train_sentences);
  std::vector<eud::TrainingExample> dev;
  if (!args.dev_file.empty()) dev = eud::make_examples(read_corpus(args.dev_file));

  const auto result = eud::train(corpus, dev, config);
  std::ostringstream model;
  eud::save_model(result.params, model);
  write_text(args.model, model.str());
  if (!args.history.empty()) {
    std::ostringstream hist;
    eud::write_history(result.history, hist);
    write_text(args.history, hist.str());
  }
}

void run_parse(const ParseArgs& args) {
  if (args.raw)
    throw UsageError("--raw input is not supported: sentence and word segmentation are out of scope; "
                     "provide tokenized CoNLL-U");
  eud::ParseOptions options;
  options.mode = require_mode(args.mode);
  options.threshold = args.threshold;
  options.iterations = args.iterations;
  if (!(args.threshold > 0.0 && args.threshold < 1.0)) throw UsageError("--threshold must lie in (0, 1)");
  if (args.iterations < 0) throw UsageError("--iterations must be non-negative");
  if (args.jobs < 1) throw UsageError("--jobs must be positive");

  const eud::ModelParams params = eud::load_model(args.model);
  auto sentences = read_corpus(args.input);
  std::vector<std::vector<std::string>> words;
  for (const auto& s : sentences) words.push_back(s.words());
  const auto results = eud::parse_all(params, words, options, args.jobs);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const int n = static_cast<int>(words[i].size());
    auto graph = eud::expand_empty_nodes(eud::split_multi_arcs(eud::to_graph(results[i].arcs, n)));
    sentences[i] = eud::with_graph(sentences[i], graph);
  }
  write_text(args.output, eud::write_conllu(sentences));
}

void run_eval(const EvalArgs& args) {
  std::vector<eud::DepGraph> gold, pred;
  for (const auto& s : read_corpus(args.gold)) gold.push_back(eud::graph_of(s));
  for (const auto& s : read_corpus(args.pred)) pred.push_back(eud::graph_of(s));
  const auto e = eud::elas(gold, pred);
  const auto l = eud::lf1(gold, pred);
  char conn[64];
  std::string out;
  if (args.machine) {
    std::snprintf(conn, sizeof conn, " connectivity=%.4f\n", e.connectivity_rate);
    out = eud::format_report_machine("elas", e) + " " + eud::format_report_machine("lf1", l) + conn;
  } else {
    std::snprintf(conn, sizeof conn, "connectivity %.4f\n", e.connectivity_rate);
    out = eud::format_report("ELAS", e) + eud::format_report("LF1", l) + conn;
  }
  write_text("-", out);
}

void run_mix(const MixArgs& args) {
  const auto low = read_corpus(args.low);
  const auto high = read_corpus(args.high);
  write_text(args.output, eud::write_conllu(eud::upsample_mix_sentences(low, high, args.seed)));
}

void run_split_dev(const SplitDevArgs& args) {
  auto [dev, test] = eud::split_dev(read_corpus(args.input));
  write_text(args.dev_out, eud::write_conllu(dev));
  write_text(args.test_out, eud::write_conllu(test));
}

}  // namespace

/// Replaces `--config FILE` with one argument per `key=value` line, placed right
/// after the subcommand. Keys also given on the command line are dropped.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::vector<std::string> extra;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    const std::string key = CLI::detail::trim_copy(line.substr(0, eq));
    const std::string value = CLI::detail::trim_copy(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    extra.push_back(flag);
    std::istringstream values(value);
    for (std::string v; values >> v;) extra.push_back(v);
  }
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

int main(int argc, char** argv) {
  CLI::App app{"Enhanced Universal Dependencies graph parser"};
  app.require_subcommand(1);
  std::string config_path;

  TransformArgs transform;
  std::string transform_name;
  for (const char* name : {"collapse", "expand", "merge", "split"}) {
    auto* cmd = app.add_subcommand(name, std::string(name) + " graphs in a CoNLL-U file");
    cmd->add_option("-i,--input", transform.input, "input CoNLL-U ('-' for stdin)");
    cmd->add_option("-o,--output", transform.output, "output CoNLL-U ('-' for stdout)");
    cmd->callback([&transform_name, name] { transform_name = name; });
  }

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path, "key=value file overriding defaults");
  train->add_option("--train", train_args.train_files, "training CoNLL-U files")->required();
  train->add_option("--dev", train_args.dev_file, "development CoNLL-U file");
  train->add_option("--model", train_args.model, "output model path")->required();
  train->add_option("--history", train_args.history, "per-epoch metrics (JSON lines)");
  train->add_option("--profile", train_args.profile, "hidden-size profile: desk or paper");
  train->add_option("--embedding-dim", train_args.embedding, "override embedding size");
  train->add_option("--unary-dim", train_args.unary, "override unary hidden size");
  train->add_option("--binary-dim", train_args.binary, "override binary hidden size");
  train->add_option("--structures", train_args.structures, "comma list of sibling,coparent,grandparent or none");
  train->add_option("--mode", train_args.mode, "decoding for dev LF1: argmax, mst, eisner");
  train->add_option("--threshold", train_args.config.dev_parse.threshold, "arc probability threshold");
  train->add_option("--lambda", train_args.config.lambda, "label loss weight");
  train->add_option("--lr", train_args.config.learning_rate, "learning rate");
  train->add_option("--beta1", train_args.config.adam_beta1, "Adam beta1");
  train->add_option("--beta2", train_args.config.adam_beta2, "Adam beta2");
  train->add_option("--lr-decay", train_args.config.lr_decay, "learning rate decay factor");
  train->add_option("--patience", train_args.config.lr_patience, "epochs without improvement before decay");
  train->add_option("--batch-tokens", train_args.config.batch_tokens, "tokens per batch");
  train->add_option("--epochs", train_args.config.epochs, "training epochs");
  train->add_option("--iterations", train_args.config.mfvi_iterations, "mean-field iterations");
  train->add_option("--dropout", train_args.config.dropout_rate, "embedding dropout rate");
  train->add_option("--seed", train_args.config.seed, "random seed");

  ParseArgs parse_args;
  auto* parse = app.add_subcommand("parse", "parse tokenized CoNLL-U");
  parse->add_option("--config", config_path, "key=value file overriding defaults");
  parse->add_option("--model", parse_args.model, "model path")->required();
  parse->add_option("-i,--input", parse_args.input, "input CoNLL-U ('-' for stdin)");
  parse->add_option("-o,--output", parse_args.output, "output CoNLL-U ('-' for stdout)");
  parse->add_option("--mode", parse_args.mode, "argmax, mst or eisner");
  parse->add_option("--threshold", parse_args.threshold, "arc probability threshold");
  parse->add_option("--iterations", parse_args.iterations, "mean-field iterations");
  parse->add_option("--jobs", parse_args.jobs, "parallel sentences");
  parse->add_flag("--raw", parse_args.raw, "untokenized input (unsupported)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--gold", eval_args.gold, "gold CoNLL-U")->required();
  eval->add_option("--pred", eval_args.pred, "predicted CoNLL-U")->required();
  eval->add_flag("--machine", eval_args.machine, "single key=value line");

  MixArgs mix_args;
  auto* mix = app.add_subcommand("mix", "upsample a low-resource set into a label-masked high-resource set");
  mix->add_option("--low", mix_args.low, "low-resource CoNLL-U")->required();
  mix->add_option("--high", mix_args.high, "high-resource CoNLL-U")->required();
  mix->add_option("-o,--output", mix_args.output, "output CoNLL-U");
  mix->add_option("--seed", mix_args.seed, "shuffle seed");

  SplitDevArgs split_args;
  auto* split_dev = app.add_subcommand("split-dev", "split a development set into dev and test halves");
  split_dev->add_option("-i,--input", split_args.input, "input CoNLL-U");
  split_dev->add_option("--dev-out", split_args.dev_out, "even-indexed sentences")->required();
  split_dev->add_option("--test-out", split_args.test_out, "odd-indexed sentences")->required();

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "eudparse: usage error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "eudparse: usage error: " << e.what() << '\n';
    return 1;
  } catch (const FileError& e) {
    std::cerr << "eudparse: data error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (!transform_name.empty()) {
      static const std::map<std::string, eud::DepGraph (*)(const eud::DepGraph&)> fns = {
          {"collapse", eud::collapse_empty_nodes},
          {"expand", eud::expand_empty_nodes},
          {"merge", eud::merge_multi_arcs},
          {"split", eud::split_multi_arcs}};
      write_text(transform.output, transform_corpus(transform.input, fns.at(transform_name)));
    } else if (*train) {
      run_train(train_args);
    } else if (*parse) {
      run_parse(parse_args);
    } else if (*eval) {
      run_eval(eval_args);
    } else if (*mix) {
      run_mix(mix_args);
    } else if (*split_dev) {
      run_split_dev(split_args);
    }
  } catch (const UsageError& e) {
    std::cerr << "eudparse: usage error: " << e.what() << '\n';
    return 1;
  } catch (const eud::ParseError& e) {
    std::cerr << "eudparse: parse error: " << e.what() << '\n';
    return 2;
  } catch (const eud::ModelFormatError& e) {
    std::cerr << "eudparse: model format error: " << e.what() << '\n';
    return 2;
  } catch (const eud::AlignmentError& e) {
    std::cerr << "eudparse: alignment error: " << e.what() << '\n';
    return 2;
  } catch (const eud::DataError& e) {
    std::cerr << "eudparse: data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "eudparse: internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

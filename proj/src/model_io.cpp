#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eud/error.hpp"
#include "eud/model.hpp"

namespace eud {

namespace {

constexpr const char* kMagic = "eud-model";
constexpr int kVersion = 1;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ModelFormatError(std::string("model file truncated, expected ") + what);
  return line;
}

long expect_keyed_int(std::istream& in, const std::string& key) {
  std::istringstream ss(next_line(in, key.c_str()));
  std::string k;
  long v = -1;
  if (!(ss >> k >> v) || k != key || v < 0) throw ModelFormatError("expected '" + key + " <count>'");
  return v;
}

}  // namespace

void save_model(const ModelParams& params, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "embedding " << params.dims.embedding << '\n';
  out << "unary " << params.dims.unary << '\n';
  out << "binary " << params.dims.binary << '\n';
  out << "structures";
  for (Structure s : kAllStructures)
    if (params.structures.has(s)) out << ' ' << structure_name(s);
  out << '\n';
  out << "vocab " << params.vocab.size() << '\n';
  for (const auto& w : params.vocab.words()) out << w << '\n';
  out << "labels " << params.labels.size() << '\n';
  for (const auto& l : params.labels) out << l << '\n';
  for (const auto& t : tensors(params)) {
    out << "tensor " << t.name << ' ' << t.values.size() << '\n';
    for (std::size_t i = 0; i < t.values.size(); ++i) out << (i ? " " : "") << format_double(t.values[i]);
    out << '\n';
  }
  out << "end\n";
}

ModelParams load_model(std::istream& in) {
  {
    std::istringstream ss(next_line(in, "header"));
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != kMagic) throw ModelFormatError("not a model file");
    if (version != kVersion) throw ModelFormatError("unsupported model version " + std::to_string(version));
  }
  ModelDims dims;
  dims.embedding = static_cast<int>(expect_keyed_int(in, "embedding"));
  dims.unary = static_cast<int>(expect_keyed_int(in, "unary"));
  dims.binary = static_cast<int>(expect_keyed_int(in, "binary"));
  if (dims.embedding <= 0 || dims.unary <= 0 || dims.binary <= 0) throw ModelFormatError("non-positive dimension");

  StructureSet structures = StructureSet::none();
  {
    std::istringstream ss(next_line(in, "structures"));
    std::string key, name;
    ss >> key;
    if (key != "structures") throw ModelFormatError("expected 'structures'");
    while (ss >> name) {
      bool known = false;
      for (Structure s : kAllStructures)
        if (name == structure_name(s)) {
          structures.set(s, true);
          known = true;
        }
      if (!known) throw ModelFormatError("unknown structure '" + name + "'");
    }
  }

  const long vocab_size = expect_keyed_int(in, "vocab");
  if (vocab_size < 1) throw ModelFormatError("vocabulary lacks the unknown-word slot");
  std::vector<std::string> words;
  for (long i = 0; i < vocab_size; ++i) words.push_back(next_line(in, "vocabulary entry"));
  if (words[0] != Vocabulary::kUnknownToken) throw ModelFormatError("vocabulary does not start with <unk>");
  Vocabulary vocab(std::vector<std::string>(words.begin() + 1, words.end()));
  if (vocab.size() != vocab_size) throw ModelFormatError("duplicate vocabulary entries");

  const long label_count = expect_keyed_int(in, "labels");
  std::vector<std::string> labels;
  for (long i = 0; i < label_count; ++i) {
    labels.push_back(next_line(in, "label"));
    for (long j = 0; j < i; ++j)
      if (labels[j] == labels.back()) throw ModelFormatError("duplicate label '" + labels.back() + "'");
  }

  ModelParams params = ModelParams::zeros(dims, structures, std::move(vocab), std::move(labels));
  for (auto& t : tensors(params)) {
    std::istringstream header(next_line(in, "tensor header"));
    std::string key, name;
    std::size_t size = 0;
    if (!(header >> key >> name >> size) || key != "tensor") throw ModelFormatError("expected tensor header");
    if (name != t.name || size != t.values.size())
      throw ModelFormatError("tensor '" + name + "' does not match expected '" + t.name + "' of size " +
                             std::to_string(t.values.size()));
    const std::string body = next_line(in, "tensor values");
    const char* p = body.data();
    const char* end = body.data() + body.size();
    for (double& v : t.values) {
      while (p < end && *p == ' ') ++p;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw ModelFormatError("bad value in tensor '" + name + "'");
      p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) throw ModelFormatError("trailing values in tensor '" + name + "'");
  }
  if (next_line(in, "end marker") != "end") throw ModelFormatError("missing end marker");
  return params;
}

void save_model(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError("cannot write model file " + path);
  save_model(params, out);
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open model file " + path);
  return load_model(in);
}

}  // namespace eud

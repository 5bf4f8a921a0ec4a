#include "eud/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace eud {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Vocabulary::Vocabulary() { add(kUnknownToken); }

Vocabulary::Vocabulary(const std::vector<std::string>& words) : Vocabulary() {
  for (const auto& w : words) add(w);
}

int Vocabulary::index(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnknown : it->second;
}

int Vocabulary::add(const std::string& word) {
  auto [it, fresh] = index_.try_emplace(word, size());
  if (fresh) words_.push_back(word);
  return it->second;
}

ModelParams ModelParams::zeros(ModelDims dims, StructureSet structures, Vocabulary vocab,
                               std::vector<std::string> labels) {
  ModelParams p;
  p.dims = dims;
  p.structures = structures;
  p.vocab = std::move(vocab);
  p.labels = std::move(labels);
  const int de = dims.embedding, du = dims.unary, db = dims.binary;
  const auto L = static_cast<Index>(p.labels.size());
  p.embeddings = MatrixXd::Zero(p.vocab.size(), de);
  p.root = VectorXd::Zero(de);
  p.arc_head = p.arc_dep = Affine::zeros(du, de);
  p.arc_biaffine = MatrixXd::Zero(du + 1, du + 1);
  p.label_head = p.label_dep = Affine::zeros(du, de);
  p.label_biaffine = zero_stack<double>(L, du + 1, du + 1);
  p.tri_head = p.tri_dep = p.tri_sib = Affine::zeros(db, de);
  for (Structure s : kAllStructures)
    if (structures.has(s)) p.trilinear[static_cast<int>(s)] = zero_stack<double>(db, db, db);
  return p;
}

ModelParams ModelParams::zeros_like() const { return zeros(dims, structures, vocab, labels); }

int ModelParams::label_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

namespace {

template <typename Params, typename Out>
void collect(Params& p, std::vector<Out>& out) {
  auto add = [&](std::string name, auto& m) { out.push_back({std::move(name), {m.data(), static_cast<std::size_t>(m.size())}}); };
  auto add_affine = [&](const std::string& name, auto& a) {
    add(name + ".weight", a.weight);
    add(name + ".bias", a.bias);
  };
  add("embeddings", p.embeddings);
  add("root", p.root);
  add_affine("arc_head", p.arc_head);
  add_affine("arc_dep", p.arc_dep);
  add("arc_biaffine", p.arc_biaffine);
  add_affine("label_head", p.label_head);
  add_affine("label_dep", p.label_dep);
  for (std::size_t l = 0; l < p.label_biaffine.size(); ++l)
    add("label_biaffine." + std::to_string(l), p.label_biaffine[l]);
  add_affine("tri_head", p.tri_head);
  add_affine("tri_dep", p.tri_dep);
  add_affine("tri_sib", p.tri_sib);
  for (Structure s : kAllStructures) {
    auto& stack = p.trilinear[static_cast<int>(s)];
    for (std::size_t a = 0; a < stack.size(); ++a)
      add(std::string("trilinear.") + structure_name(s) + "." + std::to_string(a), stack[a]);
  }
}

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }

MatrixXd append_ones(const MatrixXd& x) {
  MatrixXd out(x.rows(), x.cols() + 1);
  out << x, MatrixXd::Ones(x.rows(), 1);
  return out;
}

MatrixXd encode_rows(const ModelParams& params, const std::vector<int>& ids, const VectorXd& row_scale) {
  const auto n = static_cast<Index>(ids.size());
  MatrixXd r = MatrixXd::Zero(n + 1, params.dims.embedding);
  r.row(0) = params.root.transpose();
  for (Index i = 1; i <= n; ++i) {
    const Index lo = std::max<Index>(1, i - 2), hi = std::min<Index>(n, i + 2);
    for (Index t = lo; t <= hi; ++t) r.row(i) += row_scale(t - 1) * params.embeddings.row(ids[t - 1]);
    r.row(i) /= static_cast<double>(hi - lo + 1);
  }
  return r;
}

MatrixXd biaffine(const MatrixXd& head_aug, const MatrixXd& weight, const MatrixXd& dep_aug) {
  return head_aug * weight * dep_aug.transpose();
}

void mask_unary(MatrixXd& unary) {
  unary.col(0).setConstant(kNegInf<double>);
  unary.diagonal().setConstant(kNegInf<double>);
}

/// raw[x](y, z) = sum_abc W[a](b, c) head(x, a) dep(y, b) third(z, c)
MatrixStack<double> trilinear_raw(const MatrixStack<double>& weight, const MatrixXd& head, const MatrixXd& dep,
                                  const MatrixXd& third) {
  const Index nodes = head.rows();
  MatrixStack<double> raw(static_cast<std::size_t>(nodes));
  for (Index x = 0; x < nodes; ++x) {
    MatrixXd contracted = MatrixXd::Zero(dep.cols(), third.cols());
    for (std::size_t a = 0; a < weight.size(); ++a) contracted += head(x, static_cast<Index>(a)) * weight[a];
    raw[x] = dep * contracted * third.transpose();
  }
  return raw;
}

MatrixStack<double> structure_potential(Structure s, const MatrixStack<double>& raw) {
  const auto nodes = static_cast<Index>(raw.size());
  MatrixStack<double> psi = zero_stack<double>(nodes, nodes, nodes);
  for (Index i = 0; i < nodes; ++i)
    for (Index j = 0; j < nodes; ++j)
      for (Index k = 0; k < nodes; ++k) {
        if (i == j || j == k || i == k) continue;
        switch (s) {
          case Structure::sibling: psi[i](j, k) = 0.5 * (raw[i](j, k) + raw[i](k, j)); break;
          case Structure::coparent: psi[i](j, k) = 0.5 * (raw[i](j, k) + raw[k](j, i)); break;
          case Structure::grandparent: psi[i](j, k) = raw[i](j, k); break;
        }
      }
  return psi;
}

MatrixStack<double> structure_raw_gradient(Structure s, const MatrixStack<double>& d_psi) {
  const auto nodes = static_cast<Index>(d_psi.size());
  MatrixStack<double> d_raw = zero_stack<double>(nodes, nodes, nodes);
  for (Index i = 0; i < nodes; ++i)
    for (Index j = 0; j < nodes; ++j)
      for (Index k = 0; k < nodes; ++k) {
        if (i == j || j == k || i == k) continue;
        const double g = d_psi[i](j, k);
        switch (s) {
          case Structure::sibling:
            d_raw[i](j, k) += 0.5 * g;
            d_raw[i](k, j) += 0.5 * g;
            break;
          case Structure::coparent:
            d_raw[i](j, k) += 0.5 * g;
            d_raw[k](j, i) += 0.5 * g;
            break;
          case Structure::grandparent: d_raw[i](j, k) += g; break;
        }
      }
  return d_raw;
}

void affine_backward(const Affine& layer, const MatrixXd& input, const MatrixXd& pre, const MatrixXd& d_out,
                     Affine& grad, MatrixXd& d_input) {
  MatrixXd d_pre = d_out.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  grad.weight.noalias() += d_pre.transpose() * input;
  grad.bias += d_pre.colwise().sum().transpose();
  d_input.noalias() += d_pre * layer.weight;
}

}  // namespace

std::vector<NamedTensor> tensors(ModelParams& params) {
  std::vector<NamedTensor> out;
  collect(params, out);
  return out;
}

std::vector<ConstNamedTensor> tensors(const ModelParams& params) {
  std::vector<ConstNamedTensor> out;
  collect(params, out);
  return out;
}

void initialize_uniform(ModelParams& params, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& t : tensors(params))
    for (double& v : t.values) v = dist(rng);
}

std::vector<int> lookup(const ModelParams& params, const std::vector<std::string>& words) {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(params.vocab.index(w));
  return ids;
}

TokenEncoding encode_tokens(const ModelParams& params, const std::vector<std::string>& words) {
  const auto ids = lookup(params, words);
  return {encode_rows(params, ids, VectorXd::Ones(static_cast<Index>(ids.size())))};
}

MatrixXd score_unary(const ModelParams& params, const TokenEncoding& enc) {
  const MatrixXd& r = enc.vectors;
  MatrixXd unary = biaffine(append_ones(relu(params.arc_head.pre_activation(r))), params.arc_biaffine,
                            append_ones(relu(params.arc_dep.pre_activation(r))));
  mask_unary(unary);
  return unary;
}

std::array<MatrixStack<double>, 3> score_binary(const ModelParams& params, const TokenEncoding& enc,
                                                StructureSet types) {
  std::array<MatrixStack<double>, 3> out;
  if (!types.any()) return out;
  const MatrixXd& r = enc.vectors;
  const MatrixXd head = relu(params.tri_head.pre_activation(r));
  const MatrixXd dep = relu(params.tri_dep.pre_activation(r));
  const MatrixXd third = relu(params.tri_sib.pre_activation(r));
  for (Structure s : kAllStructures) {
    const auto& weight = params.trilinear[static_cast<int>(s)];
    if (!types.has(s) || weight.empty()) continue;
    out[static_cast<int>(s)] = structure_potential(s, trilinear_raw(weight, head, dep, third));
  }
  return out;
}

MatrixStack<double> score_labels(const ModelParams& params, const TokenEncoding& enc) {
  const MatrixXd& r = enc.vectors;
  const MatrixXd head = append_ones(relu(params.label_head.pre_activation(r)));
  const MatrixXd dep = append_ones(relu(params.label_dep.pre_activation(r)));
  MatrixStack<double> out;
  out.reserve(params.label_biaffine.size());
  for (const auto& slice : params.label_biaffine) out.push_back(biaffine(head, slice, dep));
  return out;
}

VectorXd label_distribution(const MatrixStack<double>& label_scores, Index head, Index dep) {
  VectorXd s(static_cast<Index>(label_scores.size()));
  for (Index l = 0; l < s.size(); ++l) s(l) = label_scores[l](head, dep);
  VectorXd e = (s.array() - s.maxCoeff()).exp();
  return e / e.sum();
}

PotentialSet score_potentials(const ModelParams& params, const TokenEncoding& enc) {
  return {score_unary(params, enc), score_binary(params, enc, params.structures), score_labels(params, enc)};
}

ScoringTrace score_with_trace(const ModelParams& params, std::vector<int> ids, VectorXd row_scale) {
  ScoringTrace t;
  t.ids = std::move(ids);
  t.row_scale = std::move(row_scale);
  t.encoded = encode_rows(params, t.ids, t.row_scale);
  const MatrixXd& r = t.encoded;

  t.arc_head_pre = params.arc_head.pre_activation(r);
  t.arc_dep_pre = params.arc_dep.pre_activation(r);
  t.arc_head_aug = append_ones(relu(t.arc_head_pre));
  t.arc_dep_aug = append_ones(relu(t.arc_dep_pre));
  t.potentials.unary = biaffine(t.arc_head_aug, params.arc_biaffine, t.arc_dep_aug);
  mask_unary(t.potentials.unary);

  t.label_head_pre = params.label_head.pre_activation(r);
  t.label_dep_pre = params.label_dep.pre_activation(r);
  t.label_head_aug = append_ones(relu(t.label_head_pre));
  t.label_dep_aug = append_ones(relu(t.label_dep_pre));
  for (const auto& slice : params.label_biaffine)
    t.potentials.label_scores.push_back(biaffine(t.label_head_aug, slice, t.label_dep_aug));

  if (params.structures.any()) {
    t.tri_head_pre = params.tri_head.pre_activation(r);
    t.tri_dep_pre = params.tri_dep.pre_activation(r);
    t.tri_sib_pre = params.tri_sib.pre_activation(r);
    t.tri_head_out = relu(t.tri_head_pre);
    t.tri_dep_out = relu(t.tri_dep_pre);
    t.tri_sib_out = relu(t.tri_sib_pre);
    for (Structure s : kAllStructures) {
      const auto& weight = params.trilinear[static_cast<int>(s)];
      if (!params.structures.has(s) || weight.empty()) continue;
      t.potentials[s] = structure_potential(s, trilinear_raw(weight, t.tri_head_out, t.tri_dep_out, t.tri_sib_out));
    }
  }
  return t;
}

void backpropagate(const ModelParams& params, const ScoringTrace& trace, const PotentialGradient<double>& d_pot,
                   const MatrixStack<double>& d_label_scores, ModelParams& grads) {
  const MatrixXd& r = trace.encoded;
  const Index nodes = r.rows();
  const int du = params.dims.unary;
  MatrixXd d_r = MatrixXd::Zero(nodes, r.cols());

  // Unary biaffine; inadmissible cells carry no gradient.
  MatrixXd d_unary = d_pot.unary;
  d_unary.col(0).setZero();
  d_unary.diagonal().setZero();
  grads.arc_biaffine.noalias() += trace.arc_head_aug.transpose() * d_unary * trace.arc_dep_aug;
  MatrixXd d_head = (d_unary * trace.arc_dep_aug * params.arc_biaffine.transpose()).leftCols(du);
  MatrixXd d_dep = (d_unary.transpose() * trace.arc_head_aug * params.arc_biaffine).leftCols(du);
  affine_backward(params.arc_head, r, trace.arc_head_pre, d_head, grads.arc_head, d_r);
  affine_backward(params.arc_dep, r, trace.arc_dep_pre, d_dep, grads.arc_dep, d_r);

  if (!d_label_scores.empty()) {
    MatrixXd d_lhead = MatrixXd::Zero(nodes, du + 1), d_ldep = MatrixXd::Zero(nodes, du + 1);
    for (std::size_t l = 0; l < d_label_scores.size(); ++l) {
      const MatrixXd& g = d_label_scores[l];
      grads.label_biaffine[l].noalias() += trace.label_head_aug.transpose() * g * trace.label_dep_aug;
      d_lhead.noalias() += g * trace.label_dep_aug * params.label_biaffine[l].transpose();
      d_ldep.noalias() += g.transpose() * trace.label_head_aug * params.label_biaffine[l];
    }
    affine_backward(params.label_head, r, trace.label_head_pre, d_lhead.leftCols(du), grads.label_head, d_r);
    affine_backward(params.label_dep, r, trace.label_dep_pre, d_ldep.leftCols(du), grads.label_dep, d_r);
  }

  if (params.structures.any()) {
    const int db = params.dims.binary;
    MatrixXd d_th = MatrixXd::Zero(nodes, db), d_td = MatrixXd::Zero(nodes, db), d_ts = MatrixXd::Zero(nodes, db);
    bool touched = false;
    for (Structure s : kAllStructures) {
      const auto& weight = params.trilinear[static_cast<int>(s)];
      const auto& d_psi = d_pot.binary[static_cast<int>(s)];
      if (weight.empty() || d_psi.empty()) continue;
      touched = true;
      auto& d_weight = grads.trilinear[static_cast<int>(s)];
      const MatrixStack<double> d_raw = structure_raw_gradient(s, d_psi);
      for (Index x = 0; x < nodes; ++x) {
        MatrixXd contracted = MatrixXd::Zero(db, db);
        for (int a = 0; a < db; ++a) contracted += trace.tri_head_out(x, a) * weight[a];
        const MatrixXd outer = trace.tri_dep_out.transpose() * d_raw[x] * trace.tri_sib_out;
        for (int a = 0; a < db; ++a) {
          d_weight[a].noalias() += trace.tri_head_out(x, a) * outer;
          d_th(x, a) += weight[a].cwiseProduct(outer).sum();
        }
        d_td.noalias() += d_raw[x] * trace.tri_sib_out * contracted.transpose();
        d_ts.noalias() += d_raw[x].transpose() * trace.tri_dep_out * contracted;
      }
    }
    if (touched) {
      affine_backward(params.tri_head, r, trace.tri_head_pre, d_th, grads.tri_head, d_r);
      affine_backward(params.tri_dep, r, trace.tri_dep_pre, d_td, grads.tri_dep, d_r);
      affine_backward(params.tri_sib, r, trace.tri_sib_pre, d_ts, grads.tri_sib, d_r);
    }
  }

  // Encoder: row 0 is the root vector, other rows average a +-2 window.
  grads.root += d_r.row(0).transpose();
  const auto n = static_cast<Index>(trace.ids.size());
  for (Index i = 1; i <= n; ++i) {
    const Index lo = std::max<Index>(1, i - 2), hi = std::min<Index>(n, i + 2);
    const double inv = 1.0 / static_cast<double>(hi - lo + 1);
    for (Index t = lo; t <= hi; ++t)
      grads.embeddings.row(trace.ids[t - 1]) += (inv * trace.row_scale(t - 1)) * d_r.row(i);
  }
}

}  // namespace eud

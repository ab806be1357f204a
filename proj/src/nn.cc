#include "g2/nn.h"

#include <algorithm>
#include <cmath>

namespace g2 {

ParamId ParamStore::Add(std::string name, Tensor value, ParamGroup group) {
  Parameter p;
  p.name = std::move(name);
  p.value = std::move(value);
  p.group = group;
  p.ZeroGrad();
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<ParamId> ParamStore::Find(const std::string& name) const {
  for (size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

void ParamStore::ZeroGrad() {
  for (Parameter& p : params_) p.ZeroGrad();
}

size_t ParamStore::ScalarCount() const {
  size_t n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    const Parameter& x = a.params_[i];
    const Parameter& y = b.params_[i];
    if (x.name != y.name || x.group != y.group || !(x.value == y.value))
      return false;
  }
  return true;
}

Tensor Initializer::Normal(size_t rows, size_t cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t = Tensor::Zeros(rows, cols);
  for (double& v : t.data()) v = dist(rng_);
  return t;
}

LinearParams AddLinear(ParamStore& store, Initializer& init,
                       const std::string& name, size_t in, size_t out,
                       ParamGroup group, bool with_bias) {
  LinearParams p;
  p.weight = store.Add(name + ".weight", init.Normal(in, out), group);
  if (with_bias) p.bias = store.Add(name + ".bias", Tensor::Zeros(1, out), group);
  return p;
}

LayerNormParams AddLayerNorm(ParamStore& store, const std::string& name,
                             size_t width, ParamGroup group) {
  return {store.Add(name + ".gain", Tensor::Filled(1, width, 1.0), group),
          store.Add(name + ".bias", Tensor::Zeros(1, width), group)};
}

AttentionParams AddAttention(ParamStore& store, Initializer& init,
                             const std::string& name, size_t width,
                             ParamGroup group) {
  return {AddLinear(store, init, name + ".query", width, width, group),
          AddLinear(store, init, name + ".key", width, width, group,
                    /*with_bias=*/false),
          AddLinear(store, init, name + ".value", width, width, group),
          AddLinear(store, init, name + ".output", width, width, group)};
}

FeedForwardParams AddFeedForward(ParamStore& store, Initializer& init,
                                 const std::string& name, size_t width,
                                 size_t hidden, ParamGroup group) {
  return {AddLinear(store, init, name + ".expand", width, hidden, group),
          AddLinear(store, init, name + ".contract", hidden, width, group)};
}

void CopyValues(ParamStore& store, const LinearParams& src,
                const LinearParams& dst) {
  store[dst.weight].value = store[src.weight].value;
  if (src.bias && dst.bias) store[*dst.bias].value = store[*src.bias].value;
}

void CopyValues(ParamStore& store, const AttentionParams& src,
                const AttentionParams& dst) {
  CopyValues(store, src.query, dst.query);
  CopyValues(store, src.key, dst.key);
  CopyValues(store, src.value, dst.value);
  CopyValues(store, src.output, dst.output);
}

Var Linear(Tape& tape, ParamStore& store, const LinearParams& p, Var x) {
  Var y = MatMul(x, tape.Leaf(store[p.weight]));
  if (p.bias) y = AddRowBroadcast(y, tape.Leaf(store[*p.bias]));
  return y;
}

Var ApplyLayerNorm(Tape& tape, ParamStore& store, const LayerNormParams& p,
                   Var x, double epsilon) {
  return LayerNorm(x, tape.Leaf(store[p.gain]), tape.Leaf(store[p.bias]),
                   epsilon);
}

Var FeedForward(Tape& tape, ParamStore& store, const FeedForwardParams& p,
                Var x) {
  return Linear(tape, store, p.contract, Gelu(Linear(tape, store, p.expand, x)));
}

Var MultiHeadAttention(Tape& tape, ParamStore& store, const AttentionParams& p,
                       Var queries, Var memory, const Tensor* mask,
                       size_t heads, MaskMode mode) {
  const size_t width = queries.cols();
  if (heads == 0 || width % heads != 0) {
    throw ShapeMismatch("model width " + std::to_string(width) +
                        " not divisible by " + std::to_string(heads) + " heads");
  }
  if (memory.cols() != width) {
    throw ShapeMismatch("attention memory width " +
                        std::to_string(memory.cols()) + " vs " +
                        std::to_string(width));
  }
  if (mask && (mask->rows() != queries.rows() || mask->cols() != memory.rows())) {
    throw ShapeMismatch("attention mask " + mask->ShapeString() + " for " +
                        std::to_string(queries.rows()) + " queries x " +
                        std::to_string(memory.rows()) + " keys");
  }
  const size_t head_width = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_width));
  Tensor full_mask = mask ? *mask : Tensor::Filled(queries.rows(), memory.rows(), 1.0);

  Var q = Linear(tape, store, p.query, queries);
  Var k = Linear(tape, store, p.key, memory);
  Var v = Linear(tape, store, p.value, memory);
  std::vector<Var> mixed;
  mixed.reserve(heads);
  for (size_t h = 0; h < heads; ++h) {
    const size_t b = h * head_width, e = b + head_width;
    Var qh = SliceCols(q, b, e);
    Var kh = SliceCols(k, b, e);
    Var vh = SliceCols(v, b, e);
    Var scores = Scale(MatMul(qh, Transpose(kh)), scale);
    mixed.push_back(MatMul(MaskedSoftmax(scores, full_mask, mode), vh));
  }
  Var joined = heads == 1 ? mixed[0] : ConcatCols(mixed);
  return Linear(tape, store, p.output, joined);
}

GradCheckReport FiniteDiffCheck(const std::function<Var(Tape&)>& loss,
                                const std::vector<Parameter*>& params,
                                double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw std::invalid_argument("finite difference epsilon outside [1e-7, 1e-3]");
  }
  for (Parameter* p : params) p->ZeroGrad();
  {
    Tape tape;
    Var l = loss(tape);
    if (!std::isfinite(l.value()[0])) throw NonFiniteLoss("at the base point");
    tape.Backward(l);
  }
  auto evaluate = [&]() {
    Tape tape(/*record_gradients=*/false);
    const double v = loss(tape).value()[0];
    if (!std::isfinite(v)) throw NonFiniteLoss("under perturbation");
    return v;
  };

  GradCheckReport report;
  for (Parameter* p : params) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double original = p->value[i];
      p->value[i] = original + epsilon;
      const double plus = evaluate();
      p->value[i] = original - epsilon;
      const double minus = evaluate();
      p->value[i] = original;
      const double numeric = (plus - minus) / (2 * epsilon);
      const double analytic = p->grad[i];
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_parameter = p->name;
        report.worst_index = i;
        report.analytic = analytic;
        report.numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace g2

#include "g2/autograd.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace g2 {

namespace {

// out += a * b^T
void AddMatMulABt(Tensor& out, const Tensor& a, const Tensor& b) {
  const size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (size_t i = 0; i < n; ++i) {
    const double* arow = a.data().data() + i * k;
    double* orow = out.data().data() + i * m;
    for (size_t j = 0; j < m; ++j) {
      const double* brow = b.data().data() + j * k;
      double acc = 0;
      for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] += acc;
    }
  }
}

// out += a^T * b
void AddMatMulAtB(Tensor& out, const Tensor& a, const Tensor& b) {
  const size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (size_t i = 0; i < n; ++i) {
    const double* arow = a.data().data() + i * k;
    const double* brow = b.data().data() + i * m;
    for (size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* orow = out.data().data() + p * m;
      for (size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void AddInPlace(Tensor& out, const Tensor& delta) {
  auto& o = out.data();
  const auto& d = delta.data();
  for (size_t i = 0; i < o.size(); ++i) o[i] += d[i];
}

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::Constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::Leaf(Parameter& param) {
  if (auto it = leaves_.find(&param); it != leaves_.end()) {
    return Var(this, it->second);
  }
  Node node;
  node.borrowed = &param.value;
  node.param = &param;
  node.requires_grad = record_gradients_;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size() - 1);
  leaves_.emplace(&param, id);
  return Var(this, id);
}

Var Tape::Record(Tensor value, std::initializer_list<Var> inputs,
                 BackwardFn backward) {
  return Record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::Record(Tensor value, std::span<const Var> inputs,
                 BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (record_gradients_) {
    node.requires_grad = std::any_of(inputs.begin(), inputs.end(), [&](Var v) {
      return nodes_[v.id()].requires_grad;
    });
    if (node.requires_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.borrowed ? *n.borrowed : n.value;
}

Tensor& Tape::GradBuffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0 && value(id).size() != 0) n.grad = Tensor(value(id).shape());
  return n.grad;
}

void Tape::AccumulateGrad(int id, const Tensor& delta) {
  if (!nodes_[id].requires_grad) return;
  AddInPlace(GradBuffer(id), delta);
}

void Tape::Backward(Var root) {
  if (root.tape() != this) throw std::invalid_argument("Backward: foreign Var");
  if (value(root.id()).size() != 1) {
    throw ShapeMismatch("Backward expects a scalar root, got " +
                        value(root.id()).ShapeString());
  }
  if (!nodes_[root.id()].requires_grad) return;
  GradBuffer(root.id())[0] = 1.0;
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param) {
      Parameter& p = *n.param;
      if (!p.grad.SameShape(p.value)) p.ZeroGrad();
      AddInPlace(p.grad, n.grad);
    }
  }
}

Var MatMul(Var a, Var b) {
  Tape& t = *a.tape();
  return t.Record(MatMul(a.value(), b.value()), {a, b},
                  [a, b](Tape& t, const Tensor& g) {
                    if (t.requires_grad(a.id()))
                      AddMatMulABt(t.GradBuffer(a.id()), g, b.value());
                    if (t.requires_grad(b.id()))
                      AddMatMulAtB(t.GradBuffer(b.id()), a.value(), g);
                  });
}

Var Transpose(Var a) {
  Tape& t = *a.tape();
  return t.Record(Transpose(a.value()), {a}, [a](Tape& t, const Tensor& g) {
    t.AccumulateGrad(a.id(), Transpose(g));
  });
}

Var Add(Var a, Var b) {
  if (!a.value().SameShape(b.value())) {
    throw ShapeMismatch("Add " + a.value().ShapeString() + " + " +
                        b.value().ShapeString());
  }
  Tensor out = a.value();
  AddInPlace(out, b.value());
  return a.tape()->Record(std::move(out), {a, b},
                          [a, b](Tape& t, const Tensor& g) {
                            t.AccumulateGrad(a.id(), g);
                            t.AccumulateGrad(b.id(), g);
                          });
}

Var Mul(Var a, Var b) {
  if (!a.value().SameShape(b.value())) {
    throw ShapeMismatch("Mul " + a.value().ShapeString() + " * " +
                        b.value().ShapeString());
  }
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape()->Record(std::move(out), {a, b},
                          [a, b](Tape& t, const Tensor& g) {
                            if (t.requires_grad(a.id())) {
                              Tensor& ga = t.GradBuffer(a.id());
                              for (size_t i = 0; i < g.size(); ++i)
                                ga[i] += g[i] * b.value()[i];
                            }
                            if (t.requires_grad(b.id())) {
                              Tensor& gb = t.GradBuffer(b.id());
                              for (size_t i = 0; i < g.size(); ++i)
                                gb[i] += g[i] * a.value()[i];
                            }
                          });
}

Var AddRowBroadcast(Var x, Var row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  if (rv.size() != xv.cols()) {
    throw ShapeMismatch("AddRowBroadcast " + xv.ShapeString() + " + " +
                        rv.ShapeString());
  }
  Tensor out = xv;
  for (size_t r = 0; r < out.rows(); ++r)
    for (size_t c = 0; c < out.cols(); ++c) out.at(r, c) += rv[c];
  return x.tape()->Record(std::move(out), {x, row},
                          [x, row](Tape& t, const Tensor& g) {
                            t.AccumulateGrad(x.id(), g);
                            if (t.requires_grad(row.id())) {
                              Tensor& gr = t.GradBuffer(row.id());
                              for (size_t r = 0; r < g.rows(); ++r)
                                for (size_t c = 0; c < g.cols(); ++c)
                                  gr[c] += g.at(r, c);
                            }
                          });
}

Var Scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  return x.tape()->Record(std::move(out), {x},
                          [x, factor](Tape& t, const Tensor& g) {
                            if (!t.requires_grad(x.id())) return;
                            Tensor& gx = t.GradBuffer(x.id());
                            for (size_t i = 0; i < g.size(); ++i)
                              gx[i] += g[i] * factor;
                          });
}

Var Gelu(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) {
    const double inner = kGeluScale * (v + kGeluCubic * v * v * v);
    v = 0.5 * v * (1.0 + std::tanh(inner));
  }
  return x.tape()->Record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    if (!t.requires_grad(x.id())) return;
    Tensor& gx = t.GradBuffer(x.id());
    const Tensor& xv = x.value();
    for (size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double th = std::tanh(kGeluScale * (v + kGeluCubic * v * v * v));
      const double d = 0.5 * (1.0 + th) +
                       0.5 * v * (1.0 - th * th) * kGeluScale *
                           (1.0 + 3.0 * kGeluCubic * v * v);
      gx[i] += g[i] * d;
    }
  });
}

Var LayerNorm(Var x, Var gain, Var bias, double epsilon) {
  const Tensor& xv = x.value();
  const size_t rows = xv.rows(), cols = xv.cols();
  if (gain.value().size() != cols || bias.value().size() != cols) {
    throw ShapeMismatch("LayerNorm gain/bias width vs " + xv.ShapeString());
  }
  Tensor normalized = LayerNorm(xv, epsilon);
  std::vector<double> inv_std(rows);
  for (size_t r = 0; r < rows; ++r) {
    auto in = xv.row(r);
    const double mean = std::accumulate(in.begin(), in.end(), 0.0) / cols;
    double var = 0;
    for (double v : in) var += (v - mean) * (v - mean);
    inv_std[r] = 1.0 / std::sqrt(var / cols + epsilon);
  }
  Tensor out = normalized;
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c)
      out.at(r, c) = out.at(r, c) * gain.value()[c] + bias.value()[c];
  return x.tape()->Record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Tape& t, const Tensor& g) {
        const size_t rows = g.rows(), cols = g.cols();
        if (t.requires_grad(gain.id())) {
          Tensor& gg = t.GradBuffer(gain.id());
          for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < cols; ++c)
              gg[c] += g.at(r, c) * normalized.at(r, c);
        }
        if (t.requires_grad(bias.id())) {
          Tensor& gb = t.GradBuffer(bias.id());
          for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < cols; ++c) gb[c] += g.at(r, c);
        }
        if (!t.requires_grad(x.id())) return;
        Tensor& gx = t.GradBuffer(x.id());
        std::vector<double> dxhat(cols);
        for (size_t r = 0; r < rows; ++r) {
          double sum = 0, dot = 0;
          for (size_t c = 0; c < cols; ++c) {
            dxhat[c] = g.at(r, c) * gain.value()[c];
            sum += dxhat[c];
            dot += dxhat[c] * normalized.at(r, c);
          }
          const double scale = inv_std[r] / static_cast<double>(cols);
          for (size_t c = 0; c < cols; ++c) {
            gx.at(r, c) += scale * (cols * dxhat[c] - sum -
                                    normalized.at(r, c) * dot);
          }
        }
      });
}

Var MaskedSoftmax(Var scores, const Tensor& mask, MaskMode mode) {
  Tensor probs = MaskedSoftmax(scores.value(), mask, mode);
  Tensor literal_mask = mode == MaskMode::kLiteral ? mask : Tensor();
  Tensor out = probs;
  return scores.tape()->Record(
      std::move(out), {scores},
      [scores, probs = std::move(probs), literal_mask = std::move(literal_mask)](
          Tape& t, const Tensor& g) {
        Tensor& gs = t.GradBuffer(scores.id());
        for (size_t r = 0; r < g.rows(); ++r) {
          double dot = 0;
          for (size_t c = 0; c < g.cols(); ++c) dot += g.at(r, c) * probs.at(r, c);
          for (size_t c = 0; c < g.cols(); ++c) {
            double d = probs.at(r, c) * (g.at(r, c) - dot);
            if (literal_mask.size()) d *= literal_mask.at(r, c);
            gs.at(r, c) += d;
          }
        }
      });
}

Var SliceCols(Var x, size_t begin, size_t end) {
  const Tensor& xv = x.value();
  if (begin > end || end > xv.cols()) {
    throw ShapeMismatch("SliceCols [" + std::to_string(begin) + ", " +
                        std::to_string(end) + ") of " + xv.ShapeString());
  }
  Tensor out = Tensor::Zeros(xv.rows(), end - begin);
  for (size_t r = 0; r < xv.rows(); ++r)
    std::copy(xv.row(r).begin() + begin, xv.row(r).begin() + end,
              out.row(r).begin());
  return x.tape()->Record(std::move(out), {x},
                          [x, begin](Tape& t, const Tensor& g) {
                            Tensor& gx = t.GradBuffer(x.id());
                            for (size_t r = 0; r < g.rows(); ++r)
                              for (size_t c = 0; c < g.cols(); ++c)
                                gx.at(r, begin + c) += g.at(r, c);
                          });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("ConcatCols of nothing");
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (Var p : parts) values.push_back(p.value());
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape()->Record(
      ConcatCols(values), parts, [inputs](Tape& t, const Tensor& g) {
        size_t offset = 0;
        for (Var p : inputs) {
          const size_t w = p.cols();
          if (t.requires_grad(p.id())) {
            Tensor& gp = t.GradBuffer(p.id());
            for (size_t r = 0; r < g.rows(); ++r)
              for (size_t c = 0; c < w; ++c) gp.at(r, c) += g.at(r, offset + c);
          }
          offset += w;
        }
      });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("ConcatRows of nothing");
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (Var p : parts) values.push_back(p.value());
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape()->Record(
      ConcatRows(values), parts, [inputs](Tape& t, const Tensor& g) {
        size_t offset = 0;
        for (Var p : inputs) {
          const size_t n = p.value().size();
          if (t.requires_grad(p.id())) {
            Tensor& gp = t.GradBuffer(p.id());
            for (size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
          }
          offset += n;
        }
      });
}

Var GatherRows(Var table, std::span<const int> ids) {
  const Tensor& tv = table.value();
  Tensor out = Tensor::Zeros(ids.size(), tv.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<size_t>(ids[i]) >= tv.rows()) {
      throw ShapeMismatch("GatherRows id " + std::to_string(ids[i]) +
                          " outside " + tv.ShapeString());
    }
    auto src = tv.row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  std::vector<int> rows(ids.begin(), ids.end());
  return table.tape()->Record(
      std::move(out), {table}, [table, rows](Tape& t, const Tensor& g) {
        Tensor& gt = t.GradBuffer(table.id());
        for (size_t i = 0; i < rows.size(); ++i)
          for (size_t c = 0; c < g.cols(); ++c) gt.at(rows[i], c) += g.at(i, c);
      });
}

Var MeanRows(Var x) {
  Tensor out = MeanPool(x.value());
  return x.tape()->Record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    Tensor& gx = t.GradBuffer(x.id());
    const double inv = 1.0 / static_cast<double>(gx.rows());
    for (size_t r = 0; r < gx.rows(); ++r)
      for (size_t c = 0; c < gx.cols(); ++c) gx.at(r, c) += g[c] * inv;
  });
}

Var MaxRows(Var x) {
  const Tensor& xv = x.value();
  Tensor out = MaxPool(xv);
  std::vector<size_t> argmax(xv.cols(), 0);
  for (size_t c = 0; c < xv.cols(); ++c)
    for (size_t r = 1; r < xv.rows(); ++r)
      if (xv.at(r, c) > xv.at(argmax[c], c)) argmax[c] = r;
  return x.tape()->Record(std::move(out), {x},
                          [x, argmax](Tape& t, const Tensor& g) {
                            Tensor& gx = t.GradBuffer(x.id());
                            for (size_t c = 0; c < argmax.size(); ++c)
                              gx.at(argmax[c], c) += g[c];
                          });
}

Var Sum(Var x) {
  const auto& d = x.value().data();
  Tensor out({1, 1}, {std::accumulate(d.begin(), d.end(), 0.0)});
  return x.tape()->Record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    Tensor& gx = t.GradBuffer(x.id());
    for (double& v : gx.data()) v += g[0];
  });
}

Var NllLoss(Var logits, std::span<const int> targets,
            std::span<const bool> mask) {
  const Tensor& lv = logits.value();
  if (targets.size() != lv.rows() || mask.size() != lv.rows()) {
    throw ShapeMismatch("NllLoss logits " + lv.ShapeString() + " vs " +
                        std::to_string(targets.size()) + " targets");
  }
  Tensor probs = Tensor::Zeros(lv.rows(), lv.cols());
  double total = 0;
  size_t count = 0;
  for (size_t r = 0; r < lv.rows(); ++r) {
    if (!mask[r]) continue;
    if (targets[r] < 0 || static_cast<size_t>(targets[r]) >= lv.cols()) {
      throw ShapeMismatch("NllLoss target id " + std::to_string(targets[r]) +
                          " outside vocabulary of " + std::to_string(lv.cols()));
    }
    auto row = lv.row(r);
    const double hi = *std::max_element(row.begin(), row.end());
    double z = 0;
    for (double v : row) z += std::exp(v - hi);
    const double log_z = hi + std::log(z);
    for (size_t c = 0; c < row.size(); ++c)
      probs.at(r, c) = std::exp(row[c] - log_z);
    total += log_z - row[targets[r]];
    ++count;
  }
  const double denom = count ? static_cast<double>(count) : 1.0;
  Tensor out({1, 1}, {total / denom});
  std::vector<int> tgt(targets.begin(), targets.end());
  std::vector<bool> msk(mask.begin(), mask.end());
  return logits.tape()->Record(
      std::move(out), {logits},
      [logits, probs = std::move(probs), tgt, msk, denom](Tape& t,
                                                           const Tensor& g) {
        Tensor& gl = t.GradBuffer(logits.id());
        const double scale = g[0] / denom;
        for (size_t r = 0; r < probs.rows(); ++r) {
          if (!msk[r]) continue;
          for (size_t c = 0; c < probs.cols(); ++c)
            gl.at(r, c) += scale * (probs.at(r, c) - (static_cast<int>(c) == tgt[r]));
        }
      });
}

}  // namespace g2

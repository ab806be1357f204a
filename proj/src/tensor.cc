#include "g2/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace g2 {

namespace {

size_t Product(const std::vector<size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), size_t{1},
                         std::multiplies<>());
}

void RequireMatrix(const Tensor& t, const char* who) {
  if (t.shape().size() != 2) {
    throw ShapeMismatch(std::string(who) + " expects a matrix, got " +
                        t.ShapeString());
  }
}

}  // namespace

Tensor::Tensor(std::vector<size_t> shape)
    : shape_(std::move(shape)), data_(Product(shape_), 0.0) {}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != Product(shape_)) {
    throw ShapeMismatch("data length " + std::to_string(data_.size()) +
                        " does not match shape " + ShapeString());
  }
}

Tensor Tensor::Zeros(size_t rows, size_t cols) { return Tensor({rows, cols}); }

Tensor Tensor::Filled(size_t rows, size_t cols, double value) {
  return Tensor({rows, cols}, std::vector<double>(rows * cols, value));
}

Tensor Tensor::Identity(size_t n) {
  Tensor t = Zeros(n, n);
  for (size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor Tensor::FromRows(
    std::initializer_list<std::initializer_list<double>> rows) {
  size_t cols = rows.size() == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeMismatch("ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor({rows.size(), cols}, std::move(data));
}

size_t Tensor::rows() const {
  if (shape_.empty()) return 0;
  return shape_.size() == 1 ? 1 : shape_[0];
}

size_t Tensor::cols() const {
  if (shape_.empty()) return 0;
  return shape_.back();
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Tensor::ShapeString() const {
  std::ostringstream out;
  out << '[';
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) out << 'x';
    out << shape_[i];
  }
  out << ']';
  return out.str();
}

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireMatrix(a, "MatMul");
  RequireMatrix(b, "MatMul");
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("MatMul " + a.ShapeString() + " * " + b.ShapeString());
  }
  const size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::Zeros(n, m);
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.data().data();
  for (size_t i = 0; i < n; ++i) {
    double* orow = od + i * m;
    for (size_t p = 0; p < k; ++p) {
      const double av = ad[i * k + p];
      if (av == 0.0) continue;
      const double* brow = bd + p * m;
      for (size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor Transpose(const Tensor& a) {
  RequireMatrix(a, "Transpose");
  Tensor out = Tensor::Zeros(a.cols(), a.rows());
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor Softmax(const Tensor& scores) {
  return MaskedSoftmax(scores, Tensor::Filled(scores.rows(), scores.cols(), 1));
}

Tensor MaskedSoftmax(const Tensor& scores, const Tensor& mask, MaskMode mode) {
  RequireMatrix(scores, "MaskedSoftmax");
  if (!scores.SameShape(mask)) {
    throw ShapeMismatch("MaskedSoftmax scores " + scores.ShapeString() +
                        " vs mask " + mask.ShapeString());
  }
  Tensor out = Tensor::Zeros(scores.rows(), scores.cols());
  for (size_t r = 0; r < scores.rows(); ++r) {
    auto s = scores.row(r);
    auto m = mask.row(r);
    auto o = out.row(r);
    if (mode == MaskMode::kLiteral) {
      double hi = -std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < s.size(); ++c) hi = std::max(hi, s[c] * m[c]);
      double total = 0;
      for (size_t c = 0; c < s.size(); ++c) {
        o[c] = std::exp(s[c] * m[c] - hi);
        total += o[c];
      }
      for (double& v : o) v /= total;
      continue;
    }
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < s.size(); ++c)
      if (m[c] != 0.0) hi = std::max(hi, s[c]);
    if (hi == -std::numeric_limits<double>::infinity()) throw AllMaskedRow(r);
    double total = 0;
    for (size_t c = 0; c < s.size(); ++c) {
      o[c] = m[c] != 0.0 ? std::exp(s[c] - hi) : 0.0;
      total += o[c];
    }
    for (double& v : o) v /= total;
  }
  return out;
}

Tensor LayerNorm(const Tensor& x, double epsilon) {
  RequireMatrix(x, "LayerNorm");
  Tensor out = Tensor::Zeros(x.rows(), x.cols());
  const double n = static_cast<double>(x.cols());
  for (size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    double mean = std::accumulate(in.begin(), in.end(), 0.0) / n;
    double var = 0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + epsilon);
    auto o = out.row(r);
    for (size_t c = 0; c < in.size(); ++c) o[c] = (in[c] - mean) * inv;
  }
  return out;
}

Tensor MeanPool(const Tensor& x) {
  RequireMatrix(x, "MeanPool");
  if (x.rows() == 0) throw EmptySpan();
  Tensor out = Tensor::Zeros(1, x.cols());
  for (size_t r = 0; r < x.rows(); ++r)
    for (size_t c = 0; c < x.cols(); ++c) out.at(0, c) += x.at(r, c);
  for (double& v : out.data()) v /= static_cast<double>(x.rows());
  return out;
}

Tensor MaxPool(const Tensor& x) {
  RequireMatrix(x, "MaxPool");
  if (x.rows() == 0) throw EmptySpan();
  Tensor out({1, x.cols()}, std::vector<double>(x.row(0).begin(),
                                                x.row(0).end()));
  for (size_t r = 1; r < x.rows(); ++r)
    for (size_t c = 0; c < x.cols(); ++c)
      out.at(0, c) = std::max(out.at(0, c), x.at(r, c));
  return out;
}

Tensor ConcatCols(std::span<const Tensor> parts) {
  if (parts.empty()) return {};
  const size_t rows = parts[0].rows();
  size_t cols = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != rows) throw ShapeMismatch("ConcatCols row counts differ");
    cols += p.cols();
  }
  Tensor out = Tensor::Zeros(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    size_t offset = 0;
    for (const Tensor& p : parts) {
      auto src = p.row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + offset);
      offset += p.cols();
    }
  }
  return out;
}

Tensor ConcatRows(std::span<const Tensor> parts) {
  if (parts.empty()) return {};
  const size_t cols = parts[0].cols();
  std::vector<double> data;
  size_t rows = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != cols) throw ShapeMismatch("ConcatRows column counts differ");
    data.insert(data.end(), p.data().begin(), p.data().end());
    rows += p.rows();
  }
  return Tensor({rows, cols}, std::move(data));
}

Tensor CausalMask(size_t n) {
  Tensor m = Tensor::Zeros(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j <= i; ++j) m.at(i, j) = 1.0;
  return m;
}

}  // namespace g2

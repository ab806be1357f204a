#ifndef G2_TENSOR_H_
#define G2_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace g2 {

class ShapeMismatch : public std::invalid_argument {
 public:
  explicit ShapeMismatch(const std::string& what)
      : std::invalid_argument("shape mismatch: " + what) {}
};

class AllMaskedRow : public std::domain_error {
 public:
  explicit AllMaskedRow(size_t row)
      : std::domain_error("masked softmax row " + std::to_string(row) +
                          " has no unmasked entry"),
        row_(row) {}
  size_t row() const { return row_; }

 private:
  size_t row_;
};

class EmptySpan : public std::invalid_argument {
 public:
  EmptySpan() : std::invalid_argument("pooling over an empty span") {}
};

// Dense row-major tensor of doubles. Most kernels treat it as a matrix; a
// vector is a 1 x n matrix.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape);
  Tensor(std::vector<size_t> shape, std::vector<double> data);

  static Tensor Zeros(size_t rows, size_t cols);
  static Tensor Filled(size_t rows, size_t cols, double value);
  static Tensor Identity(size_t n);
  static Tensor FromRows(std::initializer_list<std::initializer_list<double>>);

  const std::vector<size_t>& shape() const { return shape_; }
  size_t size() const { return data_.size(); }
  size_t rows() const;
  size_t cols() const;

  double& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  std::span<double> row(size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }
  bool AllFinite() const;
  std::string ShapeString() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

enum class MaskMode {
  kAdditive,  // masked logits receive -inf before the softmax
  kLiteral,   // logits are multiplied by the 0/1 mask, then a plain softmax
};

// Forward kernels. All operate on 2-D tensors.
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);
Tensor Softmax(const Tensor& scores);
Tensor MaskedSoftmax(const Tensor& scores, const Tensor& mask,
                     MaskMode mode = MaskMode::kAdditive);
Tensor LayerNorm(const Tensor& x, double epsilon);
Tensor MeanPool(const Tensor& x);
Tensor MaxPool(const Tensor& x);
Tensor ConcatCols(std::span<const Tensor> parts);
Tensor ConcatRows(std::span<const Tensor> parts);

// Lower-triangular (causal) 0/1 mask.
Tensor CausalMask(size_t n);

}  // namespace g2

#endif  // G2_TENSOR_H_

#ifndef G2_AUTOGRAD_H_
#define G2_AUTOGRAD_H_

#include <deque>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "g2/tensor.h"

namespace g2 {

class NonFiniteLoss : public std::runtime_error {
 public:
  explicit NonFiniteLoss(const std::string& what)
      : std::runtime_error("non-finite loss: " + what) {}
};

// Graph-relevant parameters train with their own learning rate.
enum class ParamGroup { kGraphRelevant, kOther };

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  ParamGroup group = ParamGroup::kOther;

  void ZeroGrad() { grad = Tensor(value.shape()); }
};

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  size_t rows() const { return value().rows(); }
  size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode differentiation over a linear record of operations. A tape is
// single-threaded; independent tapes may run concurrently against the same
// (read-only) parameters.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  // With record_gradients == false nothing is retained for Backward(); use for
  // inference.
  explicit Tape(bool record_gradients = true)
      : record_gradients_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // One leaf per parameter per tape; gradients land in param.grad after
  // Backward().
  Var Leaf(Parameter& param);

  // Records the result of an op. `backward` receives d(loss)/d(result) and
  // must accumulate into its inputs via AccumulateGrad().
  Var Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var Record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  void Backward(Var root);

  const Tensor& value(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  void AccumulateGrad(int id, const Tensor& delta);
  // Mutable gradient buffer, allocated on first use. Only for inputs that
  // require gradients.
  Tensor& GradBuffer(int id);
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* borrowed = nullptr;
    Parameter* param = nullptr;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  bool record_gradients_;
  std::deque<Node> nodes_;  // deque keeps value references stable
  std::unordered_map<const Parameter*, int> leaves_;
};

// Differentiable ops. Shapes follow the Tensor kernels of the same name.
Var MatMul(Var a, Var b);
Var Transpose(Var a);
Var Add(Var a, Var b);
Var Mul(Var a, Var b);
Var AddRowBroadcast(Var x, Var row);
Var Scale(Var x, double factor);
Var Gelu(Var x);
Var LayerNorm(Var x, Var gain, Var bias, double epsilon);
Var MaskedSoftmax(Var scores, const Tensor& mask,
                  MaskMode mode = MaskMode::kAdditive);
Var SliceCols(Var x, size_t begin, size_t end);
Var ConcatCols(std::span<const Var> parts);
Var ConcatRows(std::span<const Var> parts);
Var GatherRows(Var table, std::span<const int> ids);
Var MeanRows(Var x);
Var MaxRows(Var x);
Var Sum(Var x);
// Mean negative log-likelihood of `targets` under row-wise softmax(logits),
// over rows whose mask entry is true.
Var NllLoss(Var logits, std::span<const int> targets,
            std::span<const bool> mask);

}  // namespace g2

#endif  // G2_AUTOGRAD_H_

#ifndef G2_NN_H_
#define G2_NN_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "g2/autograd.h"
#include "g2/tensor.h"

namespace g2 {

using ParamId = size_t;

// Owns every learnable tensor of a model. Layers refer to parameters by id so
// that a store (and anything indexing into it) is an ordinary copyable value.
class ParamStore {
 public:
  ParamId Add(std::string name, Tensor value, ParamGroup group);

  Parameter& operator[](ParamId id) { return params_[id]; }
  const Parameter& operator[](ParamId id) const { return params_[id]; }
  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  size_t size() const { return params_.size(); }
  std::optional<ParamId> Find(const std::string& name) const;

  void ZeroGrad();
  size_t ScalarCount() const;

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::vector<Parameter> params_;
};

struct LinearParams {
  ParamId weight = 0;            // in x out
  std::optional<ParamId> bias;   // 1 x out
};

struct LayerNormParams {
  ParamId gain = 0;
  ParamId bias = 0;
};

struct AttentionParams {
  LinearParams query, key, value, output;
};

struct FeedForwardParams {
  LinearParams expand, contract;
};

class Initializer {
 public:
  Initializer(uint64_t seed, double stddev) : rng_(seed), stddev_(stddev) {}

  Tensor Normal(size_t rows, size_t cols, double stddev);
  Tensor Normal(size_t rows, size_t cols) { return Normal(rows, cols, stddev_); }

 private:
  std::mt19937_64 rng_;
  double stddev_;
};

LinearParams AddLinear(ParamStore& store, Initializer& init,
                       const std::string& name, size_t in, size_t out,
                       ParamGroup group, bool with_bias = true);
LayerNormParams AddLayerNorm(ParamStore& store, const std::string& name,
                             size_t width, ParamGroup group);
// The key projection has no bias: softmax over keys is invariant to it.
AttentionParams AddAttention(ParamStore& store, Initializer& init,
                             const std::string& name, size_t width,
                             ParamGroup group);
FeedForwardParams AddFeedForward(ParamStore& store, Initializer& init,
                                 const std::string& name, size_t width,
                                 size_t hidden, ParamGroup group);

// Copies parameter values from `src` into `dst` (shapes must agree).
void CopyValues(ParamStore& store, const LinearParams& src, const LinearParams& dst);
void CopyValues(ParamStore& store, const AttentionParams& src,
                const AttentionParams& dst);

// x W (+ b)
Var Linear(Tape& tape, ParamStore& store, const LinearParams& p, Var x);
Var ApplyLayerNorm(Tape& tape, ParamStore& store, const LayerNormParams& p,
                   Var x, double epsilon = 1e-5);
Var FeedForward(Tape& tape, ParamStore& store, const FeedForwardParams& p,
                Var x);

// Scaled dot-product attention split over `heads`. `mask` (queries x keys,
// 0/1) is optional; every head sees the same mask.
Var MultiHeadAttention(Tape& tape, ParamStore& store, const AttentionParams& p,
                       Var queries, Var memory, const Tensor* mask,
                       size_t heads, MaskMode mode = MaskMode::kAdditive);

struct GradCheckReport {
  double max_relative_error = 0;
  std::string worst_parameter;
  size_t worst_index = 0;
  double analytic = 0;
  double numeric = 0;
  size_t checked = 0;
};

// Compares reverse-mode gradients of `loss` against central differences
// (f(x + eps) - f(x - eps)) / 2 eps, element by element over `params`.
// Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport FiniteDiffCheck(const std::function<Var(Tape&)>& loss,
                                const std::vector<Parameter*>& params,
                                double epsilon);

}  // namespace g2

#endif  // G2_NN_H_

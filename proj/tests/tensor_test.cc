#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "g2/tensor.h"
#include "support/oracles.h"

namespace g2 {
namespace {

using testing::Matrix;
using testing::MaxAbsDiff;
using testing::ToMatrix;

Tensor Random(std::mt19937_64& rng, size_t r, size_t c, double scale = 1.0) {
  std::normal_distribution<double> n(0, scale);
  Tensor t = Tensor::Zeros(r, c);
  for (double& v : t.data()) v = n(rng);
  return t;
}

Tensor RandomMask(std::mt19937_64& rng, size_t r, size_t c) {
  std::bernoulli_distribution keep(0.5);
  Tensor m = Tensor::Zeros(r, c);
  for (size_t i = 0; i < r; ++i) {
    for (size_t j = 0; j < c; ++j) m.at(i, j) = keep(rng);
    m.at(i, std::uniform_int_distribution<size_t>(0, c - 1)(rng)) = 1;
  }
  return m;
}

TEST(TensorTest, ConstructionAndShape) {
  const Tensor t = Tensor::FromRows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.at(1, 0), 4);
  EXPECT_EQ(t.ShapeString(), "[2x3]");
  EXPECT_EQ(Tensor::Identity(2), Tensor::FromRows({{1, 0}, {0, 1}}));
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), ShapeMismatch);
  EXPECT_THROW(Tensor::FromRows({{1, 2}, {3}}), ShapeMismatch);
}

TEST(TensorTest, AllFiniteDetectsNanAndInf) {
  Tensor t = Tensor::Zeros(2, 2);
  EXPECT_TRUE(t.AllFinite());
  t.at(1, 1) = std::nan("");
  EXPECT_FALSE(t.AllFinite());
  t.at(1, 1) = INFINITY;
  EXPECT_FALSE(t.AllFinite());
}

TEST(TensorKernelTest, MatMulMatchesNaiveLoops) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 1 + rng() % 6, k = 1 + rng() % 6, m = 1 + rng() % 6;
    const Tensor a = Random(rng, n, k), b = Random(rng, k, m);
    EXPECT_LE(MaxAbsDiff(testing::NaiveMatMul(ToMatrix(a), ToMatrix(b)), MatMul(a, b)), 1e-12);
  }
  EXPECT_THROW(MatMul(Tensor::Zeros(2, 3), Tensor::Zeros(2, 3)), ShapeMismatch);
}

TEST(TensorKernelTest, TransposeSwapsIndices) {
  const Tensor a = Tensor::FromRows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(Transpose(a), Tensor::FromRows({{1, 4}, {2, 5}, {3, 6}}));
}

TEST(TensorKernelTest, SoftmaxRowsSumToOneAndResistOverflow) {
  const Tensor s = Softmax(Tensor::FromRows({{1000, 1000}, {0, std::log(3.0)}}));
  EXPECT_DOUBLE_EQ(s.at(0, 0), 0.5);
  EXPECT_NEAR(s.at(1, 0), 0.25, 1e-15);
  EXPECT_NEAR(s.at(1, 1), 0.75, 1e-15);
}

TEST(TensorKernelTest, AdditiveMaskEqualsDeleteAndSoftmax) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t r = 1 + rng() % 5, c = 1 + rng() % 7;
    const Tensor s = Random(rng, r, c, 3.0), m = RandomMask(rng, r, c);
    const Tensor got = MaskedSoftmax(s, m);
    EXPECT_LE(MaxAbsDiff(testing::DeleteAndSoftmax(ToMatrix(s), ToMatrix(m)), got), 1e-15);
    for (size_t i = 0; i < got.size(); ++i) {
      if (m[i] == 0) {
        EXPECT_EQ(got[i], 0.0);
      }
    }
  }
}

TEST(TensorKernelTest, FullyMaskedRowThrows) {
  const Tensor s = Tensor::FromRows({{1, 2}, {3, 4}});
  const Tensor m = Tensor::FromRows({{1, 0}, {0, 0}});
  try {
    MaskedSoftmax(s, m);
    FAIL();
  } catch (const AllMaskedRow& e) {
    EXPECT_EQ(e.row(), 1u);
  }
  EXPECT_THROW(MaskedSoftmax(s, Tensor::Zeros(1, 2)), ShapeMismatch);
}

TEST(TensorKernelTest, LiteralMaskMultipliesLogits) {
  // [3, -1] * [1, 0] = [3, 0]; the masked key keeps weight 1 / (e^3 + 1).
  const Tensor got = MaskedSoftmax(Tensor::FromRows({{3, -1}}), Tensor::FromRows({{1, 0}}),
                                   MaskMode::kLiteral);
  const double e3 = std::exp(3.0);
  EXPECT_NEAR(got.at(0, 1), 1 / (e3 + 1), 1e-16);
  // An all-zero literal mask is a uniform distribution, not an error.
  const Tensor uniform = MaskedSoftmax(Tensor::FromRows({{5, 1}}), Tensor::Zeros(1, 2),
                                       MaskMode::kLiteral);
  EXPECT_EQ(uniform, Tensor::FromRows({{0.5, 0.5}}));
}

TEST(TensorKernelTest, LayerNormMatchesReference) {
  std::mt19937_64 rng(3);
  const Tensor x = Random(rng, 4, 6, 2.0);
  const Tensor ones = Tensor::Filled(1, 6, 1.0), zeros = Tensor::Zeros(1, 6);
  EXPECT_LE(MaxAbsDiff(testing::RefLayerNorm(ToMatrix(x), ones, zeros, 1e-5), LayerNorm(x, 1e-5)),
            1e-12);
}

TEST(TensorKernelTest, PoolingMatchesReferenceAndRejectsEmpty) {
  std::mt19937_64 rng(4);
  const Tensor x = Random(rng, 5, 3);
  const std::vector<double> ref = testing::RefPool(ToMatrix(x), {0, 1, 2, 3, 4});
  const Tensor mean = MeanPool(x), max = MaxPool(x);
  for (size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(mean[c], ref[c], 1e-12);
    EXPECT_EQ(max[c], ref[3 + c]);
  }
  EXPECT_THROW(MeanPool(Tensor::Zeros(0, 3)), EmptySpan);
  EXPECT_THROW(MaxPool(Tensor::Zeros(0, 3)), EmptySpan);
}

TEST(TensorKernelTest, ConcatAndCausalMask) {
  const Tensor a = Tensor::FromRows({{1}, {2}}), b = Tensor::FromRows({{3, 4}, {5, 6}});
  const Tensor cols[] = {a, b};
  EXPECT_EQ(ConcatCols(cols), Tensor::FromRows({{1, 3, 4}, {2, 5, 6}}));
  const Tensor rows[] = {b, Tensor::FromRows({{7, 8}})};
  EXPECT_EQ(ConcatRows(rows), Tensor::FromRows({{3, 4}, {5, 6}, {7, 8}}));
  const Tensor bad[] = {a, Tensor::Zeros(3, 1)};
  EXPECT_THROW(ConcatCols(bad), ShapeMismatch);
  EXPECT_EQ(CausalMask(3), Tensor::FromRows({{1, 0, 0}, {1, 1, 0}, {1, 1, 1}}));
}

}  // namespace
}  // namespace g2

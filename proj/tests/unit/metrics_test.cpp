#include <gtest/gtest.h>

#include <random>

#include "frnet/error.hpp"
#include "frnet/metrics.hpp"
#include "test_support.hpp"

namespace frnet {
namespace {

Tensor mask(const std::vector<int>& bits) {
  std::vector<double> v(bits.begin(), bits.end());
  return Tensor::from_data({1, 1, 1, static_cast<std::int64_t>(v.size())}, v);
}

// Dice from explicit set counts.
double dice_from_sets(const std::vector<int>& x, const std::vector<int>& y) {
  int inter = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] && y[i];
    sx += x[i];
    sy += y[i];
  }
  return sx + sy == 0 ? 1.0 : 2.0 * inter / (sx + sy);
}

TEST(DiceScore, Identities) {
  EXPECT_EQ(dice_score(mask({1, 0, 1, 1}), mask({1, 0, 1, 1})), 1.0);
  EXPECT_EQ(dice_score(mask({1, 1, 0, 0}), mask({0, 0, 1, 1})), 0.0);
  EXPECT_EQ(dice_score(mask({0, 0, 0}), mask({0, 0, 0})), 1.0);
}

TEST(DiceScore, SetCountCase) {
  const std::vector<int> x{1, 1, 1, 0, 0, 0, 0, 0};  // |X| = 3
  const std::vector<int> y{0, 1, 1, 1, 1, 1, 0, 0};  // |Y| = 5, overlap 2
  EXPECT_EQ(dice_from_sets(x, y), 0.5);
  EXPECT_EQ(dice_score(mask(x), mask(y)), 0.5);
}

TEST(DiceScore, SymmetricOnRandomPairs) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution bit(0.3);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> x(40), y(40);
    for (int i = 0; i < 40; ++i) {
      x[i] = bit(rng);
      y[i] = bit(rng);
    }
    EXPECT_EQ(dice_score(mask(x), mask(y)), dice_score(mask(y), mask(x)));
    EXPECT_NEAR(dice_score(mask(x), mask(y)), dice_from_sets(x, y), 1e-15);
  }
}

TEST(DiceScore, RejectsNonBinaryAndShapeMismatch) {
  const Tensor soft = Tensor::from_data({1, 1, 1, 2}, std::vector<double>{0.5, 1.0});
  EXPECT_THROW((void)dice_score(soft, mask({1, 1})), ContractError);
  EXPECT_THROW((void)accuracy(soft, mask({1, 1})), ContractError);
  EXPECT_THROW((void)dice_score(mask({1, 1, 0}), mask({1, 1})), DimensionError);
}

TEST(Accuracy, Cases) {
  EXPECT_EQ(accuracy(mask({1, 0, 1}), mask({1, 0, 1})), 1.0);
  EXPECT_EQ(accuracy(mask({1, 0, 1}), mask({0, 1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(accuracy(mask({1, 1, 1, 1, 1, 0, 0, 0, 0, 1}), mask({1, 1, 1, 1, 1, 0, 0, 0, 0, 0})),
                   0.9);
}

TEST(DiceLoss, PerfectOverlapIsZero) {
  const Tensor ones = Tensor::full({2, 1, 4, 4}, 1.0, DType::Float64);
  EXPECT_NEAR(dice_loss(ones, ones, 1.0).item(), 0.0, 1e-12);
}

TEST(DiceLoss, DisjointApproachesOne) {
  const Tensor p = Tensor::full({1, 1, 4, 4}, 1.0, DType::Float64);
  const Tensor t = Tensor::zeros({1, 1, 4, 4}, DType::Float64);
  EXPECT_NEAR(dice_loss(p, t, 1e-8).item(), 1.0, 1e-8);
}

TEST(DiceLoss, HardMaskHalfOverlap) {
  EXPECT_NEAR(dice_loss(mask({1, 1, 0, 0}), mask({0, 1, 1, 0}), 1e-8).item(), 0.5, 1e-8);
}

TEST(DiceLoss, PlusScoreIsOneOnHardMasks) {
  std::mt19937_64 rng(2);
  std::bernoulli_distribution bit(0.4);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> x(64), y(64);
    for (int i = 0; i < 64; ++i) {
      x[i] = bit(rng);
      y[i] = bit(rng) || i == 0;
    }
    EXPECT_NEAR(dice_loss(mask(x), mask(y), 1e-8).item() + dice_score(mask(x), mask(y)), 1.0, 1e-6);
  }
}

TEST(DiceLoss, AveragedPerImage) {
  // Image 0 perfect, image 1 disjoint: mean of 0 and ~1.
  const Tensor p = Tensor::from_data({2, 1, 1, 2}, std::vector<double>{1, 0, 1, 0});
  const Tensor t = Tensor::from_data({2, 1, 1, 2}, std::vector<double>{1, 0, 0, 1});
  EXPECT_NEAR(dice_loss(p, t, 1e-8).item(), 0.5, 1e-8);
}

TEST(DiceLoss, BoundedOnRandomInputs) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Tensor p = testing::random_tensor({2, 1, 5, 5}, s, DType::Float64, 0.001, 0.999);
    Tensor t = testing::random_tensor({2, 1, 5, 5}, s + 100, DType::Float64, 0, 1);
    for (double& v : t.data<double>()) v = v > 0.5;
    const double l = dice_loss(p, t).item();
    EXPECT_GE(l, 0.0);
    EXPECT_LT(l, 1.0);
  }
}

TEST(DiceLoss, Errors) {
  EXPECT_THROW((void)dice_loss(mask({1, 0}), mask({1, 0, 1})), DimensionError);
  EXPECT_THROW((void)dice_loss(Tensor::zeros({0, 1, 2, 2}), Tensor::zeros({0, 1, 2, 2})),
               ContractError);
}

TEST(Binarize, ThresholdInclusive) {
  const Tensor p = Tensor::from_data({4}, std::vector<double>{0.2, 0.5, 0.51, 0.49});
  EXPECT_EQ(binarize(p).to_vector(), (std::vector<double>{0, 1, 1, 0}));
}

}  // namespace
}  // namespace frnet

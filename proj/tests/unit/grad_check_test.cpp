#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "frnet/autograd.hpp"
#include "frnet/conv.hpp"
#include "frnet/grad_check.hpp"
#include "frnet/metrics.hpp"
#include "frnet/norm.hpp"
#include "frnet/ops.hpp"
#include "frnet/resample.hpp"
#include "test_support.hpp"

namespace frnet {
namespace {

using testing::random_tensor;

Tensor leaf(const Shape& s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return random_tensor(s, seed, DType::Float64, lo, hi).set_requires_grad(true);
}

// Projects a tensor onto fixed random weights so gradients are dense and
// not trivially symmetric.
Tensor project(const Tensor& y, std::uint64_t seed) {
  return sum(mul(y, random_tensor(y.shape(), seed + 1000)));
}

void expect_passes(const std::function<Tensor()>& f, const std::vector<NamedTensor>& in,
                   double tol = 1e-4) {
  GradCheckOptions opts;
  opts.tolerance = tol;
  const GradCheckResult r = grad_check(f, in, opts);
  EXPECT_TRUE(r.passed) << "max rel err " << r.max_relative_error << " at " << r.worst_entry
                        << " " << r.failure;
  EXPECT_LT(r.max_relative_error, tol);
  EXPECT_GT(r.entries_checked, 0u);
}

class GradAtPoint : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GradAtPoint, Elementwise) {
  const auto s = GetParam();
  Tensor a = leaf({2, 3, 4}, s), b = leaf({2, 3, 4}, s + 1);
  expect_passes([&] { return project(add(a, b), s); }, {{"a", a}, {"b", b}});
  expect_passes([&] { return project(mul(a, b), s); }, {{"a", a}, {"b", b}});
  expect_passes([&] { return project(scale(a, -1.7), s); }, {{"a", a}});
  expect_passes([&] { return mean(mul(a, a)); }, {{"a", a}});
}

TEST_P(GradAtPoint, Activations) {
  const auto s = GetParam();
  Tensor x = leaf({3, 7}, s, -3.0, 3.0);
  expect_passes([&] { return project(relu(x), s); }, {{"x", x}});
  expect_passes([&] { return project(gelu(x), s); }, {{"x", x}});
  expect_passes([&] { return project(sigmoid(x), s); }, {{"x", x}});
}

TEST_P(GradAtPoint, DenseConv) {
  const auto s = GetParam();
  for (int k : {1, 3, 5}) {
    const ConvSpec spec = dense_conv(3, 2, k);
    Tensor x = leaf({2, 3, 5, 6}, s), w = leaf(spec.weight_shape(), s + 1),
           b = leaf({2}, s + 2);
    expect_passes([&] { return project(conv2d(x, w, b, spec), s); },
                  {{"x", x}, {"w", w}, {"b", b}});
  }
}

TEST_P(GradAtPoint, GroupedAndDepthwiseConv) {
  const auto s = GetParam();
  ConvSpec grouped = dense_conv(4, 6, 3);
  grouped.groups = 2;
  Tensor x = leaf({1, 4, 5, 5}, s), w = leaf(grouped.weight_shape(), s + 1), b = leaf({6}, s + 2);
  expect_passes([&] { return project(conv2d(x, w, b, grouped), s); },
                {{"x", x}, {"w", w}, {"b", b}});
  const ConvSpec dw = depthwise_conv(3, 7);
  Tensor xd = leaf({2, 3, 6, 5}, s + 3), wd = leaf(dw.weight_shape(), s + 4),
         bd = leaf({3}, s + 5);
  expect_passes([&] { return project(depthwise_conv2d(xd, wd, bd, dw), s); },
                {{"x", xd}, {"w", wd}, {"b", bd}});
}

TEST_P(GradAtPoint, SigmoidOfConv) {
  const auto s = GetParam();
  const ConvSpec spec = dense_conv(2, 2, 3);
  Tensor x = leaf({1, 2, 4, 4}, s), w = leaf(spec.weight_shape(), s + 1), b = leaf({2}, s + 2);
  expect_passes([&] { return sum(sigmoid(conv2d(x, w, b, spec))); },
                {{"x", x}, {"w", w}, {"b", b}});
}

TEST_P(GradAtPoint, BatchNormTrainAndEval) {
  const auto s = GetParam();
  Tensor x = leaf({2, 3, 3, 4}, s), g = leaf({3}, s + 1, 0.5, 1.5), b = leaf({3}, s + 2);
  Tensor rm = Tensor::zeros({3}, DType::Float64), rv = Tensor::full({3}, 1.0, DType::Float64);
  expect_passes([&] { return project(batch_norm(x, g, b, rm, rv, NormMode::Train), s); },
                {{"x", x}, {"gamma", g}, {"beta", b}});
  Tensor rm2 = random_tensor({3}, s + 3), rv2 = random_tensor({3}, s + 4, DType::Float64, 0.5, 2.0);
  expect_passes([&] { return project(batch_norm(x, g, b, rm2, rv2, NormMode::Eval), s); },
                {{"x", x}, {"gamma", g}, {"beta", b}});
}

TEST_P(GradAtPoint, ChannelNorm) {
  const auto s = GetParam();
  Tensor x = leaf({2, 4, 3, 3}, s), g = leaf({4}, s + 1), b = leaf({4}, s + 2);
  expect_passes([&] { return project(channel_norm(x, g, b), s); },
                {{"x", x}, {"gamma", g}, {"beta", b}});
}

TEST_P(GradAtPoint, BaselineResampling) {
  const auto s = GetParam();
  Tensor x = leaf({2, 2, 4, 6}, s), y = leaf({2, 3, 4, 6}, s + 1);
  expect_passes([&] { return project(baseline::max_pool2x2(x), s); }, {{"x", x}});
  expect_passes([&] { return project(baseline::upsample_bilinear2x(x), s); }, {{"x", x}});
  expect_passes([&] { return project(baseline::concat_channels(x, y), s); },
                {{"x", x}, {"y", y}});
}

TEST_P(GradAtPoint, DiceLoss) {
  const auto s = GetParam();
  Tensor p = leaf({2, 1, 4, 4}, s, 0.05, 0.95);
  Tensor t = random_tensor({2, 1, 4, 4}, s + 1, DType::Float64, 0.0, 1.0);
  auto tv = t.data<double>();
  for (double& v : tv) v = v > 0.5 ? 1.0 : 0.0;
  expect_passes([&] { return dice_loss(p, t, 1.0); }, {{"pred", p}});
  expect_passes([&] { return dice_loss(p, t, 1e-3); }, {{"pred", p}});
}

INSTANTIATE_TEST_SUITE_P(ThreePoints, GradAtPoint, ::testing::Values(1u, 2u, 3u));

TEST(GradCheck, LinearFunctionIsExact) {
  Tensor w = leaf({3, 4}, 1);
  const Tensor x = random_tensor({3, 4}, 2);
  const GradCheckResult r = grad_check([&] { return sum(mul(w, x)); }, {{"w", w}});
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_relative_error, 1e-10);
}

// y = x^2 with the backward rule deliberately wrong (3x instead of 2x).
Tensor corrupted_square(const Tensor& x) {
  Tensor out = mul(x.detach(), x.detach());
  autograd::attach(out, {x}, "bad_square", [x](const Tensor& o) {
    auto gx = autograd::grad_buffer<double>(x);
    auto gy = o.grad<double>();
    auto xs = x.data<double>();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * 3.0 * xs[i];
  });
  return out;
}

TEST(GradCheck, DetectsCorruptedBackwardRule) {
  Tensor x = leaf({5}, 3);
  const GradCheckResult r = grad_check([&] { return sum(corrupted_square(x)); }, {{"x", x}});
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_relative_error, 1e-2);
  EXPECT_EQ(r.worst_entry.rfind("x[", 0), 0u);
}

Tensor nan_gradient(const Tensor& x) {
  Tensor out = x.detach();
  autograd::attach(out, {x}, "nan_grad", [x](const Tensor&) {
    auto gx = autograd::grad_buffer<double>(x);
    gx[0] = std::numeric_limits<double>::quiet_NaN();
  });
  return out;
}

TEST(GradCheck, NonFiniteGradientReportedWithName) {
  Tensor x = leaf({3}, 4);
  const GradCheckResult r = grad_check([&] { return sum(nan_gradient(x)); }, {{"weights", x}});
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.failure.find("weights"), std::string::npos);
}

TEST(GradCheck, RestoresInputs) {
  Tensor x = leaf({4}, 5);
  const auto before = x.to_vector();
  (void)grad_check([&] { return sum(gelu(x)); }, {{"x", x}});
  EXPECT_EQ(x.to_vector(), before);
}

}  // namespace
}  // namespace frnet

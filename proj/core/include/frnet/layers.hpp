#pragma once

#include <random>

#include "frnet/conv.hpp"
#include "frnet/module.hpp"
#include "frnet/norm.hpp"

namespace frnet {

using Rng = std::mt19937_64;

// Weights and bias drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
class Conv2d : public Module {
 public:
  Conv2d(const ConvSpec& spec, Rng& rng);

  Tensor forward(const Tensor& x) override;

  const ConvSpec& spec() const noexcept { return spec_; }
  Tensor& weight() noexcept { return weight_; }
  Tensor& bias() noexcept { return bias_; }

 private:
  ConvSpec spec_;
  Tensor weight_;
  Tensor bias_;
};

class BatchNorm2d : public Module {
 public:
  explicit BatchNorm2d(std::int64_t channels, NormOptions options = {});

  Tensor forward(const Tensor& x) override;

  Tensor& gamma() noexcept { return gamma_; }
  Tensor& beta() noexcept { return beta_; }
  Tensor& running_mean() noexcept { return running_mean_; }
  Tensor& running_var() noexcept { return running_var_; }

 private:
  NormOptions options_;
  Tensor gamma_, beta_, running_mean_, running_var_;
};

class ChannelNorm : public Module {
 public:
  explicit ChannelNorm(std::int64_t channels, NormOptions options = {});

  Tensor forward(const Tensor& x) override;

  Tensor& gamma() noexcept { return gamma_; }
  Tensor& beta() noexcept { return beta_; }

 private:
  NormOptions options_;
  Tensor gamma_, beta_;
};

}  // namespace frnet

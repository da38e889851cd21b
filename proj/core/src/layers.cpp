#include "frnet/layers.hpp"

#include <cmath>

namespace frnet {

namespace {

Tensor uniform(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<float> values(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& v : values) v = static_cast<float>(dist(rng));
  return Tensor::from_data(std::move(shape), std::move(values));
}

}  // namespace

Conv2d::Conv2d(const ConvSpec& spec, Rng& rng) : spec_(spec) {
  spec_.validate();
  const Shape ws = spec_.weight_shape();
  const double fan_in = static_cast<double>(ws[1] * ws[2] * ws[3]);
  const double bound = 1.0 / std::sqrt(fan_in);
  weight_ = register_parameter("weight", uniform(ws, bound, rng));
  if (spec_.bias) {
    bias_ = register_parameter("bias", uniform({spec_.out_channels}, bound, rng));
  }
}

Tensor Conv2d::forward(const Tensor& x) {
  return conv2d(x, weight_, bias_, spec_);
}

BatchNorm2d::BatchNorm2d(std::int64_t channels, NormOptions options)
    : options_(options) {
  if (channels <= 0) throw ConfigError("batch_norm: channels must be positive");
  gamma_ = register_parameter("gamma", Tensor::full({channels}, 1.0));
  beta_ = register_parameter("beta", Tensor::zeros({channels}));
  running_mean_ = register_buffer("running_mean", Tensor::zeros({channels}));
  running_var_ = register_buffer("running_var", Tensor::full({channels}, 1.0));
}

Tensor BatchNorm2d::forward(const Tensor& x) {
  return batch_norm(x, gamma_, beta_, running_mean_, running_var_,
                    is_training() ? NormMode::Train : NormMode::Eval, options_);
}

ChannelNorm::ChannelNorm(std::int64_t channels, NormOptions options)
    : options_(options) {
  if (channels <= 0) {
    throw ConfigError("channel_norm: channels must be positive");
  }
  gamma_ = register_parameter("gamma", Tensor::full({channels}, 1.0));
  beta_ = register_parameter("beta", Tensor::zeros({channels}));
}

Tensor ChannelNorm::forward(const Tensor& x) {
  return channel_norm(x, gamma_, beta_, options_);
}

}  // namespace frnet

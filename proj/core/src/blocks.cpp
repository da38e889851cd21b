#include "frnet/blocks.hpp"

#include "frnet/ops.hpp"

namespace frnet {

namespace {

void check_channels(const char* op, const Tensor& x, std::int64_t channels) {
  if (x.rank() != 4) {
    throw DimensionError(op, "rank", 4, static_cast<std::int64_t>(x.rank()));
  }
  if (x.dim(1) != channels) {
    throw DimensionError(op, "channels", channels, x.dim(1));
  }
}

}  // namespace

std::string_view family_name(BlockFamily family) {
  switch (family) {
    case BlockFamily::Residual:
      return "residual";
    case BlockFamily::ConvNeXt:
      return "convnext";
    case BlockFamily::ConvNeXt3x3:
      return "convnext_3x3";
    case BlockFamily::RecurrentConvNeXt:
      return "recurrent_convnext";
  }
  return "unknown";
}

BlockFamily parse_family(std::string_view name) {
  for (auto f : {BlockFamily::Residual, BlockFamily::ConvNeXt,
                 BlockFamily::ConvNeXt3x3, BlockFamily::RecurrentConvNeXt}) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown block family '" + std::string(name) + "'");
}

BlockConfig BlockConfig::for_family(BlockFamily family, std::int64_t channels,
                                    int recurrence_steps) {
  BlockConfig c;
  c.family = family;
  c.channels = channels;
  c.recurrence_steps = recurrence_steps;
  c.expansion = family == BlockFamily::ConvNeXt ? 4 : 1;
  return c;
}

void BlockConfig::validate() const {
  if (channels <= 0) throw ConfigError("block channels must be positive");
  if (recurrence_steps < 1) {
    throw ConfigError("recurrence_steps must be >= 1, got " +
                      std::to_string(recurrence_steps));
  }
  if (expansion < 1) throw ConfigError("block expansion must be >= 1");
  if (family == BlockFamily::RecurrentConvNeXt && expansion != 1) {
    throw ConfigError(
        "recurrent_convnext re-injects its input and needs expansion 1");
  }
}

Tensor activate(const Tensor& x, Activation act) {
  switch (act) {
    case Activation::Relu:
      return relu(x);
    case Activation::Gelu:
      return gelu(x);
    case Activation::Identity:
      break;
  }
  return x;
}

Tensor recurrent_conv(const Tensor& x, Conv2d& conv, int steps,
                      Activation act, Module* norm) {
  if (steps < 1) {
    throw ConfigError("recurrent_conv: steps must be >= 1, got " +
                      std::to_string(steps));
  }
  auto stage = [&](const Tensor& in) {
    Tensor h = conv(in);
    if (norm) h = (*norm)(h);
    return activate(h, act);
  };
  Tensor y = stage(x);
  for (int r = 1; r < steps; ++r) y = stage(x + y);
  return y;
}

ResidualBlock::ResidualBlock(std::int64_t channels, Rng& rng)
    : channels_(channels) {
  if (channels <= 0) throw ConfigError("block channels must be positive");
  conv1_ = &register_module(
      "conv1", std::make_unique<Conv2d>(dense_conv(channels, channels, 3), rng));
  bn1_ = &register_module("bn1", std::make_unique<BatchNorm2d>(channels));
  conv2_ = &register_module(
      "conv2", std::make_unique<Conv2d>(dense_conv(channels, channels, 3), rng));
  bn2_ = &register_module("bn2", std::make_unique<BatchNorm2d>(channels));
}

Tensor ResidualBlock::forward(const Tensor& x) {
  check_channels("residual_block", x, channels_);
  Tensor h = relu((*bn1_)((*conv1_)(x)));
  h = (*bn2_)((*conv2_)(h));
  return relu(x + h);
}

ConvNeXtBlock::ConvNeXtBlock(const BlockConfig& config, Rng& rng)
    : config_(config) {
  config_.validate();
  if (config_.family == BlockFamily::Residual) {
    throw ConfigError("ConvNeXtBlock cannot build the residual family");
  }
  const auto c = config_.channels;
  const auto hidden = c * config_.expansion;
  const std::int64_t k = config_.family == BlockFamily::ConvNeXt ? 1 : 3;
  dw_ = &register_module("dw",
                         std::make_unique<Conv2d>(depthwise_conv(c, 7), rng));
  norm_ = &register_module("norm", std::make_unique<ChannelNorm>(c));
  first_ = &register_module(
      "conv1", std::make_unique<Conv2d>(dense_conv(c, hidden, k), rng));
  second_ = &register_module(
      "conv2", std::make_unique<Conv2d>(dense_conv(hidden, c, k), rng));
}

void ConvNeXtBlock::set_recurrence_steps(int steps) {
  BlockConfig next = config_;
  next.recurrence_steps = steps;
  next.validate();
  config_ = next;
}

Tensor ConvNeXtBlock::forward(const Tensor& x) {
  check_channels(family_name(config_.family).data(), x, config_.channels);
  Tensor h = (*norm_)((*dw_)(x));
  if (config_.family == BlockFamily::ConvNeXt) {
    h = (*second_)(gelu((*first_)(h)));
  } else {
    const int steps = config_.effective_recurrence();
    h = recurrent_conv(h, *first_, steps, Activation::Gelu);
    h = recurrent_conv(h, *second_, steps, Activation::Gelu);
  }
  return x + h;
}

std::unique_ptr<Module> make_block(const BlockConfig& config, Rng& rng) {
  config.validate();
  if (config.family == BlockFamily::Residual) {
    return std::make_unique<ResidualBlock>(config.channels, rng);
  }
  return std::make_unique<ConvNeXtBlock>(config, rng);
}

}  // namespace frnet

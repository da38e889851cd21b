#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "frnet/layers.hpp"

namespace frnet {

// Block families of the component ablation, from the plain ResNet block to
// the recurrent ConvNeXt block used by FRNet.
enum class BlockFamily {
  Residual,           // conv3x3-BN-ReLU-conv3x3-BN, skip, ReLU
  ConvNeXt,           // dw7x7, norm, 1x1 expand, GELU, 1x1 project
  ConvNeXt3x3,        // dw7x7, norm, 3x3-GELU, 3x3-GELU
  RecurrentConvNeXt,  // as ConvNeXt3x3 with each 3x3 stage recurrent
};

std::string_view family_name(BlockFamily family);
BlockFamily parse_family(std::string_view name);

struct BlockConfig {
  BlockFamily family = BlockFamily::RecurrentConvNeXt;
  std::int64_t channels = 32;
  int recurrence_steps = 2;
  std::int64_t expansion = 1;

  // Defaults for a family: expansion 4 for plain ConvNeXt, 1 otherwise.
  static BlockConfig for_family(BlockFamily family, std::int64_t channels = 32,
                                int recurrence_steps = 2);

  // Recurrence only applies to the recurrent family; others run once.
  int effective_recurrence() const {
    return family == BlockFamily::RecurrentConvNeXt ? recurrence_steps : 1;
  }
  void validate() const;
};

enum class Activation { Identity, Relu, Gelu };

Tensor activate(const Tensor& x, Activation act);

// Shared-weight recurrence with input re-injection:
//   y0 = act(norm(conv(x)));  yr = act(norm(conv(x + y{r-1})))
// and returns y{steps-1}. `norm` may be null. Parameter count does not
// depend on `steps`.
Tensor recurrent_conv(const Tensor& x, Conv2d& conv, int steps,
                      Activation act, Module* norm = nullptr);

class ResidualBlock : public Module {
 public:
  ResidualBlock(std::int64_t channels, Rng& rng);

  Tensor forward(const Tensor& x) override;

  Conv2d& conv1() { return *conv1_; }
  Conv2d& conv2() { return *conv2_; }
  BatchNorm2d& bn1() { return *bn1_; }
  BatchNorm2d& bn2() { return *bn2_; }

 private:
  std::int64_t channels_;
  Conv2d* conv1_;
  BatchNorm2d* bn1_;
  Conv2d* conv2_;
  BatchNorm2d* bn2_;
};

class ConvNeXtBlock : public Module {
 public:
  ConvNeXtBlock(const BlockConfig& config, Rng& rng);

  Tensor forward(const Tensor& x) override;

  const BlockConfig& config() const noexcept { return config_; }
  // Overrides the recurrence depth without touching parameters.
  void set_recurrence_steps(int steps);

  Conv2d& depthwise() { return *dw_; }
  ChannelNorm& norm() { return *norm_; }
  Conv2d& first() { return *first_; }
  Conv2d& second() { return *second_; }

 private:
  BlockConfig config_;
  Conv2d* dw_;
  ChannelNorm* norm_;
  Conv2d* first_;
  Conv2d* second_;
};

std::unique_ptr<Module> make_block(const BlockConfig& config, Rng& rng);

}  // namespace frnet

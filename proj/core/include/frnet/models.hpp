#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frnet/blocks.hpp"

namespace frnet {

enum class Arch { FRNetBase, FRNet, UNetBaseline };

std::string_view arch_name(Arch arch);
Arch parse_arch(std::string_view name);

struct ModelConfig {
  Arch arch = Arch::FRNet;
  std::int64_t in_channels = 1;
  std::int64_t channels = 32;
  int num_blocks = 6;
  int recurrence_steps = 2;
  // Overrides the arch's block family (ablation runs); FRNet-family only.
  std::optional<BlockFamily> block_family;
  std::int64_t unet_base_channels = 44;
  int unet_depth = 4;

  static ModelConfig for_arch(Arch arch);

  BlockFamily family() const;
  BlockConfig block_config() const;
  void validate() const;

  // `key=value` lines, the text block stored in checkpoints.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

// A segmentation network mapping [N, in_channels, H, W] to per-pixel
// vessel probabilities [N, 1, H, W].
class SegmentationModel : public Module {
 public:
  SegmentationModel(ModelConfig config, std::uint64_t seed)
      : config_(std::move(config)), seed_(seed) {}

  const ModelConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Throws DimensionError when the input cannot be processed as-is.
  virtual void check_input(const Shape& shape) const;

 protected:
  ModelConfig config_;
  std::uint64_t seed_;
};

// Full-resolution network: stem (3x3 conv, BN, ReLU), a stack of
// shape-preserving blocks, 1x1 head and sigmoid. No pooling or upsampling.
class FRNetModel : public SegmentationModel {
 public:
  FRNetModel(ModelConfig config, std::uint64_t seed);

  Tensor forward(const Tensor& x) override;

  std::size_t num_blocks() const { return blocks_.size(); }
  Module& block(std::size_t i) { return *blocks_.at(i); }
  // Changes R on every recurrent block; parameters are unaffected.
  void set_recurrence_steps(int steps);

 private:
  Conv2d* stem_conv_;
  BatchNorm2d* stem_norm_;
  std::vector<Module*> blocks_;
  Conv2d* head_;
};

// Encoder-decoder baseline with skip connections: double 3x3 conv stages,
// 2x2 max pooling, bilinear upsampling, channels doubling per level.
class UNetModel : public SegmentationModel {
 public:
  UNetModel(ModelConfig config, std::uint64_t seed);

  Tensor forward(const Tensor& x) override;
  void check_input(const Shape& shape) const override;

 private:
  std::vector<Module*> encoders_;
  std::vector<Module*> decoders_;
  Conv2d* head_;
};

std::unique_ptr<SegmentationModel> build_model(const ModelConfig& config,
                                               std::uint64_t seed);
std::unique_ptr<SegmentationModel> build_unet_baseline(
    const ModelConfig& config, std::uint64_t seed);

// Validates the batch shape, then runs the network.
Tensor model_forward(SegmentationModel& model, const Tensor& batch);

}  // namespace frnet

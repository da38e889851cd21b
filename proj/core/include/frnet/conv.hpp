#pragma once

#include <cstdint>

#include "frnet/tensor.hpp"

namespace frnet {

// 2-D convolution at stride 1 with "same" padding (kernel/2 on each side).
// Only odd kernels are representable, so spatial size is always preserved.
struct ConvSpec {
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  std::int64_t kernel_h = 3;
  std::int64_t kernel_w = 3;
  std::int64_t groups = 1;  // 1: dense, == channels: depthwise
  bool bias = true;

  static constexpr std::int64_t stride = 1;

  std::int64_t pad_h() const { return kernel_h / 2; }
  std::int64_t pad_w() const { return kernel_w / 2; }
  bool is_depthwise() const {
    return groups > 1 && groups == in_channels && groups == out_channels;
  }
  // (out_channels, in_channels / groups, kernel_h, kernel_w)
  Shape weight_shape() const;
  std::int64_t param_count() const;

  // Throws ConfigError on non-positive sizes, even kernels, or groups that
  // do not divide both channel counts.
  void validate() const;
};

ConvSpec dense_conv(std::int64_t in, std::int64_t out, std::int64_t kernel,
                    bool bias = true);
ConvSpec depthwise_conv(std::int64_t channels, std::int64_t kernel,
                        bool bias = true);

enum class ConvAlgorithm {
  Auto,       // depthwise kernel for depthwise specs, im2col otherwise
  Direct,     // naive loop nest; slow, kept as the reference path
  Im2col,     // tiled im2col + GEMM
  Depthwise,  // row-vectorized direct kernel, depthwise specs only
};

// input [N, Ci, H, W], weight spec.weight_shape(), bias [Co] or undefined.
// The algorithm selects the forward kernel; gradients always use the fast
// kernels (input gradient is a same-padded convolution with the flipped,
// transposed weight).
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const ConvSpec& spec,
              ConvAlgorithm algorithm = ConvAlgorithm::Auto);

// Per-channel convolution; requires spec.is_depthwise() or a single
// channel with groups == 1.
Tensor depthwise_conv2d(const Tensor& input, const Tensor& weight,
                        const Tensor& bias, const ConvSpec& spec);

}  // namespace frnet

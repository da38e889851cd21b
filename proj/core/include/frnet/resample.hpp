#pragma once

#include "frnet/tensor.hpp"

// Resolution-changing primitives used only by the encoder-decoder baseline.
// The full-resolution networks never include this header.
namespace frnet::baseline {

// 2x2 max pooling, stride 2. H and W must be even.
Tensor max_pool2x2(const Tensor& x);

// 2x bilinear upsampling, half-pixel centers (align_corners = false).
Tensor upsample_bilinear2x(const Tensor& x);

// Concatenates [N, Ca, H, W] and [N, Cb, H, W] along channels.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace frnet::baseline

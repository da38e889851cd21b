#pragma once

#include "frnet/tensor.hpp"

namespace frnet {

struct NormOptions {
  double eps = 1e-5;
  double momentum = 0.1;  // batch norm running-stat update rate
};

enum class NormMode { Train, Eval };

// Per-channel normalization over (N, H, W). Train mode normalizes with the
// batch statistics and updates the running stats in place (running_var
// tracks the unbiased variance); eval mode uses the running stats.
// gamma, beta, running_mean, running_var have shape [C].
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Tensor& running_mean, Tensor& running_var, NormMode mode,
                  const NormOptions& options = {});

// Normalizes the channel vector at every (n, h, w), then applies a
// per-channel affine. With a single channel the output equals beta.
Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                    const NormOptions& options = {});

}  // namespace frnet

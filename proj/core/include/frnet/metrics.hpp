#pragma once

#include "frnet/tensor.hpp"

namespace frnet {

// Soft Dice loss averaged over the batch axis:
//   1 - (2 * sum(p * t) + eps) / (sum(p) + sum(t) + eps)   per sample.
// pred holds probabilities, target is binary; both [N, ...] of equal shape.
// Differentiable with respect to pred.
Tensor dice_loss(const Tensor& pred, const Tensor& target,
                 double smooth_eps = 1.0);

// 2|X n Y| / (|X| + |Y|) on binary masks; 1.0 when both are empty.
// Throws ContractError for non-binary values.
double dice_score(const Tensor& pred_mask, const Tensor& target_mask);

// Fraction of pixels where the binary masks agree.
double accuracy(const Tensor& pred_mask, const Tensor& target_mask);

// 1 where value >= threshold, else 0.
Tensor binarize(const Tensor& probabilities, double threshold = 0.5);

}  // namespace frnet

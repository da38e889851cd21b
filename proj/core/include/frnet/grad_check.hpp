#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "frnet/tensor.hpp"

namespace frnet {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor; keeps entries whose true gradient is zero (rounding
  // noise of order eps * |loss| / step) from dominating the relative error.
  double scale_floor = 1e-5;
  // 0 checks every entry; otherwise a seeded random subset per tensor.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_entry;  // "<name>[<flat index>]"
  std::string failure;      // non-empty on a non-finite gradient
  std::size_t entries_checked = 0;
  bool passed = false;
};

// Compares reverse-mode gradients of the scalar `loss` with central
// differences, perturbing each selected entry of `inputs` in place. Relative
// error is |analytic - numeric| / max(|analytic|, |numeric|, scale_floor). The
// function must be deterministic; inputs must require grad and should be
// float64 for meaningful tolerances.
GradCheckResult grad_check(const std::function<Tensor()>& loss,
                           const std::vector<NamedTensor>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace frnet

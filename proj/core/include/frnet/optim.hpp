#pragma once

#include <cstdint>
#include <vector>

#include "frnet/tensor.hpp"

namespace frnet {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment buffers, one pair per parameter.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update at step t (t >= 1) using each parameter's
// accumulated gradient (missing gradient = zeros). All gradients are checked
// first; a non-finite one throws NumericError naming the parameter and no
// parameter is modified.
void adam_step(const std::vector<NamedTensor>& params, AdamState& state,
               const AdamHyper& hyper, std::int64_t t);

class Adam {
 public:
  Adam(std::vector<NamedTensor> params, AdamHyper hyper);

  void step();
  void zero_grad();

  const AdamState& state() const noexcept { return state_; }
  const AdamHyper& hyper() const noexcept { return hyper_; }

 private:
  std::vector<NamedTensor> params_;
  AdamHyper hyper_;
  AdamState state_;
};

}  // namespace frnet

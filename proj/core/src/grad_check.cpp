#include "frnet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "frnet/autograd.hpp"

namespace frnet {

namespace {

std::vector<std::int64_t> select_entries(std::int64_t numel,
                                         std::size_t limit,
                                         std::mt19937_64& rng) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(numel));
  std::iota(idx.begin(), idx.end(), 0);
  if (limit == 0 || idx.size() <= limit) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double eval_loss(const std::function<Tensor()>& loss) {
  NoGradGuard no_grad;
  return loss().item();
}

void set_entry(Tensor& t, std::int64_t i, double v) {
  dispatch(t.dtype(), [&](auto tag) {
    using T = decltype(tag);
    t.data<T>()[static_cast<std::size_t>(i)] = static_cast<T>(v);
  });
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor()>& loss,
                           const std::vector<NamedTensor>& inputs,
                           const GradCheckOptions& options) {
  GradCheckResult result;
  for (const auto& [name, t] : inputs) {
    if (!t.requires_grad()) {
      throw ContractError("grad_check: input '" + name +
                          "' does not require grad");
    }
    const_cast<Tensor&>(t).zero_grad();
  }
  loss().backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (const auto& [name, t] : inputs) analytic.push_back(t.grad_tensor().to_vector());

  std::mt19937_64 rng(options.seed);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::string& name = inputs[k].first;
    Tensor t = inputs[k].second;
    for (std::int64_t i :
         select_entries(t.numel(), options.max_entries_per_tensor, rng)) {
      const double original = t.value(i);
      set_entry(t, i, original + options.step);
      const double plus = eval_loss(loss);
      set_entry(t, i, original - options.step);
      const double minus = eval_loss(loss);
      set_entry(t, i, original);

      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = analytic[k][static_cast<std::size_t>(i)];
      const std::string entry = name + "[" + std::to_string(i) + "]";
      ++result.entries_checked;
      if (!std::isfinite(a) || !std::isfinite(numeric)) {
        result.failure = "non-finite gradient at " + entry;
        result.worst_entry = entry;
        result.max_relative_error = INFINITY;
        result.passed = false;
        return result;
      }
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.scale_floor});
      const double rel = std::abs(a - numeric) / denom;
      if (result.worst_entry.empty() || rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_entry = entry;
      }
    }
  }
  result.passed = result.max_relative_error < options.tolerance;
  return result;
}

}  // namespace frnet

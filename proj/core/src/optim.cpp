#include "frnet/optim.hpp"

#include <cmath>

namespace frnet {

void adam_step(const std::vector<NamedTensor>& params, AdamState& state,
               const AdamHyper& hyper, std::int64_t t) {
  if (t < 1) throw ContractError("adam_step: t must be >= 1");
  if (state.m.empty()) {
    for (const auto& [name, p] : params) {
      state.m.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
      state.v.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ContractError("adam_step: state tracks " +
                        std::to_string(state.m.size()) + " parameters, got " +
                        std::to_string(params.size()));
  }
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& [name, p] = params[k];
    if (state.m[k].size() != static_cast<std::size_t>(p.numel())) {
      throw DimensionError("adam_step", name, static_cast<std::int64_t>(state.m[k].size()),
                           p.numel());
    }
    auto g = p.grad_tensor().to_vector();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError("adam_step: non-finite gradient in '" + name +
                           "' at index " + std::to_string(i));
      }
    }
    grads.push_back(std::move(g));
  }

  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor p = params[k].second;
    auto& m = state.m[k];
    auto& v = state.v[k];
    const auto& g = grads[k];
    dispatch(p.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto w = p.data<T>();
      for (std::size_t i = 0; i < g.size(); ++i) {
        m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
        v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        w[i] = static_cast<T>(static_cast<double>(w[i]) -
                              hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps));
      }
    });
  }
  state.step = t;
}

Adam::Adam(std::vector<NamedTensor> params, AdamHyper hyper)
    : params_(std::move(params)), hyper_(hyper) {
  if (!(hyper_.lr > 0.0)) throw ConfigError("Adam: learning rate must be > 0");
}

void Adam::step() { adam_step(params_, state_, hyper_, state_.step + 1); }

void Adam::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace frnet

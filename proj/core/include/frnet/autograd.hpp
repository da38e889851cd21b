#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "frnet/tensor.hpp"

namespace frnet {

bool grad_enabled() noexcept;

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() noexcept;
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace autograd {

// Receives the output tensor (values and its gradient) and accumulates
// gradients into the inputs it captured.
using BackwardFn = std::function<void(const Tensor& out)>;

// Records `backward` as the producing op of `out` when grad mode is on and
// any input requires grad. Returns whether a node was attached.
bool attach(Tensor& out, std::vector<Tensor> inputs, std::string op,
            BackwardFn backward);

// Gradient buffer of `t`, zero-initialized on first use.
template <typename T>
std::span<T> grad_buffer(const Tensor& t);

// Gradient of the output tensor inside a BackwardFn.
template <typename T>
std::span<const T> output_grad(const Tensor& out) {
  return out.grad<T>();
}

}  // namespace autograd

namespace detail {

struct Node {
  std::string op;
  std::vector<Tensor> inputs;
  autograd::BackwardFn backward;
};

}  // namespace detail

namespace autograd {

template <typename T>
std::span<T> grad_buffer(const Tensor& t) {
  auto* impl = t.impl();
  if (!impl->has_grad) {
    impl->grad = std::vector<T>(static_cast<std::size_t>(t.numel()), T(0));
    impl->has_grad = true;
  }
  return std::get<std::vector<T>>(impl->grad);
}

}  // namespace autograd

}  // namespace frnet

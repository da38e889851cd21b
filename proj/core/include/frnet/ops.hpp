#pragma once

#include "frnet/tensor.hpp"

namespace frnet {

// Elementwise ops on equal-shape operands. All are differentiable.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

Tensor relu(const Tensor& x);
// Exact GELU, x * Phi(x) with Phi the standard normal CDF.
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Reductions to a scalar of shape [1].
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

}  // namespace frnet

#include <Eigen/Core>
#include <unsupported/Eigen/SpecialFunctions>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "frnet/autograd.hpp"
#include "frnet/ops.hpp"

namespace frnet {

namespace {

void check_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " +
                             shape_to_string(a.shape()) + " and " +
                             shape_to_string(b.shape()) + " differ",
                         "shape");
  }
  if (a.dtype() != b.dtype()) {
    throw ContractError(std::string(op) + ": mixed dtypes");
  }
}

// y = f(x), dy/dx = df(x, y).
template <typename Forward, typename Derivative>
Tensor unary(const char* name, const Tensor& x, Forward f, Derivative df) {
  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto xs = x.data<T>();
    auto ys = out.data<T>();
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = f(xs[i]);
  });
  autograd::attach(out, {x}, name, [x, df](const Tensor& o) {
    if (!x.requires_grad()) return;
    dispatch(x.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto xs = x.data<T>();
      auto ys = o.data<T>();
      auto gy = o.grad<T>();
      auto gx = autograd::grad_buffer<T>(x);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        gx[i] += gy[i] * df(xs[i], ys[i]);
      }
    });
  });
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same("add", a, b);
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto as = a.data<T>();
    auto bs = b.data<T>();
    auto ys = out.data<T>();
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = as[i] + bs[i];
  });
  autograd::attach(out, {a, b}, "add", [a, b](const Tensor& o) {
    dispatch(o.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto gy = o.grad<T>();
      for (const Tensor* in : {&a, &b}) {
        if (!in->requires_grad()) continue;
        auto g = autograd::grad_buffer<T>(*in);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
      }
    });
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same("mul", a, b);
  Tensor out = Tensor::zeros(a.shape(), a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto as = a.data<T>();
    auto bs = b.data<T>();
    auto ys = out.data<T>();
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = as[i] * bs[i];
  });
  autograd::attach(out, {a, b}, "mul", [a, b](const Tensor& o) {
    dispatch(o.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto gy = o.grad<T>();
      if (a.requires_grad()) {
        auto g = autograd::grad_buffer<T>(a);
        auto bs = b.data<T>();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * bs[i];
      }
      if (b.requires_grad()) {
        auto g = autograd::grad_buffer<T>(b);
        auto as = a.data<T>();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * as[i];
      }
    });
  });
  return out;
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](auto v) { return v * static_cast<decltype(v)>(factor); },
      [factor](auto v, auto) { return static_cast<decltype(v)>(factor); });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](auto v) { return v > 0 ? v : decltype(v)(0); },
      [](auto v, auto) { return v > 0 ? decltype(v)(1) : decltype(v)(0); });
}

// Elementwise kernels run on fixed-size aligned chunks so every element takes
// the same packet path regardless of buffer alignment or position.
constexpr Eigen::Index kChunk = 256;

template <typename F>
void chunked(Eigen::Index n, F&& body) {
  for (Eigen::Index i0 = 0; i0 < n; i0 += kChunk) body(i0, std::min(kChunk, n - i0));
}

template <typename T>
Eigen::Array<T, kChunk, 1> load_chunk(const T* src, Eigen::Index len) {
  Eigen::Array<T, kChunk, 1> a = Eigen::Array<T, kChunk, 1>::Zero();
  std::copy(src, src + len, a.data());
  return a;
}

// Phi(x) through Eigen's packet erf, which vectorizes the float path.
template <typename T>
Eigen::Array<T, kChunk, 1> normal_cdf_chunk(const Eigen::Array<T, kChunk, 1>& x) {
  return T(0.5) * (T(1) + (x * T(std::numbers::sqrt2 / 2)).erf());
}

Tensor gelu(const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* xs = x.data<T>().data();
    T* ys = out.data<T>().data();
    chunked(x.numel(), [&](Eigen::Index i0, Eigen::Index len) {
      const auto xc = load_chunk(xs + i0, len);
      const Eigen::Array<T, kChunk, 1> yc = xc * normal_cdf_chunk<T>(xc);
      std::copy(yc.data(), yc.data() + len, ys + i0);
    });
  });
  autograd::attach(out, {x}, "gelu", [x](const Tensor& o) {
    if (!x.requires_grad()) return;
    dispatch(x.dtype(), [&](auto tag) {
      using T = decltype(tag);
      constexpr double inv_sqrt_2pi = 0.3989422804014327;
      const T* xs = x.data<T>().data();
      const T* gy = o.grad<T>().data();
      T* gx = autograd::grad_buffer<T>(x).data();
      chunked(x.numel(), [&](Eigen::Index i0, Eigen::Index len) {
        const auto xc = load_chunk(xs + i0, len);
        const Eigen::Array<T, kChunk, 1> d =
            normal_cdf_chunk<T>(xc) +
            xc * T(inv_sqrt_2pi) * (T(-0.5) * xc.square()).exp();
        for (Eigen::Index k = 0; k < len; ++k) gx[i0 + k] += gy[i0 + k] * d[k];
      });
    });
  });
  return out;
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      "sigmoid", x,
      [](auto v) {
        using T = decltype(v);
        // Split by sign so exp never overflows.
        if (v >= 0) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](auto, auto y) { return y * (decltype(y)(1) - y); });
}

Tensor sum(const Tensor& x) {
  Tensor out = Tensor::zeros({1}, x.dtype());
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    T acc = 0;
    for (T v : x.data<T>()) acc += v;
    out.data<T>()[0] = acc;
  });
  autograd::attach(out, {x}, "sum", [x](const Tensor& o) {
    if (!x.requires_grad()) return;
    dispatch(x.dtype(), [&](auto tag) {
      using T = decltype(tag);
      const T gy = o.grad<T>()[0];
      for (auto& g : autograd::grad_buffer<T>(x)) g += gy;
    });
  });
  return out;
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw ContractError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

}  // namespace frnet

#include "frnet/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "frnet/autograd.hpp"
#include "frnet/parallel.hpp"

namespace frnet::baseline {

namespace {

void check_image(const char* op, const Tensor& x) {
  if (x.rank() != 4) {
    throw DimensionError(op, "rank", 4, static_cast<std::int64_t>(x.rank()));
  }
}

// Source index pair and weight of the upper neighbour for output index o.
struct Tap {
  std::int64_t lo, hi;
  double frac;
};

std::vector<Tap> bilinear_taps(std::int64_t in) {
  std::vector<Tap> taps(static_cast<std::size_t>(2 * in));
  for (std::int64_t o = 0; o < 2 * in; ++o) {
    const double src = std::max(0.0, (static_cast<double>(o) + 0.5) / 2.0 - 0.5);
    const auto lo = std::min(static_cast<std::int64_t>(src), in - 1);
    const auto hi = std::min(lo + 1, in - 1);
    taps[o] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

Tensor max_pool2x2(const Tensor& x) {
  check_image("max_pool2x2", x);
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 != 0) throw DimensionError("max_pool2x2", "height", h + 1, h);
  if (w % 2 != 0) throw DimensionError("max_pool2x2", "width", w + 1, w);
  const std::int64_t oh = h / 2, ow = w / 2;
  Tensor out = Tensor::zeros({n, c, oh, ow}, x.dtype());
  auto argmax = std::make_shared<std::vector<std::int64_t>>(
      static_cast<std::size_t>(n * c * oh * ow));
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto xs = x.data<T>();
    auto ys = out.data<T>();
    parallel_for(n * c, [&](std::int64_t plane) {
      const std::int64_t in_base = plane * h * w;
      const std::int64_t out_base = plane * oh * ow;
      for (std::int64_t i = 0; i < oh; ++i) {
        for (std::int64_t j = 0; j < ow; ++j) {
          std::int64_t best = in_base + (2 * i) * w + 2 * j;
          for (std::int64_t di = 0; di < 2; ++di) {
            for (std::int64_t dj = 0; dj < 2; ++dj) {
              const std::int64_t idx = in_base + (2 * i + di) * w + 2 * j + dj;
              if (xs[idx] > xs[best]) best = idx;
            }
          }
          ys[out_base + i * ow + j] = xs[best];
          (*argmax)[out_base + i * ow + j] = best;
        }
      }
    });
  });
  autograd::attach(out, {x}, "max_pool2x2", [x, argmax](const Tensor& o) {
    if (!x.requires_grad()) return;
    dispatch(o.dtype(), [&](auto tag) {
      using T = decltype(tag);
      auto gy = o.grad<T>();
      auto gx = autograd::grad_buffer<T>(x);
      for (std::size_t i = 0; i < gy.size(); ++i) gx[(*argmax)[i]] += gy[i];
    });
  });
  return out;
}

Tensor upsample_bilinear2x(const Tensor& x) {
  check_image("upsample_bilinear2x", x);
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t oh = 2 * h, ow = 2 * w;
  Tensor out = Tensor::zeros({n, c, oh, ow}, x.dtype());
  const auto rows = bilinear_taps(h);
  const auto cols = bilinear_taps(w);
  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto xs = x.data<T>();
    auto ys = out.data<T>();
    parallel_for(n * c, [&](std::int64_t plane) {
      const T* src = xs.data() + plane * h * w;
      T* dst = ys.data() + plane * oh * ow;
      for (std::int64_t i = 0; i < oh; ++i) {
        const auto& r = rows[i];
        const T fr = static_cast<T>(r.frac);
        const T* top = src + r.lo * w;
        const T* bot = src + r.hi * w;
        for (std::int64_t j = 0; j < ow; ++j) {
          const auto& q = cols[j];
          const T fc = static_cast<T>(q.frac);
          const T upper = top[q.lo] + fc * (top[q.hi] - top[q.lo]);
          const T lower = bot[q.lo] + fc * (bot[q.hi] - bot[q.lo]);
          dst[i * ow + j] = upper + fr * (lower - upper);
        }
      }
    });
  });
  autograd::attach(
      out, {x}, "upsample_bilinear2x",
      [x, rows, cols, h, w, oh, ow](const Tensor& o) {
        if (!x.requires_grad()) return;
        dispatch(o.dtype(), [&](auto tag) {
          using T = decltype(tag);
          auto gy = o.grad<T>();
          auto gx = autograd::grad_buffer<T>(x);
          parallel_for(x.dim(0) * x.dim(1), [&](std::int64_t plane) {
            const T* g = gy.data() + plane * oh * ow;
            T* dst = gx.data() + plane * h * w;
            for (std::int64_t i = 0; i < oh; ++i) {
              const auto& r = rows[i];
              const T fr = static_cast<T>(r.frac);
              for (std::int64_t j = 0; j < ow; ++j) {
                const auto& q = cols[j];
                const T fc = static_cast<T>(q.frac);
                const T v = g[i * ow + j];
                dst[r.lo * w + q.lo] += v * (T(1) - fr) * (T(1) - fc);
                dst[r.lo * w + q.hi] += v * (T(1) - fr) * fc;
                dst[r.hi * w + q.lo] += v * fr * (T(1) - fc);
                dst[r.hi * w + q.hi] += v * fr * fc;
              }
            }
          });
        });
      });
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check_image("concat_channels", a);
  check_image("concat_channels", b);
  for (std::size_t axis : {std::size_t{0}, std::size_t{2}, std::size_t{3}}) {
    static constexpr const char* kNames[] = {"batch", "channels", "height",
                                             "width"};
    if (a.dim(axis) != b.dim(axis)) {
      throw DimensionError("concat_channels", kNames[axis], a.dim(axis),
                           b.dim(axis));
    }
  }
  if (a.dtype() != b.dtype()) {
    throw ContractError("concat_channels: mixed dtypes");
  }
  const std::int64_t n = a.dim(0), ca = a.dim(1), cb = a.dim(1) + b.dim(1);
  const std::int64_t hw = a.dim(2) * a.dim(3);
  const std::int64_t sa = ca * hw, sb = b.dim(1) * hw;
  Tensor out = Tensor::zeros({n, cb, a.dim(2), a.dim(3)}, a.dtype());
  dispatch(a.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto as = a.data<T>();
    auto bs = b.data<T>();
    auto ys = out.data<T>();
    for (std::int64_t s = 0; s < n; ++s) {
      std::copy_n(as.data() + s * sa, sa, ys.data() + s * (sa + sb));
      std::copy_n(bs.data() + s * sb, sb, ys.data() + s * (sa + sb) + sa);
    }
  });
  autograd::attach(out, {a, b}, "concat_channels",
                   [a, b, n, sa, sb](const Tensor& o) {
                     dispatch(o.dtype(), [&](auto tag) {
                       using T = decltype(tag);
                       auto gy = o.grad<T>();
                       for (std::int64_t s = 0; s < n; ++s) {
                         const T* g = gy.data() + s * (sa + sb);
                         if (a.requires_grad()) {
                           T* ga = autograd::grad_buffer<T>(a).data() + s * sa;
                           for (std::int64_t i = 0; i < sa; ++i) ga[i] += g[i];
                         }
                         if (b.requires_grad()) {
                           T* gb = autograd::grad_buffer<T>(b).data() + s * sb;
                           for (std::int64_t i = 0; i < sb; ++i) {
                             gb[i] += g[sa + i];
                           }
                         }
                       }
                     });
                   });
  return out;
}

}  // namespace frnet::baseline

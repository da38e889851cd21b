#include "frnet/norm.hpp"

#include <cmath>
#include <vector>

#include "frnet/autograd.hpp"
#include "frnet/parallel.hpp"

namespace frnet {

namespace {

void check_affine(const char* op, const Tensor& x, const Tensor& t,
                  const char* what) {
  if (t.rank() != 1 || t.dim(0) != x.dim(1)) {
    throw DimensionError(op, std::string(what) + " channels", x.dim(1),
                         t.rank() == 1 ? t.dim(0) : -1);
  }
  if (t.dtype() != x.dtype()) {
    throw ContractError(std::string(op) + ": " + what + " dtype differs");
  }
}

void check_image(const char* op, const Tensor& x) {
  if (x.rank() != 4) {
    throw DimensionError(op, "rank", 4, static_cast<std::int64_t>(x.rank()));
  }
}

}  // namespace

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Tensor& running_mean, Tensor& running_var, NormMode mode,
                  const NormOptions& options) {
  check_image("batch_norm", x);
  check_affine("batch_norm", x, gamma, "gamma");
  check_affine("batch_norm", x, beta, "beta");
  check_affine("batch_norm", x, running_mean, "running_mean");
  check_affine("batch_norm", x, running_var, "running_var");
  const std::int64_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  const std::int64_t count = n * hw;
  if (mode == NormMode::Train && count == 0) {
    throw ContractError("batch_norm: empty batch in train mode");
  }

  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  // Per-channel 1/sqrt(var + eps) and normalized input, kept for backward.
  Tensor inv_std = Tensor::zeros({c}, x.dtype());
  Tensor x_hat = Tensor::zeros(x.shape(), x.dtype());

  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto xs = x.data<T>();
    auto ys = out.data<T>();
    auto xh = x_hat.data<T>();
    auto is = inv_std.data<T>();
    auto g = gamma.data<T>();
    auto b = beta.data<T>();
    auto rm = running_mean.data<T>();
    auto rv = running_var.data<T>();
    const T eps = static_cast<T>(options.eps);
    const T mom = static_cast<T>(options.momentum);
    parallel_for(c, [&](std::int64_t ch) {
      T mu, var;
      if (mode == NormMode::Train) {
        T acc = 0;
        for (std::int64_t s = 0; s < n; ++s) {
          const T* p = xs.data() + (s * c + ch) * hw;
          for (std::int64_t i = 0; i < hw; ++i) acc += p[i];
        }
        mu = acc / static_cast<T>(count);
        T sq = 0;
        for (std::int64_t s = 0; s < n; ++s) {
          const T* p = xs.data() + (s * c + ch) * hw;
          for (std::int64_t i = 0; i < hw; ++i) {
            const T dlt = p[i] - mu;
            sq += dlt * dlt;
          }
        }
        var = sq / static_cast<T>(count);
        const T unbiased =
            count > 1 ? sq / static_cast<T>(count - 1) : var;
        rm[ch] = (T(1) - mom) * rm[ch] + mom * mu;
        rv[ch] = (T(1) - mom) * rv[ch] + mom * unbiased;
      } else {
        mu = rm[ch];
        var = rv[ch];
      }
      const T inv = T(1) / std::sqrt(var + eps);
      is[ch] = inv;
      for (std::int64_t s = 0; s < n; ++s) {
        const std::int64_t base = (s * c + ch) * hw;
        for (std::int64_t i = 0; i < hw; ++i) {
          const T v = (xs[base + i] - mu) * inv;
          xh[base + i] = v;
          ys[base + i] = g[ch] * v + b[ch];
        }
      }
    });
  });

  autograd::attach(
      out, {x, gamma, beta}, "batch_norm",
      [x, gamma, beta, x_hat, inv_std, mode, n, c, hw](const Tensor& o) {
        dispatch(o.dtype(), [&](auto tag) {
          using T = decltype(tag);
          auto gy = o.grad<T>();
          auto xh = x_hat.data<T>();
          auto is = inv_std.data<T>();
          auto g = gamma.data<T>();
          const T count = static_cast<T>(n * hw);
          T* gx = x.requires_grad() ? autograd::grad_buffer<T>(x).data()
                                    : nullptr;
          T* gg = gamma.requires_grad()
                      ? autograd::grad_buffer<T>(gamma).data()
                      : nullptr;
          T* gb = beta.requires_grad() ? autograd::grad_buffer<T>(beta).data()
                                       : nullptr;
          parallel_for(c, [&](std::int64_t ch) {
            T sum_gy = 0, sum_gy_xh = 0;
            for (std::int64_t s = 0; s < n; ++s) {
              const std::int64_t base = (s * c + ch) * hw;
              for (std::int64_t i = 0; i < hw; ++i) {
                sum_gy += gy[base + i];
                sum_gy_xh += gy[base + i] * xh[base + i];
              }
            }
            if (gg) gg[ch] += sum_gy_xh;
            if (gb) gb[ch] += sum_gy;
            if (!gx) return;
            const T scale = g[ch] * is[ch];
            const T mean_gy = sum_gy / count;
            const T mean_gy_xh = sum_gy_xh / count;
            for (std::int64_t s = 0; s < n; ++s) {
              const std::int64_t base = (s * c + ch) * hw;
              for (std::int64_t i = 0; i < hw; ++i) {
                if (mode == NormMode::Train) {
                  gx[base + i] += scale * (gy[base + i] - mean_gy -
                                           xh[base + i] * mean_gy_xh);
                } else {
                  gx[base + i] += scale * gy[base + i];
                }
              }
            }
          });
        });
      });
  return out;
}

Tensor channel_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                    const NormOptions& options) {
  check_image("channel_norm", x);
  check_affine("channel_norm", x, gamma, "gamma");
  check_affine("channel_norm", x, beta, "beta");
  const std::int64_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);

  Tensor out = Tensor::zeros(x.shape(), x.dtype());
  Tensor x_hat = Tensor::zeros(x.shape(), x.dtype());
  Tensor inv_std = Tensor::zeros({n, hw}, x.dtype());

  dispatch(x.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto xs = x.data<T>();
    auto ys = out.data<T>();
    auto xh = x_hat.data<T>();
    auto is = inv_std.data<T>();
    auto g = gamma.data<T>();
    auto b = beta.data<T>();
    const T eps = static_cast<T>(options.eps);
    const T inv_c = T(1) / static_cast<T>(c);
    parallel_for(n, [&](std::int64_t s) {
      const T* xb = xs.data() + s * c * hw;
      std::vector<T> mu(static_cast<std::size_t>(hw), T(0));
      std::vector<T> var(static_cast<std::size_t>(hw), T(0));
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const T* p = xb + ch * hw;
        for (std::int64_t i = 0; i < hw; ++i) mu[i] += p[i];
      }
      for (auto& m : mu) m *= inv_c;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const T* p = xb + ch * hw;
        for (std::int64_t i = 0; i < hw; ++i) {
          const T dlt = p[i] - mu[i];
          var[i] += dlt * dlt;
        }
      }
      T* isb = is.data() + s * hw;
      for (std::int64_t i = 0; i < hw; ++i) {
        isb[i] = T(1) / std::sqrt(var[i] * inv_c + eps);
      }
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const std::int64_t base = (s * c + ch) * hw;
        for (std::int64_t i = 0; i < hw; ++i) {
          const T v = (xs[base + i] - mu[i]) * isb[i];
          xh[base + i] = v;
          ys[base + i] = g[ch] * v + b[ch];
        }
      }
    });
  });

  autograd::attach(
      out, {x, gamma, beta}, "channel_norm",
      [x, gamma, beta, x_hat, inv_std, n, c, hw](const Tensor& o) {
        dispatch(o.dtype(), [&](auto tag) {
          using T = decltype(tag);
          auto gy = o.grad<T>();
          auto xh = x_hat.data<T>();
          auto is = inv_std.data<T>();
          auto g = gamma.data<T>();
          if (gamma.requires_grad() || beta.requires_grad()) {
            T* gg = gamma.requires_grad()
                        ? autograd::grad_buffer<T>(gamma).data()
                        : nullptr;
            T* gb = beta.requires_grad()
                        ? autograd::grad_buffer<T>(beta).data()
                        : nullptr;
            for (std::int64_t ch = 0; ch < c; ++ch) {
              T acc_g = 0, acc_b = 0;
              for (std::int64_t s = 0; s < n; ++s) {
                const std::int64_t base = (s * c + ch) * hw;
                for (std::int64_t i = 0; i < hw; ++i) {
                  acc_g += gy[base + i] * xh[base + i];
                  acc_b += gy[base + i];
                }
              }
              if (gg) gg[ch] += acc_g;
              if (gb) gb[ch] += acc_b;
            }
          }
          if (!x.requires_grad()) return;
          auto gx = autograd::grad_buffer<T>(x);
          const T inv_c = T(1) / static_cast<T>(c);
          parallel_for(n, [&](std::int64_t s) {
            // dx = inv_std * (dxh - mean_c(dxh) - xh * mean_c(dxh * xh))
            std::vector<T> m1(static_cast<std::size_t>(hw), T(0));
            std::vector<T> m2(static_cast<std::size_t>(hw), T(0));
            for (std::int64_t ch = 0; ch < c; ++ch) {
              const std::int64_t base = (s * c + ch) * hw;
              for (std::int64_t i = 0; i < hw; ++i) {
                const T d = gy[base + i] * g[ch];
                m1[i] += d;
                m2[i] += d * xh[base + i];
              }
            }
            const T* isb = is.data() + s * hw;
            for (std::int64_t ch = 0; ch < c; ++ch) {
              const std::int64_t base = (s * c + ch) * hw;
              for (std::int64_t i = 0; i < hw; ++i) {
                const T d = gy[base + i] * g[ch];
                gx[base + i] += isb[i] * (d - m1[i] * inv_c -
                                          xh[base + i] * m2[i] * inv_c);
              }
            }
          });
        });
      });
  return out;
}

}  // namespace frnet

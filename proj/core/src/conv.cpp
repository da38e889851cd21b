#include "frnet/conv.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "frnet/autograd.hpp"
#include "frnet/parallel.hpp"

namespace frnet {

Shape ConvSpec::weight_shape() const {
  return {out_channels, in_channels / std::max<std::int64_t>(groups, 1),
          kernel_h, kernel_w};
}

std::int64_t ConvSpec::param_count() const {
  return shape_numel(weight_shape()) + (bias ? out_channels : 0);
}

void ConvSpec::validate() const {
  if (in_channels <= 0 || out_channels <= 0) {
    throw ConfigError("conv: channel counts must be positive (in=" +
                      std::to_string(in_channels) +
                      ", out=" + std::to_string(out_channels) + ")");
  }
  if (kernel_h <= 0 || kernel_w <= 0 || kernel_h % 2 == 0 ||
      kernel_w % 2 == 0) {
    throw ConfigError("conv: same padding needs odd kernel sizes, got " +
                      std::to_string(kernel_h) + "x" +
                      std::to_string(kernel_w));
  }
  if (groups <= 0 || in_channels % groups != 0 ||
      out_channels % groups != 0) {
    throw ConfigError("conv: groups=" + std::to_string(groups) +
                      " must divide in_channels=" +
                      std::to_string(in_channels) +
                      " and out_channels=" + std::to_string(out_channels));
  }
}

ConvSpec dense_conv(std::int64_t in, std::int64_t out, std::int64_t kernel,
                    bool bias) {
  ConvSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel_h = s.kernel_w = kernel;
  s.bias = bias;
  return s;
}

ConvSpec depthwise_conv(std::int64_t channels, std::int64_t kernel,
                        bool bias) {
  ConvSpec s = dense_conv(channels, channels, kernel, bias);
  s.groups = channels;
  return s;
}

namespace {

// Pixels per im2col tile. Fixed so that partial sums (and therefore
// results) do not depend on the thread count.
constexpr std::int64_t kTilePixels = 512;

struct Dims {
  std::int64_t n, ci, co, h, w, kh, kw, groups;
  std::int64_t hw() const { return h * w; }
  std::int64_t cig() const { return ci / groups; }
  std::int64_t cog() const { return co / groups; }
  std::int64_t taps() const { return kh * kw; }
  std::int64_t k() const { return cig() * taps(); }
  std::int64_t ph() const { return kh / 2; }
  std::int64_t pw() const { return kw / 2; }
  std::int64_t tiles() const { return (hw() + kTilePixels - 1) / kTilePixels; }
};

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Stride = Eigen::OuterStride<>;

template <typename T>
void direct_forward(const T* x, const T* wt, const T* b, T* y, const Dims& d) {
  const auto cig = d.cig(), cog = d.cog();
  for (std::int64_t n = 0; n < d.n; ++n) {
    for (std::int64_t co = 0; co < d.co; ++co) {
      const std::int64_t g = co / cog;
      for (std::int64_t oh = 0; oh < d.h; ++oh) {
        for (std::int64_t ow = 0; ow < d.w; ++ow) {
          T acc = b ? b[co] : T(0);
          for (std::int64_t c = 0; c < cig; ++c) {
            const std::int64_t ci = g * cig + c;
            for (std::int64_t i = 0; i < d.kh; ++i) {
              const std::int64_t ih = oh + i - d.ph();
              if (ih < 0 || ih >= d.h) continue;
              for (std::int64_t j = 0; j < d.kw; ++j) {
                const std::int64_t iw = ow + j - d.pw();
                if (iw < 0 || iw >= d.w) continue;
                acc += x[((n * d.ci + ci) * d.h + ih) * d.w + iw] *
                       wt[((co * cig + c) * d.kh + i) * d.kw + j];
              }
            }
          }
          y[((n * d.co + co) * d.h + oh) * d.w + ow] = acc;
        }
      }
    }
  }
}

// Columns [p0, p0 + len) of the im2col matrix of one group, row-major
// [cig * kh * kw, len].
template <typename T>
void im2col_tile(const T* xg, const Dims& d, std::int64_t p0, std::int64_t len,
                 T* col) {
  const auto hw = d.hw();
  const std::int64_t end = p0 + len;
  T* dst = col;
  for (std::int64_t c = 0; c < d.cig(); ++c) {
    const T* xc = xg + c * hw;
    for (std::int64_t i = 0; i < d.kh; ++i) {
      for (std::int64_t j = 0; j < d.kw; ++j) {
        const std::int64_t off = j - d.pw();
        const std::int64_t valid_lo = std::max<std::int64_t>(0, -off);
        const std::int64_t valid_hi = std::min(d.w, d.w - off);
        std::int64_t p = p0;
        while (p < end) {
          const std::int64_t h = p / d.w;
          const std::int64_t w0 = p % d.w;
          const std::int64_t w1 = std::min(d.w, w0 + (end - p));
          const std::int64_t ih = h + i - d.ph();
          if (ih < 0 || ih >= d.h) {
            std::fill(dst, dst + (w1 - w0), T(0));
          } else {
            const T* src = xc + ih * d.w + off;
            const std::int64_t lo = std::clamp(valid_lo, w0, w1);
            const std::int64_t hi = std::clamp(valid_hi, lo, w1);
            T* o = dst - w0;
            for (std::int64_t w = w0; w < lo; ++w) o[w] = T(0);
            for (std::int64_t w = lo; w < hi; ++w) o[w] = src[w];
            for (std::int64_t w = hi; w < w1; ++w) o[w] = T(0);
          }
          dst += w1 - w0;
          p += w1 - w0;
        }
      }
    }
  }
}

template <typename T>
std::vector<T>& scratch() {
  thread_local std::vector<T> buffer;
  return buffer;
}

template <typename T>
void im2col_forward(const T* x, const T* wt, const T* b, T* y, const Dims& d) {
  const auto hw = d.hw(), k = d.k(), cog = d.cog(), tiles = d.tiles();
  const bool pointwise = d.kh == 1 && d.kw == 1;
  parallel_for(d.n * d.groups * tiles, [&](std::int64_t item) {
    const std::int64_t t = item % tiles;
    const std::int64_t g = (item / tiles) % d.groups;
    const std::int64_t n = item / (tiles * d.groups);
    const std::int64_t p0 = t * kTilePixels;
    const std::int64_t len = std::min(kTilePixels, hw - p0);
    const T* xg = x + (n * d.ci + g * d.cig()) * hw;
    T* yg = y + (n * d.co + g * cog) * hw + p0;

    Eigen::Map<const RowMat<T>> wm(wt + g * cog * k, cog, k);
    Eigen::Map<RowMat<T>, 0, Stride> ym(yg, cog, len, Stride(hw));
    if (pointwise) {
      Eigen::Map<const RowMat<T>, 0, Stride> xm(xg + p0, k, len, Stride(hw));
      ym.noalias() = wm * xm;
    } else {
      auto& col = scratch<T>();
      col.resize(static_cast<std::size_t>(k * len));
      im2col_tile(xg, d, p0, len, col.data());
      Eigen::Map<const RowMat<T>> cm(col.data(), k, len);
      ym.noalias() = wm * cm;
    }
    if (b) {
      for (std::int64_t c = 0; c < cog; ++c) {
        T* row = yg + c * hw;
        const T bias = b[g * cog + c];
        for (std::int64_t p = 0; p < len; ++p) row[p] += bias;
      }
    }
  });
}

// Each channel is copied into a zero-bordered plane so the tap loops run
// without bounds checks; rows are accumulated in registers in blocks.
template <typename T>
void depthwise_forward(const T* x, const T* wt, const T* b, T* y,
                       const Dims& d) {
  constexpr std::int64_t kBlock = 128;
  const auto hw = d.hw();
  const std::int64_t pw = d.w + 2 * d.pw() + kBlock;
  const std::int64_t ph = d.h + 2 * d.ph();
  parallel_for(d.n * d.co, [&](std::int64_t item) {
    const std::int64_t c = item % d.co;
    const T* xc = x + item * hw;
    T* yc = y + item * hw;
    const T* kc = wt + c * d.taps();
    auto& pad = scratch<T>();
    pad.assign(static_cast<std::size_t>(ph * pw), T(0));
    for (std::int64_t h = 0; h < d.h; ++h) {
      std::copy(xc + h * d.w, xc + (h + 1) * d.w,
                pad.data() + (h + d.ph()) * pw + d.pw());
    }
    const T bias = b ? b[c] : T(0);
    for (std::int64_t h = 0; h < d.h; ++h) {
      for (std::int64_t w0 = 0; w0 < d.w; w0 += kBlock) {
        T acc[kBlock];
        for (std::int64_t k = 0; k < kBlock; ++k) acc[k] = bias;
        for (std::int64_t i = 0; i < d.kh; ++i) {
          const T* row = pad.data() + (h + i) * pw + w0;
          for (std::int64_t j = 0; j < d.kw; ++j) {
            const T kv = kc[i * d.kw + j];
            const T* src = row + j;
            for (std::int64_t k = 0; k < kBlock; ++k) acc[k] += kv * src[k];
          }
        }
        const std::int64_t len = std::min(kBlock, d.w - w0);
        std::copy(acc, acc + len, yc + h * d.w + w0);
      }
    }
  });
}

// Weight of the adjoint convolution: (ci, co/groups, kh, kw), spatially
// flipped, so that dx = conv(dy, flipped) under the same padding.
template <typename T>
std::vector<T> adjoint_weight(const T* wt, const Dims& d) {
  const auto cig = d.cig(), cog = d.cog(), taps = d.taps();
  std::vector<T> out(static_cast<std::size_t>(d.ci * cog * taps));
  for (std::int64_t g = 0; g < d.groups; ++g) {
    for (std::int64_t co = 0; co < cog; ++co) {
      for (std::int64_t c = 0; c < cig; ++c) {
        const T* src = wt + ((g * cog + co) * cig + c) * taps;
        T* dst = out.data() + ((g * cig + c) * cog + co) * taps;
        for (std::int64_t t = 0; t < taps; ++t) dst[taps - 1 - t] = src[t];
      }
    }
  }
  return out;
}

Dims adjoint_dims(const Dims& d) {
  Dims a = d;
  a.ci = d.co;
  a.co = d.ci;
  return a;
}

template <typename T>
void forward_dispatch(ConvAlgorithm algo, const T* x, const T* wt, const T* b,
                      T* y, const Dims& d) {
  switch (algo) {
    case ConvAlgorithm::Direct:
      direct_forward(x, wt, b, y, d);
      break;
    case ConvAlgorithm::Depthwise:
      depthwise_forward(x, wt, b, y, d);
      break;
    default:
      im2col_forward(x, wt, b, y, d);
      break;
  }
}

template <typename T>
void input_grad(const T* gy, const T* wt, T* gx, const Dims& d,
                bool depthwise) {
  const auto adj = adjoint_weight(wt, d);
  const Dims ad = adjoint_dims(d);
  std::vector<T> tmp(static_cast<std::size_t>(d.n * d.ci * d.hw()));
  if (depthwise) {
    depthwise_forward<T>(gy, adj.data(), nullptr, tmp.data(), ad);
  } else {
    im2col_forward<T>(gy, adj.data(), nullptr, tmp.data(), ad);
  }
  for (std::size_t i = 0; i < tmp.size(); ++i) gx[i] += tmp[i];
}

template <typename T>
void weight_grad_im2col(const T* x, const T* gy, T* gw, const Dims& d) {
  const auto hw = d.hw(), k = d.k(), cog = d.cog(), tiles = d.tiles();
  const std::int64_t items = d.n * d.groups * tiles;
  const std::int64_t block = cog * k;
  std::vector<T> partial(static_cast<std::size_t>(items * block));
  parallel_for(items, [&](std::int64_t item) {
    const std::int64_t t = item % tiles;
    const std::int64_t g = (item / tiles) % d.groups;
    const std::int64_t n = item / (tiles * d.groups);
    const std::int64_t p0 = t * kTilePixels;
    const std::int64_t len = std::min(kTilePixels, hw - p0);
    const T* xg = x + (n * d.ci + g * d.cig()) * hw;
    const T* gyg = gy + (n * d.co + g * cog) * hw + p0;
    Eigen::Map<const RowMat<T>, 0, Stride> gym(gyg, cog, len, Stride(hw));
    Eigen::Map<RowMat<T>> pm(partial.data() + item * block, cog, k);
    if (d.kh == 1 && d.kw == 1) {
      Eigen::Map<const RowMat<T>, 0, Stride> xm(xg + p0, k, len, Stride(hw));
      pm.noalias() = gym * xm.transpose();
    } else {
      auto& col = scratch<T>();
      col.resize(static_cast<std::size_t>(k * len));
      im2col_tile(xg, d, p0, len, col.data());
      Eigen::Map<const RowMat<T>> cm(col.data(), k, len);
      pm.noalias() = gym * cm.transpose();
    }
  });
  // Fixed-order reduction over (n, tile) for each group.
  for (std::int64_t item = 0; item < items; ++item) {
    const std::int64_t g = (item / tiles) % d.groups;
    const T* src = partial.data() + item * block;
    T* dst = gw + g * block;
    for (std::int64_t i = 0; i < block; ++i) dst[i] += src[i];
  }
}

template <typename T>
void weight_grad_depthwise(const T* x, const T* gy, T* gw, const Dims& d) {
  const auto hw = d.hw();
  parallel_for(d.co, [&](std::int64_t c) {
    T* gk = gw + c * d.taps();
    for (std::int64_t n = 0; n < d.n; ++n) {
      const T* xc = x + (n * d.ci + c) * hw;
      const T* gc = gy + (n * d.co + c) * hw;
      for (std::int64_t i = 0; i < d.kh; ++i) {
        for (std::int64_t j = 0; j < d.kw; ++j) {
          const std::int64_t off = j - d.pw();
          const std::int64_t lo = std::max<std::int64_t>(0, -off);
          const std::int64_t hi = std::min(d.w, d.w - off);
          T acc = 0;
          for (std::int64_t h = 0; h < d.h; ++h) {
            const std::int64_t ih = h + i - d.ph();
            if (ih < 0 || ih >= d.h) continue;
            const T* xs = xc + ih * d.w + off;
            const T* gr = gc + h * d.w;
            for (std::int64_t w = lo; w < hi; ++w) acc += gr[w] * xs[w];
          }
          gk[i * d.kw + j] += acc;
        }
      }
    }
  });
}

template <typename T>
void bias_grad(const T* gy, T* gb, const Dims& d) {
  const auto hw = d.hw();
  parallel_for(d.co, [&](std::int64_t c) {
    T acc = 0;
    for (std::int64_t n = 0; n < d.n; ++n) {
      const T* gc = gy + (n * d.co + c) * hw;
      for (std::int64_t p = 0; p < hw; ++p) acc += gc[p];
    }
    gb[c] += acc;
  });
}

void check_axis(const char* op, const char* axis, std::int64_t expected,
                std::int64_t actual) {
  if (expected != actual) throw DimensionError(op, axis, expected, actual);
}

Dims validate(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const ConvSpec& spec) {
  spec.validate();
  if (input.rank() != 4) check_axis("conv2d", "rank", 4, input.rank());
  check_axis("conv2d", "channels", spec.in_channels, input.dim(1));
  const Shape ws = spec.weight_shape();
  if (weight.rank() != 4) check_axis("conv2d", "weight rank", 4, weight.rank());
  static constexpr const char* kWeightAxes[] = {
      "weight out_channels", "weight in_channels/groups", "weight kernel_h",
      "weight kernel_w"};
  for (std::size_t a = 0; a < 4; ++a) {
    check_axis("conv2d", kWeightAxes[a], ws[a], weight.dim(a));
  }
  if (spec.bias != bias.defined()) {
    throw ConfigError(spec.bias ? "conv2d: spec expects a bias tensor"
                                : "conv2d: spec has no bias but one was given");
  }
  if (bias.defined()) {
    if (bias.rank() != 1) check_axis("conv2d", "bias rank", 1, bias.rank());
    check_axis("conv2d", "bias", spec.out_channels, bias.dim(0));
    if (bias.dtype() != input.dtype()) {
      throw ContractError("conv2d: bias dtype differs from input");
    }
  }
  if (weight.dtype() != input.dtype()) {
    throw ContractError("conv2d: weight dtype differs from input");
  }
  return Dims{input.dim(0),    spec.in_channels, spec.out_channels,
              input.dim(2),    input.dim(3),     spec.kernel_h,
              spec.kernel_w,   spec.groups};
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const ConvSpec& spec, ConvAlgorithm algorithm) {
  const Dims d = validate(input, weight, bias, spec);
  const bool depthwise = spec.groups == spec.in_channels &&
                         spec.groups == spec.out_channels;
  if (algorithm == ConvAlgorithm::Auto) {
    algorithm = depthwise && spec.groups > 1 ? ConvAlgorithm::Depthwise
                                             : ConvAlgorithm::Im2col;
  }
  if (algorithm == ConvAlgorithm::Depthwise && !depthwise) {
    throw ConfigError("conv2d: depthwise kernel needs groups == in == out");
  }

  Tensor out = Tensor::zeros({d.n, d.co, d.h, d.w}, input.dtype());
  dispatch(input.dtype(), [&](auto tag) {
    using T = decltype(tag);
    const T* b = bias.defined() ? bias.data<T>().data() : nullptr;
    forward_dispatch<T>(algorithm, input.data<T>().data(),
                        weight.data<T>().data(), b, out.data<T>().data(), d);
  });

  autograd::attach(
      out, {input, weight, bias}, "conv2d",
      [input, weight, bias, d, depthwise](const Tensor& o) {
        dispatch(o.dtype(), [&](auto tag) {
          using T = decltype(tag);
          const T* gy = o.grad<T>().data();
          const T* x = input.data<T>().data();
          const T* wt = weight.data<T>().data();
          if (input.requires_grad()) {
            input_grad<T>(gy, wt, autograd::grad_buffer<T>(input).data(), d,
                          depthwise);
          }
          if (weight.requires_grad()) {
            T* gw = autograd::grad_buffer<T>(weight).data();
            if (depthwise) {
              weight_grad_depthwise<T>(x, gy, gw, d);
            } else {
              weight_grad_im2col<T>(x, gy, gw, d);
            }
          }
          if (bias.defined() && bias.requires_grad()) {
            bias_grad<T>(gy, autograd::grad_buffer<T>(bias).data(), d);
          }
        });
      });
  return out;
}

Tensor depthwise_conv2d(const Tensor& input, const Tensor& weight,
                        const Tensor& bias, const ConvSpec& spec) {
  if (spec.groups != spec.in_channels || spec.groups != spec.out_channels) {
    throw ConfigError("depthwise_conv2d: groups (" +
                      std::to_string(spec.groups) +
                      ") must equal in and out channels (" +
                      std::to_string(spec.in_channels) + ", " +
                      std::to_string(spec.out_channels) + ")");
  }
  return conv2d(input, weight, bias, spec, ConvAlgorithm::Depthwise);
}

}  // namespace frnet

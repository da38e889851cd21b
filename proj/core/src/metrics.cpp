#include "frnet/metrics.hpp"

#include <vector>

#include "frnet/autograd.hpp"

namespace frnet {

namespace {

void check_pair(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " +
                             shape_to_string(a.shape()) + " and " +
                             shape_to_string(b.shape()) + " differ",
                         "shape");
  }
  if (a.numel() == 0) throw ContractError(std::string(op) + ": empty tensors");
}

struct Counts {
  std::int64_t x = 0, y = 0, both = 0, agree = 0, total = 0;
};

Counts count_masks(const char* op, const Tensor& a, const Tensor& b) {
  check_pair(op, a, b);
  const auto av = a.to_vector();
  const auto bv = b.to_vector();
  Counts c;
  c.total = static_cast<std::int64_t>(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    if ((av[i] != 0.0 && av[i] != 1.0) || (bv[i] != 0.0 && bv[i] != 1.0)) {
      throw ContractError(std::string(op) + ": masks must be binary (value " +
                          std::to_string(av[i] != 0.0 && av[i] != 1.0 ? av[i]
                                                                      : bv[i]) +
                          " at index " + std::to_string(i) + ")");
    }
    const bool x = av[i] == 1.0, y = bv[i] == 1.0;
    c.x += x;
    c.y += y;
    c.both += x && y;
    c.agree += x == y;
  }
  return c;
}

}  // namespace

Tensor dice_loss(const Tensor& pred, const Tensor& target, double smooth_eps) {
  check_pair("dice_loss", pred, target);
  if (pred.dtype() != target.dtype()) {
    throw ContractError("dice_loss: mixed dtypes");
  }
  const std::int64_t n = pred.rank() > 0 ? pred.dim(0) : 1;
  const std::int64_t per = pred.numel() / n;
  // Per-sample intersection and denominator, kept for backward.
  auto inter = std::make_shared<std::vector<double>>(n);
  auto denom = std::make_shared<std::vector<double>>(n);

  Tensor out = Tensor::zeros({1}, pred.dtype());
  dispatch(pred.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto p = pred.data<T>();
    auto t = target.data<T>();
    double loss = 0.0;
    for (std::int64_t s = 0; s < n; ++s) {
      double pt = 0.0, ps = 0.0, ts = 0.0;
      for (std::int64_t i = s * per; i < (s + 1) * per; ++i) {
        pt += static_cast<double>(p[i]) * t[i];
        ps += p[i];
        ts += t[i];
      }
      (*inter)[s] = 2.0 * pt + smooth_eps;
      (*denom)[s] = ps + ts + smooth_eps;
      loss += 1.0 - (*inter)[s] / (*denom)[s];
    }
    out.data<T>()[0] = static_cast<T>(loss / static_cast<double>(n));
  });

  autograd::attach(out, {pred}, "dice_loss",
                   [pred, target, inter, denom, n, per](const Tensor& o) {
                     if (!pred.requires_grad()) return;
                     dispatch(o.dtype(), [&](auto tag) {
                       using T = decltype(tag);
                       const double gy = o.grad<T>()[0];
                       auto t = target.data<T>();
                       auto gp = autograd::grad_buffer<T>(pred);
                       for (std::int64_t s = 0; s < n; ++s) {
                         const double a = (*inter)[s], d = (*denom)[s];
                         const double k = -gy / static_cast<double>(n) / (d * d);
                         for (std::int64_t i = s * per; i < (s + 1) * per; ++i) {
                           gp[i] += static_cast<T>(k * (2.0 * t[i] * d - a));
                         }
                       }
                     });
                   });
  return out;
}

double dice_score(const Tensor& pred_mask, const Tensor& target_mask) {
  const Counts c = count_masks("dice_score", pred_mask, target_mask);
  if (c.x + c.y == 0) return 1.0;
  return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.x + c.y);
}

double accuracy(const Tensor& pred_mask, const Tensor& target_mask) {
  const Counts c = count_masks("accuracy", pred_mask, target_mask);
  return static_cast<double>(c.agree) / static_cast<double>(c.total);
}

Tensor binarize(const Tensor& probabilities, double threshold) {
  Tensor out = Tensor::zeros(probabilities.shape(), probabilities.dtype());
  dispatch(probabilities.dtype(), [&](auto tag) {
    using T = decltype(tag);
    auto p = probabilities.data<T>();
    auto y = out.data<T>();
    for (std::size_t i = 0; i < p.size(); ++i) {
      y[i] = p[i] >= static_cast<T>(threshold) ? T(1) : T(0);
    }
  });
  return out;
}

}  // namespace frnet

#include "frnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace frnet {

namespace {

struct Point {
  double x, y;
};

Point lerp(Point a, Point b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

Point midpoint(Point a, Point b) { return lerp(a, b, 0.5); }

// Quadratic B-spline through the midpoints of consecutive control points,
// with straight end pieces, sampled at <= 0.25 px spacing.
std::vector<Point> smooth_curve(const std::vector<Point>& ctrl) {
  std::vector<Point> pts;
  auto emit_line = [&](Point a, Point b) {
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    for (int s = 0; s <= steps; ++s) pts.push_back(lerp(a, b, double(s) / steps));
  };
  emit_line(ctrl[0], midpoint(ctrl[0], ctrl[1]));
  for (std::size_t i = 1; i + 1 < ctrl.size(); ++i) {
    const Point p0 = midpoint(ctrl[i - 1], ctrl[i]);
    const Point p1 = ctrl[i];
    const Point p2 = midpoint(ctrl[i], ctrl[i + 1]);
    const double len = std::hypot(p1.x - p0.x, p1.y - p0.y) +
                       std::hypot(p2.x - p1.x, p2.y - p1.y);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
    for (int s = 0; s <= steps; ++s) {
      const double t = double(s) / steps, u = 1.0 - t;
      pts.push_back({u * u * p0.x + 2 * u * t * p1.x + t * t * p2.x,
                     u * u * p0.y + 2 * u * t * p1.y + t * t * p2.y});
    }
  }
  emit_line(midpoint(ctrl[ctrl.size() - 2], ctrl.back()), ctrl.back());
  return pts;
}

// Smoothly interpolated random lattice, values in [0, 1].
std::vector<double> value_noise(std::int64_t h, std::int64_t w, double cell,
                                std::mt19937_64& rng) {
  const auto gh = static_cast<std::int64_t>(std::ceil(h / cell)) + 2;
  const auto gw = static_cast<std::int64_t>(std::ceil(w / cell)) + 2;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> grid(static_cast<std::size_t>(gh * gw));
  for (auto& g : grid) g = u(rng);
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  std::vector<double> out(static_cast<std::size_t>(h * w));
  for (std::int64_t y = 0; y < h; ++y) {
    const double fy = y / cell;
    const auto iy = static_cast<std::int64_t>(fy);
    const double ty = smooth(fy - iy);
    for (std::int64_t x = 0; x < w; ++x) {
      const double fx = x / cell;
      const auto ix = static_cast<std::int64_t>(fx);
      const double tx = smooth(fx - ix);
      const double a = grid[iy * gw + ix], b = grid[iy * gw + ix + 1];
      const double c = grid[(iy + 1) * gw + ix], d = grid[(iy + 1) * gw + ix + 1];
      const double top = a + (b - a) * tx, bot = c + (d - c) * tx;
      out[y * w + x] = top + (bot - top) * ty;
    }
  }
  return out;
}

}  // namespace

Sample synth_vessels(std::uint64_t seed, const SynthOptions& opt,
                     std::string id) {
  if (opt.height < 16 || opt.width < 16) {
    throw ConfigError("synth_vessels: image must be at least 16x16, got " +
                      std::to_string(opt.height) + "x" +
                      std::to_string(opt.width));
  }
  if (opt.min_width < 1 || opt.max_width > 8 || opt.min_width > opt.max_width) {
    throw ConfigError("synth_vessels: width range must lie within [1, 8]");
  }
  if (opt.n_vessels < 0) throw ConfigError("synth_vessels: negative n_vessels");

  const std::int64_t h = opt.height, w = opt.width;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> turn(0.0, 0.6);

  std::vector<float> mask(static_cast<std::size_t>(h * w), 0.0f);
  std::vector<double> intensity(mask.size(), 0.0);
  const double span = static_cast<double>(std::max(h, w));

  for (int v = 0; v < opt.n_vessels; ++v) {
    const int width = std::uniform_int_distribution<int>(opt.min_width,
                                                         opt.max_width)(rng);
    const double contrast = 0.15 + 0.25 * u(rng);
    std::vector<Point> ctrl{{u(rng) * (w - 1), u(rng) * (h - 1)}};
    double heading = u(rng) * 2.0 * std::numbers::pi;
    for (int k = 0; k < 5; ++k) {
      const double step = (0.15 + 0.2 * u(rng)) * span;
      heading += turn(rng);
      ctrl.push_back({ctrl.back().x + step * std::cos(heading),
                      ctrl.back().y + step * std::sin(heading)});
    }
    const double r2 = 0.25 * width * width;
    const int reach = width / 2 + 1;
    for (const Point& p : smooth_curve(ctrl)) {
      const auto cx = static_cast<std::int64_t>(std::floor(p.x + 0.5));
      const auto cy = static_cast<std::int64_t>(std::floor(p.y + 0.5));
      if (width == 1) {
        if (cx >= 0 && cx < w && cy >= 0 && cy < h) {
          mask[cy * w + cx] = 1.0f;
          intensity[cy * w + cx] = std::max(intensity[cy * w + cx], contrast);
        }
        continue;
      }
      for (auto y = cy - reach; y <= cy + reach; ++y) {
        for (auto x = cx - reach; x <= cx + reach; ++x) {
          if (x < 0 || x >= w || y < 0 || y >= h) continue;
          const double dx = x - p.x, dy = y - p.y;
          if (dx * dx + dy * dy < r2) {
            mask[y * w + x] = 1.0f;
            intensity[y * w + x] = std::max(intensity[y * w + x], contrast);
          }
        }
      }
    }
  }

  const auto coarse = value_noise(h, w, span / 4.0, rng);
  const auto fine = value_noise(h, w, span / 10.0, rng);
  std::normal_distribution<double> noise(0.0, opt.noise_std);
  std::vector<float> image(mask.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double bg = 0.05 + 0.55 * coarse[i] + 0.1 * fine[i];
    const double v = bg + intensity[i];
    image[i] = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
  }
  return Sample{std::move(id), Tensor::from_data({1, h, w}, std::move(image)),
                Tensor::from_data({1, h, w}, std::move(mask))};
}

std::vector<Sample> synth_dataset(std::uint64_t seed, int count,
                                  const SynthOptions& options) {
  if (count < 0) throw ConfigError("synth_dataset: negative count");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  std::mt19937_64 master(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& s : seeds) s = master();
  std::vector<Sample> out;
  out.reserve(seeds.size());
  for (int i = 0; i < count; ++i) {
    out.push_back(synth_vessels(seeds[i], options, std::to_string(i + 1)));
  }
  return out;
}

}  // namespace frnet

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "frnet/tensor.hpp"

namespace frnet::testing {

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed,
                            DType dtype = DType::Float64, double lo = -1.0,
                            double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(shape_numel(shape)));
  for (double& x : v) x = dist(rng);
  return Tensor::from_data(shape, std::move(v)).to(dtype);
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  const auto va = a.to_vector();
  const auto vb = b.to_vector();
  double m = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  return m;
}

inline bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && a.dtype() == b.dtype() &&
         a.to_vector() == b.to_vector();
}

// Reference convolution written straight from the definition: zero padding
// k/2, stride 1, grouped channels.
inline std::vector<double> naive_conv(const std::vector<double>& x,
                                      const std::vector<double>& w,
                                      const std::vector<double>& b, int n, int ci,
                                      int co, int h, int wd, int kh, int kw,
                                      int groups) {
  std::vector<double> y(static_cast<std::size_t>(n * co * h * wd), 0.0);
  const int cig = ci / groups, cog = co / groups;
  for (int in = 0; in < n; ++in)
    for (int oc = 0; oc < co; ++oc) {
      const int g = oc / cog;
      for (int oy = 0; oy < h; ++oy)
        for (int ox = 0; ox < wd; ++ox) {
          double acc = b.empty() ? 0.0 : b[oc];
          for (int c = 0; c < cig; ++c)
            for (int i = 0; i < kh; ++i)
              for (int j = 0; j < kw; ++j) {
                const int iy = oy + i - kh / 2, ix = ox + j - kw / 2;
                if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
                const int ic = g * cig + c;
                acc += w[((oc * cig + c) * kh + i) * kw + j] *
                       x[((in * ci + ic) * h + iy) * wd + ix];
              }
          y[((in * co + oc) * h + oy) * wd + ox] = acc;
        }
    }
  return y;
}

// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("frnet_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace frnet::testing

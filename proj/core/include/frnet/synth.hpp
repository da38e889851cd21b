#pragma once

#include <cstdint>
#include <vector>

#include "frnet/data.hpp"

namespace frnet {

struct SynthOptions {
  std::int64_t height = 64;
  std::int64_t width = 64;
  int n_vessels = 6;
  int min_width = 1;  // vessel widths in pixels, drawn uniformly per vessel
  int max_width = 3;
  double noise_std = 0.04;
};

// One image/mask pair of random smooth curvilinear vessels over a
// low-frequency value-noise background with additive Gaussian noise. Vessels
// add a per-vessel contrast to the local background, so no global intensity
// threshold separates them.
// The mask is the union of the rasterized curves; width-1 vessels are
// single-pixel paths. Deterministic per seed.
Sample synth_vessels(std::uint64_t seed, const SynthOptions& options,
                     std::string id = "synth");

// `count` samples with ids "1" ... "count", seeded from `seed`.
std::vector<Sample> synth_dataset(std::uint64_t seed, int count,
                                  const SynthOptions& options = {});

}  // namespace frnet

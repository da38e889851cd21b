#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frnet/models.hpp"

namespace frnet {

// Checkpoint file layout (little-endian):
//   "FRNC" | u32 version | u32 text length | UTF-8 text | f32 values...
// The text block holds the model config as key=value lines plus `seed`,
// `values` (float count) and `meta.*` metadata keys. Values are all
// parameters followed by all buffers, each in registry order.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<float> values;
  std::map<std::string, std::string> metadata;

  static Checkpoint capture(const SegmentationModel& model);
  // Builds a fresh model from `config` and loads the stored values.
  std::unique_ptr<SegmentationModel> instantiate() const;
  // Validates the value count before writing anything into `model`.
  void restore_into(SegmentationModel& model) const;
};

void write_checkpoint(const Checkpoint& checkpoint,
                      const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

void save_checkpoint(const SegmentationModel& model,
                     const std::filesystem::path& path);
// Throws LoadError on malformed files, version mismatch, or when the stored
// arch differs from `expected_arch`.
std::unique_ptr<SegmentationModel> load_checkpoint(
    const std::filesystem::path& path,
    std::optional<Arch> expected_arch = std::nullopt);

}  // namespace frnet

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace frnet {

struct GrayImage {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

// Reads any PNG, converting to 8-bit grayscale. Throws DataError.
GrayImage read_png_gray(const std::filesystem::path& path);
void write_png_gray(const std::filesystem::path& path, const GrayImage& image);

}  // namespace frnet

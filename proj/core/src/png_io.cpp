#include "frnet/png_io.hpp"

#include <png.h>

#include <cstring>

#include "frnet/error.hpp"

namespace frnet {

GrayImage read_png_gray(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG '" + path.string() + "': " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  GrayImage out;
  out.height = image.height;
  out.width = image.width;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  return out;
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& img) {
  if (static_cast<std::int64_t>(img.pixels.size()) != img.height * img.width) {
    throw DataError("write_png_gray: pixel buffer does not match " +
                    std::to_string(img.height) + "x" + std::to_string(img.width));
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0,
                               nullptr)) {
    throw DataError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

}  // namespace frnet

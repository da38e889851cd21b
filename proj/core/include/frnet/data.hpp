#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "frnet/tensor.hpp"

namespace frnet {

// A grayscale image in [0, 1] and its binary vessel mask, both [1, H, W].
struct Sample {
  std::string id;
  Tensor image;
  Tensor mask;

  std::int64_t height() const { return image.dim(1); }
  std::int64_t width() const { return image.dim(2); }
};

struct SplitSpec {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;

  // Throws ConfigError when an id appears in two lists.
  void validate() const;
};

struct DatasetSplits {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
};

// ROSSA: train NO.1-100 and NO.301-918, val NO.101-200, test NO.201-300.
// Ids are the decimal numbers ("1" ... "918").
SplitSpec rossa_split();

enum class Octa500Subset { Fov6mm, Fov3mm };

// Parses a split manifest: `[train]`, `[val]`, `[test]` section headers, one
// id per line, `#` comments. Duplicate ids throw ParseError with the line.
SplitSpec parse_split_manifest(const std::filesystem::path& manifest);
// OCTA-500's published split is loaded from `<root>/<subset>.split`
// (OCTA_6M.split / OCTA_3M.split).
SplitSpec octa500_split(Octa500Subset subset,
                        const std::filesystem::path& root);

// Loads `root/images/<id>.png` with `root/masks/<id>.png`, or the pairs
// listed in `root/pairs.tsv` (image path TAB mask path, relative to root;
// the id is the image file stem). An id matches a file stem exactly or, for
// numeric ids, by value ("101" matches "0101.png"). Images are scaled by
// 1/255; masks are thresholded at 0.5. Each split is sorted by id.
DatasetSplits load_dataset(const std::filesystem::path& root,
                           const SplitSpec& split);

// One line of split sizes and observed image dimensions, e.g.
// "train=718 val=100 test=100 sizes=304x304". Sizes list every distinct
// HxW, in order of first appearance.
std::string describe_splits(const DatasetSplits& splits);

// Writes a mask or image tensor [1, H, W] in [0, 1] as 8-bit PNG.
void save_gray_png(const std::filesystem::path& path, const Tensor& image);
Tensor load_gray_png(const std::filesystem::path& path);
Tensor load_mask_png(const std::filesystem::path& path);

// Sorts ids numerically when all are integers, lexicographically otherwise.
void sort_ids(std::vector<std::string>& ids);

// Aligned crops of the same random window from image and mask of every
// sample, stacked as [N, 1, h, w]. Throws ContractError when the crop
// exceeds a sample.
std::pair<Tensor, Tensor> crop_batch(const std::vector<const Sample*>& samples,
                                     std::int64_t crop_h, std::int64_t crop_w,
                                     std::uint64_t seed);

// Stacks full-size samples (all must share H and W) into [N, 1, H, W].
std::pair<Tensor, Tensor> stack_batch(const std::vector<const Sample*>& samples);

}  // namespace frnet

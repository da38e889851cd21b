#include <gtest/gtest.h>

#include <fmt/format.h>

#include <fstream>
#include <set>

#include "frnet/data.hpp"
#include "frnet/error.hpp"
#include "test_support.hpp"

namespace frnet {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

Tensor plane(std::int64_t h, std::int64_t w, std::uint64_t seed, bool binary) {
  Tensor t = testing::random_tensor({1, h, w}, seed, DType::Float32, 0.0, 1.0);
  if (binary) {
    for (float& v : t.data<float>()) v = v > 0.6f ? 1.0f : 0.0f;
  } else {
    for (float& v : t.data<float>()) v = std::round(v * 255.0f) / 255.0f;
  }
  return t;
}

void write_pair(const fs::path& root, const std::string& stem, std::int64_t h,
                std::int64_t w, std::uint64_t seed, std::int64_t mask_w = -1) {
  fs::create_directories(root / "images");
  fs::create_directories(root / "masks");
  save_gray_png(root / "images" / (stem + ".png"), plane(h, w, seed, false));
  save_gray_png(root / "masks" / (stem + ".png"),
                plane(h, mask_w < 0 ? w : mask_w, seed + 1, true));
}

TEST(RossaSplit, Ranges) {
  const SplitSpec s = rossa_split();
  EXPECT_EQ(s.train_ids.size(), 718u);
  EXPECT_EQ(s.val_ids.size(), 100u);
  EXPECT_EQ(s.test_ids.size(), 100u);
  std::vector<std::string> val;
  for (int i = 101; i <= 200; ++i) val.push_back(std::to_string(i));
  EXPECT_EQ(s.val_ids, val);
  EXPECT_EQ(s.test_ids.front(), "201");
  EXPECT_EQ(s.test_ids.back(), "300");
  EXPECT_EQ(s.train_ids[99], "100");
  EXPECT_EQ(s.train_ids[100], "301");
  EXPECT_EQ(s.train_ids.back(), "918");
  EXPECT_NO_THROW(s.validate());
  std::set<std::string> all(s.train_ids.begin(), s.train_ids.end());
  all.insert(s.val_ids.begin(), s.val_ids.end());
  all.insert(s.test_ids.begin(), s.test_ids.end());
  EXPECT_EQ(all.size(), 918u);
}

TEST(SplitSpec, OverlapRejected) {
  SplitSpec s{{"1", "2"}, {"2"}, {"3"}};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Manifest, ParsesSectionsAndComments) {
  TempDir dir("manifest");
  std::ofstream(dir.path() / "OCTA_6M.split") << "# published split\n[train]\n10001\n10002\n\n"
                                                  "[val]\n10003 \n[test]\n10004\n";
  const SplitSpec s = octa500_split(Octa500Subset::Fov6mm, dir.path());
  EXPECT_EQ(s.train_ids, (std::vector<std::string>{"10001", "10002"}));
  EXPECT_EQ(s.val_ids, (std::vector<std::string>{"10003"}));
  EXPECT_EQ(s.test_ids, (std::vector<std::string>{"10004"}));
  EXPECT_THROW(octa500_split(Octa500Subset::Fov3mm, dir.path()), DataError);
}

TEST(Manifest, DuplicateIdReportsLine) {
  TempDir dir("manifest");
  const auto path = dir.path() / "dup.split";
  std::ofstream(path) << "[train]\n1\n2\n[val]\n3\n[test]\n2\n";
  try {
    (void)parse_split_manifest(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7);
  }
}

TEST(Manifest, MalformedLinesRejected) {
  TempDir dir("manifest");
  std::ofstream(dir.path() / "a.split") << "1\n[train]\n";
  EXPECT_THROW((void)parse_split_manifest(dir.path() / "a.split"), ParseError);
  std::ofstream(dir.path() / "b.split") << "[training]\n1\n";
  EXPECT_THROW((void)parse_split_manifest(dir.path() / "b.split"), ParseError);
}

TEST(LoadDataset, RossaLayoutWithPaddedNames) {
  TempDir dir("rossa");
  for (int i = 1; i <= 918; ++i) write_pair(dir.path(), fmt::format("{:04d}", i), 4, 4, i);
  const DatasetSplits d = load_dataset(dir.path(), rossa_split());
  EXPECT_EQ(d.train.size(), 718u);
  EXPECT_EQ(d.val.size(), 100u);
  EXPECT_EQ(d.test.size(), 100u);
  EXPECT_EQ(d.val.front().id, "101");
  EXPECT_EQ(d.train[100].id, "301");
}

TEST(LoadDataset, NormalizesAndBinarizes) {
  TempDir dir("ds");
  write_pair(dir.path(), "a", 6, 5, 1);
  write_pair(dir.path(), "b", 6, 5, 3);
  write_pair(dir.path(), "c", 6, 5, 5);
  const DatasetSplits d = load_dataset(dir.path(), {{"a"}, {"b"}, {"c"}});
  const Tensor expected = plane(6, 5, 1, false);
  EXPECT_LT(testing::max_abs_diff(d.train[0].image, expected), 1e-6);
  for (double v : d.train[0].mask.to_vector()) EXPECT_TRUE(v == 0.0 || v == 1.0);
  EXPECT_EQ(d.train[0].image.shape(), (Shape{1, 6, 5}));
}

TEST(LoadDataset, SizeMismatchNamesId) {
  TempDir dir("ds");
  write_pair(dir.path(), "good", 4, 4, 1);
  write_pair(dir.path(), "bad7", 4, 4, 2, 5);
  try {
    (void)load_dataset(dir.path(), {{"good"}, {"bad7"}, {"good2"}});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad7"), std::string::npos);
  }
}

TEST(LoadDataset, MissingMaskListsIds) {
  TempDir dir("ds");
  write_pair(dir.path(), "x1", 4, 4, 1);
  save_gray_png(dir.path() / "images" / "x2.png", plane(4, 4, 2, false));
  save_gray_png(dir.path() / "images" / "x3.png", plane(4, 4, 3, false));
  try {
    (void)load_dataset(dir.path(), {{"x1"}, {"x2"}, {"x3"}});
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("x2"), std::string::npos);
    EXPECT_NE(msg.find("x3"), std::string::npos);
  }
}

TEST(LoadDataset, EmptySplitAndMissingIdsRejected) {
  TempDir dir("ds");
  write_pair(dir.path(), "1", 4, 4, 1);
  EXPECT_THROW((void)load_dataset(dir.path(), {{"1"}, {}, {}}), DataError);
  EXPECT_THROW((void)load_dataset(dir.path(), {{"1"}, {"2"}, {"3"}}), DataError);
}

TEST(LoadDataset, PairsManifestOverridesLayout) {
  TempDir dir("pairs");
  fs::create_directories(dir.path() / "raw");
  save_gray_png(dir.path() / "raw" / "s1.png", plane(4, 4, 1, false));
  save_gray_png(dir.path() / "raw" / "s1_gt.png", plane(4, 4, 2, true));
  save_gray_png(dir.path() / "raw" / "s2.png", plane(4, 4, 3, false));
  save_gray_png(dir.path() / "raw" / "s2_gt.png", plane(4, 4, 4, true));
  save_gray_png(dir.path() / "raw" / "s3.png", plane(4, 4, 5, false));
  save_gray_png(dir.path() / "raw" / "s3_gt.png", plane(4, 4, 6, true));
  std::ofstream(dir.path() / "pairs.tsv")
      << "raw/s1.png\traw/s1_gt.png\nraw/s2.png\traw/s2_gt.png\nraw/s3.png\traw/s3_gt.png\n";
  const DatasetSplits d = load_dataset(dir.path(), {{"s1"}, {"s2"}, {"s3"}});
  EXPECT_TRUE(testing::bit_equal(d.train[0].mask, plane(4, 4, 2, true)));
}

TEST(Png, MaskRoundTripIsIdempotent) {
  TempDir dir("png");
  const Tensor m = plane(7, 9, 5, true);
  save_gray_png(dir.path() / "m.png", m);
  const Tensor once = load_mask_png(dir.path() / "m.png");
  save_gray_png(dir.path() / "m2.png", once);
  EXPECT_TRUE(testing::bit_equal(once, m));
  EXPECT_TRUE(testing::bit_equal(load_mask_png(dir.path() / "m2.png"), once));
  EXPECT_THROW((void)load_gray_png(dir.path() / "nope.png"), DataError);
}

TEST(SortIds, NumericWhenPossible) {
  std::vector<std::string> a{"10", "9", "100"};
  sort_ids(a);
  EXPECT_EQ(a, (std::vector<std::string>{"9", "10", "100"}));
  std::vector<std::string> b{"b", "a10", "a9"};
  sort_ids(b);
  EXPECT_EQ(b, (std::vector<std::string>{"a10", "a9", "b"}));
}

Sample sample(std::int64_t h, std::int64_t w, std::uint64_t seed) {
  return Sample{"s" + std::to_string(seed), plane(h, w, seed, false), plane(h, w, seed + 1, true)};
}

TEST(CropBatch, FullSizeIsIdentity) {
  const Sample a = sample(6, 8, 1), b = sample(6, 8, 3);
  const auto [img, msk] = crop_batch({&a, &b}, 6, 8, 9);
  EXPECT_EQ(img.shape(), (Shape{2, 1, 6, 8}));
  const auto iv = img.to_vector();
  const auto av = a.image.to_vector();
  EXPECT_TRUE(std::equal(av.begin(), av.end(), iv.begin()));
  const auto mv = msk.to_vector();
  const auto bm = b.mask.to_vector();
  EXPECT_TRUE(std::equal(bm.begin(), bm.end(), mv.begin() + 48));
}

TEST(CropBatch, AlignedWithSourceAndSeedStable) {
  const Sample a = sample(12, 10, 5);
  const auto [img, msk] = crop_batch({&a}, 5, 4, 17);
  const auto iv = img.to_vector(), mv = msk.to_vector();
  const auto sv = a.image.to_vector(), sm = a.mask.to_vector();
  int matches = 0;
  for (int oy = 0; oy + 5 <= 12; ++oy)
    for (int ox = 0; ox + 4 <= 10; ++ox) {
      bool ok = true;
      for (int y = 0; y < 5 && ok; ++y)
        for (int x = 0; x < 4 && ok; ++x) {
          ok = iv[y * 4 + x] == sv[(oy + y) * 10 + ox + x] &&
               mv[y * 4 + x] == sm[(oy + y) * 10 + ox + x];
        }
      matches += ok;
    }
  EXPECT_GE(matches, 1);
  const auto again = crop_batch({&a}, 5, 4, 17);
  EXPECT_TRUE(testing::bit_equal(again.first, img));
  EXPECT_TRUE(testing::bit_equal(again.second, msk));
}

TEST(CropBatch, OversizedCropRejected) {
  const Sample a = sample(6, 6, 1);
  EXPECT_THROW((void)crop_batch({&a}, 7, 6, 0), ContractError);
}

TEST(DescribeSplits, CountsAndDistinctSizes) {
  auto sample = [](std::int64_t h, std::int64_t w) {
    return Sample{"x", Tensor::zeros({1, h, w}), Tensor::zeros({1, h, w})};
  };
  DatasetSplits d;
  d.train = {sample(4, 5), sample(4, 5)};
  d.val = {sample(6, 6)};
  EXPECT_EQ(describe_splits(d), "train=2 val=1 test=0 sizes=4x5,6x6");
  EXPECT_EQ(describe_splits({}), "train=0 val=0 test=0 sizes=none");
}

}  // namespace
}  // namespace frnet

#include "frnet/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "frnet/png_io.hpp"

namespace frnet {

namespace fs = std::filesystem;

namespace {

std::optional<long long> as_number(const std::string& s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string> id_range(int first, int last) {
  std::vector<std::string> ids;
  for (int i = first; i <= last; ++i) ids.push_back(std::to_string(i));
  return ids;
}

std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 10) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

struct PairPaths {
  fs::path image;
  fs::path mask;
};

// Index of available pairs keyed by stem.
std::map<std::string, PairPaths> index_pairs(const fs::path& root) {
  std::map<std::string, PairPaths> pairs;
  const fs::path manifest = root / "pairs.tsv";
  if (fs::exists(manifest)) {
    std::ifstream is(manifest);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw ParseError(manifest.string(), lineno,
                         "expected '<image>\\t<mask>'");
      }
      fs::path image = root / line.substr(0, tab);
      fs::path mask = root / line.substr(tab + 1);
      const std::string id = image.stem().string();
      if (!pairs.emplace(id, PairPaths{image, mask}).second) {
        throw ParseError(manifest.string(), lineno, "duplicate id '" + id + "'");
      }
    }
    return pairs;
  }

  const fs::path images = root / "images";
  const fs::path masks = root / "masks";
  if (!fs::is_directory(images) || !fs::is_directory(masks)) {
    throw DataError("dataset root '" + root.string() +
                    "' needs images/ and masks/ directories or a pairs.tsv");
  }
  std::vector<std::string> missing;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (entry.path().extension() != ".png") continue;
    const std::string id = entry.path().stem().string();
    const fs::path mask = masks / entry.path().filename();
    if (!fs::exists(mask)) {
      missing.push_back(id);
      continue;
    }
    pairs.emplace(id, PairPaths{entry.path(), mask});
  }
  if (!missing.empty()) {
    sort_ids(missing);
    throw DataError("images without a mask: " + join_ids(missing));
  }
  return pairs;
}

Tensor to_tensor(const GrayImage& img, bool binary) {
  std::vector<float> values(img.pixels.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = static_cast<float>(img.pixels[i]) / 255.0f;
    values[i] = binary ? (v >= 0.5f ? 1.0f : 0.0f) : v;
  }
  return Tensor::from_data({1, img.height, img.width}, std::move(values));
}

}  // namespace

void SplitSpec::validate() const {
  std::map<std::string, std::string> seen;
  const std::pair<const char*, const std::vector<std::string>*> lists[] = {
      {"train", &train_ids}, {"val", &val_ids}, {"test", &test_ids}};
  for (const auto& [name, ids] : lists) {
    for (const auto& id : *ids) {
      auto [it, inserted] = seen.emplace(id, name);
      if (!inserted) {
        throw ConfigError("split id '" + id + "' appears in both " +
                          it->second + " and " + name);
      }
    }
  }
}

SplitSpec rossa_split() {
  SplitSpec s;
  s.train_ids = id_range(1, 100);
  const auto tail = id_range(301, 918);
  s.train_ids.insert(s.train_ids.end(), tail.begin(), tail.end());
  s.val_ids = id_range(101, 200);
  s.test_ids = id_range(201, 300);
  return s;
}

SplitSpec parse_split_manifest(const fs::path& manifest) {
  std::ifstream is(manifest);
  if (!is) throw DataError("cannot open split manifest '" + manifest.string() + "'");
  SplitSpec s;
  std::vector<std::string>* current = nullptr;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    if (line == "[train]") {
      current = &s.train_ids;
    } else if (line == "[val]") {
      current = &s.val_ids;
    } else if (line == "[test]") {
      current = &s.test_ids;
    } else if (line.front() == '[') {
      throw ParseError(manifest.string(), lineno, "unknown section " + line);
    } else if (!current) {
      throw ParseError(manifest.string(), lineno,
                       "id before any [train]/[val]/[test] section");
    } else if (line.find_first_of(" \t") != std::string::npos) {
      throw ParseError(manifest.string(), lineno,
                       "expected one id per line, got '" + line + "'");
    } else if (!seen.insert(line).second) {
      throw ParseError(manifest.string(), lineno, "duplicate id '" + line + "'");
    } else {
      current->push_back(line);
    }
  }
  return s;
}

SplitSpec octa500_split(Octa500Subset subset, const fs::path& root) {
  const char* name =
      subset == Octa500Subset::Fov6mm ? "OCTA_6M.split" : "OCTA_3M.split";
  return parse_split_manifest(root / name);
}

void sort_ids(std::vector<std::string>& ids) {
  const bool numeric = std::all_of(ids.begin(), ids.end(), [](const auto& id) {
    return as_number(id).has_value();
  });
  if (numeric) {
    std::stable_sort(ids.begin(), ids.end(), [](const auto& a, const auto& b) {
      return *as_number(a) < *as_number(b);
    });
  } else {
    std::sort(ids.begin(), ids.end());
  }
}

Tensor load_gray_png(const fs::path& path) {
  return to_tensor(read_png_gray(path), false);
}

Tensor load_mask_png(const fs::path& path) {
  return to_tensor(read_png_gray(path), true);
}

void save_gray_png(const fs::path& path, const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 1) {
    throw DimensionError("save_gray_png expects [1, H, W], got " +
                             shape_to_string(image.shape()),
                         "shape");
  }
  GrayImage img;
  img.height = image.dim(1);
  img.width = image.dim(2);
  const auto v = image.to_vector();
  img.pixels.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = std::clamp(v[i], 0.0, 1.0);
    img.pixels[i] = static_cast<std::uint8_t>(c * 255.0 + 0.5);
  }
  write_png_gray(path, img);
}

std::string describe_splits(const DatasetSplits& splits) {
  std::vector<std::string> sizes;
  for (const auto* set : {&splits.train, &splits.val, &splits.test}) {
    for (const Sample& s : *set) {
      const std::string hw = std::to_string(s.height()) + "x" + std::to_string(s.width());
      if (std::find(sizes.begin(), sizes.end(), hw) == sizes.end()) sizes.push_back(hw);
    }
  }
  std::string out = "train=" + std::to_string(splits.train.size()) +
                    " val=" + std::to_string(splits.val.size()) +
                    " test=" + std::to_string(splits.test.size()) + " sizes=";
  for (std::size_t i = 0; i < sizes.size(); ++i) out += (i ? "," : "") + sizes[i];
  if (sizes.empty()) out += "none";
  return out;
}

DatasetSplits load_dataset(const fs::path& root, const SplitSpec& split) {
  split.validate();
  const auto pairs = index_pairs(root);
  std::map<long long, std::string> by_number;
  for (const auto& [id, paths] : pairs) {
    if (auto n = as_number(id)) by_number.emplace(*n, id);
  }

  auto load = [&](const char* name, std::vector<std::string> ids) {
    if (ids.empty()) throw DataError(std::string("split '") + name + "' is empty");
    sort_ids(ids);
    std::vector<std::string> missing;
    std::vector<Sample> out;
    for (const auto& id : ids) {
      auto it = pairs.find(id);
      if (it == pairs.end()) {
        if (auto n = as_number(id); n && by_number.count(*n)) {
          it = pairs.find(by_number.at(*n));
        }
      }
      if (it == pairs.end()) {
        missing.push_back(id);
        continue;
      }
      Sample s{id, load_gray_png(it->second.image),
               load_mask_png(it->second.mask)};
      if (s.image.shape() != s.mask.shape()) {
        throw DataError("sample '" + id + "': image " +
                        shape_to_string(s.image.shape()) + " and mask " +
                        shape_to_string(s.mask.shape()) + " differ in size");
      }
      out.push_back(std::move(s));
    }
    if (!missing.empty()) {
      throw DataError(std::string("split '") + name + "' ids not found in '" +
                      root.string() + "': " + join_ids(missing));
    }
    return out;
  };
  DatasetSplits d;
  d.train = load("train", split.train_ids);
  d.val = load("val", split.val_ids);
  d.test = load("test", split.test_ids);
  return d;
}

std::pair<Tensor, Tensor> crop_batch(const std::vector<const Sample*>& samples,
                                     std::int64_t crop_h, std::int64_t crop_w,
                                     std::uint64_t seed) {
  if (samples.empty()) throw ContractError("crop_batch: no samples");
  if (crop_h < 1 || crop_w < 1) throw ContractError("crop_batch: empty crop");
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::int64_t>(samples.size());
  std::vector<float> img(static_cast<std::size_t>(n * crop_h * crop_w));
  std::vector<float> msk(img.size());
  for (std::int64_t s = 0; s < n; ++s) {
    const Sample& smp = *samples[s];
    const auto h = smp.height(), w = smp.width();
    if (crop_h > h || crop_w > w) {
      throw ContractError("crop_batch: crop " + std::to_string(crop_h) + "x" +
                          std::to_string(crop_w) + " exceeds sample '" +
                          smp.id + "' of " + std::to_string(h) + "x" +
                          std::to_string(w));
    }
    const auto oy = std::uniform_int_distribution<std::int64_t>(0, h - crop_h)(rng);
    const auto ox = std::uniform_int_distribution<std::int64_t>(0, w - crop_w)(rng);
    auto si = smp.image.data<float>();
    auto sm = smp.mask.data<float>();
    for (std::int64_t y = 0; y < crop_h; ++y) {
      for (std::int64_t x = 0; x < crop_w; ++x) {
        const auto dst = (s * crop_h + y) * crop_w + x;
        const auto src = (oy + y) * w + ox + x;
        img[dst] = si[src];
        msk[dst] = sm[src];
      }
    }
  }
  return {Tensor::from_data({n, 1, crop_h, crop_w}, std::move(img)),
          Tensor::from_data({n, 1, crop_h, crop_w}, std::move(msk))};
}

std::pair<Tensor, Tensor> stack_batch(const std::vector<const Sample*>& samples) {
  if (samples.empty()) throw ContractError("stack_batch: no samples");
  const auto h = samples.front()->height(), w = samples.front()->width();
  for (const Sample* s : samples) {
    if (s->height() != h) throw DimensionError("stack_batch", "height", h, s->height());
    if (s->width() != w) throw DimensionError("stack_batch", "width", w, s->width());
  }
  return crop_batch(samples, h, w, 0);
}

}  // namespace frnet

#include "frnet/models.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "frnet/ops.hpp"
#include "frnet/resample.hpp"

namespace frnet {

std::string_view arch_name(Arch arch) {
  switch (arch) {
    case Arch::FRNetBase:
      return "frnet_base";
    case Arch::FRNet:
      return "frnet";
    case Arch::UNetBaseline:
      return "unet_baseline";
  }
  return "unknown";
}

Arch parse_arch(std::string_view name) {
  for (auto a : {Arch::FRNetBase, Arch::FRNet, Arch::UNetBaseline}) {
    if (arch_name(a) == name) return a;
  }
  throw ConfigError("unknown arch '" + std::string(name) +
                    "' (expected frnet_base, frnet or unet_baseline)");
}

ModelConfig ModelConfig::for_arch(Arch arch) {
  ModelConfig c;
  c.arch = arch;
  return c;
}

BlockFamily ModelConfig::family() const {
  if (block_family) return *block_family;
  return arch == Arch::FRNetBase ? BlockFamily::Residual
                                 : BlockFamily::RecurrentConvNeXt;
}

BlockConfig ModelConfig::block_config() const {
  return BlockConfig::for_family(family(), channels, recurrence_steps);
}

void ModelConfig::validate() const {
  if (in_channels <= 0) throw ConfigError("in_channels must be positive");
  if (arch == Arch::UNetBaseline) {
    if (unet_depth < 1) {
      throw ConfigError("unet_depth must be >= 1 (at least two resolution "
                        "levels), got " + std::to_string(unet_depth));
    }
    if (unet_base_channels <= 0) {
      throw ConfigError("unet_base_channels must be positive");
    }
    if (block_family) {
      throw ConfigError("block_family applies to the frnet family only");
    }
    return;
  }
  if (num_blocks < 1) throw ConfigError("num_blocks must be >= 1");
  block_config().validate();
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "arch=" << arch_name(arch) << '\n'
     << "in_channels=" << in_channels << '\n'
     << "channels=" << channels << '\n'
     << "num_blocks=" << num_blocks << '\n'
     << "recurrence_steps=" << recurrence_steps << '\n'
     << "block_family=" << (block_family ? family_name(*block_family) : "default")
     << '\n'
     << "unet_base_channels=" << unet_base_channels << '\n'
     << "unet_depth=" << unet_depth << '\n';
  return os.str();
}

namespace {

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': '" + value +
                      "' is not an integer");
  }
  return out;
}

}  // namespace

ModelConfig ModelConfig::from_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw ConfigError(std::string("model config is missing '") + key + "'");
    }
    return it->second;
  };
  ModelConfig c;
  c.arch = parse_arch(get("arch"));
  c.in_channels = parse_int<std::int64_t>("in_channels", get("in_channels"));
  c.channels = parse_int<std::int64_t>("channels", get("channels"));
  c.num_blocks = parse_int<int>("num_blocks", get("num_blocks"));
  c.recurrence_steps =
      parse_int<int>("recurrence_steps", get("recurrence_steps"));
  if (const auto& f = get("block_family"); f != "default") {
    c.block_family = parse_family(f);
  }
  c.unet_base_channels =
      parse_int<std::int64_t>("unet_base_channels", get("unet_base_channels"));
  c.unet_depth = parse_int<int>("unet_depth", get("unet_depth"));
  return c;
}

void SegmentationModel::check_input(const Shape& shape) const {
  if (shape.size() != 4) {
    throw DimensionError("model_forward", "rank", 4,
                         static_cast<std::int64_t>(shape.size()));
  }
  if (shape[1] != config_.in_channels) {
    throw DimensionError("model_forward", "channels", config_.in_channels,
                         shape[1]);
  }
  if (shape[0] < 1 || shape[2] < 1 || shape[3] < 1) {
    throw DimensionError("model_forward: empty input " + shape_to_string(shape),
                         "spatial");
  }
}

FRNetModel::FRNetModel(ModelConfig config, std::uint64_t seed)
    : SegmentationModel(std::move(config), seed) {
  config_.validate();
  if (config_.arch == Arch::UNetBaseline) {
    throw ConfigError("FRNetModel cannot build unet_baseline");
  }
  Rng rng(seed);
  const auto c = config_.channels;
  stem_conv_ = &register_module(
      "stem_conv",
      std::make_unique<Conv2d>(dense_conv(config_.in_channels, c, 3), rng));
  stem_norm_ = &register_module("stem_bn", std::make_unique<BatchNorm2d>(c));
  const BlockConfig bc = config_.block_config();
  for (int i = 0; i < config_.num_blocks; ++i) {
    blocks_.push_back(
        &register_module("block" + std::to_string(i), make_block(bc, rng)));
  }
  head_ = &register_module("head",
                           std::make_unique<Conv2d>(dense_conv(c, 1, 1), rng));
}

Tensor FRNetModel::forward(const Tensor& x) {
  Tensor h = relu((*stem_norm_)((*stem_conv_)(x)));
  for (Module* b : blocks_) h = (*b)(h);
  return sigmoid((*head_)(h));
}

void FRNetModel::set_recurrence_steps(int steps) {
  for (Module* b : blocks_) {
    if (auto* cb = dynamic_cast<ConvNeXtBlock*>(b)) {
      cb->set_recurrence_steps(steps);
    }
  }
  config_.recurrence_steps = steps;
}

namespace {

class DoubleConv : public Module {
 public:
  DoubleConv(std::int64_t in, std::int64_t out, Rng& rng) {
    conv1_ = &register_module("conv1",
                              std::make_unique<Conv2d>(dense_conv(in, out, 3), rng));
    bn1_ = &register_module("bn1", std::make_unique<BatchNorm2d>(out));
    conv2_ = &register_module("conv2",
                              std::make_unique<Conv2d>(dense_conv(out, out, 3), rng));
    bn2_ = &register_module("bn2", std::make_unique<BatchNorm2d>(out));
  }

  Tensor forward(const Tensor& x) override {
    Tensor h = relu((*bn1_)((*conv1_)(x)));
    return relu((*bn2_)((*conv2_)(h)));
  }

 private:
  Conv2d* conv1_;
  BatchNorm2d* bn1_;
  Conv2d* conv2_;
  BatchNorm2d* bn2_;
};

}  // namespace

UNetModel::UNetModel(ModelConfig config, std::uint64_t seed)
    : SegmentationModel(std::move(config), seed) {
  config_.validate();
  if (config_.arch != Arch::UNetBaseline) {
    throw ConfigError("UNetModel builds unet_baseline only");
  }
  Rng rng(seed);
  const int depth = config_.unet_depth;
  std::vector<std::int64_t> ch;
  for (int l = 0; l <= depth; ++l) ch.push_back(config_.unet_base_channels << l);
  std::int64_t in = config_.in_channels;
  for (int l = 0; l <= depth; ++l) {
    encoders_.push_back(&register_module(
        "enc" + std::to_string(l), std::make_unique<DoubleConv>(in, ch[l], rng)));
    in = ch[l];
  }
  for (int l = depth - 1; l >= 0; --l) {
    decoders_.push_back(&register_module(
        "dec" + std::to_string(l),
        std::make_unique<DoubleConv>(ch[l + 1] + ch[l], ch[l], rng)));
  }
  head_ = &register_module(
      "head", std::make_unique<Conv2d>(dense_conv(ch[0], 1, 1), rng));
}

void UNetModel::check_input(const Shape& shape) const {
  SegmentationModel::check_input(shape);
  const std::int64_t factor = std::int64_t{1} << config_.unet_depth;
  static constexpr const char* kAxis[] = {"height", "width"};
  for (int a = 0; a < 2; ++a) {
    const auto extent = shape[2 + a];
    if (extent % factor != 0) {
      throw DimensionError(
          "unet_baseline: input " + std::string(kAxis[a]) + " " +
              std::to_string(extent) + " is not divisible by " +
              std::to_string(factor) + "; padding required (pad to " +
              std::to_string((extent + factor - 1) / factor * factor) + ")",
          kAxis[a]);
    }
  }
}

Tensor UNetModel::forward(const Tensor& x) {
  check_input(x.shape());
  std::vector<Tensor> skips;
  Tensor h = x;
  for (std::size_t l = 0; l < encoders_.size(); ++l) {
    if (l > 0) h = baseline::max_pool2x2(h);
    h = (*encoders_[l])(h);
    skips.push_back(h);
  }
  skips.pop_back();
  for (Module* dec : decoders_) {
    h = baseline::upsample_bilinear2x(h);
    h = (*dec)(baseline::concat_channels(skips.back(), h));
    skips.pop_back();
  }
  return sigmoid((*head_)(h));
}

std::unique_ptr<SegmentationModel> build_unet_baseline(
    const ModelConfig& config, std::uint64_t seed) {
  return std::make_unique<UNetModel>(config, seed);
}

std::unique_ptr<SegmentationModel> build_model(const ModelConfig& config,
                                               std::uint64_t seed) {
  if (config.arch == Arch::UNetBaseline) {
    return build_unet_baseline(config, seed);
  }
  return std::make_unique<FRNetModel>(config, seed);
}

Tensor model_forward(SegmentationModel& model, const Tensor& batch) {
  model.check_input(batch.shape());
  return model(batch);
}

}  // namespace frnet

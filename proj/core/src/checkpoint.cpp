#include "frnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace frnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'F', 'R', 'N', 'C'};

std::vector<Tensor> state_tensors(const SegmentationModel& model) {
  std::vector<Tensor> out;
  for (auto& [name, t] : model.named_parameters()) out.push_back(t);
  for (auto& [name, t] : model.named_buffers()) out.push_back(t);
  return out;
}

std::int64_t state_size(const SegmentationModel& model) {
  std::int64_t n = 0;
  for (const auto& t : state_tensors(model)) n += t.numel();
  return n;
}

}  // namespace

Checkpoint Checkpoint::capture(const SegmentationModel& model) {
  Checkpoint ck;
  ck.config = model.config();
  ck.seed = model.seed();
  for (const auto& t : state_tensors(model)) {
    for (double v : t.to_vector()) ck.values.push_back(static_cast<float>(v));
  }
  return ck;
}

void Checkpoint::restore_into(SegmentationModel& model) const {
  if (!(model.config() == config)) {
    throw LoadError("checkpoint config does not match the target model");
  }
  const auto expected = state_size(model);
  if (expected != static_cast<std::int64_t>(values.size())) {
    throw LoadError("checkpoint holds " + std::to_string(values.size()) +
                    " values, model needs " + std::to_string(expected));
  }
  std::size_t offset = 0;
  for (auto t : state_tensors(model)) {
    const auto n = static_cast<std::size_t>(t.numel());
    std::vector<float> chunk(values.begin() + offset,
                             values.begin() + offset + n);
    t.copy_values_from(Tensor::from_data(t.shape(), std::move(chunk)));
    offset += n;
  }
}

std::unique_ptr<SegmentationModel> Checkpoint::instantiate() const {
  auto model = build_model(config, seed);
  restore_into(*model);
  return model;
}

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ostringstream text;
  text << ck.config.to_text() << "seed=" << ck.seed << '\n'
       << "values=" << ck.values.size() << '\n';
  for (const auto& [k, v] : ck.metadata) text << k << '=' << v << '\n';
  const std::string block = text.str();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw LoadError("cannot open '" + path.string() + "' for writing");
  const std::uint32_t version = kCheckpointVersion;
  const auto length = static_cast<std::uint32_t>(block.size());
  os.write(kMagic, 4);
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  os.write(reinterpret_cast<const char*>(&length), sizeof length);
  os.write(block.data(), static_cast<std::streamsize>(block.size()));
  os.write(reinterpret_cast<const char*>(ck.values.data()),
           static_cast<std::streamsize>(ck.values.size() * sizeof(float)));
  if (!os) throw LoadError("write to '" + path.string() + "' failed");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint '" + path.string() + "'");
  char magic[4];
  std::uint32_t version = 0, length = 0;
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw LoadError("'" + path.string() + "' is not a checkpoint (bad magic)");
  }
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!is || version != kCheckpointVersion) {
    throw LoadError("unsupported checkpoint version " +
                    std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  is.read(reinterpret_cast<char*>(&length), sizeof length);
  std::string block(length, '\0');
  is.read(block.data(), length);
  if (!is) throw LoadError("truncated checkpoint header");

  Checkpoint ck;
  try {
    ck.config = ModelConfig::from_text(block);
  } catch (const ConfigError& e) {
    throw LoadError(std::string("bad checkpoint config: ") + e.what());
  }
  std::size_t count = 0;
  bool have_count = false;
  std::istringstream lines(block);
  std::string line;
  try {
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "seed") {
      ck.seed = std::stoull(value);
    } else if (key == "values") {
      count = std::stoull(value);
      have_count = true;
    } else if (key.rfind("meta.", 0) == 0) {
      ck.metadata[key] = value;
    }
  }
  } catch (const std::logic_error&) {
    throw LoadError("bad checkpoint header line '" + line + "'");
  }
  if (!have_count) throw LoadError("checkpoint header lacks 'values'");
  ck.values.resize(count);
  is.read(reinterpret_cast<char*>(ck.values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!is) throw LoadError("truncated checkpoint payload");
  is.peek();
  if (!is.eof()) throw LoadError("trailing bytes after checkpoint payload");
  return ck;
}

void save_checkpoint(const SegmentationModel& model,
                     const std::filesystem::path& path) {
  write_checkpoint(Checkpoint::capture(model), path);
}

std::unique_ptr<SegmentationModel> load_checkpoint(
    const std::filesystem::path& path, std::optional<Arch> expected_arch) {
  Checkpoint ck = read_checkpoint(path);
  if (expected_arch && *expected_arch != ck.config.arch) {
    throw LoadError("checkpoint arch is " +
                    std::string(arch_name(ck.config.arch)) + ", expected " +
                    std::string(arch_name(*expected_arch)));
  }
  return ck.instantiate();
}

}  // namespace frnet

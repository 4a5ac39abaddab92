#include "daylight/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <iterator>

#include "daylight/dataset/sample.hpp"
#include "daylight/errors.hpp"
#include "daylight/features/feature_vector.hpp"

namespace illum::model {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> Checkpoint::serialize() const {
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& [name, tensor] : weights) manifest.push_back({{"name", name}, {"shape", tensor.shape()}});
  nlohmann::json header{{"config", config.to_json()},
                        {"input_scaler", input_scaler.to_json()},
                        {"target_scaler", target_scaler.to_json()},
                        {"feature_order", features::kFeatureOrder},
                        {"target_order", dataset::kTargetNames},
                        {"mask", mask ? mask->to_json() : nlohmann::json(nullptr)},
                        {"best_val_mse", best_val_mse},
                        {"best_epoch", best_epoch},
                        {"weights", manifest}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, tensor] : weights) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(tensor.data());
    out.insert(out.end(), bytes, bytes + tensor.numel() * sizeof(float));
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kCheckpointVersion) throw DataError(fmt::format("unsupported checkpoint version {}", version));
  const std::uint32_t header_len = get_u32(bytes, 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len)) throw DataError("checkpoint header truncated");

  Checkpoint ck;
  std::size_t pos = 12 + header_len;
  try {
    const auto header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
    ck.config = ModelConfig::from_json(header.at("config"));
    ck.input_scaler = features::ScalerParams::from_json(header.at("input_scaler"));
    ck.target_scaler = features::ScalerParams::from_json(header.at("target_scaler"));
    if (header.at("feature_order").get<std::vector<std::string>>() !=
        std::vector<std::string>(features::kFeatureOrder.begin(), features::kFeatureOrder.end())) {
      throw DataError("checkpoint structured feature order differs from (tod_sin, tod_cos, X, D)");
    }
    if (header.at("target_order").get<std::vector<std::string>>() !=
        std::vector<std::string>(dataset::kTargetNames.begin(), dataset::kTargetNames.end())) {
      throw DataError("checkpoint target order differs from (Eh, Es, Ee)");
    }
    if (!header.at("mask").is_null()) ck.mask = features::WindowMask::from_json(header.at("mask"));
    ck.best_val_mse = header.at("best_val_mse").get<double>();
    ck.best_epoch = header.at("best_epoch").get<std::size_t>();
    if (ck.input_scaler.columns() != features::kStructuredFeatureCount ||
        ck.target_scaler.columns() != dataset::kTargetCount) {
      throw DataError("checkpoint scalers have the wrong column count");
    }

    const auto specs = parameter_specs(ck.config);
    const auto& manifest = header.at("weights");
    if (manifest.size() != specs.size()) {
      throw DataError(fmt::format("checkpoint lists {} tensors, architecture has {}", manifest.size(), specs.size()));
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto name = manifest[i].at("name").get<std::string>();
      const auto shape = manifest[i].at("shape").get<nn::Shape>();
      if (name != specs[i].name || shape != specs[i].shape) {
        throw DataError(fmt::format("checkpoint tensor {} is {} {}, expected {} {}", i, name, nn::shape_to_string(shape),
                                    specs[i].name, nn::shape_to_string(specs[i].shape)));
      }
      const std::size_t n = nn::shape_numel(shape);
      if (bytes.size() - pos < n * sizeof(float)) throw DataError("checkpoint weight data truncated");
      std::vector<float> data(n);
      std::memcpy(data.data(), bytes.data() + pos, n * sizeof(float));
      pos += n * sizeof(float);
      ck.weights.emplace_back(name, nn::Tensor<float>(shape, std::move(data)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("checkpoint header: {}", e.what()));
  } catch (const ConfigError& e) {
    throw DataError(fmt::format("checkpoint header: {}", e.what()));
  }
  if (pos != bytes.size()) throw DataError("checkpoint has trailing bytes");
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

MultimodalNet<float> Checkpoint::instantiate() const { return MultimodalNet<float>(config, weights); }

}  // namespace illum::model

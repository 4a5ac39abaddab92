#include "daylight/model/config.hpp"

#include <fmt/format.h>
#include <fstream>
#include <set>

#include "daylight/errors.hpp"

namespace illum::model {

void ModelConfig::validate() const {
  if (cnn_channels.size() != 4) throw ConfigError(fmt::format("cnn_channels needs 4 entries, got {}", cnn_channels.size()));
  for (auto c : cnn_channels) {
    if (c == 0) throw ConfigError("cnn_channels entries must be positive");
  }
  if (mlp_hidden.empty()) throw ConfigError("mlp_hidden must not be empty");
  for (auto h : mlp_hidden) {
    if (h == 0) throw ConfigError("mlp_hidden entries must be positive");
  }
  if (struct_embed_dim == 0) throw ConfigError("struct_embed_dim must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError(fmt::format("dropout {} outside [0, 1)", dropout));
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (image_size == 0 || image_size % 16 != 0) {
    throw ConfigError(fmt::format("image_size {} must be a positive multiple of 16", image_size));
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"name", name},
          {"cnn_channels", cnn_channels},
          {"struct_embed_dim", struct_embed_dim},
          {"mlp_hidden", mlp_hidden},
          {"dropout", dropout},
          {"lr", lr},
          {"batch_size", batch_size},
          {"patience", patience},
          {"max_epochs", max_epochs},
          {"seed", seed},
          {"image_size", image_size}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{"name",       "cnn_channels", "struct_embed_dim", "mlp_hidden",
                                           "dropout",    "lr",           "batch_size",       "patience",
                                           "max_epochs", "seed",         "image_size"};
  if (!j.is_object()) throw ConfigError("model configuration must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(fmt::format("unknown model configuration key '{}'", key));
  }
  ModelConfig c;
  try {
    if (j.contains("name")) c.name = j["name"].get<std::string>();
    if (j.contains("cnn_channels")) c.cnn_channels = j["cnn_channels"].get<std::vector<std::size_t>>();
    if (j.contains("struct_embed_dim")) c.struct_embed_dim = j["struct_embed_dim"].get<std::size_t>();
    if (j.contains("mlp_hidden")) c.mlp_hidden = j["mlp_hidden"].get<std::vector<std::size_t>>();
    if (j.contains("dropout")) c.dropout = j["dropout"].get<double>();
    if (j.contains("lr")) c.lr = j["lr"].get<double>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("patience")) c.patience = j["patience"].get<std::size_t>();
    if (j.contains("max_epochs")) c.max_epochs = j["max_epochs"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("image_size")) c.image_size = j["image_size"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("model configuration: {}", e.what()));
  }
  c.validate();
  return c;
}

ModelConfig ModelConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model configuration " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("model configuration {}: {}", path.string(), e.what()));
  }
  return from_json(j);
}

}  // namespace illum::model

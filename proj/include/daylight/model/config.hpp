#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace illum::model {

struct ModelConfig {
  std::string name = "model";
  std::vector<std::size_t> cnn_channels{16, 32, 64, 128};
  std::size_t struct_embed_dim = 32;
  std::vector<std::size_t> mlp_hidden{128, 64, 32};
  double dropout = 0.0;
  double lr = 0.001;
  std::size_t batch_size = 64;
  std::size_t patience = 12;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 42;
  std::size_t image_size = 128;

  // Throws ConfigError on violated invariants.
  void validate() const;

  std::size_t embedding_dim() const { return cnn_channels.back(); }
  std::size_t fused_dim() const { return embedding_dim() + struct_embed_dim; }

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static ModelConfig from_json(const nlohmann::json& j);
  static ModelConfig load(const std::filesystem::path& path);

  bool operator==(const ModelConfig&) const = default;
};

inline constexpr std::size_t kConvKernel = 3;
inline constexpr std::size_t kConvPadding = 1;
inline constexpr std::size_t kPoolWindow = 2;
inline constexpr std::size_t kOutputs = 3;

}  // namespace illum::model

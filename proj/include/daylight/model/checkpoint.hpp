#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "daylight/features/mask.hpp"
#include "daylight/features/scaler.hpp"
#include "daylight/model/config.hpp"
#include "daylight/model/network.hpp"

namespace illum::model {

inline constexpr char kCheckpointMagic[4] = {'D', 'L', 'N', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Everything inference needs: architecture, training-time scalers and
// preprocessing mask, and the best-epoch weights.
//
// Layout: "DLNC", u32 LE version, u32 LE header length, JSON header, then
// little-endian float32 blobs in header manifest order.
struct Checkpoint {
  ModelConfig config;
  features::ScalerParams input_scaler;
  features::ScalerParams target_scaler;
  std::optional<features::WindowMask> mask;
  std::vector<std::pair<std::string, nn::Tensor<float>>> weights;
  double best_val_mse = 0.0;
  std::size_t best_epoch = 0;

  std::vector<std::uint8_t> serialize() const;
  // Throws DataError on a bad magic/version, a header that does not match
  // the config-derived architecture, or truncated blobs.
  static Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  MultimodalNet<float> instantiate() const;
};

}  // namespace illum::model

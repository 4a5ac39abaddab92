#pragma once

#include <array>
#include <string>

#include "daylight/features/feature_vector.hpp"
#include "daylight/features/timestamp.hpp"

namespace illum::dataset {

inline constexpr std::size_t kTargetCount = 3;
inline const std::array<std::string, kTargetCount> kTargetNames{"Eh", "Es", "Ee"};

// One synchronized observation. Targets are lux in (Eh, Es, Ee) order.
struct Sample {
  features::Timestamp timestamp;
  int sensor_id = 0;
  double x = 0.0;
  double d = 0.0;
  std::string image_ref;  // filename inside the corpus image directory
  std::array<double, kTargetCount> targets{};
};

inline features::FeatureVector build_feature_vector(const Sample& s) {
  return features::build_feature_vector(s.timestamp, s.x, s.d);
}

}  // namespace illum::dataset

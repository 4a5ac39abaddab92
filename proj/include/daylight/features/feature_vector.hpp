#pragma once

#include <array>
#include <string>

#include "daylight/features/timestamp.hpp"

namespace illum::features {

inline constexpr std::size_t kStructuredFeatureCount = 4;

// Column order of the structured model input.
inline const std::array<std::string, kStructuredFeatureCount> kFeatureOrder{"tod_sin", "tod_cos", "X", "D"};

struct FeatureVector {
  double tod_sin = 0.0;
  double tod_cos = 1.0;
  double x = 0.0;  // meters from the west wall
  double d = 0.0;  // meters from the window

  std::array<double, kStructuredFeatureCount> as_array() const { return {tod_sin, tod_cos, x, d}; }
};

// Throws DataError when a coordinate is missing (non-finite) or the time is
// outside [0, 1440).
FeatureVector build_feature_vector(const Timestamp& ts, double x, double d);

}  // namespace illum::features

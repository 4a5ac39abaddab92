#include "daylight/features/feature_vector.hpp"

#include <cmath>

#include "daylight/errors.hpp"
#include "daylight/features/temporal.hpp"

namespace illum::features {

FeatureVector build_feature_vector(const Timestamp& ts, double x, double d) {
  if (!std::isfinite(x)) throw DataError("feature vector: X coordinate missing");
  if (!std::isfinite(d)) throw DataError("feature vector: D coordinate missing");
  if (ts.minute_of_day < 0 || ts.minute_of_day >= 1440) throw DataError("feature vector: time of day out of range");
  const auto enc = encode_time(ts);
  return {enc.sin, enc.cos, x, d};
}

}  // namespace illum::features

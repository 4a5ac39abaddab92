#include "daylight/features/temporal.hpp"

#include <cmath>
#include <numbers>

namespace illum::features {

TimeOfDayEncoding encode_minutes(double minutes) {
  double t = std::fmod(minutes, 1440.0);
  if (t < 0.0) t += 1440.0;
  const double angle = 2.0 * std::numbers::pi * t / 1440.0;
  return {std::sin(angle), std::cos(angle)};
}

TimeOfDayEncoding encode_time(const Timestamp& ts) { return encode_minutes(ts.minute_of_day); }

}  // namespace illum::features

#pragma once

#include "daylight/features/timestamp.hpp"

namespace illum::features {

struct TimeOfDayEncoding {
  double sin = 0.0;
  double cos = 1.0;
};

// Cyclic encoding of minutes since midnight over a 1440-minute period.
TimeOfDayEncoding encode_minutes(double minutes);
TimeOfDayEncoding encode_time(const Timestamp& ts);

}  // namespace illum::features

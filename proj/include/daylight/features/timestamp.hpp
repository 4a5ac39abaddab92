#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace illum::features {

// Calendar date plus minute of day.
struct Timestamp {
  std::chrono::sys_days day{};
  int minute_of_day = 0;  // [0, 1440)

  auto operator<=>(const Timestamp&) const = default;
};

// "YYYY-MM-DD HH:MM"; throws DataError on anything else.
Timestamp parse_timestamp(std::string_view text);
// "YYYY-MM-DD"
std::chrono::sys_days parse_date(std::string_view text);
// "HH:MM" -> minutes since midnight
int parse_clock(std::string_view text);

std::string format_timestamp(const Timestamp& ts);
std::string format_date(std::chrono::sys_days day);
std::string format_clock(int minute_of_day);
// "YYYYMMDD_HHMM", the image filename stem.
std::string compact_timestamp(const Timestamp& ts);

}  // namespace illum::features

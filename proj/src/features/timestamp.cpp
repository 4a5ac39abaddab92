#include "daylight/features/timestamp.hpp"

#include <charconv>
#include <fmt/format.h>

#include "daylight/errors.hpp"

namespace illum::features {

namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + len;
  for (const char* c = first; c != last; ++c) {
    if (*c < '0' || *c > '9') throw DataError(fmt::format("malformed date/time '{}'", whole));
  }
  std::from_chars(first, last, value);
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (text[pos] != c) throw DataError(fmt::format("malformed date/time '{}'", whole));
}

}  // namespace

std::chrono::sys_days parse_date(std::string_view text) {
  using namespace std::chrono;
  if (text.size() != 10) throw DataError(fmt::format("malformed date '{}', expected YYYY-MM-DD", text));
  expect_char(text, 4, '-', text);
  expect_char(text, 7, '-', text);
  const year_month_day ymd{year{parse_fixed_int(text, 0, 4, text)},
                           month{static_cast<unsigned>(parse_fixed_int(text, 5, 2, text))},
                           day{static_cast<unsigned>(parse_fixed_int(text, 8, 2, text))}};
  if (!ymd.ok()) throw DataError(fmt::format("invalid calendar date '{}'", text));
  return sys_days{ymd};
}

int parse_clock(std::string_view text) {
  if (text.size() != 5) throw DataError(fmt::format("malformed time '{}', expected HH:MM", text));
  expect_char(text, 2, ':', text);
  const int h = parse_fixed_int(text, 0, 2, text);
  const int m = parse_fixed_int(text, 3, 2, text);
  if (h > 23 || m > 59) throw DataError(fmt::format("time '{}' out of range", text));
  return h * 60 + m;
}

Timestamp parse_timestamp(std::string_view text) {
  if (text.size() != 16 || text[10] != ' ') {
    throw DataError(fmt::format("malformed timestamp '{}', expected YYYY-MM-DD HH:MM", text));
  }
  return Timestamp{parse_date(text.substr(0, 10)), parse_clock(text.substr(11))};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()));
}

std::string format_clock(int minute_of_day) {
  return fmt::format("{:02d}:{:02d}", minute_of_day / 60, minute_of_day % 60);
}

std::string format_timestamp(const Timestamp& ts) {
  return format_date(ts.day) + " " + format_clock(ts.minute_of_day);
}

std::string compact_timestamp(const Timestamp& ts) {
  const std::chrono::year_month_day ymd{ts.day};
  return fmt::format("{:04d}{:02d}{:02d}_{:02d}{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), ts.minute_of_day / 60,
                     ts.minute_of_day % 60);
}

}  // namespace illum::features

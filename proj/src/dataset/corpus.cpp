#include "daylight/dataset/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "daylight/errors.hpp"

namespace illum::dataset {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view cell, std::string_view source, std::size_t line,
                                   std::string_view column, bool non_negative) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw DataError(fmt::format("{}:{}: column {}: '{}' is not a number", source, line, column, cell));
  }
  if (non_negative && v < 0.0) {
    throw DataError(fmt::format("{}:{}: column {}: negative value {}", source, line, column, v));
  }
  return v;
}

const std::vector<std::string> kImageExtensions{".pgm", ".ppm", ".png", ".jpg", ".jpeg"};

}  // namespace

std::vector<CsvRecord> parse_csv(std::string_view text, std::string_view source) {
  std::vector<CsvRecord> records;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw DataError(fmt::format("{}:{}: expected header '{}', found '{}'", source, line_no, kCsvHeader, line));
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw DataError(fmt::format("{}:{}: expected 7 fields, found {}", source, line_no, fields.size()));
    }
    CsvRecord rec;
    rec.line = line_no;
    try {
      rec.timestamp = features::parse_timestamp(trim(fields[0]));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
    const auto sensor = parse_number(fields[1], source, line_no, "sensor_id", true);
    if (!sensor || *sensor != std::floor(*sensor) || *sensor < 1) {
      throw DataError(fmt::format("{}:{}: sensor_id must be a positive integer", source, line_no));
    }
    rec.sensor_id = static_cast<int>(*sensor);
    rec.x = parse_number(fields[2], source, line_no, "X", false);
    rec.d = parse_number(fields[3], source, line_no, "D", false);
    for (std::size_t k = 0; k < kTargetCount; ++k) {
      rec.targets[k] = parse_number(fields[4 + k], source, line_no, kTargetNames[k], true);
    }
    records.push_back(rec);
  }
  if (!header_seen) throw DataError(fmt::format("{}: missing header '{}'", source, kCsvHeader));
  return records;
}

std::vector<CsvRecord> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

namespace {

std::string format_decimal(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  std::string s(buf, ptr);
  if (s.find('.') == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string format_lux(double value) { return format_decimal(value); }

std::string format_csv_row(const Sample& s) {
  return fmt::format("{},{},{},{},{},{},{}", features::format_timestamp(s.timestamp), s.sensor_id, format_decimal(s.x),
                     format_decimal(s.d), format_lux(s.targets[0]), format_lux(s.targets[1]),
                     format_lux(s.targets[2]));
}

std::string image_stem(const features::Timestamp& ts) { return "img_" + features::compact_timestamp(ts); }

Corpus load_corpus(const std::vector<fs::path>& csv_paths, const fs::path& image_dir,
                   std::optional<features::WindowMask> mask) {
  if (csv_paths.empty()) throw DataError("no CSV files given");
  std::map<std::string, std::string> images;  // stem -> filename
  std::error_code ec;
  if (fs::is_directory(image_dir, ec)) {
    for (const auto& entry : fs::directory_iterator(image_dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (std::find(kImageExtensions.begin(), kImageExtensions.end(), ext) == kImageExtensions.end()) continue;
      images.emplace(entry.path().stem().string(), entry.path().filename().string());
    }
  } else {
    throw DataError("image directory " + image_dir.string() + " does not exist");
  }

  Corpus corpus;
  corpus.image_dir = image_dir;
  corpus.mask = std::move(mask);
  std::set<std::string> missing_images;
  for (const auto& path : csv_paths) {
    for (const auto& rec : read_csv(path)) {
      ++corpus.stats.raw_rows;
      const bool complete = rec.x && rec.d &&
                            std::all_of(rec.targets.begin(), rec.targets.end(), [](const auto& t) { return t.has_value(); });
      if (!complete) {
        ++corpus.stats.dropped_missing;
        continue;
      }
      const auto stem = image_stem(rec.timestamp);
      const auto it = images.find(stem);
      if (it == images.end()) {
        ++corpus.stats.dropped_no_image;
        missing_images.insert(stem);
        continue;
      }
      Sample s;
      s.timestamp = rec.timestamp;
      s.sensor_id = rec.sensor_id;
      s.x = *rec.x;
      s.d = *rec.d;
      s.image_ref = it->second;
      for (std::size_t k = 0; k < kTargetCount; ++k) s.targets[k] = *rec.targets[k];
      corpus.samples.push_back(std::move(s));
    }
  }
  if (!missing_images.empty()) {
    std::cerr << fmt::format("warning: {} timestamps have no image (e.g. {}); {} rows dropped\n", missing_images.size(),
                             *missing_images.begin(), corpus.stats.dropped_no_image);
  }

  std::sort(corpus.samples.begin(), corpus.samples.end(), [](const Sample& a, const Sample& b) {
    return std::tie(a.timestamp, a.sensor_id) < std::tie(b.timestamp, b.sensor_id);
  });
  std::map<int, std::pair<double, double>> positions;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const auto& s = corpus.samples[i];
    if (i > 0 && s.timestamp == corpus.samples[i - 1].timestamp && s.sensor_id == corpus.samples[i - 1].sensor_id) {
      throw DataError(fmt::format("duplicate record for sensor {} at {}", s.sensor_id,
                                  features::format_timestamp(s.timestamp)));
    }
    const auto [it, inserted] = positions.emplace(s.sensor_id, std::pair{s.x, s.d});
    if (!inserted && (it->second.first != s.x || it->second.second != s.d)) {
      throw DataError(fmt::format("sensor {} appears at ({}, {}) and ({}, {})", s.sensor_id, it->second.first,
                                  it->second.second, s.x, s.d));
    }
  }
  return corpus;
}

Corpus load_corpus_dir(const fs::path& dir) {
  std::vector<fs::path> csvs;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DataError("data directory " + dir.string() + " does not exist");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") csvs.push_back(entry.path());
  }
  std::sort(csvs.begin(), csvs.end());
  std::optional<features::WindowMask> mask;
  if (fs::exists(dir / "mask.json")) mask = features::WindowMask::load(dir / "mask.json");
  return load_corpus(csvs, dir / "images", std::move(mask));
}

}  // namespace illum::dataset

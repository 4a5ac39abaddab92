#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "daylight/dataset/sample.hpp"
#include "daylight/features/mask.hpp"

namespace illum::dataset {

inline constexpr std::string_view kCsvHeader = "timestamp,sensor_id,X,D,Eh,Es,Ee";

// A CSV record before cleaning; empty cells are nullopt.
struct CsvRecord {
  std::size_t line = 0;
  features::Timestamp timestamp;
  int sensor_id = 0;
  std::optional<double> x, d;
  std::array<std::optional<double>, kTargetCount> targets;
};

// Parses one CSV file. Throws DataError with the line number on malformed
// input or a wrong header.
std::vector<CsvRecord> read_csv(const std::filesystem::path& path);
std::vector<CsvRecord> parse_csv(std::string_view text, std::string_view source = "<memory>");

// Fixed-point shortest round-trip text for lux values.
std::string format_lux(double value);
std::string format_csv_row(const Sample& s);

struct CorpusStats {
  std::size_t raw_rows = 0;
  std::size_t dropped_missing = 0;   // any empty cell
  std::size_t dropped_no_image = 0;  // no image for the timestamp
};

struct Corpus {
  std::vector<Sample> samples;  // sorted by (timestamp, sensor_id)
  std::filesystem::path image_dir;
  std::optional<features::WindowMask> mask;
  CorpusStats stats;
};

// Image file for a timestamp: img_YYYYMMDD_HHMM.<ext>.
std::string image_stem(const features::Timestamp& ts);

// Joins CSV rows with images by exact minute, drops incomplete rows, and
// sorts canonically. Sensor ids must map to one (X, D) position throughout.
Corpus load_corpus(const std::vector<std::filesystem::path>& csv_paths, const std::filesystem::path& image_dir,
                   std::optional<features::WindowMask> mask = std::nullopt);

// Convenience for the generated layout: <dir>/*.csv, <dir>/images,
// <dir>/mask.json.
Corpus load_corpus_dir(const std::filesystem::path& dir);

}  // namespace illum::dataset

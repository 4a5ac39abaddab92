#pragma once

#include <array>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "daylight/dataset/corpus.hpp"
#include "daylight/eval/metrics.hpp"
#include "daylight/features/scaler.hpp"
#include "daylight/model/checkpoint.hpp"

namespace illum::eval {

struct EvalReport {
  std::string set;
  std::size_t count = 0;
  std::array<TargetMetrics, dataset::kTargetCount> standardized{};
  std::array<TargetMetrics, dataset::kTargetCount> lux{};

  nlohmann::json to_json() const;
};

// Metrics for lux-space truth and predictions; the standardized space uses
// `target_scaler`.
EvalReport build_report(std::string set, const nn::Tensor<double>& truth_lux, const nn::Tensor<double>& pred_lux,
                        const features::ScalerParams& target_scaler);

struct Evaluation {
  EvalReport report;
  std::vector<std::size_t> rows;  // corpus rows, in evaluation order
  nn::Tensor<double> truth_lux;   // [n, 3]
  nn::Tensor<double> pred_lux;    // [n, 3]
};

// Eval-mode predictions with the checkpoint's own preprocessing and scalers.
// Throws ConfigError on an empty row set.
Evaluation evaluate(const model::Checkpoint& checkpoint, const dataset::Corpus& corpus,
                    std::span<const std::size_t> rows, std::string set);

inline const std::array<std::string, 7> kCorrelationColumns{"tod_sin", "tod_cos", "X", "D", "Eh", "Es", "Ee"};

struct CorrelationMatrix {
  std::array<std::array<double, 7>, 7> r{};
  void write_csv(const std::filesystem::path& path) const;
};

// Pearson correlations over engineered features and targets. Throws
// DataError naming a constant column.
CorrelationMatrix pearson_matrix(std::span<const dataset::Sample> samples);

// Mean absolute lux error per (sensor, hour) for one target. Sensors and
// hours span the values present in the rows; hour = floor(minute / 60).
struct Heatmap {
  std::string target;
  std::vector<int> sensors;
  std::vector<int> hours;
  std::vector<std::vector<std::optional<double>>> cells;  // [sensor][hour]

  std::size_t missing() const;
  void write_csv(const std::filesystem::path& path) const;
};

Heatmap error_heatmap(std::span<const dataset::Sample> samples, std::span<const std::size_t> rows,
                      const nn::Tensor<double>& pred_lux, std::size_t target);

struct TimeSeriesRow {
  features::Timestamp time;
  std::array<double, dataset::kTargetCount> measured{};
  std::array<double, dataset::kTargetCount> predicted{};
};

// One sensor's rows ordered by time. Throws DataError for an unknown sensor.
std::vector<TimeSeriesRow> time_series(std::span<const dataset::Sample> samples, std::span<const std::size_t> rows,
                                       const nn::Tensor<double>& pred_lux, int sensor_id);
void write_time_series(const std::filesystem::path& path, std::span<const TimeSeriesRow> series);

struct ScatterSeries {
  std::string target;
  std::vector<double> measured;
  std::vector<double> predicted;
  LinearFit fit;

  void write_csv(const std::filesystem::path& path) const;
};

ScatterSeries scatter(const nn::Tensor<double>& truth_lux, const nn::Tensor<double>& pred_lux, std::size_t target);

// Writes report.json, heatmap_<T>.csv, scatter_<T>.csv, scatter_fit.csv and
// timeseries_sensor_<id>.csv for every sensor in the evaluation.
void write_exports(const std::filesystem::path& dir, const Evaluation& evaluation,
                   std::span<const dataset::Sample> samples);

}  // namespace illum::eval

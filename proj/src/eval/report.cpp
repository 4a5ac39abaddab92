#include "daylight/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "daylight/errors.hpp"
#include "daylight/train/data.hpp"
#include "daylight/train/trainer.hpp"

namespace illum::eval {

namespace {

using dataset::kTargetCount;
using dataset::kTargetNames;

nlohmann::json metrics_json(const std::array<TargetMetrics, kTargetCount>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < kTargetCount; ++k) {
    j[kTargetNames[k]] = {{"r2", m[k].r2 ? nlohmann::json(*m[k].r2) : nlohmann::json(nullptr)},
                          {"mae", m[k].mae},
                          {"rmse", m[k].rmse}};
  }
  return j;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

nlohmann::json EvalReport::to_json() const {
  return {{"set", set}, {"count", count}, {"standardized", metrics_json(standardized)}, {"lux", metrics_json(lux)}};
}

EvalReport build_report(std::string set, const nn::Tensor<double>& truth_lux, const nn::Tensor<double>& pred_lux,
                        const features::ScalerParams& target_scaler) {
  EvalReport report;
  report.set = std::move(set);
  report.count = truth_lux.rank() == 2 ? truth_lux.dim(0) : 0;
  const auto lux = compute_metrics(truth_lux, pred_lux);
  const auto std_truth = features::apply_scaler(truth_lux, target_scaler, features::ScaleDirection::forward);
  const auto std_pred = features::apply_scaler(pred_lux, target_scaler, features::ScaleDirection::forward);
  const auto standardized = compute_metrics(std_truth, std_pred);
  if (lux.size() != kTargetCount) throw DimensionError("expected three target columns");
  std::copy(lux.begin(), lux.end(), report.lux.begin());
  std::copy(standardized.begin(), standardized.end(), report.standardized.begin());
  return report;
}

Evaluation evaluate(const model::Checkpoint& checkpoint, const dataset::Corpus& corpus,
                    std::span<const std::size_t> rows, std::string set) {
  if (rows.empty()) throw ConfigError(fmt::format("split '{}' is empty", set));
  for (std::size_t r : rows) {
    if (r >= corpus.samples.size()) throw DataError(fmt::format("split row {} is out of range", r));
  }
  const auto data = train::prepare_inference_data(corpus, checkpoint);
  const auto net = checkpoint.instantiate();
  const auto pred_std = train::predict_rows(net, data, rows);

  Evaluation ev;
  ev.rows.assign(rows.begin(), rows.end());
  ev.truth_lux = nn::Tensor<double>(nn::Shape{rows.size(), kTargetCount});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < kTargetCount; ++k) ev.truth_lux[i * kTargetCount + k] = corpus.samples[rows[i]].targets[k];
  }
  ev.pred_lux = features::apply_scaler(nn::tensor_cast<double>(pred_std), checkpoint.target_scaler,
                                       features::ScaleDirection::inverse);
  ev.report = build_report(std::move(set), ev.truth_lux, ev.pred_lux, checkpoint.target_scaler);
  return ev;
}

void CorrelationMatrix::write_csv(const std::filesystem::path& path) const {
  auto out = open_out(path);
  out << "column";
  for (const auto& c : kCorrelationColumns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << kCorrelationColumns[i];
    for (double v : r[i]) out << ',' << num(v);
    out << '\n';
  }
}

CorrelationMatrix pearson_matrix(std::span<const dataset::Sample> samples) {
  if (samples.size() < 2) throw DataError("correlation needs at least 2 samples");
  std::array<std::vector<double>, 7> cols;
  for (const auto& s : samples) {
    const auto f = dataset::build_feature_vector(s).as_array();
    for (std::size_t k = 0; k < f.size(); ++k) cols[k].push_back(f[k]);
    for (std::size_t k = 0; k < kTargetCount; ++k) cols[4 + k].push_back(s.targets[k]);
  }
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto [lo, hi] = std::minmax_element(cols[k].begin(), cols[k].end());
    if (*lo == *hi) throw DataError(fmt::format("column '{}' is constant", kCorrelationColumns[k]));
  }
  CorrelationMatrix m;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    m.r[i][i] = 1.0;
    for (std::size_t j = i + 1; j < cols.size(); ++j) m.r[i][j] = m.r[j][i] = pearson(cols[i], cols[j]);
  }
  return m;
}

std::size_t Heatmap::missing() const {
  std::size_t n = 0;
  for (const auto& row : cells) n += static_cast<std::size_t>(std::count(row.begin(), row.end(), std::nullopt));
  return n;
}

void Heatmap::write_csv(const std::filesystem::path& path) const {
  auto out = open_out(path);
  out << "sensor";
  for (int h : hours) out << fmt::format(",{:02}:00", h);
  out << '\n';
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    out << "Sensor_" << sensors[i];
    for (const auto& c : cells[i]) {
      out << ',';
      if (c) out << num(*c);
    }
    out << '\n';
  }
}

Heatmap error_heatmap(std::span<const dataset::Sample> samples, std::span<const std::size_t> rows,
                      const nn::Tensor<double>& pred_lux, std::size_t target) {
  if (target >= kTargetCount) throw ParameterError(fmt::format("no target {}", target));
  if (rows.empty()) throw ConfigError("heatmap needs a non-empty split");
  if (pred_lux.rank() != 2 || pred_lux.dim(0) != rows.size() || pred_lux.dim(1) != kTargetCount) {
    throw DimensionError("predictions do not match the split rows");
  }
  std::map<std::pair<int, int>, std::pair<double, std::size_t>> acc;
  std::set<int> sensors;
  int lo = 24, hi = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = samples[rows[i]];
    const int hour = s.timestamp.minute_of_day / 60;
    sensors.insert(s.sensor_id);
    lo = std::min(lo, hour);
    hi = std::max(hi, hour);
    auto& cell = acc[{s.sensor_id, hour}];
    cell.first += std::abs(pred_lux[i * kTargetCount + target] - s.targets[target]);
    ++cell.second;
  }
  Heatmap h;
  h.target = kTargetNames[target];
  h.sensors.assign(sensors.begin(), sensors.end());
  for (int hour = lo; hour <= hi; ++hour) h.hours.push_back(hour);
  for (int sensor : h.sensors) {
    auto& row = h.cells.emplace_back();
    for (int hour : h.hours) {
      const auto it = acc.find({sensor, hour});
      if (it == acc.end()) {
        row.emplace_back();
      } else {
        row.emplace_back(it->second.first / static_cast<double>(it->second.second));
      }
    }
  }
  if (const auto n = h.missing(); n > 0) {
    std::cerr << fmt::format("warning: {} heatmap has {} empty sensor-hour cells\n", h.target, n);
  }
  return h;
}

std::vector<TimeSeriesRow> time_series(std::span<const dataset::Sample> samples, std::span<const std::size_t> rows,
                                       const nn::Tensor<double>& pred_lux, int sensor_id) {
  std::vector<TimeSeriesRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = samples[rows[i]];
    if (s.sensor_id != sensor_id) continue;
    TimeSeriesRow r;
    r.time = s.timestamp;
    r.measured = s.targets;
    for (std::size_t k = 0; k < kTargetCount; ++k) r.predicted[k] = pred_lux[i * kTargetCount + k];
    out.push_back(r);
  }
  if (out.empty()) throw DataError(fmt::format("sensor {} is not in the split", sensor_id));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  return out;
}

void write_time_series(const std::filesystem::path& path, std::span<const TimeSeriesRow> series) {
  auto out = open_out(path);
  out << "time,Eh_meas,Eh_pred,Es_meas,Es_pred,Ee_meas,Ee_pred\n";
  for (const auto& r : series) {
    out << features::format_timestamp(r.time);
    for (std::size_t k = 0; k < kTargetCount; ++k) out << ',' << num(r.measured[k]) << ',' << num(r.predicted[k]);
    out << '\n';
  }
}

void ScatterSeries::write_csv(const std::filesystem::path& path) const {
  auto out = open_out(path);
  out << "measured,predicted\n";
  for (std::size_t i = 0; i < measured.size(); ++i) out << num(measured[i]) << ',' << num(predicted[i]) << '\n';
}

ScatterSeries scatter(const nn::Tensor<double>& truth_lux, const nn::Tensor<double>& pred_lux, std::size_t target) {
  ScatterSeries s;
  s.target = kTargetNames.at(target);
  s.measured = column(truth_lux, target);
  s.predicted = column(pred_lux, target);
  s.fit = least_squares(s.measured, s.predicted);
  return s;
}

void write_exports(const std::filesystem::path& dir, const Evaluation& ev, std::span<const dataset::Sample> samples) {
  std::filesystem::create_directories(dir);
  nlohmann::json report = ev.report.to_json();

  nlohmann::json fits = nlohmann::json::object();
  auto fit_out = open_out(dir / "scatter_fit.csv");
  fit_out << "target,slope,intercept\n";
  for (std::size_t k = 0; k < kTargetCount; ++k) {
    error_heatmap(samples, ev.rows, ev.pred_lux, k).write_csv(dir / fmt::format("heatmap_{}.csv", kTargetNames[k]));
    const auto sc = scatter(ev.truth_lux, ev.pred_lux, k);
    sc.write_csv(dir / fmt::format("scatter_{}.csv", kTargetNames[k]));
    fit_out << sc.target << ',' << num(sc.fit.slope) << ',' << num(sc.fit.intercept) << '\n';
    fits[sc.target] = {{"slope", sc.fit.slope}, {"intercept", sc.fit.intercept}};
  }
  report["scatter_fit"] = fits;

  std::set<int> sensors;
  for (std::size_t r : ev.rows) sensors.insert(samples[r].sensor_id);
  for (int id : sensors) {
    write_time_series(dir / fmt::format("timeseries_sensor_{}.csv", id), time_series(samples, ev.rows, ev.pred_lux, id));
  }

  std::vector<dataset::Sample> subset;
  for (std::size_t r : ev.rows) subset.push_back(samples[r]);
  try {
    pearson_matrix(subset).write_csv(dir / "correlation.csv");
  } catch (const DataError& e) {
    std::cerr << "warning: correlation matrix skipped: " << e.what() << '\n';
  }

  auto out = open_out(dir / "report.json");
  out << report.dump(2) << '\n';
}

}  // namespace illum::eval

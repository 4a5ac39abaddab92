#include "daylight/features/scaler.hpp"

#include <cmath>
#include <fmt/format.h>

#include "daylight/errors.hpp"

namespace illum::features {

nlohmann::json ScalerParams::to_json() const {
  return {{"mean", mean}, {"std", std}, {"fitted_on", fitted_on}};
}

ScalerParams ScalerParams::from_json(const nlohmann::json& j) {
  ScalerParams p;
  try {
    p.mean = j.at("mean").get<std::vector<double>>();
    p.std = j.at("std").get<std::vector<double>>();
    p.fitted_on = j.at("fitted_on").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("scaler parameters: {}", e.what()));
  }
  if (p.mean.size() != p.std.size()) throw DataError("scaler parameters: mean/std length mismatch");
  return p;
}

ScalerParams fit_scaler(const nn::Tensor<double>& columns, std::string_view source, std::span<const std::string> names) {
  if (source != kTrainSplit) {
    throw ConfigError(fmt::format("scalers must be fitted on the '{}' split, not '{}'", kTrainSplit, source));
  }
  if (columns.rank() != 2) throw DimensionError("fit_scaler expects an [N, K] matrix");
  const std::size_t N = columns.dim(0), K = columns.dim(1);
  if (N < 2) throw ConfigError("fit_scaler needs at least two rows");
  ScalerParams p{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0), std::string(source)};
  for (std::size_t k = 0; k < K; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < N; ++i) mean += columns[i * K + k];
    mean /= static_cast<double>(N);
    double var = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double d = columns[i * K + k] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(N));
    if (!(sd > 0.0)) {
      const std::string name = k < names.size() ? names[k] : fmt::format("#{}", k);
      throw ConfigError(fmt::format("column {} is constant; cannot standardize", name));
    }
    p.mean[k] = mean;
    p.std[k] = sd;
  }
  return p;
}

std::vector<double> apply_scaler(std::span<const double> row, const ScalerParams& params, ScaleDirection direction) {
  if (row.size() != params.columns()) {
    throw DimensionError(fmt::format("scaler fitted on {} columns applied to {}", params.columns(), row.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t k = 0; k < row.size(); ++k) {
    out[k] = direction == ScaleDirection::forward ? (row[k] - params.mean[k]) / params.std[k]
                                                  : row[k] * params.std[k] + params.mean[k];
  }
  return out;
}

nn::Tensor<double> apply_scaler(const nn::Tensor<double>& values, const ScalerParams& params, ScaleDirection direction) {
  if (values.rank() != 2 || values.dim(1) != params.columns()) {
    throw DimensionError(fmt::format("scaler fitted on {} columns applied to {}", params.columns(),
                                     nn::shape_to_string(values.shape())));
  }
  nn::Tensor<double> out(values.shape());
  const std::size_t K = params.columns();
  for (std::size_t i = 0; i < values.dim(0); ++i) {
    const auto row = apply_scaler(std::span<const double>(values.data() + i * K, K), params, direction);
    std::copy(row.begin(), row.end(), out.data() + i * K);
  }
  return out;
}

}  // namespace illum::features

#pragma once

#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "daylight/nn/tensor.hpp"

namespace illum::features {

inline constexpr std::string_view kTrainSplit = "train";

// Per-column z-score parameters (population standard deviation).
struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> std;
  std::string fitted_on;

  std::size_t columns() const { return mean.size(); }
  nlohmann::json to_json() const;
  static ScalerParams from_json(const nlohmann::json& j);
  bool operator==(const ScalerParams&) const = default;
};

enum class ScaleDirection { forward, inverse };

// columns: [N, K], N >= 2. Only the training split may be used for fitting;
// any other source is a ConfigError. A constant column is a ConfigError
// naming the column (by `names` when given, else by index).
ScalerParams fit_scaler(const nn::Tensor<double>& columns, std::string_view source,
                        std::span<const std::string> names = {});

// forward: (x - mean) / std; inverse: x * std + mean. values: [N, K].
nn::Tensor<double> apply_scaler(const nn::Tensor<double>& values, const ScalerParams& params, ScaleDirection direction);
std::vector<double> apply_scaler(std::span<const double> row, const ScalerParams& params, ScaleDirection direction);

}  // namespace illum::features

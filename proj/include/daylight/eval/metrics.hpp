#pragma once

#include <array>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "daylight/nn/tensor.hpp"

namespace illum::eval {

struct TargetMetrics {
  std::optional<double> r2;  // empty when the truth column has zero variance
  double mae = 0.0;
  double rmse = 0.0;
};

// Per-column metrics for [N, K] matrices, N >= 2. R² uses the column's own
// mean as the baseline.
std::vector<TargetMetrics> compute_metrics(const nn::Tensor<double>& y_true, const nn::Tensor<double>& y_pred);

// Throws DataError when `truth` has zero variance.
double r2_score(std::span<const double> truth, std::span<const double> pred);
double mean_absolute_error(std::span<const double> truth, std::span<const double> pred);
double root_mean_squared_error(std::span<const double> truth, std::span<const double> pred);
// Throws DataError when either series is constant.
double pearson(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
// Least-squares line y = slope * x + intercept. Throws DataError when x is
// constant.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Column k of an [N, K] matrix.
std::vector<double> column(const nn::Tensor<double>& m, std::size_t k);

}  // namespace illum::eval

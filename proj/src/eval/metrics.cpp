#include "daylight/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "daylight/errors.hpp"

namespace illum::eval {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, std::size_t min_size) {
  if (a.size() != b.size()) throw DimensionError(fmt::format("length mismatch: {} vs {}", a.size(), b.size()));
  if (a.size() < min_size) throw DimensionError(fmt::format("need at least {} values, got {}", min_size, a.size()));
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Centered sum of squares and cross products.
struct Moments {
  double sxx = 0.0, syy = 0.0, sxy = 0.0, mx = 0.0, my = 0.0;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
  Moments m;
  m.mx = mean(x);
  m.my = mean(y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mx, dy = y[i] - m.my;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

double r2_score(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred, 2);
  const double mu = mean(truth);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mu) * (truth[i] - mu);
  }
  if (!(ss_tot > 0.0)) throw DataError("R² undefined: truth has zero variance");
  return 1.0 - ss_res / ss_tot;
}

double mean_absolute_error(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(truth[i] - pred[i]);
  return s / static_cast<double>(truth.size());
}

double root_mean_squared_error(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred, 1);
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  return std::sqrt(s / static_cast<double>(truth.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, 2);
  const Moments m = moments(a, b);
  if (!(m.sxx > 0.0) || !(m.syy > 0.0)) throw DataError("correlation undefined for a constant series");
  const double r = m.sxy / std::sqrt(m.sxx * m.syy);
  return std::clamp(r, -1.0, 1.0);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, 2);
  const Moments m = moments(x, y);
  if (!(m.sxx > 0.0)) throw DataError("regression undefined: measured values are constant");
  LinearFit fit;
  fit.slope = m.sxy / m.sxx;
  fit.intercept = m.my - fit.slope * m.mx;
  return fit;
}

std::vector<double> column(const nn::Tensor<double>& m, std::size_t k) {
  if (m.rank() != 2 || k >= m.dim(1)) throw DimensionError(fmt::format("no column {} in {}", k, nn::shape_to_string(m.shape())));
  const std::size_t n = m.dim(0), K = m.dim(1);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = m[i * K + k];
  return out;
}

std::vector<TargetMetrics> compute_metrics(const nn::Tensor<double>& y_true, const nn::Tensor<double>& y_pred) {
  if (y_true.shape() != y_pred.shape() || y_true.rank() != 2) {
    throw DimensionError(fmt::format("metric inputs must be equal [N, K] matrices, got {} and {}",
                                     nn::shape_to_string(y_true.shape()), nn::shape_to_string(y_pred.shape())));
  }
  if (y_true.dim(0) < 2) throw DimensionError("metrics need at least 2 rows");
  std::vector<TargetMetrics> out(y_true.dim(1));
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto t = column(y_true, k), p = column(y_pred, k);
    out[k].mae = mean_absolute_error(t, p);
    out[k].rmse = root_mean_squared_error(t, p);
    try {
      out[k].r2 = r2_score(t, p);
    } catch (const DataError&) {
      out[k].r2.reset();
    }
  }
  return out;
}

}  // namespace illum::eval

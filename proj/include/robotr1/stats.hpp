#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "robotr1/error.hpp"

namespace robotr1 {

/// Sample Pearson correlation coefficient. Both series must vary.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorKind::InvalidInput, "pearson needs equal-length series");
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorKind::InvalidInput, "pearson needs at least 2 points");
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double cov = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) {
    fail(ErrorKind::ConstantInput, "pearson is undefined for a constant series");
  }
  return cov / std::sqrt(var_x * var_y);
}

/// Median; an even count averages the two middle values.
inline double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::EmptyInput, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace robotr1

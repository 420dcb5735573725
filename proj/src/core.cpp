#include "heatstep/core.hpp"

#include <algorithm>
#include <cmath>

namespace heatstep {

Grid1D::Grid1D(int intervals) : n_(intervals), h_(0.0) {
  if (intervals < 8) {
    throw ConfigError("grid needs at least 8 intervals, got " + std::to_string(intervals));
  }
  h_ = 1.0 / intervals;
}

GridFunction Grid1D::nodes() const {
  GridFunction x(size());
  for (int j = 0; j <= n_; ++j) x[j] = node(j);
  return x;
}

double trapezoid(std::span<const double> values, double h) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t j = 1; j + 1 < values.size(); ++j) sum += values[j];
  return h * sum;
}

double l2_norm(std::span<const double> values, double h) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() * values.front() + values.back() * values.back());
  for (std::size_t j = 1; j + 1 < values.size(); ++j) sum += values[j] * values[j];
  return std::sqrt(h * sum);
}

double sup_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

Mat shift_matrix(int n) {
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  return a;
}

Vec input_vector(int n) {
  Vec b = Vec::Zero(n);
  b(n - 1) = 1.0;
  return b;
}

RowVec output_row(int n) {
  RowVec c = RowVec::Zero(n);
  c(0) = 1.0;
  return c;
}

}  // namespace heatstep

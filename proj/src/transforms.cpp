#include "heatstep/transforms.hpp"

#include <cassert>
#include <cmath>

namespace heatstep::transforms {

ScalingMatrices::ScalingMatrices(int n, double r) : r_(r), delta_(n), d_(n) {
  if (n < 1) throw ConfigError("scaling dimension must be positive");
  if (!(r >= 1.0) || !std::isfinite(r)) throw ConfigError("scaling gain r must be finite and >= 1");
  for (int i = 0; i < n; ++i) {
    delta_(i) = std::pow(r, -(n - i));
    d_(i) = std::pow(r, -(i + 1));
  }
}

Vec scale_state(const ScalingMatrices& S, const Vec& X) {
  if (X.size() != S.dimension()) throw ConfigError("state dimension does not match scaling");
  return S.delta().cwiseProduct(X);
}

Vec unscale_state(const ScalingMatrices& S, const Vec& Z) {
  if (Z.size() != S.dimension()) throw ConfigError("state dimension does not match scaling");
  return Z.cwiseQuotient(S.delta());
}

namespace {

void check_sizes(std::size_t f, int M, const char* what) {
  if (f != static_cast<std::size_t>(M + 1)) {
    throw ConfigError(std::string(what) + ": grid function size does not match kernel grid");
  }
}

}  // namespace

GridFunction observer_backstep(std::span<const double> uhat, const Vec& Zhat,
                               const kernels::TriangularKernel& s, const Mat& psi_values) {
  check_sizes(uhat.size(), s.resolution(), "observer_backstep");
  GridFunction w = s.apply(uhat);
  const Vec shift = psi_values * Zhat;
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = uhat[j] - w[j] - shift(static_cast<Eigen::Index>(j));
  return w;
}

GridFunction observer_backstep_inverse(std::span<const double> what, const Vec& Zhat,
                                       const kernels::TriangularKernel& s, const Mat& psi_values) {
  const int M = s.resolution();
  check_sizes(what.size(), M, "observer_backstep_inverse");
  const double h = s.spacing();
  const Vec shift = psi_values * Zhat;
  GridFunction u(what.size());
  u[0] = what[0] + shift(0);
  for (int i = 1; i <= M; ++i) {
    double known = 0.5 * s(i, 0) * u[0];
    for (int j = 1; j < i; ++j) known += s(i, j) * u[j];
    const double diag = 1.0 - 0.5 * h * s(i, i);
    assert(diag != 0.0);
    u[i] = (what[i] + shift(i) + h * known) / diag;
  }
  return u;
}

GridFunction error_to_target(std::span<const double> utilde, const kernels::TriangularKernel& p) {
  check_sizes(utilde.size(), p.resolution(), "error_to_target");
  GridFunction w = p.apply(utilde);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = utilde[j] - w[j];
  return w;
}

GridFunction target_to_error(std::span<const double> wtilde, const kernels::TriangularKernel& q) {
  check_sizes(wtilde.size(), q.resolution(), "target_to_error");
  GridFunction u = q.apply(wtilde);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = wtilde[j] - u[j];
  return u;
}

}  // namespace heatstep::transforms

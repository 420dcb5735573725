#pragma once

#include "heatstep/core.hpp"
#include "heatstep/kernels.hpp"

namespace heatstep::transforms {

/// Diagonal high-gain scalings: Delta = diag(r^-n, ..., r^-1), D = diag(r^-1, ..., r^-n).
class ScalingMatrices {
 public:
  ScalingMatrices(int n, double r);

  [[nodiscard]] int dimension() const noexcept { return static_cast<int>(delta_.size()); }
  [[nodiscard]] double gain() const noexcept { return r_; }
  [[nodiscard]] const Vec& delta() const noexcept { return delta_; }
  [[nodiscard]] const Vec& observer_scaling() const noexcept { return d_; }

 private:
  double r_;
  Vec delta_;
  Vec d_;
};

[[nodiscard]] Vec scale_state(const ScalingMatrices& S, const Vec& X);
[[nodiscard]] Vec unscale_state(const ScalingMatrices& S, const Vec& Z);

/// w(x) = u(x) - int_0^x s(x,y) u(y) dy - psi(x) Z with Z = Delta X.
[[nodiscard]] GridFunction observer_backstep(std::span<const double> uhat, const Vec& Zhat,
                                             const kernels::TriangularKernel& s,
                                             const Mat& psi_values);

/// Forward substitution for u - int_0^x s u = w + psi Z on the trapezoid grid.
[[nodiscard]] GridFunction observer_backstep_inverse(std::span<const double> what,
                                                     const Vec& Zhat,
                                                     const kernels::TriangularKernel& s,
                                                     const Mat& psi_values);

/// w(x) = u(x) - int_x^1 p(x,y) u(y) dy
[[nodiscard]] GridFunction error_to_target(std::span<const double> utilde,
                                           const kernels::TriangularKernel& p);
/// u(x) = w(x) - int_x^1 q(x,y) w(y) dy
[[nodiscard]] GridFunction target_to_error(std::span<const double> wtilde,
                                           const kernels::TriangularKernel& q);

}  // namespace heatstep::transforms

#pragma once

#include "heatstep/core.hpp"
#include "heatstep/gains.hpp"
#include "heatstep/kernels.hpp"

namespace heatstep::control {

struct ObserverState {
  Vec Xhat;
  GridFunction uhat;
};

/// The only plant quantities the observer may read.
struct Measurement {
  double X1 = 0.0;
  double u1 = 0.0;
};

/// Output-feedback controller and observer with every gain folded into
/// precomputed vectors at the simulation resolution.
class Controller {
 public:
  /// `kernels` must already be at the resolution of `grid`.
  Controller(const gains::GainSet& gains, const kernels::KernelTable& kernels, const Grid1D& grid);

  [[nodiscard]] double feedback(std::span<const double> Xhat, std::span<const double> uhat,
                                double u1_measured) const;

  /// Writes dXhat (size n) and duhat (size N+1).
  void observer_rhs(std::span<const double> Xhat, std::span<const double> uhat, Measurement y,
                    double U, std::span<double> dXhat, std::span<double> duhat) const;

  [[nodiscard]] const Grid1D& grid() const noexcept { return grid_; }
  [[nodiscard]] int dimension() const noexcept { return n_; }

 private:
  Grid1D grid_;
  int n_;
  double c_;
  double q2_;
  double eta_;
  Vec injection_;     ///< D_r L
  RowVec state_row_;  ///< (psi'(1) + eta psi(1)) Delta_r
  GridFunction integral_weights_;
  GridFunction k_;
};

[[nodiscard]] double feedback_U(const ObserverState& observer, double u1_measured,
                                const gains::GainSet& gains, const kernels::KernelTable& kernels);

struct ObserverDerivative {
  Vec dXhat;
  GridFunction duhat;
};

[[nodiscard]] ObserverDerivative observer_rhs(const ObserverState& observer, Measurement y, double U,
                                              const gains::GainSet& gains,
                                              const kernels::KernelTable& kernels,
                                              const Grid1D& grid);

}  // namespace heatstep::control

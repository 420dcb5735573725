#pragma once

#include "heatstep/simulator.hpp"

namespace heatstep::verify {

struct SpectralEntry {
  int k = 0;
  double exact = 0.0;      ///< c - k^2 pi^2
  double discrete = 0.0;   ///< k-th largest eigenvalue of the FD operator
  double rel_error = 0.0;  ///< |discrete - exact| / max(1, |exact|)
};

/// Eigenvalues of the symmetric tridiagonal matrix (diag, off) by Sturm bisection, ascending.
[[nodiscard]] std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag,
                                                          std::span<const double> off);

/// Top six eigenvalues of the (N+1)-node Neumann Laplacian plus c I paired with k = 0..5.
[[nodiscard]] std::vector<SpectralEntry> spectral_check(double c, int N);

/// -slope of the least-squares line through (t, ln V) after skipping the leading
/// fraction of the horizon. Rows where V is zero or subnormal end the window.
[[nodiscard]] double fit_decay_rate(std::span<const double> t, std::span<const double> V,
                                    double skip_fraction);
[[nodiscard]] double fit_decay_rate(const sim::SimRecord& record, double skip_fraction);

/// Fraction of record intervals where dV/dt <= -tau V + gamma D + slack (1 + V).
[[nodiscard]] double dissipation_audit(const sim::SimRecord& record, double tau, double gamma,
                                       double slack);

struct SweepRow {
  double amplitude = 0.0;
  double steady_state_norm = 0.0;
  double sup_D = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Everything a closed-loop run needs besides the disturbances.
struct RunSetup {
  sim::SimConfig sim;
  plant::PlantConfig plant;
  gains::GainSet gains;
  kernels::KernelTable kernels;
};

class SweepDivergence : public Error {
 public:
  SweepDivergence(const std::string& what, double amplitude)
      : Error(ExitCode::divergence, what), amplitude_(amplitude) {}
  [[nodiscard]] double amplitude() const noexcept { return amplitude_; }

 private:
  double amplitude_;
};

/// sup of |X| + |u| over the final 20% of the record.
[[nodiscard]] double steady_state_norm(const sim::SimRecord& record);

/// One closed-loop run per amplitude (template scaled) from zero initial data, at most
/// `max_threads` at a time.
/// Rows are sorted by amplitude regardless of completion order.
[[nodiscard]] SweepResult iss_sweep(const RunSetup& setup, const plant::DisturbanceSpec& tmpl,
                                    std::vector<double> amplitudes, unsigned max_threads = 1);

struct SweepCheck {
  bool vanishes_at_zero = true;
  bool monotone = true;
  std::string message;
  [[nodiscard]] bool ok() const noexcept { return vanishes_at_zero && monotone; }
};

[[nodiscard]] SweepCheck check_sweep(const SweepResult& result, double slack = 0.05,
                                     double zero_tol = 1e-4);

}  // namespace heatstep::verify

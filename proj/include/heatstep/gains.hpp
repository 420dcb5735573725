#pragma once

#include "heatstep/core.hpp"
#include "heatstep/plant.hpp"

#include <array>

namespace heatstep::gains {

/// Multipliers (>= 1) applied above the starred thresholds gamma*, r*, q2*.
struct MarginFactors {
  double gamma = 2.0;
  double r = 2.0;
  double q2 = 2.0;
};

struct DesignParams {
  std::vector<double> poles_K;
  std::vector<double> poles_L;
  double delta1 = 2.0;
  double delta2 = 2.0;
  MarginFactors margins{};
  double a = 3.0;
  double eta = 2.0;

  /// Controller poles at -1, observer poles at -2.
  [[nodiscard]] static DesignParams defaults(int n);
};

void validate(const DesignParams& design, int n);

/// Companion-form pole placement: eigenvalues of A + B K equal `poles`.
[[nodiscard]] RowVec ackermann_controller(int n, std::span<const double> poles);
/// Output-injection gain: eigenvalues of A + L C equal `poles`.
[[nodiscard]] Vec observer_gain(int n, std::span<const double> poles);

/// Solves P M + M^T P = -delta I through the vectorized n^2 system.
[[nodiscard]] Mat solve_lyapunov(const Mat& M, double delta);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
[[nodiscard]] std::vector<double> symmetric_eigenvalues(const Mat& S, double tol = 1e-12);
[[nodiscard]] double lambda_max(const Mat& S);

/// Trapezoid integral of q(0,y)^2.
[[nodiscard]] double compute_m1(std::span<const double> q0_trace, double h);
[[nodiscard]] double compute_m2(const Mat& P2, const Vec& B1, double theta, int n);

struct Thresholds {
  double gamma_star = 0.0;          ///< value used for selection
  double gamma_star_printed = 0.0;  ///< (|P1 L|^2 + a c_psi |L|) / (2 delta2), reported only
  double r_star = 0.0;
  double q2_star = 0.0;
  double b_floor = 0.0;  ///< 4 m1 + 5
};

struct GainSet {
  int n = 0;
  double c = 0.0;
  double theta = 0.0;
  Vec B1;
  RowVec K;
  Vec L;
  Mat P1;
  Mat P2;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double a = 0.0;
  double b = 0.0;
  double eta = 0.0;
  double q2 = 0.0;
  double gamma = 0.0;
  double r = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double c_psi = 0.0;
  Thresholds thresholds{};
  std::array<double, 6> tau_i{};
  double nu2 = 0.0;  ///< max(lambda_max(P1), a/2)
  double mu2 = 0.0;  ///< max(lambda_max(P2), b/2)
  double tau = 0.0;
};

struct Rates {
  std::array<double, 6> tau_i{};
  double nu2 = 0.0;
  double mu2 = 0.0;
  double tau = 0.0;
};

/// Closed-form dissipation constants for the scalars stored in `g`.
[[nodiscard]] Rates dissipation_rates(const GainSet& g);

struct Violation {
  std::string constant;
  double value = 0.0;
  std::string detail;
};

/// Re-evaluates every threshold and closed form; empty result means certified.
[[nodiscard]] std::vector<Violation> certify(const GainSet& g);

/// Selects K, P1, L, P2, q2, b, gamma, r in that order and certifies the result.
/// Throws SynthesisError listing every violated constant.
[[nodiscard]] GainSet synthesize(const plant::PlantConfig& plant, const DesignParams& design,
                                 double c_psi, double m1);

/// Unchecked variant of synthesize used for diagnostics.
[[nodiscard]] GainSet select_gains(const plant::PlantConfig& plant, const DesignParams& design,
                                   double c_psi, double m1);

}  // namespace heatstep::gains

#include "heatstep/gains.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace heatstep::gains {

namespace {

/// Monic polynomial prod (s - p_i); coefficient k multiplies s^k.
std::vector<double> monic_from_roots(std::span<const double> roots) {
  std::vector<double> coef{1.0};
  for (double p : roots) {
    std::vector<double> next(coef.size() + 1, 0.0);
    for (std::size_t k = 0; k < coef.size(); ++k) {
      next[k + 1] += coef[k];
      next[k] -= p * coef[k];
    }
    coef = std::move(next);
  }
  return coef;
}

void require_stable_poles(int n, std::span<const double> poles, const char* what) {
  if (n < 2) throw ConfigError("chain length n must be >= 2");
  if (static_cast<int>(poles.size()) != n) {
    throw ConfigError(std::string(what) + " needs exactly n = " + std::to_string(n) + " poles");
  }
  for (double p : poles) {
    if (!(p < 0.0) || !std::isfinite(p)) {
      throw ConfigError(std::string(what) + " poles must be finite and strictly negative");
    }
  }
}

bool exceeds(double value, double threshold) {
  return value > threshold + 1e-12 * std::max(1.0, std::abs(threshold));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

DesignParams DesignParams::defaults(int n) {
  DesignParams d;
  d.poles_K.assign(static_cast<std::size_t>(n), -1.0);
  d.poles_L.assign(static_cast<std::size_t>(n), -2.0);
  return d;
}

void validate(const DesignParams& design, int n) {
  require_stable_poles(n, design.poles_K, "poles_K");
  require_stable_poles(n, design.poles_L, "poles_L");
  if (!(design.delta1 > 1.0)) throw ConfigError("design.delta1 must be > 1");
  if (!(design.delta2 > 0.0)) throw ConfigError("design.delta2 must be > 0");
  if (!(design.a > 2.0)) throw ConfigError("design.a must be > 2");
  if (!(design.eta > 1.0)) throw ConfigError("design.eta must be > 1");
  const auto& m = design.margins;
  if (!(m.gamma >= 1.0) || !(m.r >= 1.0) || !(m.q2 >= 1.0)) {
    throw ConfigError("margin factors must be >= 1");
  }
}

RowVec ackermann_controller(int n, std::span<const double> poles) {
  require_stable_poles(n, poles, "controller");
  const auto coef = monic_from_roots(poles);
  RowVec K(n);
  for (int i = 0; i < n; ++i) K(i) = -coef[static_cast<std::size_t>(i)];
  return K;
}

Vec observer_gain(int n, std::span<const double> poles) {
  // The reversal permutation J maps (A^T, C^T) onto (A, B); the dual gain is K J.
  const RowVec K = ackermann_controller(n, poles);
  return K.reverse().transpose();
}

Mat solve_lyapunov(const Mat& M, double delta) {
  const auto n = M.rows();
  if (M.cols() != n) throw SynthesisError("Lyapunov matrix must be square");
  if (!(delta > 0.0)) throw SynthesisError("Lyapunov margin must be positive");
  Eigen::EigenSolver<Mat> es(M, false);
  const auto& ev = es.eigenvalues();
  if ((ev.array().real() >= 0.0).any()) {
    std::ostringstream os;
    os << "matrix is not Hurwitz; eigenvalues:";
    for (Eigen::Index i = 0; i < ev.size(); ++i) os << ' ' << ev(i).real() << "+" << ev(i).imag() << "i";
    throw SynthesisError(os.str());
  }
  const Mat I = Mat::Identity(n, n);
  const Mat Mt = M.transpose();
  Mat big = Mat::Zero(n * n, n * n);
  // vec(P M) = (M^T kron I) vec(P), vec(M^T P) = (I kron M^T) vec(P)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      big.block(i * n, j * n, n, n) += Mt(i, j) * I;
      if (i == j) big.block(i * n, j * n, n, n) += Mt;
    }
  }
  Vec rhs = -delta * Eigen::Map<const Vec>(I.data(), n * n);
  Vec sol = big.partialPivLu().solve(rhs);
  Mat P = Eigen::Map<Mat>(sol.data(), n, n);
  P = 0.5 * (P + P.transpose()).eval();
  if (Eigen::LLT<Mat>(P).info() != Eigen::Success) {
    throw SynthesisError("Lyapunov solution is not positive definite");
  }
  return P;
}

std::vector<double> symmetric_eigenvalues(const Mat& S, double tol) {
  const auto n = S.rows();
  Mat a = 0.5 * (S + S.transpose());
  const double scale = std::max(1.0, a.norm());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double lambda_max(const Mat& S) { return symmetric_eigenvalues(S).back(); }

double compute_m1(std::span<const double> q0_trace, double h) {
  std::vector<double> sq(q0_trace.size());
  std::transform(q0_trace.begin(), q0_trace.end(), sq.begin(), [](double v) { return v * v; });
  return trapezoid(sq, h);
}

double compute_m2(const Mat& P2, const Vec& B1, double theta, int n) {
  const double lam = lambda_max(P2);
  return lam * lam * (2.0 + B1.squaredNorm()) + 3.0 * n * theta * lam;
}

Rates dissipation_rates(const GainSet& g) {
  Rates out;
  const double lam1 = lambda_max(g.P1);
  const double lam2 = lambda_max(g.P2);
  const double p1 = lam1;  // spectral norm of an SPD matrix
  const double p1l = (g.P1 * g.L).norm();
  const double ln = g.L.norm();
  const double ri = 1.0 / g.r;
  const double acl = g.a * g.c_psi * ln;
  const double beta = g.q2 - g.c / 2.0 - 0.5;

  out.tau_i[0] = ri * (g.delta1 - ri * p1 * p1 - 1.0 - g.gamma * ri * g.n * g.theta * lam2);
  out.tau_i[1] = g.a / 4.0 - 0.5 - 0.5 * ri * acl;
  out.tau_i[2] = ri * (g.gamma * (g.delta2 - ri * g.m2) - p1l * p1l - 0.5 * acl);
  out.tau_i[3] = 0.25 * g.gamma * (g.b - 4.0 * g.m1 - 5.0);
  out.tau_i[4] = g.gamma * (g.b * beta - 0.5 * g.b * g.b - 1.5);
  out.tau_i[5] = g.a * (g.eta - 0.5) - 1.0;

  out.nu2 = std::max(lam1, g.a / 2.0);
  out.mu2 = std::max(lam2, g.b / 2.0);
  out.tau = std::min({out.tau_i[0] / out.nu2, out.tau_i[1] / out.nu2,
                      out.tau_i[2] / (g.gamma * out.mu2), out.tau_i[3] / (g.gamma * out.mu2)});
  return out;
}

GainSet select_gains(const plant::PlantConfig& plant, const DesignParams& design, double c_psi,
                     double m1) {
  plant::validate(plant);
  validate(design, plant.n);
  const int n = plant.n;
  const Mat A = shift_matrix(n);
  const Vec B = input_vector(n);
  const RowVec C = output_row(n);

  GainSet g;
  g.n = n;
  g.c = plant.c;
  g.theta = plant.theta;
  g.B1 = plant.B1;
  g.delta1 = design.delta1;
  g.delta2 = design.delta2;
  g.a = design.a;
  g.eta = design.eta;
  g.m1 = m1;
  g.c_psi = c_psi;

  g.K = ackermann_controller(n, design.poles_K);
  g.P1 = solve_lyapunov(A + B * g.K, design.delta1);
  g.L = observer_gain(n, design.poles_L);
  g.P2 = solve_lyapunov(A + g.L * C, design.delta2);

  auto& th = g.thresholds;
  th.q2_star = 4.0 * m1 + plant.c / 2.0 + 5.5;
  th.b_floor = 4.0 * m1 + 5.0;
  g.q2 = design.margins.q2 * th.q2_star;
  g.b = g.q2 - plant.c / 2.0 - 0.5;

  const double p1l = (g.P1 * g.L).norm();
  const double ln = g.L.norm();
  th.gamma_star = (2.0 * p1l * p1l + design.a * c_psi * ln) / design.delta2;
  th.gamma_star_printed = (p1l * p1l + design.a * c_psi * ln) / (2.0 * design.delta2);
  g.gamma = design.margins.gamma * th.gamma_star;

  g.m2 = compute_m2(g.P2, plant.B1, plant.theta, n);
  const double lam1 = lambda_max(g.P1);
  const double lam2 = lambda_max(g.P2);
  th.r_star = std::max({2.0 * g.m2 / design.delta2,
                        (lam1 * lam1 + n * g.gamma * plant.theta * lam2) / (design.delta1 - 1.0),
                        2.0 * design.a * c_psi * ln / (design.a - 2.0)});
  g.r = design.margins.r * std::max(1.0, th.r_star);

  const Rates rates = dissipation_rates(g);
  g.tau_i = rates.tau_i;
  g.nu2 = rates.nu2;
  g.mu2 = rates.mu2;
  g.tau = rates.tau;
  return g;
}

std::vector<Violation> certify(const GainSet& g) {
  std::vector<Violation> out;
  const auto& th = g.thresholds;
  const Mat A = shift_matrix(g.n);
  const Mat I = Mat::Identity(g.n, g.n);

  const Mat Mk = A + input_vector(g.n) * g.K;
  const Mat Ml = A + g.L * output_row(g.n);
  const double res1 = (g.P1 * Mk + Mk.transpose() * g.P1 + g.delta1 * I).norm();
  const double res2 = (g.P2 * Ml + Ml.transpose() * g.P2 + g.delta2 * I).norm();
  if (res1 > 1e-9 * std::max(1.0, g.P1.norm())) {
    out.push_back({"P1", res1, "Lyapunov residual for A+BK too large"});
  }
  if (res2 > 1e-9 * std::max(1.0, g.P2.norm())) {
    out.push_back({"P2", res2, "Lyapunov residual for A+LC too large"});
  }

  if (!exceeds(g.q2, th.q2_star)) {
    out.push_back({"tau5", g.q2 - th.q2_star,
                   "q2 = " + fmt(g.q2) + " must exceed q2* = " + fmt(th.q2_star) +
                       "; raise the q2 margin factor above 1"});
  }
  if (!exceeds(g.b, th.b_floor)) {
    out.push_back({"tau4", g.b - th.b_floor,
                   "b = " + fmt(g.b) + " must exceed 4 m1 + 5 = " + fmt(th.b_floor) +
                       "; raise the q2 margin factor"});
  }
  if (!exceeds(g.gamma, th.gamma_star)) {
    out.push_back({"tau3", g.gamma - th.gamma_star,
                   "gamma = " + fmt(g.gamma) + " must exceed gamma* = " + fmt(th.gamma_star) +
                       "; raise the gamma margin factor above 1"});
  }
  if (!(g.r >= 1.0) || !exceeds(g.r, th.r_star)) {
    out.push_back({"tau1", g.r - th.r_star,
                   "r = " + fmt(g.r) + " must exceed r* = " + fmt(th.r_star) +
                       " and be >= 1; raise the r margin factor above 1"});
  }

  const Rates rates = dissipation_rates(g);
  static constexpr std::array<const char*, 6> hints = {
      "raise the r margin factor", "raise a or the r margin factor",
      "raise the gamma or r margin factor", "raise the q2 margin factor",
      "raise the q2 margin factor", "raise eta"};
  for (std::size_t i = 0; i < 6; ++i) {
    if (!(rates.tau_i[i] > 0.0)) {
      const std::string name = "tau" + std::to_string(i + 1);
      const bool dup = std::any_of(out.begin(), out.end(),
                                   [&](const Violation& v) { return v.constant == name; });
      if (!dup) out.push_back({name, rates.tau_i[i], name + " <= 0; " + hints[i]});
    }
  }
  if (!(rates.tau > 0.0)) out.push_back({"tau", rates.tau, "composite decay rate not positive"});
  return out;
}

GainSet synthesize(const plant::PlantConfig& plant, const DesignParams& design, double c_psi,
                   double m1) {
  GainSet g = select_gains(plant, design, c_psi, m1);
  const auto violations = certify(g);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "gain synthesis failed:";
    for (const auto& v : violations) os << "\n  " << v.constant << ": " << v.detail;
    throw SynthesisError(os.str());
  }
  return g;
}

}  // namespace heatstep::gains

#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace heatstep;
using Catch::Approx;

namespace {

std::vector<double> sorted_real_eigenvalues(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-6);
    out.push_back(es.eigenvalues()(i).real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

double q0_trace_m1(double c, int M) {
  const auto q = kernels::tabulate_q(c, M);
  GridFunction t(static_cast<std::size_t>(M + 1));
  for (int j = 0; j <= M; ++j) t[j] = q.q(0, j);
  return gains::compute_m1(t, 1.0 / M);
}

gains::GainSet reference_gains() {
  const auto cfg = testing::reference_config();
  return app::synthesize_gains(cfg);
}

}  // namespace

TEST_CASE("controller gains from hand-expanded characteristic polynomials") {
  const std::vector<double> p2 = {-1.0, -1.0};
  const RowVec K2 = gains::ackermann_controller(2, p2);
  CHECK(K2(0) == Approx(-1.0));
  CHECK(K2(1) == Approx(-2.0));
  const std::vector<double> p3 = {-1.0, -2.0, -3.0};
  const RowVec K3 = gains::ackermann_controller(3, p3);
  CHECK(K3(0) == Approx(-6.0));
  CHECK(K3(1) == Approx(-11.0));
  CHECK(K3(2) == Approx(-6.0));
}

TEST_CASE("controller design rejects n < 2 and unstable poles") {
  const std::vector<double> p1 = {-1.0};
  CHECK_THROWS_AS(gains::ackermann_controller(1, p1), ConfigError);
  const std::vector<double> bad = {-1.0, 0.5};
  CHECK_THROWS_AS(gains::ackermann_controller(2, bad), ConfigError);
}

TEST_CASE("observer gains from hand-expanded characteristic polynomials") {
  const std::vector<double> a = {-1.0, -1.0};
  const Vec L1 = gains::observer_gain(2, a);
  CHECK(L1(0) == Approx(-2.0));
  CHECK(L1(1) == Approx(-1.0));
  const std::vector<double> b = {-2.0, -3.0};
  const Vec L2 = gains::observer_gain(2, b);
  CHECK(L2(0) == Approx(-5.0));
  CHECK(L2(1) == Approx(-6.0));
}

TEST_CASE("pole placement matches the requested spectrum for n <= 6") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pole(-3.0, -0.2);
  for (int n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> poles(static_cast<std::size_t>(n));
      for (auto& p : poles) p = pole(rng);
      std::sort(poles.begin(), poles.end());
      const Mat A = shift_matrix(n);
      const RowVec K = gains::ackermann_controller(n, poles);
      const Vec L = gains::observer_gain(n, poles);
      const auto ek = sorted_real_eigenvalues(A + input_vector(n) * K);
      const auto el = sorted_real_eigenvalues(A + L * output_row(n));
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(ek[i] - poles[i]) <= 1e-8 * std::max(1.0, std::abs(poles[i])));
        CHECK(std::abs(el[i] - poles[i]) <= 1e-8 * std::max(1.0, std::abs(poles[i])));
      }
    }
  }
}

TEST_CASE("Lyapunov solutions for diagonal test matrices") {
  Mat m1(1, 1);
  m1 << -1.0;
  CHECK(gains::solve_lyapunov(m1, 2.0)(0, 0) == Approx(1.0));
  Mat m2 = Mat::Zero(2, 2);
  m2(0, 0) = -1.0;
  m2(1, 1) = -2.0;
  const Mat P = gains::solve_lyapunov(m2, 2.0);
  CHECK(P(0, 0) == Approx(1.0));
  CHECK(P(1, 1) == Approx(0.5));
  CHECK(P(0, 1) == Approx(0.0).margin(1e-14));
}

TEST_CASE("Lyapunov residual for companion closed loops") {
  for (int n = 2; n <= 6; ++n) {
    const auto d = gains::DesignParams::defaults(n);
    const Mat A = shift_matrix(n);
    const Mat Mk = A + input_vector(n) * gains::ackermann_controller(n, d.poles_K);
    const Mat P = gains::solve_lyapunov(Mk, 2.0);
    const Mat res = P * Mk + Mk.transpose() * P + 2.0 * Mat::Identity(n, n);
    CHECK(res.norm() <= 1e-9 * std::max(1.0, P.norm()));
    CHECK((P - P.transpose()).norm() == 0.0);
    CHECK(gains::symmetric_eigenvalues(P).front() > 0.0);
  }
}

TEST_CASE("Lyapunov solver rejects non-Hurwitz matrices") {
  Mat m = Mat::Identity(2, 2);
  CHECK_THROWS_AS(gains::solve_lyapunov(m, 1.0), SynthesisError);
}

TEST_CASE("Jacobi eigenvalues agree with a reference symmetric solver") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int n = 1; n <= 10; ++n) {
    Mat S(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) S(i, j) = S(j, i) = u(rng);
    const auto ev = gains::symmetric_eigenvalues(S);
    Eigen::SelfAdjointEigenSolver<Mat> ref(S);
    for (int i = 0; i < n; ++i) CHECK(ev[i] == Approx(ref.eigenvalues()(i)).margin(1e-10));
  }
}

TEST_CASE("m1 quadrature") {
  CHECK(q0_trace_m1(0.0, 100) == 0.0);
  const std::vector<double> ones(101, 1.0);
  CHECK(gains::compute_m1(ones, 0.01) == Approx(1.0));

  // Oracle for c = 1: q(0,y) = -I1(y); Richardson-extrapolated Simpson at 1e4 panels.
  auto simpson = [](int m) {
    const double h = 1.0 / m;
    double acc = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double f = std::pow(std::cyl_bessel_i(1.0, j * h), 2);
      acc += f * ((j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0));
    }
    return acc * h / 3.0;
  };
  const double s1 = simpson(10000);
  const double s2 = simpson(20000);
  const double oracle = s2 + (s2 - s1) / 15.0;
  // trapezoid rule: relative error ~ 0.7 h^2
  const double e200 = std::abs(q0_trace_m1(1.0, 200) - oracle);
  const double e400 = std::abs(q0_trace_m1(1.0, 400) - oracle);
  CHECK(e200 <= 1e-4 * oracle);
  CHECK(e200 / e400 == Approx(4.0).epsilon(0.05));
}

TEST_CASE("m2 formula") {
  Mat P = Mat::Identity(3, 3);
  CHECK(gains::compute_m2(P, Vec::Zero(3), 0.0, 3) == Approx(2.0));
  P *= 2.0;
  Vec B1 = Vec::Zero(3);
  B1(1) = 1.0;
  CHECK(gains::compute_m2(P, B1, 1.0, 3) == Approx(30.0));
  // homogeneity: doubling P quadruples the first term and doubles the second
  const double first = 4.0 * 3.0;
  const double second = 18.0;
  CHECK(gains::compute_m2(2.0 * P, B1, 1.0, 3) == Approx(4.0 * first + 2.0 * second));
}

TEST_CASE("hand-checked synthesis chain for the linear heat cascade") {
  plant::PlantConfig p;
  p.n = 2;
  p.c = 0.0;
  p.B1 = Vec::Zero(2);
  p.theta = 0.0;
  const auto d = gains::DesignParams::defaults(2);
  const RowVec K = gains::ackermann_controller(2, d.poles_K);
  const gains::GainSet g = gains::synthesize(p, d, kernels::psi_bound(K), 0.0);
  CHECK(g.thresholds.q2_star == Approx(5.5));
  CHECK(g.q2 == Approx(11.0));
  CHECK(g.b == Approx(10.5));
  for (double t : g.tau_i) CHECK(t > 0.0);
  CHECK(g.tau > 0.0);
}

TEST_CASE("reference synthesis is certified") {
  const gains::GainSet g = reference_gains();
  CHECK(gains::certify(g).empty());
  for (double t : g.tau_i) CHECK(t > 0.0);
  CHECK(g.q2 > 4.0 * g.m1 + g.c / 2.0 + 5.5);
  CHECK(g.b > 4.0 * g.m1 + 5.0);
  CHECK(g.b == Approx(g.q2 - g.c / 2.0 - 0.5));
  CHECK(g.gamma > g.thresholds.gamma_star);
  CHECK(g.gamma > g.thresholds.gamma_star_printed);
  CHECK(g.r > std::max(1.0, g.thresholds.r_star));
  CHECK(g.B1.norm() == Approx(1.0));
}

TEST_CASE("unit q2 margin fails synthesis naming tau5") {
  auto cfg = testing::reference_config();
  cfg.design.margins.q2 = 1.0;
  try {
    (void)app::synthesize_gains(cfg);
    FAIL("expected synthesis failure");
  } catch (const SynthesisError& e) {
    CHECK(std::string(e.what()).find("tau5") != std::string::npos);
  }
}

TEST_CASE("q2 margin raises tau5 and leaves tau6 alone") {
  auto cfg = testing::reference_config();
  const RowVec K = gains::ackermann_controller(3, cfg.design.poles_K);
  double prev5 = -1.0;
  double tau6 = 0.0;
  for (double rho : {1.5, 2.0, 3.0, 5.0}) {
    cfg.design.margins.q2 = rho;
    const auto g = gains::select_gains(cfg.plant, cfg.design, kernels::psi_bound(K), 17.0);
    if (prev5 >= 0.0) {
      CHECK(g.tau_i[4] > prev5);
      CHECK(g.tau_i[5] == tau6);
    }
    prev5 = g.tau_i[4];
    tau6 = g.tau_i[5];
  }
}

TEST_CASE("design validation") {
  auto d = gains::DesignParams::defaults(3);
  CHECK_NOTHROW(gains::validate(d, 3));
  d.delta1 = 1.0;
  CHECK_THROWS_AS(gains::validate(d, 3), ConfigError);
  d = gains::DesignParams::defaults(3);
  d.a = 2.0;
  CHECK_THROWS_AS(gains::validate(d, 3), ConfigError);
  d = gains::DesignParams::defaults(3);
  d.eta = 1.0;
  CHECK_THROWS_AS(gains::validate(d, 3), ConfigError);
  d = gains::DesignParams::defaults(3);
  d.margins.gamma = 0.5;
  CHECK_THROWS_AS(gains::validate(d, 3), ConfigError);
  d = gains::DesignParams::defaults(3);
  d.poles_L.pop_back();
  CHECK_THROWS_AS(gains::validate(d, 3), ConfigError);
}

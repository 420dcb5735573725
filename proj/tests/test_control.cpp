#include "support.hpp"

using namespace heatstep;
using namespace heatstep::control;
using Catch::Approx;

namespace {

const app::Pipeline& pipe() { return testing::reference_pipeline(); }

ObserverState zero_observer(int n, int N) {
  return {Vec::Zero(n), GridFunction(static_cast<std::size_t>(N + 1), 0.0)};
}

/// Gains of the reference plant with c and K forced to zero, and matching kernels.
std::pair<gains::GainSet, kernels::KernelTable> degenerate_setup() {
  gains::GainSet g = pipe().gains;
  g.c = 0.0;
  g.K = RowVec::Zero(g.n);
  auto t = kernels::build_kernel_table(0.0, g.K, g.r, g.q2, 50);
  return {g, t};
}

}  // namespace

TEST_CASE("feedback examples") {
  const auto& g = pipe().gains;
  const auto& t = pipe().kernels;
  const auto obs = zero_observer(g.n, t.M);
  CHECK(feedback_U(obs, 0.0, g, t) == 0.0);
  CHECK(feedback_U(obs, 1.0, g, t) == -g.q2);

  const auto [g0, t0] = degenerate_setup();
  ObserverState ones{Vec::Zero(g0.n), GridFunction(51, 1.0)};
  CHECK(feedback_U(ones, 1.0, g0, t0) == Approx(-g0.eta).epsilon(1e-12));
}

TEST_CASE("feedback is linear") {
  const auto& g = pipe().gains;
  const auto& t = pipe().kernels;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_observer = [&] {
    ObserverState o{Vec(g.n), testing::random_smooth(rng, t.M)};
    for (int i = 0; i < g.n; ++i) o.Xhat(i) = 1e3 * u(rng);
    return o;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_observer();
    const auto b = random_observer();
    const double ya = u(rng), yb = u(rng), alpha = u(rng), beta = u(rng);
    ObserverState mix{alpha * a.Xhat + beta * b.Xhat, GridFunction(a.uhat.size())};
    for (std::size_t j = 0; j < mix.uhat.size(); ++j) mix.uhat[j] = alpha * a.uhat[j] + beta * b.uhat[j];
    const double lhs = feedback_U(mix, alpha * ya + beta * yb, g, t);
    const double rhs = alpha * feedback_U(a, ya, g, t) + beta * feedback_U(b, yb, g, t);
    CHECK(lhs == Approx(rhs).epsilon(1e-12).margin(1e-9));
  }
}

TEST_CASE("output injection on the ODE observer") {
  const auto& g = pipe().gains;
  const auto& t = pipe().kernels;
  const Grid1D grid(t.M);
  const auto d = observer_rhs(zero_observer(g.n, t.M), Measurement{1.0, 0.0}, 0.0, g, t, grid);
  for (int i = 0; i < g.n; ++i)
    CHECK(d.dXhat(i) == Approx(-std::pow(g.r, -(i + 1)) * g.L(i)).epsilon(1e-14));
  for (double v : d.duhat) CHECK(v == 0.0);
}

TEST_CASE("observer at the true state copies the noiseless plant") {
  const auto& g = pipe().gains;
  const auto& t = pipe().kernels;
  const Grid1D grid(t.M);
  std::mt19937 rng(8);
  sim::CascadeState truth{Vec::LinSpaced(g.n, 0.3, -0.7), testing::random_smooth(rng, t.M)};
  plant::PlantConfig linear = testing::reference_plant();
  linear.nonlinearity = plant::ZeroNonlinearity{};
  const double U = 2.5;
  const auto pd = sim::plant_rhs(truth, U, plant::eval_disturbance({}, 0.0, grid), linear, grid);
  const ObserverState obs{truth.X, truth.u};
  const auto od = observer_rhs(obs, Measurement{truth.X(0), truth.u.back()}, U, g, t, grid);
  CHECK((od.dXhat - pd.dX).norm() == 0.0);
  for (std::size_t j = 0; j < od.duhat.size(); ++j) CHECK(od.duhat[j] == Approx(pd.du[j]).epsilon(1e-14));
}

TEST_CASE("without the injection kernel only the boundary couples the output") {
  const auto& g = pipe().gains;
  auto t = pipe().kernels;
  std::fill(t.k.begin(), t.k.end(), 0.0);
  const Grid1D grid(t.M);
  std::mt19937 rng(12);
  const ObserverState obs{Vec::Zero(g.n), testing::random_smooth(rng, t.M)};
  const auto d = observer_rhs(obs, Measurement{0.0, 5.0}, 0.0, g, t, grid);
  const double ih2 = 1.0 / (grid.spacing() * grid.spacing());
  for (int j = 1; j < t.M; ++j) {
    const double lap = (obs.uhat[j - 1] - 2 * obs.uhat[j] + obs.uhat[j + 1]) * ih2;
    CHECK(d.duhat[j] == Approx(lap + g.c * obs.uhat[j]).epsilon(1e-12));
  }
}

TEST_CASE("controller rejects kernels at another resolution") {
  CHECK_THROWS_AS(Controller(pipe().gains, pipe().kernels, Grid1D(50)), ConfigError);
}

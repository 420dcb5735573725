#include "heatstep/simulator.hpp"

#include "heatstep/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace heatstep::sim {

namespace {

void plant_derivative(std::span<const double> X, std::span<const double> u, double U,
                      const plant::DisturbanceSample& d, const plant::PlantConfig& plant, double h,
                      std::span<double> dX, std::span<double> du) {
  const int n = plant.n;
  const int N = static_cast<int>(u.size()) - 1;
  const Vec f = plant::eval_nonlinearity(plant.nonlinearity,
                                         Eigen::Map<const Vec>(X.data(), n));
  for (int i = 0; i < n; ++i) {
    const double shift = i + 1 < n ? X[i + 1] : u[0];
    dX[i] = shift + f(i) + plant.B1(i) * d.d1;
  }
  const double ih2 = 1.0 / (h * h);
  const double c = plant.c;
  du[0] = (2.0 * (u[1] - u[0]) - 2.0 * h * d.d3) * ih2 + c * u[0] + d.d2[0];
  for (int j = 1; j < N; ++j) du[j] = (u[j - 1] - 2.0 * u[j] + u[j + 1]) * ih2 + c * u[j] + d.d2[j];
  du[N] = (2.0 * (u[N - 1] - u[N]) + 2.0 * h * (U + d.d4)) * ih2 + c * u[N] + d.d2[N];
}

bool finite_and_bounded(std::span<const double> y) {
  return std::all_of(y.begin(), y.end(), [](double v) {
    return std::isfinite(v) && std::abs(v) <= kDivergenceThreshold;
  });
}

}  // namespace

void validate(const SimConfig& config, const plant::PlantConfig& plant) {
  const Grid1D grid(config.N);
  if (!(config.T > 0.0) || !std::isfinite(config.T)) throw ConfigError("sim.T must be positive");
  if (!(config.cfl > 0.0) || config.cfl > 1.0) throw ConfigError("sim.cfl must lie in (0, 1]");
  if (config.record_stride < 1) throw ConfigError("sim.record_stride must be >= 1");
  const auto n = static_cast<Eigen::Index>(plant.n);
  if (config.X0.size() != n || config.Xhat0.size() != n) {
    throw ConfigError("initial ODE states must have n entries");
  }
  if (config.u0.size() != grid.size() || config.uhat0.size() != grid.size()) {
    throw ConfigError("initial PDE profiles must have N+1 nodes");
  }
  const double h = grid.spacing();
  if (!(time_step(config) * (2.0 / (h * h) + std::abs(plant.c)) < 2.5)) {
    throw ConfigError("time step violates the explicit stability guard; lower sim.cfl");
  }
}

double time_step(const SimConfig& config) {
  const double h = 1.0 / config.N;
  const double nominal = config.cfl * h * h / 2.0;
  const double steps = std::ceil(config.T / nominal - 1e-9);
  return config.T / std::max(1.0, steps);
}

CascadeDerivative plant_rhs(const CascadeState& state, double U, const plant::DisturbanceSample& d,
                            const plant::PlantConfig& plant, const Grid1D& grid) {
  if (state.X.size() != plant.n || state.u.size() != grid.size() || d.d2.size() != grid.size()) {
    throw ConfigError("plant_rhs: state does not match plant/grid");
  }
  CascadeDerivative out{Vec::Zero(plant.n), GridFunction(grid.size(), 0.0)};
  plant_derivative({state.X.data(), static_cast<std::size_t>(state.X.size())}, state.u, U, d, plant,
                   grid.spacing(), {out.dX.data(), static_cast<std::size_t>(out.dX.size())}, out.du);
  return out;
}

// ---------------------------------------------------------------------------

Rk4::Rk4(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

void Rk4::step(std::span<double> y, double t, double dt, const Rhs& rhs) {
  const std::size_t n = y.size();
  rhs(t, y, k1_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * dt * k1_[i];
  rhs(t + 0.5 * dt, tmp_, k2_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * dt * k2_[i];
  rhs(t + 0.5 * dt, tmp_, k3_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
  rhs(t + dt, tmp_, k4_);
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    finite = finite && std::isfinite(y[i]);
  }
  if (!finite) {
    throw DivergenceError("non-finite state at t = " + std::to_string(t + dt), t + dt, {});
  }
}

std::vector<double> rk4_step(std::span<const double> y, double t, double dt, const Rhs& rhs) {
  std::vector<double> out(y.begin(), y.end());
  Rk4 stepper(out.size());
  stepper.step(out, t, dt, rhs);
  return out;
}

// ---------------------------------------------------------------------------

LyapunovValues lyapunov_eval(const CascadeState& plant_state, const control::ObserverState& observer,
                             const gains::GainSet& gains, const kernels::KernelTable& kernels) {
  const transforms::ScalingMatrices S(gains.n, gains.r);
  const double h = 1.0 / kernels.M;
  const Vec Z = transforms::scale_state(S, observer.Xhat);
  const GridFunction w = transforms::observer_backstep(observer.uhat, Z, kernels.s.s,
                                                       kernels.psi.values);
  const Vec E = transforms::scale_state(S, plant_state.X - observer.Xhat);
  GridFunction ut(observer.uhat.size());
  for (std::size_t j = 0; j < ut.size(); ++j) ut[j] = plant_state.u[j] - observer.uhat[j];
  const GridFunction wt = transforms::error_to_target(ut, kernels.p.p);

  const double nw = l2_norm(w, h);
  const double nwt = l2_norm(wt, h);
  LyapunovValues v;
  v.V1 = Z.dot(gains.P1 * Z) + 0.5 * gains.a * nw * nw;
  v.V2 = E.dot(gains.P2 * E) + 0.5 * gains.b * nwt * nwt;
  v.V = v.V1 + gains.gamma * v.V2;
  return v;
}

std::array<double, 14> as_array(const RecordRow& r) {
  return {r.t, r.normX, r.normU, r.normXhat, r.normUhat, r.normXerr, r.normUerr,
          r.V1, r.V2, r.V, r.ctrl, r.D, r.u1, r.uhat1};
}

SimRecord run(const SimConfig& config, const plant::PlantConfig& plant, const gains::GainSet& gains,
              const kernels::KernelTable& kernels, const plant::DisturbanceSpec& disturbances) {
  plant::validate(plant);
  validate(config, plant);
  if (gains.n != plant.n) throw ConfigError("gain set dimension does not match plant");

  const Grid1D grid(config.N);
  const kernels::KernelTable kt = kernels::restrict_to(kernels, config.N);
  const control::Controller ctl(gains, kt, grid);
  const int n = plant.n;
  const int N = config.N;
  const std::size_t sz = grid.size();
  const double h = grid.spacing();
  {
    // The boundary gain q2 and the injection k stiffen the observer beyond the heat stencil.
    const double stiff = 2.0 / (h * h) + std::abs(plant.c) + 2.0 * std::abs(gains.q2) / h + sup_norm(kt.k);
    if (!(time_step(config) * stiff < 2.5)) {
      throw ConfigError("time step too large for the observer gains (dt * " + std::to_string(stiff) +
                        " >= 2.5); lower sim.cfl or refine sim.N");
    }
  }

  const std::size_t oX = 0;
  const std::size_t ou = static_cast<std::size_t>(n);
  const std::size_t oXh = ou + sz;
  const std::size_t ouh = oXh + static_cast<std::size_t>(n);
  std::vector<double> y(ouh + sz, 0.0);

  const bool perfect = config.mode == Mode::perfect_init;
  for (int i = 0; i < n; ++i) {
    y[oX + i] = config.X0(i);
    y[oXh + i] = perfect ? config.X0(i) : config.Xhat0(i);
  }
  for (std::size_t j = 0; j < sz; ++j) {
    y[ou + j] = config.u0[j];
    y[ouh + j] = perfect ? config.u0[j] : config.uhat0[j];
  }

  const GridFunction d2_shape = plant::sample_profile(disturbances.d2.profile, grid);
  plant::DisturbanceSample ds;
  const bool open = config.mode == Mode::open_loop;

  auto control_of = [&](std::span<const double> s) {
    if (open) return 0.0;
    return ctl.feedback(s.subspan(oXh, n), s.subspan(ouh, sz), s[ou + N]);
  };

  const Rhs rhs = [&](double t, std::span<const double> s, std::span<double> ds_out) {
    plant::eval_disturbance_into(disturbances, t, d2_shape, ds);
    const double U = control_of(s);
    plant_derivative(s.subspan(oX, n), s.subspan(ou, sz), U, ds, plant, h, ds_out.subspan(oX, n),
                     ds_out.subspan(ou, sz));
    ctl.observer_rhs(s.subspan(oXh, n), s.subspan(ouh, sz), {s[oX], s[ou + N]}, U,
                     ds_out.subspan(oXh, n), ds_out.subspan(ouh, sz));
  };

  plant::DisturbanceSample rec_d;
  auto make_row = [&](double t) {
    RecordRow row;
    row.t = t;
    CascadeState ps{Eigen::Map<const Vec>(&y[oX], n),
                    GridFunction(y.begin() + static_cast<std::ptrdiff_t>(ou),
                                 y.begin() + static_cast<std::ptrdiff_t>(ou + sz))};
    control::ObserverState os{Eigen::Map<const Vec>(&y[oXh], n),
                              GridFunction(y.begin() + static_cast<std::ptrdiff_t>(ouh),
                                           y.begin() + static_cast<std::ptrdiff_t>(ouh + sz))};
    row.normX = ps.X.norm();
    row.normU = l2_norm(ps.u, h);
    row.normXhat = os.Xhat.norm();
    row.normUhat = l2_norm(os.uhat, h);
    row.normXerr = (ps.X - os.Xhat).norm();
    GridFunction ut(sz);
    for (std::size_t j = 0; j < sz; ++j) ut[j] = ps.u[j] - os.uhat[j];
    row.normUerr = l2_norm(ut, h);
    const LyapunovValues lv = lyapunov_eval(ps, os, gains, kt);
    row.V1 = lv.V1;
    row.V2 = lv.V2;
    row.V = lv.V;
    row.ctrl = control_of(y);
    plant::eval_disturbance_into(disturbances, t, d2_shape, rec_d);
    GridFunction d2t = kt.p.p.apply(rec_d.d2);
    for (std::size_t j = 0; j < sz; ++j) d2t[j] = rec_d.d2[j] - d2t[j] - kt.p.at_one[j] * rec_d.d4;
    row.D = plant::disturbance_energy(rec_d, gains.b, d2t, h);
    row.u1 = ps.u[static_cast<std::size_t>(N)];
    row.uhat1 = os.uhat[static_cast<std::size_t>(N)];
    return row;
  };

  SimRecord record;
  record.dt = time_step(config);
  record.steps = std::lround(config.T / record.dt);
  record.rows.push_back(make_row(0.0));

  Rk4 stepper(y.size());
  for (long k = 1; k <= record.steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * record.dt;
    const double t1 = static_cast<double>(k) * record.dt;
    try {
      stepper.step(y, t0, record.dt, rhs);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), e.time(), std::move(record));
    }
    if (!finite_and_bounded(y)) {
      throw DivergenceError("state exceeded divergence threshold at t = " + std::to_string(t1), t1,
                            std::move(record));
    }
    if (k % config.record_stride == 0 || k == record.steps) record.rows.push_back(make_row(t1));
  }
  return record;
}

}  // namespace heatstep::sim

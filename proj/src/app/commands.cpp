#include "heatstep/app/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace heatstep::app {

namespace {

using json = nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write output file " + path.string());
  return out;
}

std::filesystem::path or_default(const std::filesystem::path& p, const char* fallback) {
  return p.empty() ? std::filesystem::path(fallback) : p;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

}  // namespace

gains::GainSet synthesize_gains(const RunConfig& cfg) {
  const RowVec K = gains::ackermann_controller(cfg.plant.n, cfg.design.poles_K);
  const kernels::QKernel q = kernels::tabulate_q(cfg.plant.c, cfg.M);
  GridFunction trace(static_cast<std::size_t>(cfg.M + 1));
  for (int j = 0; j <= cfg.M; ++j) trace[j] = q.q(0, j);
  const double m1 = gains::compute_m1(trace, 1.0 / cfg.M);
  return gains::synthesize(cfg.plant, cfg.design, kernels::psi_bound(K), m1);
}

Pipeline build_pipeline(const RunConfig& cfg) {
  Pipeline p{synthesize_gains(cfg), {}};
  p.kernels = kernels::build_kernel_table(cfg.plant.c, p.gains.K, p.gains.r, p.gains.q2, cfg.M,
                                          cfg.kernel_options);
  return p;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string gains_to_json(const gains::GainSet& g) {
  json j;
  j["n"] = g.n;
  j["c"] = g.c;
  j["theta"] = g.theta;
  j["B1"] = to_json(g.B1);
  j["K"] = to_json(Vec(g.K.transpose()));
  j["L"] = to_json(g.L);
  j["P1"] = to_json(g.P1);
  j["P2"] = to_json(g.P2);
  j["delta1"] = g.delta1;
  j["delta2"] = g.delta2;
  j["a"] = g.a;
  j["b"] = g.b;
  j["eta"] = g.eta;
  j["q2"] = g.q2;
  j["gamma"] = g.gamma;
  j["r"] = g.r;
  j["m1"] = g.m1;
  j["m2"] = g.m2;
  j["c_psi"] = g.c_psi;
  j["thresholds"] = {{"gamma_star", g.thresholds.gamma_star},
                     {"gamma_star_printed", g.thresholds.gamma_star_printed},
                     {"r_star", g.thresholds.r_star},
                     {"q2_star", g.thresholds.q2_star},
                     {"b_floor", g.thresholds.b_floor}};
  json taus = json::object();
  for (std::size_t i = 0; i < g.tau_i.size(); ++i) taus["tau" + std::to_string(i + 1)] = g.tau_i[i];
  j["tau_i"] = taus;
  j["nu2"] = g.nu2;
  j["mu2"] = g.mu2;
  j["tau"] = g.tau;
  return j.dump(2) + "\n";
}

void write_record_csv(const sim::SimRecord& record, std::ostream& out) {
  for (std::size_t i = 0; i < sim::kRecordColumns.size(); ++i) {
    out << (i ? "," : "") << sim::kRecordColumns[i];
  }
  out << '\n';
  for (const auto& row : record.rows) {
    const auto values = sim::as_array(row);
    for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << format_number(values[i]);
    out << '\n';
  }
}

void write_kernels_csv(const kernels::KernelTable& t, std::ostream& out) {
  const int M = t.M;
  out << "kernel,x,y,value\n";
  auto grid2 = [&](const char* name, const kernels::TriangularKernel& k) {
    for (int i = 0; i <= M; ++i) {
      for (int j = 0; j <= M; ++j) {
        if (!k.contains(i, j)) continue;
        out << name << ',' << format_number(static_cast<double>(i) / M) << ','
            << format_number(static_cast<double>(j) / M) << ',' << format_number(k(i, j)) << '\n';
      }
    }
  };
  // One-variable tables leave y empty.
  auto grid1 = [&](const std::string& name, auto&& value) {
    for (int i = 0; i <= M; ++i) {
      out << name << ',' << format_number(static_cast<double>(i) / M) << ",," << format_number(value(i))
          << '\n';
    }
  };
  grid2("s", t.s.s);
  grid2("q", t.q.q);
  grid2("p", t.p.p);
  grid1("k", [&](int i) { return t.k[i]; });
  for (Eigen::Index c = 0; c < t.psi.values.cols(); ++c) {
    grid1("psi" + std::to_string(c + 1), [&](int i) { return t.psi.values(i, c); });
  }
}

void write_sweep_csv(const verify::SweepResult& result, std::ostream& out) {
  out << "amplitude,steady_state_norm,sup_D\n";
  for (const auto& r : result.rows) {
    out << format_number(r.amplitude) << ',' << format_number(r.steady_state_norm) << ','
        << format_number(r.sup_D) << '\n';
  }
}

int cmd_synth(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const gains::GainSet g = synthesize_gains(cfg);
  auto file = open_output(or_default(out, "gains.json"));
  file << gains_to_json(g);
  log << "synthesized gains: q2 = " << g.q2 << ", gamma = " << g.gamma << ", r = " << g.r
      << ", tau = " << g.tau << '\n';
  return 0;
}

int cmd_kernels(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const Pipeline p = build_pipeline(cfg);
  auto file = open_output(or_default(out, "kernels.csv"));
  write_kernels_csv(p.kernels, file);
  log << "kernels at M = " << cfg.M << ": roundtrip " << p.kernels.residuals.roundtrip
      << ", gain residual " << p.kernels.residuals.k_vanishing << '\n';
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const Pipeline p = build_pipeline(cfg);
  const auto path = or_default(out, "record.csv");
  try {
    const sim::SimRecord rec = sim::run(cfg.sim, cfg.plant, p.gains, p.kernels, cfg.disturbances);
    auto file = open_output(path);
    write_record_csv(rec, file);
    return 0;
  } catch (const sim::DivergenceError& e) {
    auto file = open_output(path);
    write_record_csv(e.partial(), file);
    log << "divergence: " << e.what() << '\n';
    return static_cast<int>(ExitCode::divergence);
  }
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& amplitudes, unsigned threads,
              const std::filesystem::path& out, std::ostream& log) {
  const Pipeline p = build_pipeline(cfg);
  const verify::RunSetup setup{cfg.sim, cfg.plant, p.gains, p.kernels};
  verify::SweepResult result;
  try {
    result = verify::iss_sweep(setup, cfg.disturbances, amplitudes, threads);
  } catch (const verify::SweepDivergence& e) {
    log << e.what() << '\n';
    return static_cast<int>(ExitCode::divergence);
  }
  auto file = open_output(or_default(out, "sweep.csv"));
  write_sweep_csv(result, file);
  const verify::SweepCheck check = verify::check_sweep(result);
  if (!check.ok()) {
    log << "sweep check failed: " << check.message << '\n';
    return static_cast<int>(ExitCode::verification);
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double threshold, bool pass) {
    checks.push_back({std::move(name), value, threshold, pass});
  };

  for (const auto& e : verify::spectral_check(cfg.plant.c, cfg.verify.spectral_N)) {
    const double tol = e.k == 0 ? 1e-9 : 1e-3;
    add("spectral_k" + std::to_string(e.k), e.rel_error, tol, e.rel_error <= tol);
  }

  const gains::GainSet g = synthesize_gains(cfg);
  const auto violations = gains::certify(g);
  add("certificate_violations", static_cast<double>(violations.size()), 0.0, violations.empty());
  for (std::size_t i = 0; i < g.tau_i.size(); ++i) {
    add("tau" + std::to_string(i + 1), g.tau_i[i], 0.0, g.tau_i[i] > 0.0);
  }

  const kernels::KernelTable kv = kernels::build_kernel_table(
      cfg.plant.c, g.K, g.r, g.q2, cfg.verify.kernel_M, cfg.kernel_options);
  const auto& r = kv.residuals;
  add("q_pde_residual", r.q_pde, 1e-4, r.q_pde <= 1e-4);
  add("s_pde_residual", r.s_pde, 1e-3, r.s_pde <= 1e-3);
  add("s_diagonal_residual", r.s_diagonal, 1e-3, r.s_diagonal <= 1e-3);
  add("s_boundary_residual", r.s_boundary, 1e-3, r.s_boundary <= 1e-3);
  add("psi_residual", r.psi_ode, 1e-8, r.psi_ode <= 1e-8);
  add("resolvent_roundtrip", r.roundtrip, 1e-8, r.roundtrip <= 1e-8);
  add("gain_vanishing_residual", r.k_vanishing, 1e-8, r.k_vanishing <= 1e-8);

  const kernels::KernelTable kt = cfg.M == cfg.verify.kernel_M
                                      ? kv
                                      : kernels::build_kernel_table(cfg.plant.c, g.K, g.r, g.q2,
                                                                    cfg.M, cfg.kernel_options);
  sim::SimConfig nominal = cfg.sim;
  nominal.mode = sim::Mode::closed_loop;
  try {
    const sim::SimRecord rec = sim::run(nominal, cfg.plant, g, kt, plant::DisturbanceSpec{});
    const double v0 = rec.rows.front().V;
    if (v0 > 0.0) {
      const double ratio = rec.rows.back().V / v0;
      add("lyapunov_decay_ratio", ratio, cfg.verify.decay_ratio, ratio <= cfg.verify.decay_ratio);
      const double tau_hat = verify::fit_decay_rate(rec, cfg.verify.skip_fraction);
      add("fitted_decay_rate", tau_hat, 0.0, tau_hat > 0.0);
    }
    const double frac = verify::dissipation_audit(rec, g.tau, g.gamma, cfg.verify.audit_slack);
    add("dissipation_fraction", frac, cfg.verify.audit_fraction, frac >= cfg.verify.audit_fraction);
  } catch (const sim::DivergenceError& e) {
    add("nominal_run_diverged", e.time(), 0.0, false);
  }

  auto file = open_output(or_default(out, "verify.csv"));
  file << "check,value,threshold,pass\n";
  bool all = true;
  for (const auto& c : checks) {
    file << c.name << ',' << format_number(c.value) << ',' << format_number(c.threshold) << ','
         << (c.pass ? 1 : 0) << '\n';
    if (!c.pass) {
      all = false;
      log << "check failed: " << c.name << " = " << c.value << " (threshold " << c.threshold << ")\n";
    }
  }
  return all ? 0 : static_cast<int>(ExitCode::verification);
}

int dispatch(std::string_view command, const CommandOptions& options, std::ostream& log) {
  try {
    const RunConfig cfg = load_config(options.config);
    if (command == "synth") return cmd_synth(cfg, options.out, log);
    if (command == "kernels") return cmd_kernels(cfg, options.out, log);
    if (command == "simulate") return cmd_simulate(cfg, options.out, log);
    if (command == "sweep") {
      return cmd_sweep(cfg, options.amplitudes, options.threads, options.out, log);
    }
    if (command == "verify") return cmd_verify(cfg, options.out, log);
    log << "unknown command '" << command << "'\n";
    return static_cast<int>(ExitCode::config);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config);
  }
}

}  // namespace heatstep::app

#include "heatstep/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace heatstep::verify {

namespace {

/// Number of eigenvalues strictly below x (Sturm sequence of the LDL' pivots).
int count_below(std::span<const double> diag, std::span<const double> off, double x) {
  int count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double o2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    d = diag[i] - x - (i == 0 ? 0.0 : o2 / d);
    if (d == 0.0) d = -std::numeric_limits<double>::epsilon() * (std::abs(x) + 1.0);
    if (d < 0.0) ++count;
  }
  return count;
}

}  // namespace

std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag,
                                            std::span<const double> off) {
  const std::size_t n = diag.size();
  if (off.size() + 1 != n) throw std::invalid_argument("off-diagonal must have n-1 entries");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double rad = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - rad);
    hi = std::max(hi, diag[i] + rad);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  std::vector<double> ev(n);
  for (std::size_t m = 0; m < n; ++m) {
    double a = lo;
    double b = hi;
    // smallest x with count_below(x) > m
    while (b - a > 4.0 * std::numeric_limits<double>::epsilon() * scale) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (count_below(diag, off, mid) > static_cast<int>(m)) {
        b = mid;
      } else {
        a = mid;
      }
    }
    ev[m] = 0.5 * (a + b);
  }
  return ev;
}

std::vector<SpectralEntry> spectral_check(double c, int N) {
  if (N < 32) throw ConfigError("spectral check needs N >= 32");
  const double h = 1.0 / N;
  const double ih2 = 1.0 / (h * h);
  // Symmetrized with the trapezoid weights (1/2 at the ends).
  std::vector<double> diag(static_cast<std::size_t>(N + 1), -2.0 * ih2 + c);
  std::vector<double> off(static_cast<std::size_t>(N), ih2);
  off.front() = std::numbers::sqrt2 * ih2;
  off.back() = std::numbers::sqrt2 * ih2;
  const auto ev = tridiagonal_eigenvalues(diag, off);

  std::vector<SpectralEntry> out;
  for (int k = 0; k <= 5; ++k) {
    SpectralEntry e;
    e.k = k;
    e.exact = c - k * k * std::numbers::pi * std::numbers::pi;
    e.discrete = ev[ev.size() - 1 - static_cast<std::size_t>(k)];
    e.rel_error = std::abs(e.discrete - e.exact) / std::max(1.0, std::abs(e.exact));
    out.push_back(e);
  }
  return out;
}

double fit_decay_rate(std::span<const double> t, std::span<const double> V, double skip_fraction) {
  if (t.size() != V.size() || t.empty()) throw VerificationError("decay fit: empty or ragged record");
  if (!(skip_fraction >= 0.0 && skip_fraction < 1.0)) {
    throw ConfigError("skip fraction must lie in [0, 1)");
  }
  const double start = t.front() + skip_fraction * (t.back() - t.front());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < start) continue;
    if (!(V[i] >= std::numeric_limits<double>::min())) break;
    const double y = std::log(V[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
    ++count;
  }
  if (count < 20) {
    throw VerificationError("decay fit needs at least 20 positive samples, got " +
                            std::to_string(count));
  }
  const double denom = count * stt - st * st;
  const double slope = (count * sty - st * sy) / denom;
  return -slope;
}

double fit_decay_rate(const sim::SimRecord& record, double skip_fraction) {
  std::vector<double> t, V;
  for (const auto& r : record.rows) {
    t.push_back(r.t);
    V.push_back(r.V);
  }
  return fit_decay_rate(t, V, skip_fraction);
}

double dissipation_audit(const sim::SimRecord& record, double tau, double gamma, double slack) {
  const auto& rows = record.rows;
  if (rows.size() < 2) return 1.0;
  std::size_t ok = 0;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const auto& a = rows[k];
    const auto& b = rows[k + 1];
    const double rate = (b.V - a.V) / (b.t - a.t);
    const double bound = -tau * 0.5 * (a.V + b.V) + gamma * 0.5 * (a.D + b.D) + slack * (1.0 + a.V);
    if (rate <= bound) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(rows.size() - 1);
}

double steady_state_norm(const sim::SimRecord& record) {
  if (record.rows.empty()) return 0.0;
  const double t_end = record.rows.back().t;
  const double start = record.rows.front().t + 0.8 * (t_end - record.rows.front().t);
  double best = 0.0;
  for (const auto& r : record.rows) {
    if (r.t >= start) best = std::max(best, r.normX + r.normU);
  }
  return best;
}

SweepResult iss_sweep(const RunSetup& setup, const plant::DisturbanceSpec& tmpl,
                      std::vector<double> amplitudes, unsigned max_threads) {
  std::sort(amplitudes.begin(), amplitudes.end());
  if (amplitudes.empty()) throw ConfigError("sweep needs at least one amplitude");
  if (amplitudes.front() != 0.0) throw ConfigError("sweep amplitudes must include 0 and be >= 0");
  if (std::adjacent_find(amplitudes.begin(), amplitudes.end()) != amplitudes.end()) {
    throw ConfigError("sweep amplitudes must be distinct");
  }

  const std::size_t count = amplitudes.size();
  std::vector<SweepRow> rows(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const kernels::KernelTable kt = kernels::restrict_to(setup.kernels, setup.sim.N);
  const plant::TransformBound bound{kt.p.p.l2_operator_bound(), l2_norm(kt.p.at_one, 1.0 / kt.M)};
  const Grid1D grid(setup.sim.N);
  // Start from rest so the steady-state norm measures the disturbance response only.
  sim::SimConfig at_rest = setup.sim;
  at_rest.X0.setZero();
  at_rest.Xhat0.setZero();
  std::fill(at_rest.u0.begin(), at_rest.u0.end(), 0.0);
  std::fill(at_rest.uhat0.begin(), at_rest.uhat0.end(), 0.0);

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        const plant::DisturbanceSpec spec = plant::scaled(tmpl, amplitudes[i]);
        const sim::SimRecord rec = sim::run(at_rest, setup.plant, setup.gains, kt, spec);
        rows[i] = {amplitudes[i], steady_state_norm(rec),
                   plant::sup_disturbance(spec, setup.sim.T, grid, setup.gains.b, bound)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(max_threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const sim::DivergenceError& e) {
      std::ostringstream os;
      os << "sweep run with amplitude " << amplitudes[i] << " diverged: " << e.what();
      throw SweepDivergence(os.str(), amplitudes[i]);
    }
  }
  return SweepResult{std::move(rows)};
}

SweepCheck check_sweep(const SweepResult& result, double slack, double zero_tol) {
  SweepCheck out;
  std::ostringstream os;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    if (r.amplitude == 0.0 && !(r.steady_state_norm <= zero_tol)) {
      out.vanishes_at_zero = false;
      os << "steady-state norm " << r.steady_state_norm << " at amplitude 0 exceeds " << zero_tol
         << "; ";
    }
    if (i > 0) {
      const auto& prev = result.rows[i - 1];
      if (r.steady_state_norm < (1.0 - slack) * prev.steady_state_norm) {
        out.monotone = false;
        os << "norm decreases from amplitude " << prev.amplitude << " to " << r.amplitude << "; ";
      }
    }
  }
  out.message = os.str();
  return out;
}

}  // namespace heatstep::verify

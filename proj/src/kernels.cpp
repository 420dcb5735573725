#include "heatstep/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace heatstep::kernels {

namespace {

constexpr int kMaxSeriesTerms = 80;

/// Sums t_0 + t_1 + ... with t_m = t_{m-1} * w / (4 m (m + shift)).
double bessel_like_series(double w, double first, int shift) {
  double term = first;
  double sum = first;
  for (int m = 1; m < kMaxSeriesTerms; ++m) {
    term *= w / (4.0 * m * (m + shift));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

std::vector<RowVec> shifted_gains(const RowVec& K, double r) {
  // (K (A/r)^k) for k = 0..n-1
  const auto n = K.size();
  std::vector<RowVec> out;
  RowVec cur = K;
  for (Eigen::Index k = 0; k < n; ++k) {
    out.push_back(cur);
    RowVec next = RowVec::Zero(n);
    for (Eigen::Index j = 1; j < n; ++j) next(j) = cur(j - 1) / r;
    cur = next;
  }
  return out;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

double phi_series(double w) { return bessel_like_series(w, 0.5, 1); }

double phi_series_derivative(double w) { return bessel_like_series(w, 1.0 / 16.0, 2); }

double q_extended(double x, double y, double c) {
  return -c * y * phi_series(c * (y * y - x * x));
}

double q_closed_form(double x, double y, double c) {
  if (x > y + 1e-14) throw std::invalid_argument("q_closed_form requires x <= y");
  return q_extended(x, y, c);
}

double q_closed_form_dy(double x, double y, double c) {
  const double w = c * (y * y - x * x);
  return -c * phi_series(w) - 2.0 * c * c * y * y * phi_series_derivative(w);
}

// ---------------------------------------------------------------------------

TriangularKernel::TriangularKernel(int M, Triangle tri)
    : m_(M), tri_(tri), v_(static_cast<std::size_t>(M + 1) * static_cast<std::size_t>(M + 1), 0.0) {
  if (M < 2) throw ConfigError("kernel resolution must be >= 2");
}

double TriangularKernel::weight(int i, int j) const noexcept {
  const double h = spacing();
  if (tri_ == Triangle::lower) {
    if (i == 0 || j > i) return 0.0;
    return (j == 0 || j == i) ? 0.5 * h : h;
  }
  if (i == m_ || j < i) return 0.0;
  return (j == i || j == m_) ? 0.5 * h : h;
}

GridFunction TriangularKernel::apply(std::span<const double> f) const {
  GridFunction out(static_cast<std::size_t>(m_ + 1), 0.0);
  const double h = spacing();
  for (int i = 0; i <= m_; ++i) {
    double acc = 0.0;
    if (tri_ == Triangle::lower) {
      if (i == 0) continue;
      acc = 0.5 * ((*this)(i, 0) * f[0] + (*this)(i, i) * f[i]);
      for (int j = 1; j < i; ++j) acc += (*this)(i, j) * f[j];
    } else {
      if (i == m_) continue;
      acc = 0.5 * ((*this)(i, i) * f[i] + (*this)(i, m_) * f[m_]);
      for (int j = i + 1; j < m_; ++j) acc += (*this)(i, j) * f[j];
    }
    out[i] = h * acc;
  }
  return out;
}

double TriangularKernel::row_sum_bound() const {
  double best = 0.0;
  for (int i = 0; i <= m_; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= m_; ++j) acc += weight(i, j) * std::abs((*this)(i, j));
    best = std::max(best, acc);
  }
  return best;
}

double TriangularKernel::l2_operator_bound() const {
  // Matrix B_ij = w_ij |K_ij| acting in the inner product <f,g> = sum omega_j f_j g_j.
  // Schur test: |B| <= sqrt(max_i sum_j B_ij * max_j sum_i omega_i B_ij / omega_j).
  const double h = spacing();
  auto omega = [&](int j) { return (j == 0 || j == m_) ? 0.5 * h : h; };
  double rows = 0.0;
  std::vector<double> cols(static_cast<std::size_t>(m_ + 1), 0.0);
  for (int i = 0; i <= m_; ++i) {
    double acc = 0.0;
    for (int j = 0; j <= m_; ++j) {
      const double b = weight(i, j) * std::abs((*this)(i, j));
      acc += b;
      cols[j] += omega(i) * b;
    }
    rows = std::max(rows, acc);
  }
  double colmax = 0.0;
  for (int j = 0; j <= m_; ++j) colmax = std::max(colmax, cols[j] / omega(j));
  return std::sqrt(rows * colmax);
}

// ---------------------------------------------------------------------------

RowVec psi_eval(double x, const RowVec& K, double r) {
  const auto terms = shifted_gains(K, r);
  RowVec out = RowVec::Zero(K.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const int p = 2 * static_cast<int>(k);
    out += std::pow(x, p) / factorial(p) * terms[k];
  }
  return out;
}

RowVec psi_derivative(double x, const RowVec& K, double r) {
  const auto terms = shifted_gains(K, r);
  RowVec out = RowVec::Zero(K.size());
  for (std::size_t k = 1; k < terms.size(); ++k) {
    const int p = 2 * static_cast<int>(k) - 1;
    out += std::pow(x, p) / factorial(p) * terms[k];
  }
  return out;
}

double psi_bound(const RowVec& K) {
  const auto terms = shifted_gains(K, 1.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    acc += terms[k].norm() / factorial(2 * static_cast<int>(k));
  }
  return acc;
}

double PsiTable::sup_norm() const {
  double best = 0.0;
  for (Eigen::Index j = 0; j < values.rows(); ++j) best = std::max(best, values.row(j).norm());
  return best;
}

PsiTable tabulate_psi(const RowVec& K, double r, int M) {
  PsiTable t;
  t.values.resize(M + 1, K.size());
  for (int j = 0; j <= M; ++j) t.values.row(j) = psi_eval(static_cast<double>(j) / M, K, r);
  t.at_one = psi_eval(1.0, K, r);
  t.slope_at_one = psi_derivative(1.0, K, r);
  return t;
}

double psi_ode_residual(const RowVec& K, double r, int M) {
  const PsiTable t = tabulate_psi(K, r, M);
  const double h = 1.0 / M;
  const Mat A = shift_matrix(static_cast<int>(K.size()));
  double worst = 0.0;
  // Fourth-order stencil: exact on polynomials of degree <= 5, which covers psi for n <= 3.
  for (int j = 2; j + 2 <= M; ++j) {
    const RowVec second = (-t.values.row(j + 2) + 16.0 * t.values.row(j + 1) - 30.0 * t.values.row(j) +
                           16.0 * t.values.row(j - 1) - t.values.row(j - 2)) /
                          (12.0 * h * h);
    const RowVec res = second - t.values.row(j) * A / r;
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// s kernel. With xi = x + y, eta = x - y and G(xi, eta) = s(x, y), the problem
// becomes G_{xi eta} = (c/4) G with G(xi, 0) = -c xi / 4 and the Neumann datum
// g on the line xi = eta. Integrating twice,
//   G = -(c/4)(xi + eta) - Gamma(eta) + (c/2) int_0^eta F(t,t) dt
//       + (c/4) int_eta^xi F(t, eta) dt,   F(xi, eta) = int_0^eta G(xi, e) de,
// where Gamma' = g.

namespace {

struct Lattice {
  int L;
  double h;
  std::vector<double> G, F, J;

  explicit Lattice(int l)
      : L(l), h(1.0 / l),
        G(size(), 0.0), F(size(), 0.0), J(size(), 0.0) {}

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(L + 1) * static_cast<std::size_t>(2 * L + 1);
  }
  [[nodiscard]] std::size_t at(int a, int b) const {
    return static_cast<std::size_t>(b) * static_cast<std::size_t>(2 * L + 1) +
           static_cast<std::size_t>(a);
  }
  [[nodiscard]] int a_max(int b) const { return 2 * L - b; }
};

/// Cumulative integrals F (in eta) and J (in xi from eta) of the current G.
void integrate(Lattice& lt) {
  const double hh = 0.5 * lt.h;
  for (int a = 0; a <= 2 * lt.L; ++a) {
    const int bmax = std::min(a, 2 * lt.L - a);
    lt.F[lt.at(a, 0)] = 0.0;
    for (int b = 1; b <= bmax; ++b) {
      lt.F[lt.at(a, b)] = lt.F[lt.at(a, b - 1)] + hh * (lt.G[lt.at(a, b - 1)] + lt.G[lt.at(a, b)]);
    }
  }
  for (int b = 0; b <= lt.L; ++b) {
    lt.J[lt.at(b, b)] = 0.0;
    for (int a = b + 1; a <= lt.a_max(b); ++a) {
      lt.J[lt.at(a, b)] = lt.J[lt.at(a - 1, b)] + hh * (lt.G[lt.at(a - 1, b)] + lt.G[lt.at(a, b)]);
    }
  }
}

struct LatticeSolution {
  Lattice lattice;
  IterationStats stats;
};

LatticeSolution solve_lattice(double c, const std::vector<double>& gamma_of_eta, int L, double tol,
                              int max_iter) {
  Lattice lt(L);
  std::vector<double> H(static_cast<std::size_t>(L + 1), 0.0);
  std::vector<double> I(lt.size(), 0.0);
  IterationStats stats;
  double prev_change = 0.0;
  const double hh = 0.5 * lt.h;

  for (int it = 1; it <= max_iter; ++it) {
    integrate(lt);
    H[0] = 0.0;
    for (int b = 1; b <= L; ++b) {
      H[b] = H[b - 1] + hh * (lt.F[lt.at(b - 1, b - 1)] + lt.F[lt.at(b, b)]);
    }
    for (int b = 0; b <= L; ++b) {
      I[lt.at(b, b)] = 0.0;
      for (int a = b + 1; a <= lt.a_max(b); ++a) {
        I[lt.at(a, b)] = I[lt.at(a - 1, b)] + hh * (lt.F[lt.at(a - 1, b)] + lt.F[lt.at(a, b)]);
      }
    }
    double change = 0.0;
    for (int b = 0; b <= L; ++b) {
      const double base = -gamma_of_eta[b] + 0.5 * c * H[b];
      for (int a = b; a <= lt.a_max(b); ++a) {
        const double next = -0.25 * c * (a + b) * lt.h + base + 0.25 * c * I[lt.at(a, b)];
        change = std::max(change, std::abs(next - lt.G[lt.at(a, b)]));
        lt.G[lt.at(a, b)] = next;
      }
    }
    stats.iterations = it;
    stats.last_ratio = prev_change > 0.0 ? change / prev_change : 0.0;
    stats.last_change = change;
    prev_change = change;
    if (change <= tol) {
      integrate(lt);
      return {std::move(lt), stats};
    }
  }
  throw KernelError("s kernel Picard iteration did not converge in " + std::to_string(max_iter) +
                        " iterations (last change " + std::to_string(stats.last_change) + ")",
                    stats.last_ratio);
}

struct SSample {
  TriangularKernel s;
  GridFunction at_one;
  GridFunction dx_at_one;
  IterationStats stats;
};

SSample sample_lattice(double c, double r, const RowVec& K, int M, int refine, double tol,
                       int max_iter) {
  const int L = M * refine;
  const auto n = K.size();
  const auto terms = shifted_gains(K, r);
  // Gamma(x) = -(1/r) int_0^x psi_n, g(x) = -(1/r) psi_n(x)
  auto gamma_fn = [&](double x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const int p = 2 * static_cast<int>(k) + 1;
      acc += terms[k](n - 1) * std::pow(x, p) / factorial(p);
    }
    return -acc / r;
  };
  auto g_fn = [&](double x) { return -psi_eval(x, K, r)(n - 1) / r; };

  std::vector<double> gamma_of_eta(static_cast<std::size_t>(L + 1));
  for (int b = 0; b <= L; ++b) gamma_of_eta[b] = gamma_fn(static_cast<double>(b) / L);

  auto sol = solve_lattice(c, gamma_of_eta, L, tol, max_iter);
  const Lattice& lt = sol.lattice;

  SSample out{TriangularKernel(M, Triangle::lower), GridFunction(M + 1), GridFunction(M + 1), sol.stats};
  for (int i = 0; i <= M; ++i) {
    for (int j = 0; j <= i; ++j) {
      out.s(i, j) = lt.G[lt.at(refine * (i + j), refine * (i - j))];
    }
  }
  for (int j = 0; j <= M; ++j) {
    const int a = refine * (M + j);
    const int b = refine * (M - j);
    const double g_xi = -0.25 * c + 0.25 * c * lt.F[lt.at(a, b)];
    const double g_eta = -0.25 * c - g_fn(b * lt.h) + 0.25 * c * lt.F[lt.at(b, b)] +
                         0.25 * c * lt.J[lt.at(a, b)];
    out.at_one[j] = lt.G[lt.at(a, b)];
    out.dx_at_one[j] = g_xi + g_eta;
  }
  return out;
}

}  // namespace

SKernel solve_s(double c, double r, const RowVec& K, int M, double tol, int max_iter) {
  if (!(r >= 1.0)) throw ConfigError("scaling gain r must be >= 1");
  SSample coarse = sample_lattice(c, r, K, M, 1, tol, max_iter);
  SSample fine = sample_lattice(c, r, K, M, 2, tol, max_iter);

  SKernel out;
  out.s = TriangularKernel(M, Triangle::lower);
  out.at_one.resize(M + 1);
  out.dx_at_one.resize(M + 1);
  auto extrapolate = [](double f, double co) { return (4.0 * f - co) / 3.0; };
  for (int i = 0; i <= M; ++i) {
    for (int j = 0; j <= i; ++j) out.s(i, j) = extrapolate(fine.s(i, j), coarse.s(i, j));
  }
  for (int j = 0; j <= M; ++j) {
    out.at_one[j] = extrapolate(fine.at_one[j], coarse.at_one[j]);
    out.dx_at_one[j] = extrapolate(fine.dx_at_one[j], coarse.dx_at_one[j]);
  }
  out.stats = fine.stats.iterations >= coarse.stats.iterations ? fine.stats : coarse.stats;
  return out;
}

double s_pde_residual(const TriangularKernel& s, double c) {
  const int M = s.resolution();
  const double h2 = s.spacing() * s.spacing();
  double worst = 0.0;
  for (int i = 2; i < M; ++i) {
    for (int j = 1; j + 1 < i; ++j) {
      const double sxx = (s(i + 1, j) - 2.0 * s(i, j) + s(i - 1, j)) / h2;
      const double syy = (s(i, j + 1) - 2.0 * s(i, j) + s(i, j - 1)) / h2;
      worst = std::max(worst, std::abs(sxx - syy - c * s(i, j)));
    }
  }
  return worst;
}

double s_diagonal_residual(const TriangularKernel& s, double c) {
  double worst = 0.0;
  for (int i = 0; i <= s.resolution(); ++i) {
    const double x = static_cast<double>(i) / s.resolution();
    worst = std::max(worst, std::abs(s(i, i) + 0.5 * c * x));
  }
  return worst;
}

double s_boundary_residual(const TriangularKernel& s, const RowVec& K, double r) {
  const int M = s.resolution();
  const double h = s.spacing();
  const auto n = K.size();
  double worst = 0.0;
  for (int i = 2; i <= M; ++i) {
    const double sy = (-3.0 * s(i, 0) + 4.0 * s(i, 1) - s(i, 2)) / (2.0 * h);
    const double target = -psi_eval(static_cast<double>(i) / M, K, r)(n - 1) / r;
    worst = std::max(worst, std::abs(sy - target));
  }
  return worst;
}

// ---------------------------------------------------------------------------

QKernel tabulate_q(double c, int M) {
  QKernel out{c, TriangularKernel(M, Triangle::upper)};
  for (int i = 0; i <= M; ++i) {
    for (int j = i; j <= M; ++j) {
      out.q(i, j) = q_extended(static_cast<double>(i) / M, static_cast<double>(j) / M, c);
    }
  }
  return out;
}

double q_pde_residual(double c, int M, int order) {
  if (order != 2 && order != 4) throw std::invalid_argument("stencil order must be 2 or 4");
  const double h = 1.0 / M;
  auto q = [c](double x, double y) { return q_extended(x, y, c); };
  auto d2 = [&](auto&& f) {
    if (order == 2) return (f(1) - 2.0 * f(0) + f(-1)) / (h * h);
    return (-f(2) + 16.0 * f(1) - 30.0 * f(0) + 16.0 * f(-1) - f(-2)) / (12.0 * h * h);
  };
  double worst = 0.0;
  for (int i = 1; i < M; ++i) {
    for (int j = i + 1; j < M; ++j) {
      const double x = i * h;
      const double y = j * h;
      const double qxx = d2([&](int k) { return q(x + k * h, y); });
      const double qyy = d2([&](int k) { return q(x, y + k * h); });
      worst = std::max(worst, std::abs(qxx - qyy + c * q(x, y)));
    }
  }
  return worst;
}

PKernel solve_p(const QKernel& qk, double tol, int max_iter) {
  const TriangularKernel& q = qk.q;
  const int M = q.resolution();
  const double h = q.spacing();
  const int sz = M + 1;

  // Weighted operator matrices Q_ij = w_ij q_ij; the discrete resolvent satisfies
  // P = -Q + P Q.
  Mat Qm = Mat::Zero(sz, sz);
  for (int i = 0; i < M; ++i)
    for (int j = i; j <= M; ++j) Qm(i, j) = q.weight(i, j) * q(i, j);

  Mat P = -Qm;
  IterationStats stats;
  double prev = 0.0;
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Mat next = -Qm;
    next.noalias() += P.triangularView<Eigen::Upper>() * Qm;
    const double change = (next - P).cwiseAbs().maxCoeff() / h;
    P = std::move(next);
    stats.iterations = it;
    stats.last_ratio = prev > 0.0 ? change / prev : 0.0;
    stats.last_change = change;
    prev = change;
    if (change <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw KernelError("p kernel Picard iteration did not converge in " + std::to_string(max_iter) +
                          " iterations",
                      stats.last_ratio);
  }

  PKernel out;
  out.stats = stats;
  out.p = TriangularKernel(M, Triangle::upper);
  const double q11 = q(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = i; j <= M; ++j) out.p(i, j) = P(i, j) / q.weight(i, j);
  out.p(M, M) = -q11;
  out.p11 = -q11;

  // Endpoint-corrected traces: the trapezoid weight of the node (i, M) in the
  // composition P Q vanishes, which biases the discrete last column by O(h).
  const double c = qk.c;
  out.at_one.assign(static_cast<std::size_t>(sz), 0.0);
  out.dy_at_one.assign(static_cast<std::size_t>(sz), 0.0);
  for (int i = 0; i < M; ++i) out.at_one[i] = out.p(i, M) / (1.0 - 0.5 * h * q11);
  out.at_one[M] = -q11;

  std::vector<double> qy1(static_cast<std::size_t>(sz));
  for (int z = 0; z <= M; ++z) qy1[z] = q_closed_form_dy(static_cast<double>(z) / M, 1.0, c);
  for (int i = 0; i <= M; ++i) {
    double integral = 0.0;
    if (i < M) {
      const double p_diag = -q(i, i);
      integral = 0.5 * (p_diag * qy1[i] + out.at_one[i] * qy1[M]);
      for (int z = i + 1; z < M; ++z) integral += out.p(i, z) * qy1[z];
      integral *= h;
    }
    out.dy_at_one[i] = -qy1[i] + out.at_one[i] * q11 + integral;
  }
  return out;
}

double resolvent_roundtrip_error(const QKernel& q, const PKernel& p) {
  const int M = q.q.resolution();
  double worst = 0.0;
  for (int k = 0; k <= 4; ++k) {
    GridFunction f(static_cast<std::size_t>(M + 1));
    for (int j = 0; j <= M; ++j) f[j] = std::cos(k * std::numbers::pi * j / M);
    const GridFunction qf = q.q.apply(f);
    GridFunction g(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) g[j] = f[j] - qf[j];
    const GridFunction pg = p.p.apply(g);
    for (std::size_t j = 0; j < f.size(); ++j) worst = std::max(worst, std::abs(g[j] - pg[j] - f[j]));
  }
  return worst;
}

// ---------------------------------------------------------------------------

GainKernel solve_k(const PKernel& p, double q2, double tol, int max_iter) {
  const int M = p.p.resolution();
  GainKernel out;
  out.forcing.resize(static_cast<std::size_t>(M + 1));
  for (int i = 0; i <= M; ++i) out.forcing[i] = q2 * p.at_one[i] + p.dy_at_one[i];
  out.k = out.forcing;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const GridFunction pk = p.p.apply(out.k);
    double change = 0.0;
    for (int i = 0; i <= M; ++i) {
      const double next = out.forcing[i] + pk[i];
      change = std::max(change, std::abs(next - out.k[i]));
      out.k[i] = next;
    }
    out.stats.iterations = it;
    out.stats.last_ratio = prev > 0.0 ? change / prev : 0.0;
    out.stats.last_change = change;
    prev = change;
    if (change <= tol) {
      out.residual = vanishing_residual(out.k, p, q2);
      return out;
    }
  }
  throw KernelError("gain kernel Picard iteration did not converge in " + std::to_string(max_iter) +
                        " iterations",
                    out.stats.last_ratio);
}

double vanishing_residual(std::span<const double> k, const PKernel& p, double q2) {
  const GridFunction pk = p.p.apply(k);
  double worst = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    worst = std::max(worst, std::abs(-k[i] + q2 * p.at_one[i] + p.dy_at_one[i] + pk[i]));
  }
  return worst;
}

GridFunction tilde_k_transformed(std::span<const double> k, const TriangularKernel& s) {
  GridFunction sk = s.apply(k);
  for (std::size_t i = 0; i < sk.size(); ++i) sk[i] = k[i] - sk[i];
  return sk;
}

// ---------------------------------------------------------------------------

KernelTable build_kernel_table(double c, const RowVec& K, double r, double q2, int M,
                               KernelOptions options) {
  KernelTable t;
  t.M = M;
  t.c = c;
  t.r = r;
  t.q2 = q2;
  t.q = tabulate_q(c, M);
  t.p = solve_p(t.q, options.tol, options.max_iter);
  t.s = solve_s(c, r, K, M, options.tol, options.max_iter);
  t.psi = tabulate_psi(K, r, M);
  GainKernel gk = solve_k(t.p, q2, options.tol, options.max_iter);
  t.k = std::move(gk.k);

  t.residuals.q_pde = q_pde_residual(c, M, 4);
  t.residuals.s_pde = s_pde_residual(t.s.s, c);
  t.residuals.s_diagonal = s_diagonal_residual(t.s.s, c);
  t.residuals.s_boundary = s_boundary_residual(t.s.s, K, r);
  t.residuals.psi_ode = psi_ode_residual(K, r, M);
  t.residuals.roundtrip = resolvent_roundtrip_error(t.q, t.p);
  t.residuals.k_vanishing = gk.residual;
  return t;
}

KernelTable restrict_to(const KernelTable& table, int N) {
  if (N == table.M) return table;
  if (N <= 0 || table.M % N != 0) {
    throw ConfigError("kernel resolution M = " + std::to_string(table.M) +
                      " is not a multiple of grid N = " + std::to_string(N));
  }
  const int m = table.M / N;
  KernelTable t;
  t.M = N;
  t.c = table.c;
  t.r = table.r;
  t.q2 = table.q2;
  t.residuals = table.residuals;
  t.q = tabulate_q(table.c, N);

  // Use continuum-consistent nodal values of p on the coarse grid.
  t.p.p = TriangularKernel(N, Triangle::upper);
  t.p.at_one.resize(static_cast<std::size_t>(N + 1));
  t.p.dy_at_one.resize(static_cast<std::size_t>(N + 1));
  for (int i = 0; i <= N; ++i) {
    for (int j = i; j <= N; ++j) t.p.p(i, j) = table.p.p(m * i, m * j);
    t.p.p(i, i) = -t.q.q(i, i);
    t.p.p(i, N) = table.p.at_one[static_cast<std::size_t>(m * i)];
    t.p.at_one[i] = table.p.at_one[static_cast<std::size_t>(m * i)];
    t.p.dy_at_one[i] = table.p.dy_at_one[static_cast<std::size_t>(m * i)];
  }
  t.p.p11 = table.p.p11;
  t.p.stats = table.p.stats;

  t.s.s = TriangularKernel(N, Triangle::lower);
  t.s.at_one.resize(static_cast<std::size_t>(N + 1));
  t.s.dx_at_one.resize(static_cast<std::size_t>(N + 1));
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j <= i; ++j) t.s.s(i, j) = table.s.s(m * i, m * j);
    t.s.at_one[i] = table.s.at_one[static_cast<std::size_t>(m * i)];
    t.s.dx_at_one[i] = table.s.dx_at_one[static_cast<std::size_t>(m * i)];
  }
  t.s.stats = table.s.stats;

  t.psi.values.resize(N + 1, table.psi.values.cols());
  for (int i = 0; i <= N; ++i) t.psi.values.row(i) = table.psi.values.row(m * i);
  t.psi.at_one = table.psi.at_one;
  t.psi.slope_at_one = table.psi.slope_at_one;

  t.k.resize(static_cast<std::size_t>(N + 1));
  for (int i = 0; i <= N; ++i) t.k[i] = table.k[static_cast<std::size_t>(m * i)];
  return t;
}

}  // namespace heatstep::kernels

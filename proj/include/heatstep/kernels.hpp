#pragma once

#include "heatstep/core.hpp"

namespace heatstep::kernels {

/// Phi(w) = sum_m w^m / (2^{2m+1} m! (m+1)!); equals I1(sqrt w)/sqrt w for w > 0.
[[nodiscard]] double phi_series(double w);
[[nodiscard]] double phi_series_derivative(double w);

/// q(x,y) = -c y Phi(c (y^2 - x^2)) on 0 <= x <= y <= 1.
[[nodiscard]] double q_closed_form(double x, double y, double c);
/// Same series without the domain check (analytic continuation).
[[nodiscard]] double q_extended(double x, double y, double c);
[[nodiscard]] double q_closed_form_dy(double x, double y, double c);

enum class Triangle {
  lower,  ///< nodes with y <= x, integrals over [0, x]
  upper,  ///< nodes with x <= y, integrals over [x, 1]
};

/// Kernel sampled on a triangular part of the (M+1)^2 tensor grid; (i, j) <-> (x_i, y_j).
class TriangularKernel {
 public:
  TriangularKernel(int M, Triangle tri);

  [[nodiscard]] int resolution() const noexcept { return m_; }
  [[nodiscard]] double spacing() const noexcept { return 1.0 / m_; }
  [[nodiscard]] Triangle triangle() const noexcept { return tri_; }
  [[nodiscard]] bool contains(int i, int j) const noexcept {
    return tri_ == Triangle::lower ? j <= i : i <= j;
  }

  double& operator()(int i, int j) noexcept { return v_[index(i, j)]; }
  double operator()(int i, int j) const noexcept { return v_[index(i, j)]; }

  /// Trapezoid weight of node (i, j) in the row-i integral.
  [[nodiscard]] double weight(int i, int j) const noexcept;

  /// Trapezoid application of the Volterra operator to nodal values f.
  [[nodiscard]] GridFunction apply(std::span<const double> f) const;

  /// max_i sum_j w_ij |K_ij|
  [[nodiscard]] double row_sum_bound() const;
  /// Bound on the operator norm in the trapezoid-weighted L2 inner product (Schur test).
  [[nodiscard]] double l2_operator_bound() const;

 private:
  [[nodiscard]] std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(m_ + 1) +
           static_cast<std::size_t>(j);
  }
  int m_;
  Triangle tri_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------

/// psi(x) = K sum_k x^{2k}/(2k)! (A/r)^k, a polynomial since A is nilpotent.
[[nodiscard]] RowVec psi_eval(double x, const RowVec& K, double r);
[[nodiscard]] RowVec psi_derivative(double x, const RowVec& K, double r);
/// Majorant of |psi(x)| over x in [0,1] valid for every r >= 1.
[[nodiscard]] double psi_bound(const RowVec& K);

struct PsiTable {
  Mat values;  ///< (M+1) x n, row j = psi(x_j)
  RowVec at_one;
  RowVec slope_at_one;

  /// max_j |psi(x_j)|
  [[nodiscard]] double sup_norm() const;
};

[[nodiscard]] PsiTable tabulate_psi(const RowVec& K, double r, int M);

/// Finite-difference residual of psi'' - psi A / r over interior grid nodes.
[[nodiscard]] double psi_ode_residual(const RowVec& K, double r, int M);

// ---------------------------------------------------------------------------

struct IterationStats {
  int iterations = 0;
  double last_ratio = 0.0;
  double last_change = 0.0;
};

struct SKernel {
  TriangularKernel s{8, Triangle::lower};
  GridFunction at_one;       ///< s(1, y_j)
  GridFunction dx_at_one;    ///< s_x(1, y_j)
  IterationStats stats{};
};

/// Solves s_xx - s_yy = c s on 0 <= y <= x <= 1 with s(x,x) = -c x / 2 and
/// s_y(x,0) = -psi_n(x)/r. Picard iteration on the characteristic integral form,
/// Richardson-combined from lattices of spacing h and h/2.
[[nodiscard]] SKernel solve_s(double c, double r, const RowVec& K, int M, double tol = 1e-10,
                              int max_iter = 200);

/// Second-order central residual of s_xx - s_yy - c s over interior nodes.
[[nodiscard]] double s_pde_residual(const TriangularKernel& s, double c);
[[nodiscard]] double s_diagonal_residual(const TriangularKernel& s, double c);
/// One-sided three-point residual of s_y(x,0) + psi_n(x)/r.
[[nodiscard]] double s_boundary_residual(const TriangularKernel& s, const RowVec& K, double r);

// ---------------------------------------------------------------------------

struct QKernel {
  double c = 0.0;
  TriangularKernel q{8, Triangle::upper};
};

[[nodiscard]] QKernel tabulate_q(double c, int M);

/// Sup of the central-difference residual of q_xx - q_yy + c q over interior nodes
/// with x < y. `order` is 2 or 4; stencil points outside the triangle use the
/// analytic continuation of the series.
[[nodiscard]] double q_pde_residual(double c, int M, int order);

struct PKernel {
  TriangularKernel p{8, Triangle::upper};  ///< nodal values of the discrete resolvent
  GridFunction at_one;                     ///< p(x_i, 1), endpoint-corrected
  GridFunction dy_at_one;                  ///< p_y(x_i, 1)
  double p11 = 0.0;
  IterationStats stats{};
};

/// Resolvent of q: (I - P)(I - Q) = I for the trapezoid operators on the grid.
[[nodiscard]] PKernel solve_p(const QKernel& q, double tol = 1e-10, int max_iter = 200);

/// sup_f |(I - P)(I - Q) f - f| over f = cos(k pi x), k = 0..4.
[[nodiscard]] double resolvent_roundtrip_error(const QKernel& q, const PKernel& p);

// ---------------------------------------------------------------------------

struct GainKernel {
  GridFunction k;
  GridFunction forcing;  ///< q2 p(x,1) + p_y(x,1)
  IterationStats stats{};
  double residual = 0.0;
};

/// Picard iteration on k = q2 p(x,1) + p_y(x,1) + int_x^1 p(x,y) k(y) dy.
[[nodiscard]] GainKernel solve_k(const PKernel& p, double q2, double tol = 1e-10,
                                 int max_iter = 200);

/// sup_x |-k + q2 p(x,1) + p_y(x,1) + int_x^1 p k|, zero when k annihilates the
/// boundary injection in the error target system.
[[nodiscard]] double vanishing_residual(std::span<const double> k, const PKernel& p, double q2);

/// k(x) - int_0^x s(x,y) k(y) dy
[[nodiscard]] GridFunction tilde_k_transformed(std::span<const double> k,
                                               const TriangularKernel& s);

// ---------------------------------------------------------------------------

struct Residuals {
  double q_pde = 0.0;
  double s_pde = 0.0;
  double s_diagonal = 0.0;
  double s_boundary = 0.0;
  double psi_ode = 0.0;
  double roundtrip = 0.0;
  double k_vanishing = 0.0;
};

struct KernelTable {
  int M = 0;
  double c = 0.0;
  double r = 1.0;
  double q2 = 0.0;
  QKernel q;
  PKernel p;
  SKernel s;
  PsiTable psi;
  GridFunction k;
  Residuals residuals{};
};

struct KernelOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

[[nodiscard]] KernelTable build_kernel_table(double c, const RowVec& K, double r, double q2,
                                             int M, KernelOptions options = {});

/// Restricts a table computed at resolution M to a grid with N intervals (M = m N).
[[nodiscard]] KernelTable restrict_to(const KernelTable& table, int N);

}  // namespace heatstep::kernels

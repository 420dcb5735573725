#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatstep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

/// Nodal values of a function on a Grid1D, index j <-> x_j = j/N.
using GridFunction = std::vector<double>;

/// Process exit codes shared by the library errors and the CLI.
enum class ExitCode : int {
  ok = 0,
  config = 1,
  synthesis = 2,
  divergence = 3,
  verification = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  [[nodiscard]] ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

class SynthesisError : public Error {
 public:
  explicit SynthesisError(const std::string& what)
      : Error(ExitCode::synthesis, what) {}
};

/// Kernel solver failures are reported through the synthesis exit code.
class KernelError : public Error {
 public:
  KernelError(const std::string& what, double last_ratio)
      : Error(ExitCode::synthesis, what), last_ratio_(last_ratio) {}
  [[nodiscard]] double last_contraction_ratio() const noexcept { return last_ratio_; }

 private:
  double last_ratio_;
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what)
      : Error(ExitCode::verification, what) {}
};

/// Uniform grid on [0,1] with N intervals.
class Grid1D {
 public:
  explicit Grid1D(int intervals);

  [[nodiscard]] int intervals() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(n_) + 1; }
  [[nodiscard]] double spacing() const noexcept { return h_; }
  [[nodiscard]] double node(int j) const noexcept { return static_cast<double>(j) / n_; }
  [[nodiscard]] GridFunction nodes() const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  int n_;
  double h_;
};

/// Trapezoid rule on a uniform grid with spacing h.
[[nodiscard]] double trapezoid(std::span<const double> values, double h);
/// Trapezoid L2 norm.
[[nodiscard]] double l2_norm(std::span<const double> values, double h);
[[nodiscard]] double sup_norm(std::span<const double> values);

/// Chain-of-integrators matrices: A is the up-shift, B = e_n, C = e_1^T.
[[nodiscard]] Mat shift_matrix(int n);
[[nodiscard]] Vec input_vector(int n);
[[nodiscard]] RowVec output_row(int n);

}  // namespace heatstep

#include "heatstep/control.hpp"

#include "heatstep/transforms.hpp"

namespace heatstep::control {

Controller::Controller(const gains::GainSet& gains, const kernels::KernelTable& kernels,
                       const Grid1D& grid)
    : grid_(grid), n_(gains.n), c_(gains.c), q2_(gains.q2), eta_(gains.eta) {
  if (kernels.M != grid.intervals()) {
    throw ConfigError("kernel table resolution " + std::to_string(kernels.M) +
                      " does not match simulation grid " + std::to_string(grid.intervals()));
  }
  const transforms::ScalingMatrices S(n_, gains.r);
  injection_ = S.observer_scaling().cwiseProduct(gains.L);
  state_row_ = (kernels.psi.slope_at_one + eta_ * kernels.psi.at_one).cwiseProduct(S.delta().transpose());

  const int N = grid.intervals();
  const double h = grid.spacing();
  integral_weights_.resize(grid.size());
  for (int j = 0; j <= N; ++j) {
    const double w = (j == 0 || j == N) ? 0.5 * h : h;
    integral_weights_[j] = w * (kernels.s.dx_at_one[j] + eta_ * kernels.s.at_one[j]);
  }
  k_ = kernels.k;
}

double Controller::feedback(std::span<const double> Xhat, std::span<const double> uhat,
                            double u1_measured) const {
  const int N = grid_.intervals();
  double U = (q2_ - eta_ - 0.5 * c_) * uhat[N] - q2_ * u1_measured;
  for (int j = 0; j <= N; ++j) U += integral_weights_[j] * uhat[j];
  for (int i = 0; i < n_; ++i) U += state_row_(i) * Xhat[i];
  return U;
}

void Controller::observer_rhs(std::span<const double> Xhat, std::span<const double> uhat,
                              Measurement y, double U, std::span<double> dXhat,
                              std::span<double> duhat) const {
  const int N = grid_.intervals();
  const double h = grid_.spacing();
  const double ih2 = 1.0 / (h * h);

  const double out_err = y.X1 - Xhat[0];
  for (int i = 0; i < n_; ++i) {
    const double shift = i + 1 < n_ ? Xhat[i + 1] : uhat[0];
    dXhat[i] = shift - injection_(i) * out_err;
  }

  const double boundary_err = y.u1 - uhat[N];
  duhat[0] = 2.0 * (uhat[1] - uhat[0]) * ih2 + c_ * uhat[0] + k_[0] * boundary_err;
  for (int j = 1; j < N; ++j) {
    duhat[j] = (uhat[j - 1] - 2.0 * uhat[j] + uhat[j + 1]) * ih2 + c_ * uhat[j] + k_[j] * boundary_err;
  }
  const double flux = U + q2_ * boundary_err;
  duhat[N] = (2.0 * (uhat[N - 1] - uhat[N]) + 2.0 * h * flux) * ih2 + c_ * uhat[N] +
             k_[N] * boundary_err;
}

namespace {

Grid1D grid_of(const kernels::KernelTable& kernels) { return Grid1D(kernels.M); }

}  // namespace

double feedback_U(const ObserverState& observer, double u1_measured, const gains::GainSet& gains,
                  const kernels::KernelTable& kernels) {
  const Controller ctl(gains, kernels, grid_of(kernels));
  return ctl.feedback({observer.Xhat.data(), static_cast<std::size_t>(observer.Xhat.size())},
                      observer.uhat, u1_measured);
}

ObserverDerivative observer_rhs(const ObserverState& observer, Measurement y, double U,
                                const gains::GainSet& gains, const kernels::KernelTable& kernels,
                                const Grid1D& grid) {
  const Controller ctl(gains, kernels, grid);
  ObserverDerivative d{Vec::Zero(gains.n), GridFunction(grid.size(), 0.0)};
  ctl.observer_rhs({observer.Xhat.data(), static_cast<std::size_t>(observer.Xhat.size())},
                   observer.uhat, y, U, {d.dXhat.data(), static_cast<std::size_t>(d.dXhat.size())},
                   d.duhat);
  return d;
}

}  // namespace heatstep::control

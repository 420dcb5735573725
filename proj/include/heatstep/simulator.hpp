#pragma once

#include "heatstep/control.hpp"
#include "heatstep/core.hpp"
#include "heatstep/gains.hpp"
#include "heatstep/kernels.hpp"
#include "heatstep/plant.hpp"

#include <array>
#include <functional>
#include <string_view>

namespace heatstep::sim {

enum class Mode {
  closed_loop,
  open_loop,     ///< U = 0; the observer still runs
  perfect_init,  ///< observer starts at the plant state
};

struct SimConfig {
  int N = 100;
  double T = 10.0;
  double cfl = 0.5;
  int record_stride = 100;
  Vec X0;
  GridFunction u0;
  Vec Xhat0;
  GridFunction uhat0;
  Mode mode = Mode::closed_loop;
};

/// Throws ConfigError unless the configuration is consistent with the plant.
void validate(const SimConfig& config, const plant::PlantConfig& plant);

[[nodiscard]] double time_step(const SimConfig& config);

struct CascadeState {
  Vec X;
  GridFunction u;
};

struct CascadeDerivative {
  Vec dX;
  GridFunction du;
};

[[nodiscard]] CascadeDerivative plant_rhs(const CascadeState& state, double U,
                                          const plant::DisturbanceSample& d,
                                          const plant::PlantConfig& plant, const Grid1D& grid);

/// Right-hand side of a first-order system on a flat state vector.
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// Classical four-stage Runge-Kutta with reusable stage buffers.
class Rk4 {
 public:
  explicit Rk4(std::size_t dim);
  /// Advances y in place from t to t + dt; throws DivergenceError on NaN/Inf.
  void step(std::span<double> y, double t, double dt, const Rhs& rhs);

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

[[nodiscard]] std::vector<double> rk4_step(std::span<const double> y, double t, double dt,
                                           const Rhs& rhs);

struct LyapunovValues {
  double V1 = 0.0;
  double V2 = 0.0;
  double V = 0.0;
};

/// V1 = Z'P1 Z + (a/2)|w|^2, V2 = E'P2 E + (b/2)|wt|^2 with Z = Delta Xhat,
/// E = Delta (X - Xhat), w the observer target state and wt = (I - P)(u - uhat).
[[nodiscard]] LyapunovValues lyapunov_eval(const CascadeState& plant_state,
                                           const control::ObserverState& observer,
                                           const gains::GainSet& gains,
                                           const kernels::KernelTable& kernels);

struct RecordRow {
  double t = 0.0;
  double normX = 0.0;
  double normU = 0.0;
  double normXhat = 0.0;
  double normUhat = 0.0;
  double normXerr = 0.0;
  double normUerr = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
  double V = 0.0;
  double ctrl = 0.0;
  double D = 0.0;
  double u1 = 0.0;
  double uhat1 = 0.0;
};

inline constexpr std::array<std::string_view, 14> kRecordColumns = {
    "t", "normX", "normU", "normXhat", "normUhat", "normXerr", "normUerr",
    "V1", "V2", "V", "ctrl", "D", "u1", "uhat1"};

[[nodiscard]] std::array<double, 14> as_array(const RecordRow& row);

struct SimRecord {
  std::vector<RecordRow> rows;
  double dt = 0.0;
  long steps = 0;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time, SimRecord partial)
      : Error(ExitCode::divergence, what), time_(time), partial_(std::move(partial)) {}
  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] const SimRecord& partial() const noexcept { return partial_; }

 private:
  double time_;
  SimRecord partial_;
};

inline constexpr double kDivergenceThreshold = 1e12;

/// Time-marches plant and observer. `kernels` may be at resolution N or a multiple of it.
[[nodiscard]] SimRecord run(const SimConfig& config, const plant::PlantConfig& plant,
                            const gains::GainSet& gains, const kernels::KernelTable& kernels,
                            const plant::DisturbanceSpec& disturbances);

}  // namespace heatstep::sim

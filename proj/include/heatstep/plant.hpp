#pragma once

#include "heatstep/core.hpp"

#include <variant>

namespace heatstep::plant {

// ---------------------------------------------------------------------------
// Nonlinearities. Every family satisfies |f_i(X)| <= theta * sum_{j>=i+2} |X_j|
// with the last two components identically zero.

struct ZeroNonlinearity {};

/// f_i = theta * sin(X_{i+2}) for the first n-2 components.
struct SineChain {
  double theta = 0.0;
};

/// f_i = theta * sum_{j >= i+2} weights_j * X_j with |weights_j| <= 1.
struct LinearChain {
  double theta = 0.0;
  std::vector<double> weights;
};

using NonlinearitySpec = std::variant<ZeroNonlinearity, SineChain, LinearChain>;

[[nodiscard]] double nonlinearity_theta(const NonlinearitySpec& spec);

struct PlantConfig {
  int n = 3;
  double c = 0.0;
  Vec B1;
  double theta = 0.0;
  NonlinearitySpec nonlinearity = ZeroNonlinearity{};
};

/// Throws ConfigError if any PlantConfig invariant fails.
void validate(const PlantConfig& config);

[[nodiscard]] Vec eval_nonlinearity(const NonlinearitySpec& spec, const Vec& X);

// ---------------------------------------------------------------------------
// Disturbance signals.

struct ZeroSignal {};
struct ConstantSignal {
  double amplitude = 0.0;
};
/// A sin(omega t + phase).
struct SineSignal {
  double amplitude = 0.0;
  double omega = 1.0;
  double phase = 0.0;
};
/// A for t >= t0, zero before.
struct StepSignal {
  double amplitude = 0.0;
  double t0 = 0.0;
};
/// A exp(-rate t).
struct DecayingExpSignal {
  double amplitude = 0.0;
  double rate = 0.0;
};

using ScalarSignal =
    std::variant<ZeroSignal, ConstantSignal, SineSignal, StepSignal, DecayingExpSignal>;

[[nodiscard]] double eval_signal(const ScalarSignal& s, double t);
/// Closed-form bound on sup_{[0,T]} |s|; exact except for Sine, where |A| is returned.
[[nodiscard]] double sup_abs(const ScalarSignal& s, double horizon);
[[nodiscard]] ScalarSignal scaled(const ScalarSignal& s, double factor);

struct UniformProfile {
  double amplitude = 0.0;
};
/// A cos(mode * pi * x).
struct CosineProfile {
  double amplitude = 0.0;
  int mode = 0;
};
/// A sin(mode * pi * x).
struct SineProfile {
  double amplitude = 0.0;
  int mode = 1;
};

using SpatialProfile = std::variant<UniformProfile, CosineProfile, SineProfile>;

[[nodiscard]] double eval_profile(const SpatialProfile& g, double x);
[[nodiscard]] GridFunction sample_profile(const SpatialProfile& g, const Grid1D& grid);

/// d2(x,t) = profile(x) * signal(t).
struct SeparableField {
  SpatialProfile profile = UniformProfile{0.0};
  ScalarSignal signal = ZeroSignal{};
};

struct DisturbanceSpec {
  ScalarSignal d1 = ZeroSignal{};
  SeparableField d2{};
  ScalarSignal d3 = ZeroSignal{};
  ScalarSignal d4 = ZeroSignal{};
};

[[nodiscard]] DisturbanceSpec scaled(const DisturbanceSpec& spec, double factor);

struct DisturbanceSample {
  double d1 = 0.0;
  GridFunction d2;
  double d3 = 0.0;
  double d4 = 0.0;
};

[[nodiscard]] DisturbanceSample eval_disturbance(const DisturbanceSpec& spec, double t,
                                                 const Grid1D& grid);

/// Same as eval_disturbance but writes d2 into a caller-owned buffer.
void eval_disturbance_into(const DisturbanceSpec& spec, double t, std::span<const double> d2_shape,
                           DisturbanceSample& out);

/// D = d1^2 + b^2 d3^2 / 2 + d4^2 / 2 + b^2 |d2_tilde|^2 / 2 for a given transformed d2.
[[nodiscard]] double disturbance_energy(const DisturbanceSample& d, double b,
                                        std::span<const double> d2_tilde, double h);

/// Bounds used to majorize |d2_tilde| <= (1 + op_norm)|d2| + trace_norm |d4|.
struct TransformBound {
  double op_norm = 0.0;
  double trace_norm = 0.0;
};

/// Upper bound on sup_{[0,T]} D(t).
[[nodiscard]] double sup_disturbance(const DisturbanceSpec& spec, double horizon,
                                     const Grid1D& grid, double b, TransformBound bound = {});

}  // namespace heatstep::plant

#include "heatstep/plant.hpp"

#include <cmath>
#include <numbers>

namespace heatstep::plant {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

double nonlinearity_theta(const NonlinearitySpec& spec) {
  return std::visit(overloaded{
                        [](const ZeroNonlinearity&) { return 0.0; },
                        [](const SineChain& s) { return s.theta; },
                        [](const LinearChain& s) { return s.theta; },
                    },
                    spec);
}

void validate(const PlantConfig& config) {
  if (config.n < 2) throw ConfigError("plant.n must be >= 2");
  if (!std::isfinite(config.c)) throw ConfigError("plant.c must be finite");
  if (!(config.theta >= 0.0) || !std::isfinite(config.theta)) {
    throw ConfigError("plant.theta must be finite and >= 0");
  }
  if (config.B1.size() != config.n) {
    throw ConfigError("plant.B1 must have exactly n = " + std::to_string(config.n) + " entries");
  }
  if (!config.B1.allFinite()) throw ConfigError("plant.B1 entries must be finite");
  const double theta_f = nonlinearity_theta(config.nonlinearity);
  if (!(theta_f >= 0.0) || theta_f > config.theta) {
    throw ConfigError("nonlinearity theta must lie in [0, plant.theta]");
  }
  if (const auto* lin = std::get_if<LinearChain>(&config.nonlinearity)) {
    if (static_cast<int>(lin->weights.size()) != config.n) {
      throw ConfigError("linear_chain weights must have n entries");
    }
    for (double w : lin->weights) {
      if (!(std::abs(w) <= 1.0)) throw ConfigError("linear_chain weights must satisfy |w| <= 1");
    }
  }
}

Vec eval_nonlinearity(const NonlinearitySpec& spec, const Vec& X) {
  const auto n = X.size();
  Vec f = Vec::Zero(n);
  std::visit(overloaded{
                 [](const ZeroNonlinearity&) {},
                 [&](const SineChain& s) {
                   for (Eigen::Index i = 0; i + 2 < n; ++i) f(i) = s.theta * std::sin(X(i + 2));
                 },
                 [&](const LinearChain& s) {
                   if (static_cast<Eigen::Index>(s.weights.size()) != n) {
                     throw ConfigError("linear_chain weights do not match state dimension");
                   }
                   for (Eigen::Index i = 0; i + 2 < n; ++i) {
                     double acc = 0.0;
                     for (Eigen::Index j = i + 2; j < n; ++j) acc += s.weights[j] * X(j);
                     f(i) = s.theta * acc;
                   }
                 },
             },
             spec);
  return f;
}

double eval_signal(const ScalarSignal& s, double t) {
  return std::visit(overloaded{
                        [](const ZeroSignal&) { return 0.0; },
                        [](const ConstantSignal& c) { return c.amplitude; },
                        [t](const SineSignal& c) {
                          return c.amplitude * std::sin(c.omega * t + c.phase);
                        },
                        [t](const StepSignal& c) { return t >= c.t0 ? c.amplitude : 0.0; },
                        [t](const DecayingExpSignal& c) {
                          return c.amplitude * std::exp(-c.rate * t);
                        },
                    },
                    s);
}

double sup_abs(const ScalarSignal& s, double horizon) {
  return std::visit(overloaded{
                        [](const ZeroSignal&) { return 0.0; },
                        [](const ConstantSignal& c) { return std::abs(c.amplitude); },
                        [](const SineSignal& c) { return std::abs(c.amplitude); },
                        [horizon](const StepSignal& c) {
                          return horizon >= c.t0 ? std::abs(c.amplitude) : 0.0;
                        },
                        [horizon](const DecayingExpSignal& c) {
                          const double worst = c.rate >= 0.0 ? 0.0 : horizon;
                          return std::abs(c.amplitude) * std::exp(-c.rate * worst);
                        },
                    },
                    s);
}

ScalarSignal scaled(const ScalarSignal& s, double factor) {
  return std::visit(overloaded{
                        [](const ZeroSignal& z) -> ScalarSignal { return z; },
                        [factor](ConstantSignal c) -> ScalarSignal {
                          c.amplitude *= factor;
                          return c;
                        },
                        [factor](SineSignal c) -> ScalarSignal {
                          c.amplitude *= factor;
                          return c;
                        },
                        [factor](StepSignal c) -> ScalarSignal {
                          c.amplitude *= factor;
                          return c;
                        },
                        [factor](DecayingExpSignal c) -> ScalarSignal {
                          c.amplitude *= factor;
                          return c;
                        },
                    },
                    s);
}

double eval_profile(const SpatialProfile& g, double x) {
  using std::numbers::pi;
  return std::visit(overloaded{
                        [](const UniformProfile& p) { return p.amplitude; },
                        [x](const CosineProfile& p) { return p.amplitude * std::cos(p.mode * pi * x); },
                        [x](const SineProfile& p) { return p.amplitude * std::sin(p.mode * pi * x); },
                    },
                    g);
}

GridFunction sample_profile(const SpatialProfile& g, const Grid1D& grid) {
  GridFunction v(grid.size());
  for (int j = 0; j <= grid.intervals(); ++j) v[j] = eval_profile(g, grid.node(j));
  return v;
}

DisturbanceSpec scaled(const DisturbanceSpec& spec, double factor) {
  DisturbanceSpec out = spec;
  out.d1 = scaled(spec.d1, factor);
  out.d2.signal = scaled(spec.d2.signal, factor);
  out.d3 = scaled(spec.d3, factor);
  out.d4 = scaled(spec.d4, factor);
  return out;
}

void eval_disturbance_into(const DisturbanceSpec& spec, double t, std::span<const double> d2_shape,
                           DisturbanceSample& out) {
  out.d1 = eval_signal(spec.d1, t);
  out.d3 = eval_signal(spec.d3, t);
  out.d4 = eval_signal(spec.d4, t);
  const double amp = eval_signal(spec.d2.signal, t);
  out.d2.resize(d2_shape.size());
  for (std::size_t j = 0; j < d2_shape.size(); ++j) out.d2[j] = d2_shape[j] * amp;
}

DisturbanceSample eval_disturbance(const DisturbanceSpec& spec, double t, const Grid1D& grid) {
  DisturbanceSample out;
  const GridFunction shape = sample_profile(spec.d2.profile, grid);
  eval_disturbance_into(spec, t, shape, out);
  return out;
}

double disturbance_energy(const DisturbanceSample& d, double b, std::span<const double> d2_tilde,
                          double h) {
  const double n2 = l2_norm(d2_tilde, h);
  return d.d1 * d.d1 + 0.5 * b * b * d.d3 * d.d3 + 0.5 * d.d4 * d.d4 + 0.5 * b * b * n2 * n2;
}

double sup_disturbance(const DisturbanceSpec& spec, double horizon, const Grid1D& grid, double b,
                       TransformBound bound) {
  const double s1 = sup_abs(spec.d1, horizon);
  const double s3 = sup_abs(spec.d3, horizon);
  const double s4 = sup_abs(spec.d4, horizon);
  const GridFunction shape = sample_profile(spec.d2.profile, grid);
  const double g_norm = l2_norm(shape, grid.spacing());
  const double s2 = (1.0 + bound.op_norm) * g_norm * sup_abs(spec.d2.signal, horizon) +
                    bound.trace_norm * s4;
  return s1 * s1 + 0.5 * b * b * s3 * s3 + 0.5 * s4 * s4 + 0.5 * b * b * s2 * s2;
}

}  // namespace heatstep::plant

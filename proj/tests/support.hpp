#pragma once

#include "heatstep/app/commands.hpp"

#include <catch_amalgamated.hpp>

#include <random>

namespace heatstep::testing {

/// n = 3, c = 8, theta = 0.5, |B1| = 1, sine-chain nonlinearity.
inline plant::PlantConfig reference_plant() {
  plant::PlantConfig p;
  p.n = 3;
  p.c = 8.0;
  p.theta = 0.5;
  p.B1 = Vec::Constant(3, 1.0 / std::sqrt(3.0));
  p.nonlinearity = plant::SineChain{0.5};
  return p;
}

inline app::RunConfig reference_config(int N = 100) {
  app::RunConfig cfg;
  cfg.plant = reference_plant();
  cfg.design = gains::DesignParams::defaults(3);
  cfg.M = N;
  cfg.sim.N = N;
  cfg.sim.T = 10.0;
  cfg.sim.record_stride = 200;
  cfg.sim.X0 = Vec::Ones(3);
  cfg.sim.u0.assign(static_cast<std::size_t>(N + 1), 1.0);
  cfg.sim.Xhat0 = Vec::Zero(3);
  cfg.sim.uhat0.assign(static_cast<std::size_t>(N + 1), 0.0);
  return cfg;
}

/// Gains and kernels of the reference configuration, computed once per process.
inline const app::Pipeline& reference_pipeline() {
  static const app::Pipeline p = app::build_pipeline(reference_config());
  return p;
}

/// Smooth random test function: a few random cosine and sine modes.
inline GridFunction random_smooth(std::mt19937& rng, int M) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  const double a0 = amp(rng), a1 = amp(rng), a2 = amp(rng), b1 = amp(rng), b2 = amp(rng);
  GridFunction f(static_cast<std::size_t>(M + 1));
  for (int j = 0; j <= M; ++j) {
    const double x = static_cast<double>(j) / M;
    f[j] = a0 + a1 * std::cos(M_PI * x) + a2 * std::cos(2 * M_PI * x) + b1 * std::sin(M_PI * x) +
           b2 * std::sin(3 * M_PI * x) * x;
  }
  return f;
}

}  // namespace heatstep::testing

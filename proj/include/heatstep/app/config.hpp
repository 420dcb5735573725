#pragma once

#include "heatstep/gains.hpp"
#include "heatstep/kernels.hpp"
#include "heatstep/plant.hpp"
#include "heatstep/simulator.hpp"

#include <filesystem>
#include <string>

namespace heatstep::app {

inline constexpr int kConfigVersion = 1;

struct VerifyOptions {
  int spectral_N = 200;
  int kernel_M = 200;
  double skip_fraction = 0.1;
  double audit_slack = 1e-3;
  double audit_fraction = 0.95;
  double decay_ratio = 1e-3;
};

struct RunConfig {
  plant::PlantConfig plant;
  gains::DesignParams design;
  int M = 0;
  kernels::KernelOptions kernel_options{};
  sim::SimConfig sim;
  plant::DisturbanceSpec disturbances;
  VerifyOptions verify{};
};

/// Parses and fully validates a JSON config. Unknown keys are rejected.
/// Throws ConfigError on any problem.
[[nodiscard]] RunConfig parse_config(const std::string& text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

}  // namespace heatstep::app

#pragma once

#include "heatstep/app/config.hpp"
#include "heatstep/verify.hpp"

#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace heatstep::app {

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;  ///< empty selects the command's default file name
  std::vector<double> amplitudes;
  unsigned threads = 1;
};

/// Gains and kernels synthesized from a config.
struct Pipeline {
  gains::GainSet gains;
  kernels::KernelTable kernels;
};

[[nodiscard]] gains::GainSet synthesize_gains(const RunConfig& cfg);
[[nodiscard]] Pipeline build_pipeline(const RunConfig& cfg);

/// `%.12e`
[[nodiscard]] std::string format_number(double v);
[[nodiscard]] std::string gains_to_json(const gains::GainSet& g);
void write_record_csv(const sim::SimRecord& record, std::ostream& out);
void write_kernels_csv(const kernels::KernelTable& table, std::ostream& out);
void write_sweep_csv(const verify::SweepResult& result, std::ostream& out);

/// Each command returns a process exit code and reports problems on `log`.
int cmd_synth(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_kernels(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, const std::vector<double>& amplitudes, unsigned threads,
              const std::filesystem::path& out, std::ostream& log);
int cmd_verify(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Loads the config and runs `command`, mapping every error to its exit code.
int dispatch(std::string_view command, const CommandOptions& options, std::ostream& log);

}  // namespace heatstep::app

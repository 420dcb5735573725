#include "heatstep/app/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

namespace {

unsigned thread_cap() {
  unsigned fallback = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("HEATSTEP_THREADS");
  if (env == nullptr || *env == '\0') return fallback;
  try {
    const long v = std::stol(env);
    return v >= 1 ? static_cast<unsigned>(v) : 1u;
  } catch (const std::exception&) {
    std::cerr << "ignoring invalid HEATSTEP_THREADS='" << env << "'\n";
    return fallback;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Output-feedback stabilization of an ODE chain cascaded with a reaction-diffusion PDE"};
  app.require_subcommand(1);

  heatstep::app::CommandOptions options;
  std::string out_path;

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"synth", "synthesize and certify gains (writes gains.json)"},
      {"kernels", "compute backstepping kernels (writes kernels.csv)"},
      {"simulate", "run the closed-loop co-simulation (writes record.csv)"},
      {"sweep", "disturbance amplitude sweep (writes sweep.csv)"},
      {"verify", "run the numerical verification suite (writes verify.csv)"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", options.config, "JSON run configuration")->required();
    sub->add_option("--out", out_path, "output file");
    if (std::string_view(c.name) == "sweep") {
      sub->add_option("--amplitudes", options.amplitudes, "comma-separated amplitudes")
          ->delimiter(',')
          ->required();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(heatstep::ExitCode::config);
  }

  options.out = out_path;
  options.threads = thread_cap();
  const auto subs = app.get_subcommands();
  return heatstep::app::dispatch(subs.front()->get_name(), options, std::cerr);
}

#include "heatstep/app/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace heatstep::app {

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string type_of(const json& obj, const std::string& where) {
  if (!obj.is_object() || !obj.contains("type") || !obj.at("type").is_string()) {
    throw ConfigError(where + " needs a string 'type'");
  }
  return obj.at("type").get<std::string>();
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

plant::NonlinearitySpec parse_nonlinearity(const json& obj, const std::string& where) {
  const std::string type = type_of(obj, where);
  if (type == "zero") {
    check_keys(obj, {"type"}, where);
    return plant::ZeroNonlinearity{};
  }
  if (type == "sine_chain") {
    check_keys(obj, {"type", "theta"}, where);
    return plant::SineChain{number(obj, "theta", 0.0, where)};
  }
  if (type == "linear_chain") {
    check_keys(obj, {"type", "theta", "weights"}, where);
    if (!obj.contains("weights")) throw ConfigError(where + ".weights is required");
    return plant::LinearChain{number(obj, "theta", 0.0, where),
                              number_list(obj.at("weights"), where + ".weights")};
  }
  throw ConfigError("unknown nonlinearity type '" + type + "'");
}

plant::ScalarSignal parse_signal(const json& obj, const std::string& where) {
  const std::string type = type_of(obj, where);
  if (type == "zero") {
    check_keys(obj, {"type"}, where);
    return plant::ZeroSignal{};
  }
  if (type == "constant") {
    check_keys(obj, {"type", "amplitude"}, where);
    return plant::ConstantSignal{number(obj, "amplitude", 0.0, where)};
  }
  if (type == "sine") {
    check_keys(obj, {"type", "amplitude", "omega", "phase"}, where);
    return plant::SineSignal{number(obj, "amplitude", 0.0, where), number(obj, "omega", 1.0, where),
                             number(obj, "phase", 0.0, where)};
  }
  if (type == "step") {
    check_keys(obj, {"type", "amplitude", "t0"}, where);
    return plant::StepSignal{number(obj, "amplitude", 0.0, where), number(obj, "t0", 0.0, where)};
  }
  if (type == "decaying_exp") {
    check_keys(obj, {"type", "amplitude", "rate"}, where);
    return plant::DecayingExpSignal{number(obj, "amplitude", 0.0, where),
                                    number(obj, "rate", 0.0, where)};
  }
  throw ConfigError("unknown signal type '" + type + "' in " + where);
}

plant::SpatialProfile parse_profile(const json& obj, const std::string& where) {
  const std::string type = type_of(obj, where);
  if (type == "uniform") {
    check_keys(obj, {"type", "amplitude"}, where);
    return plant::UniformProfile{number(obj, "amplitude", 0.0, where)};
  }
  if (type == "cosine") {
    check_keys(obj, {"type", "amplitude", "mode"}, where);
    return plant::CosineProfile{number(obj, "amplitude", 0.0, where), integer(obj, "mode", 0, where)};
  }
  if (type == "sine") {
    check_keys(obj, {"type", "amplitude", "mode"}, where);
    return plant::SineProfile{number(obj, "amplitude", 0.0, where), integer(obj, "mode", 1, where)};
  }
  throw ConfigError("unknown profile type '" + type + "' in " + where);
}

/// Initial PDE data: a profile object or an explicit array of N+1 nodal values.
GridFunction parse_initial(const json& v, const Grid1D& grid, const std::string& where) {
  if (v.is_array()) {
    auto values = number_list(v, where);
    if (values.size() != grid.size()) {
      throw ConfigError(where + " must have N+1 = " + std::to_string(grid.size()) + " values");
    }
    return values;
  }
  return plant::sample_profile(parse_profile(v, where), grid);
}

void require_finite(std::span<const double> v, const std::string& where) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ConfigError(where + " entries must be finite");
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  try {
    check_keys(root, {"heatstep_config", "plant", "design", "kernels", "sim", "disturbances", "verify"},
               "config");
    if (!root.contains("heatstep_config") || !root.at("heatstep_config").is_number_integer() ||
        root.at("heatstep_config").get<int>() != kConfigVersion) {
      throw ConfigError("config must declare \"heatstep_config\": 1");
    }
    if (!root.contains("plant")) throw ConfigError("config.plant is required");

    RunConfig cfg;

    const json& pj = root.at("plant");
    check_keys(pj, {"n", "c", "B1", "theta", "nonlinearity"}, "plant");
    cfg.plant.n = integer(pj, "n", 3, "plant");
    cfg.plant.c = number(pj, "c", 0.0, "plant");
    cfg.plant.theta = number(pj, "theta", 0.0, "plant");
    if (cfg.plant.n < 2) throw ConfigError("plant.n must be >= 2");
    cfg.plant.B1 = pj.contains("B1") ? to_vec(number_list(pj.at("B1"), "plant.B1"))
                                     : Vec::Zero(cfg.plant.n);
    if (pj.contains("nonlinearity")) {
      cfg.plant.nonlinearity = parse_nonlinearity(pj.at("nonlinearity"), "plant.nonlinearity");
    }
    plant::validate(cfg.plant);
    const int n = cfg.plant.n;

    cfg.design = gains::DesignParams::defaults(n);
    if (root.contains("design")) {
      const json& dj = root.at("design");
      check_keys(dj, {"poles_K", "poles_L", "delta1", "delta2", "margins", "a", "eta"}, "design");
      if (dj.contains("poles_K")) cfg.design.poles_K = number_list(dj.at("poles_K"), "design.poles_K");
      if (dj.contains("poles_L")) cfg.design.poles_L = number_list(dj.at("poles_L"), "design.poles_L");
      cfg.design.delta1 = number(dj, "delta1", cfg.design.delta1, "design");
      cfg.design.delta2 = number(dj, "delta2", cfg.design.delta2, "design");
      cfg.design.a = number(dj, "a", cfg.design.a, "design");
      cfg.design.eta = number(dj, "eta", cfg.design.eta, "design");
      if (dj.contains("margins")) {
        const json& mj = dj.at("margins");
        check_keys(mj, {"gamma", "r", "q2"}, "design.margins");
        cfg.design.margins.gamma = number(mj, "gamma", cfg.design.margins.gamma, "design.margins");
        cfg.design.margins.r = number(mj, "r", cfg.design.margins.r, "design.margins");
        cfg.design.margins.q2 = number(mj, "q2", cfg.design.margins.q2, "design.margins");
      }
    }
    gains::validate(cfg.design, n);

    const json sj = root.contains("sim") ? root.at("sim") : json::object();
    check_keys(sj, {"N", "T", "cfl", "record_stride", "mode", "X0", "u0", "Xhat0", "uhat0"}, "sim");
    cfg.sim.N = integer(sj, "N", 100, "sim");
    cfg.sim.T = number(sj, "T", 10.0, "sim");
    cfg.sim.cfl = number(sj, "cfl", 0.5, "sim");
    cfg.sim.record_stride = integer(sj, "record_stride", 200, "sim");
    const Grid1D grid(cfg.sim.N);
    const std::string mode = sj.contains("mode") ? sj.at("mode").get<std::string>() : "closed_loop";
    if (mode == "closed_loop") {
      cfg.sim.mode = sim::Mode::closed_loop;
    } else if (mode == "open_loop") {
      cfg.sim.mode = sim::Mode::open_loop;
    } else if (mode == "perfect_init") {
      cfg.sim.mode = sim::Mode::perfect_init;
    } else {
      throw ConfigError("sim.mode must be closed_loop, open_loop or perfect_init");
    }
    cfg.sim.X0 = sj.contains("X0") ? to_vec(number_list(sj.at("X0"), "sim.X0")) : Vec::Zero(n);
    cfg.sim.Xhat0 = sj.contains("Xhat0") ? to_vec(number_list(sj.at("Xhat0"), "sim.Xhat0")) : Vec::Zero(n);
    cfg.sim.u0 = sj.contains("u0") ? parse_initial(sj.at("u0"), grid, "sim.u0")
                                   : GridFunction(grid.size(), 0.0);
    cfg.sim.uhat0 = sj.contains("uhat0") ? parse_initial(sj.at("uhat0"), grid, "sim.uhat0")
                                         : GridFunction(grid.size(), 0.0);
    require_finite({cfg.sim.X0.data(), static_cast<std::size_t>(cfg.sim.X0.size())}, "sim.X0");
    require_finite({cfg.sim.Xhat0.data(), static_cast<std::size_t>(cfg.sim.Xhat0.size())}, "sim.Xhat0");
    require_finite(cfg.sim.u0, "sim.u0");
    require_finite(cfg.sim.uhat0, "sim.uhat0");
    sim::validate(cfg.sim, cfg.plant);

    cfg.M = cfg.sim.N;
    if (root.contains("kernels")) {
      const json& kj = root.at("kernels");
      check_keys(kj, {"M", "tol", "max_iter"}, "kernels");
      cfg.M = integer(kj, "M", cfg.sim.N, "kernels");
      cfg.kernel_options.tol = number(kj, "tol", cfg.kernel_options.tol, "kernels");
      cfg.kernel_options.max_iter = integer(kj, "max_iter", cfg.kernel_options.max_iter, "kernels");
    }
    if (cfg.M < cfg.sim.N || cfg.M % cfg.sim.N != 0) {
      throw ConfigError("kernels.M must equal sim.N or be a multiple of it");
    }
    if (!(cfg.kernel_options.tol > 0.0) || cfg.kernel_options.max_iter < 1) {
      throw ConfigError("kernels.tol must be > 0 and kernels.max_iter >= 1");
    }

    if (root.contains("disturbances")) {
      const json& dj = root.at("disturbances");
      check_keys(dj, {"d1", "d2", "d3", "d4"}, "disturbances");
      if (dj.contains("d1")) cfg.disturbances.d1 = parse_signal(dj.at("d1"), "disturbances.d1");
      if (dj.contains("d3")) cfg.disturbances.d3 = parse_signal(dj.at("d3"), "disturbances.d3");
      if (dj.contains("d4")) cfg.disturbances.d4 = parse_signal(dj.at("d4"), "disturbances.d4");
      if (dj.contains("d2")) {
        const json& fj = dj.at("d2");
        check_keys(fj, {"profile", "signal"}, "disturbances.d2");
        if (fj.contains("profile")) {
          cfg.disturbances.d2.profile = parse_profile(fj.at("profile"), "disturbances.d2.profile");
        }
        if (fj.contains("signal")) {
          cfg.disturbances.d2.signal = parse_signal(fj.at("signal"), "disturbances.d2.signal");
        }
      }
    }

    if (root.contains("verify")) {
      const json& vj = root.at("verify");
      check_keys(vj, {"spectral_N", "kernel_M", "skip_fraction", "audit_slack", "audit_fraction",
                      "decay_ratio"},
                 "verify");
      auto& v = cfg.verify;
      v.spectral_N = integer(vj, "spectral_N", v.spectral_N, "verify");
      v.kernel_M = integer(vj, "kernel_M", v.kernel_M, "verify");
      v.skip_fraction = number(vj, "skip_fraction", v.skip_fraction, "verify");
      v.audit_slack = number(vj, "audit_slack", v.audit_slack, "verify");
      v.audit_fraction = number(vj, "audit_fraction", v.audit_fraction, "verify");
      v.decay_ratio = number(vj, "decay_ratio", v.decay_ratio, "verify");
      if (v.spectral_N < 32 || v.kernel_M < 8) throw ConfigError("verify resolutions too small");
      if (!(v.skip_fraction >= 0.0 && v.skip_fraction < 1.0)) {
        throw ConfigError("verify.skip_fraction must lie in [0, 1)");
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace heatstep::app

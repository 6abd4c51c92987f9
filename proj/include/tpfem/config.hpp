#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpfem/materials.hpp"
#include "tpfem/solvers.hpp"

namespace tpfem {

/// Raised for unreadable, malformed, or out-of-contract configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { transformer, toy };

struct ToyConfig {
  double m = 1.0;
  double f_offset = std::numbers::pi;  // constant part of the source samples
  double f_amp = 0.5;                  // cosine amplitude of the source samples
  double nu_hat = 1.0;                 // scalar K_hat for the report's ratio check
  int ratio_iterations = 20;           // fixed-point iterations measured against the oracle
};

struct SweepEntry {
  int refinements = 0;
  int steps = 64;
};

struct RunConfig {
  ProblemKind problem = ProblemKind::transformer;
  Method method = Method::m1;
  bool all_methods = false;
  int nx = 40;
  int ny = 40;
  int refinements = 0;
  int steps = 64;
  double period = 0.02;
  std::filesystem::path output_dir = ".";
  bool write_fields = false;
  bool write_mesh = false;
  double s_max = 3.0;      // flux-bound sampling range
  int flux_samples = 10001;
  SolverConfig solver;
  ToyConfig toy;
  std::optional<MaterialTable> materials;  // overrides the transformer table
  std::vector<SweepEntry> sweep;
};

namespace detail {

using nlohmann::json;

inline const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config " + where + ": expected an object");
  return j;
}

template <class T>
T get_or(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field " + where + "." + key + ": wrong type");
  }
}

inline void reject_unknown(const json& j, const std::string& where,
                           std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw ConfigError("config: unknown field " + where + "." + key);
  }
}

inline TransformKind parse_transform(const std::string& name) {
  if (name == "auto") return TransformKind::automatic;
  if (name == "radix2") return TransformKind::radix2;
  if (name == "direct") return TransformKind::direct;
  throw ConfigError("config field solver.transform: unknown value '" + name + "'");
}

inline CachePolicy parse_cache(const std::string& name) {
  if (name == "auto") return CachePolicy::automatic;
  if (name == "always") return CachePolicy::always;
  if (name == "never") return CachePolicy::never;
  throw ConfigError("config field solver.cache: unknown value '" + name + "'");
}

inline NuHatMode parse_nu_hat_mode(const std::string& name) {
  if (name == "theory") return NuHatMode::theory;
  if (name == "frozen_field" || name == "frozen-field") return NuHatMode::frozen_field;
  throw ConfigError("config field solver.nu_hat_mode: unknown value '" + name + "'");
}

inline SolverConfig parse_solver(const json& j) {
  SolverConfig cfg;
  require_object(j, "solver");
  reject_unknown(j, "solver",
                 {"tol", "max_outer_m1", "max_outer_m2", "m3_max_cycles", "nu_hat_mode", "armijo",
                  "static_tol", "static_max_newton", "m2_inner_tol", "m2_inner_max", "m2_restart",
                  "transform", "cache", "cache_budget_mb", "imag_tol",
                  "track_error_contraction"});
  cfg.tol = get_or(j, "tol", "solver", cfg.tol);
  cfg.m1_max_outer = get_or(j, "max_outer_m1", "solver", cfg.m1_max_outer);
  cfg.m2_max_outer = get_or(j, "max_outer_m2", "solver", cfg.m2_max_outer);
  cfg.m3_max_cycles = get_or(j, "m3_max_cycles", "solver", cfg.m3_max_cycles);
  cfg.static_tol = get_or(j, "static_tol", "solver", cfg.static_tol);
  cfg.static_max_newton = get_or(j, "static_max_newton", "solver", cfg.static_max_newton);
  cfg.m2_inner_tol = get_or(j, "m2_inner_tol", "solver", cfg.m2_inner_tol);
  cfg.m2_inner_max = get_or(j, "m2_inner_max", "solver", cfg.m2_inner_max);
  cfg.m2_restart = get_or(j, "m2_restart", "solver", cfg.m2_restart);
  cfg.imag_tol = get_or(j, "imag_tol", "solver", cfg.imag_tol);
  cfg.track_error_contraction =
      get_or(j, "track_error_contraction", "solver", cfg.track_error_contraction);
  if (j.contains("nu_hat_mode"))
    cfg.nu_hat_mode = parse_nu_hat_mode(get_or<std::string>(j, "nu_hat_mode", "solver", ""));
  if (j.contains("transform"))
    cfg.transform = parse_transform(get_or<std::string>(j, "transform", "solver", ""));
  if (j.contains("cache")) cfg.cache = parse_cache(get_or<std::string>(j, "cache", "solver", ""));
  if (j.contains("cache_budget_mb"))
    cfg.cache_budget_bytes =
        static_cast<std::size_t>(get_or<double>(j, "cache_budget_mb", "solver", 1536.0) * 1048576.0);
  if (j.contains("armijo")) {
    const json& a = require_object(j.at("armijo"), "solver.armijo");
    reject_unknown(a, "solver.armijo", {"slope", "backtrack", "max_halvings"});
    cfg.armijo.slope = get_or(a, "slope", "solver.armijo", cfg.armijo.slope);
    cfg.armijo.backtrack = get_or(a, "backtrack", "solver.armijo", cfg.armijo.backtrack);
    cfg.armijo.max_halvings = get_or(a, "max_halvings", "solver.armijo", cfg.armijo.max_halvings);
  }
  return cfg;
}

inline MaterialTable parse_materials(const json& j) {
  MaterialTable table = MaterialTable::transformer();
  require_object(j, "materials");
  for (const auto& [name, entry] : j.items()) {
    const Region region = [&] {
      try {
        return parse_region(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config materials: ") + e.what());
      }
    }();
    require_object(entry, "materials." + name);
    reject_unknown(entry, "materials." + name, {"sigma", "a", "b", "c", "d", "j_amp"});
    MaterialCoefficients m = table.at(region);
    m.sigma = get_or(entry, "sigma", "materials." + name, m.sigma);
    m.a = get_or(entry, "a", "materials." + name, m.a);
    m.b = get_or(entry, "b", "materials." + name, m.b);
    m.c = get_or(entry, "c", "materials." + name, m.c);
    m.d = get_or(entry, "d", "materials." + name, m.d);
    m.j_amp = get_or(entry, "j_amp", "materials." + name, m.j_amp);
    try {
      table.set(region, m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config materials: ") + e.what());
    }
  }
  return table;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::get_or;
  using detail::require_object;
  RunConfig cfg;
  require_object(j, "(top level)");
  detail::reject_unknown(j, "(top level)",
                         {"problem", "method", "nx", "ny", "refinements", "steps", "period",
                          "threads", "output_dir", "write_fields", "write_mesh", "flux", "solver",
                          "toy", "materials", "sweep"});
  const std::string problem = get_or<std::string>(j, "problem", "(top level)", "transformer");
  if (problem == "transformer")
    cfg.problem = ProblemKind::transformer;
  else if (problem == "toy")
    cfg.problem = ProblemKind::toy;
  else
    throw ConfigError("config field problem: unknown value '" + problem + "'");
  const std::string method = get_or<std::string>(j, "method", "(top level)", "m1");
  if (method == "all") {
    cfg.all_methods = true;
  } else if (method == "m1" || method == "m2" || method == "m3") {
    cfg.method = method == "m1" ? Method::m1 : (method == "m2" ? Method::m2 : Method::m3);
  } else {
    throw ConfigError("config field method: unknown value '" + method + "'");
  }
  cfg.nx = get_or(j, "nx", "(top level)", cfg.nx);
  cfg.ny = get_or(j, "ny", "(top level)", cfg.ny);
  cfg.refinements = get_or(j, "refinements", "(top level)", cfg.refinements);
  cfg.steps = get_or(j, "steps", "(top level)", cfg.steps);
  cfg.period = get_or(j, "period", "(top level)", cfg.period);
  cfg.output_dir = get_or<std::string>(j, "output_dir", "(top level)", ".");
  cfg.write_fields = get_or(j, "write_fields", "(top level)", cfg.write_fields);
  cfg.write_mesh = get_or(j, "write_mesh", "(top level)", cfg.write_mesh);
  if (j.contains("flux")) {
    const auto& f = require_object(j.at("flux"), "flux");
    detail::reject_unknown(f, "flux", {"s_max", "samples"});
    cfg.s_max = get_or(f, "s_max", "flux", cfg.s_max);
    cfg.flux_samples = get_or(f, "samples", "flux", cfg.flux_samples);
  }
  if (j.contains("solver")) cfg.solver = detail::parse_solver(j.at("solver"));
  cfg.solver.threads = get_or(j, "threads", "(top level)", cfg.solver.threads);
  if (j.contains("toy")) {
    const auto& t = require_object(j.at("toy"), "toy");
    detail::reject_unknown(t, "toy", {"m", "f_offset", "f_amp", "nu_hat", "ratio_iterations"});
    cfg.toy.m = get_or(t, "m", "toy", cfg.toy.m);
    cfg.toy.f_offset = get_or(t, "f_offset", "toy", cfg.toy.f_offset);
    cfg.toy.f_amp = get_or(t, "f_amp", "toy", cfg.toy.f_amp);
    cfg.toy.nu_hat = get_or(t, "nu_hat", "toy", cfg.toy.nu_hat);
    cfg.toy.ratio_iterations = get_or(t, "ratio_iterations", "toy", cfg.toy.ratio_iterations);
  }
  if (j.contains("materials")) cfg.materials = detail::parse_materials(j.at("materials"));
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_array()) throw ConfigError("config field sweep: expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& e = require_object(s.at(i), "sweep[" + std::to_string(i) + "]");
      detail::reject_unknown(e, "sweep[" + std::to_string(i) + "]", {"refinements", "steps"});
      SweepEntry entry;
      entry.refinements = get_or(e, "refinements", "sweep entry", entry.refinements);
      entry.steps = get_or(e, "steps", "sweep entry", entry.steps);
      cfg.sweep.push_back(entry);
    }
  }
  if (!(cfg.period > 0)) throw ConfigError("config field period: must be positive");
  if (cfg.nx < 1 || cfg.ny < 1) throw ConfigError("config fields nx/ny: must be positive");
  if (cfg.refinements < 0 || cfg.refinements > 6)
    throw ConfigError("config field refinements: must lie in [0, 6]");
  if (cfg.steps < 1) throw ConfigError("config field steps: must be positive");
  if (cfg.flux_samples < 2) throw ConfigError("config field flux.samples: need at least 2");
  if (!(cfg.s_max > 0)) throw ConfigError("config field flux.s_max: must be positive");
  try {
    validate(cfg.solver);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

/// Loads and validates a JSON run configuration.  The TPFEM_THREADS
/// environment variable, when set, overrides the configured thread count.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse failure in '" + path.string() + "': " + e.what());
  }
  RunConfig cfg = parse_run_config(j);
  if (const char* env = std::getenv("TPFEM_THREADS")) {
    try {
      const int threads = std::stoi(env);
      if (threads < 1) throw std::invalid_argument("");
      cfg.solver.threads = threads;
    } catch (const std::exception&) {
      throw ConfigError("TPFEM_THREADS: expected a positive integer, got '" + std::string(env) +
                        "'");
    }
  }
  return cfg;
}

}  // namespace tpfem

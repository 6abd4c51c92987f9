#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tpfem/assembly.hpp"
#include "tpfem/config.hpp"
#include "tpfem/materials.hpp"
#include "tpfem/mesh.hpp"
#include "tpfem/oracle.hpp"
#include "tpfem/periodic.hpp"
#include "tpfem/report.hpp"
#include "tpfem/solvers.hpp"
#include "tpfem/vtk.hpp"

namespace tpfem {

inline std::shared_ptr<const Mesh> build_transformer_mesh(int nx, int ny, int refinements) {
  Mesh mesh = build_rectilinear_mesh(transformer_regions(), nx, ny);
  for (int r = 0; r < refinements; ++r) mesh = refine_uniform(mesh);
  return std::make_shared<const Mesh>(std::move(mesh));
}

/// Everything a transformer run needs: mesh, operators, loads, and the
/// static initialization shared by all three methods.
struct TransformerSetup {
  std::shared_ptr<const Mesh> mesh;
  MaterialTable materials;
  std::unique_ptr<NonlinearOperator> op;
  FemSystem sys;
  BlockRhs F;
  PeriodicState U0;
  double tau = 0;
  double init_seconds = 0;
  int init_newton_max = 0;
};

inline TransformerSetup setup_transformer(const RunConfig& cfg, int refinements, int steps) {
  TransformerSetup s;
  s.mesh = build_transformer_mesh(cfg.nx, cfg.ny, refinements);
  s.materials = cfg.materials ? *cfg.materials : MaterialTable::transformer();
  s.op = std::make_unique<NonlinearOperator>(s.mesh, s.materials);
  s.tau = cfg.period / steps;
  s.F = assemble_loads(*s.mesh, s.materials, steps, cfg.period);
  SparseMatrix<double> M = assemble_mass(*s.mesh, s.materials);
  const detail::Stopwatch timer;
  std::vector<int> newton_counts;
  s.U0 = static_init(FemProblem{&M, s.op.get()}, s.F, s.tau, cfg.solver, &newton_counts);
  s.init_seconds = timer.seconds();
  s.init_newton_max =
      newton_counts.empty() ? 0 : *std::max_element(newton_counts.begin(), newton_counts.end());
  const FluxBounds bounds = flux_bounds(s.materials, cfg.s_max, cfg.flux_samples);
  RegionFieldRanges ranges;
  for (int i = 0; i < steps; ++i) absorb_field_ranges(*s.op, s.U0.block(i), ranges);
  const NuHatChoice choice =
      choose_nu_hat(cfg.solver.nu_hat_mode, bounds, s.materials, &ranges);
  s.sys.mesh = s.mesh;
  s.sys.materials = s.materials;
  s.sys.M = std::move(M);
  s.sys.K_hat = assemble_stiffness_frozen(*s.mesh, choice.nu_hat);
  s.sys.nu_hat_of = choice.nu_hat;
  s.sys.q_estimate = choice.q;
  s.sys.n_dof = s.mesh->n_dof();
  return s;
}

inline std::vector<Method> requested_methods(const RunConfig& cfg) {
  if (cfg.all_methods) return {Method::m1, Method::m2, Method::m3};
  return {cfg.method};
}

inline std::pair<PeriodicState, SolveReport> run_transformer_method(const TransformerSetup& s,
                                                                    Method method,
                                                                    const SolverConfig& solver) {
  switch (method) {
    case Method::m1: return solve_m1_fixed_point(s.sys, *s.op, s.F, s.U0, solver);
    case Method::m2: return solve_m2_newton(s.sys, *s.op, s.F, s.U0, solver);
    case Method::m3: return solve_m3_timestepping(s.sys, *s.op, s.F, s.U0, solver);
  }
  throw std::invalid_argument("invalid method code");
}

namespace detail {

inline void print_report_line(const SolveReport& r) {
  std::cout << method_name(r.method) << ": " << status_name(r.status) << " after " << r.iterations
            << (r.method == Method::m3 ? " cycles" : " iterations") << " ("
            << format_double(r.wall_time) << " s), residual "
            << format_double(r.residual_history.back()) << "\n";
}

inline int exit_code(const std::vector<SolveReport>& reports) {
  for (const SolveReport& r : reports)
    if (r.status != SolveStatus::converged) return 2;
  return 0;
}

inline nlohmann::json nu_hat_json(const std::array<double, kNumRegions>& nu_hat) {
  nlohmann::json j;
  for (int r = 0; r < kNumRegions; ++r)
    j[std::string(region_name(static_cast<Region>(r)))] = nu_hat[static_cast<std::size_t>(r)];
  return j;
}

inline ToyProblem make_toy_problem(const RunConfig& cfg) {
  std::vector<double> f(static_cast<std::size_t>(cfg.steps));
  for (int n = 0; n < cfg.steps; ++n)
    f[static_cast<std::size_t>(n)] =
        cfg.toy.f_offset +
        cfg.toy.f_amp * std::cos(2.0 * std::numbers::pi * (n + 1) / cfg.steps);
  return ToyProblem(cfg.toy.m, cfg.steps, cfg.period / cfg.steps, std::move(f));
}

inline int run_solve_toy(const RunConfig& cfg) {
  const ToyProblem p = make_toy_problem(cfg);
  if (!(cfg.toy.nu_hat > 0)) throw ConfigError("config field toy.nu_hat: must be positive");
  const SparseMatrix<double> K_hat =
      SparseMatrix<double>::from_triplets(1, 1, {{0, 0, cfg.toy.nu_hat}}, true);
  const BlockRhs F = p.rhs();
  const PeriodicState U0 = static_init(p, F, p.tau(), cfg.solver);
  std::vector<SolveReport> reports;
  nlohmann::json methods_json;
  for (Method m : requested_methods(cfg)) {
    std::pair<PeriodicState, SolveReport> result = [&] {
      switch (m) {
        case Method::m1:
          return solve_m1_fixed_point(p, K_hat, F, U0, cfg.solver,
                                      midpoint_contraction(p.gamma(), p.lipschitz()));
        case Method::m2: return solve_m2_newton(p, F, U0, cfg.solver);
        case Method::m3: return solve_m3_timestepping(p, F, U0, cfg.solver);
      }
      throw std::invalid_argument("invalid method code");
    }();
    detail::print_report_line(result.second);
    methods_json[std::string(method_name(m))] = report_to_json(result.second);
    reports.push_back(std::move(result.second));
  }
  const std::vector<double> ratios =
      verify_contraction(p, cfg.toy.nu_hat, cfg.toy.ratio_iterations);
  const double max_ratio = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  std::cout << "oracle error ratios: max " << format_double(max_ratio) << " over "
            << ratios.size() << " iterations\n";
  nlohmann::json j;
  j["problem"] = "toy";
  j["steps"] = cfg.steps;
  j["n_dof"] = 1;
  j["period"] = cfg.period;
  j["tau"] = p.tau();
  j["threads"] = cfg.solver.threads;
  j["methods"] = methods_json;
  j["oracle"] = {{"nu_hat", cfg.toy.nu_hat},
                 {"error_ratios", ratios},
                 {"max_ratio", max_ratio},
                 {"midpoint_bound", midpoint_contraction(p.gamma(), p.lipschitz())}};
  std::filesystem::create_directories(cfg.output_dir);
  write_json(cfg.output_dir / "report.json", j);
  std::vector<const SolveReport*> pointers;
  for (const SolveReport& r : reports) pointers.push_back(&r);
  write_residuals_csv(cfg.output_dir / "residuals.csv", pointers);
  return exit_code(reports);
}

}  // namespace detail

/// Runs the configured problem and method(s); writes report.json,
/// residuals.csv, and the optional VTK files into the output directory.
/// Returns 0 when every requested method converged, 2 otherwise.
inline int run_solve(const RunConfig& cfg) {
  if (cfg.problem == ProblemKind::toy) return detail::run_solve_toy(cfg);
  const TransformerSetup s = setup_transformer(cfg, cfg.refinements, cfg.steps);
  std::cout << "transformer: " << s.sys.n_dof << " unknowns, " << cfg.steps
            << " steps, initialization " << detail::format_double(s.init_seconds) << " s\n";
  std::filesystem::create_directories(cfg.output_dir);
  if (cfg.write_mesh) write_mesh_vtk(cfg.output_dir / "mesh.vtk", *s.mesh);
  std::vector<SolveReport> reports;
  nlohmann::json methods_json;
  PeriodicState first_state;
  for (Method m : requested_methods(cfg)) {
    auto [state, report] = run_transformer_method(s, m, cfg.solver);
    detail::print_report_line(report);
    methods_json[std::string(method_name(m))] = report_to_json(report);
    if (reports.empty()) first_state = std::move(state);
    reports.push_back(std::move(report));
  }
  nlohmann::json j;
  j["problem"] = "transformer";
  j["steps"] = cfg.steps;
  j["n_dof"] = s.sys.n_dof;
  j["refinements"] = cfg.refinements;
  j["period"] = cfg.period;
  j["tau"] = s.tau;
  j["threads"] = cfg.solver.threads;
  j["nu_hat"] = detail::nu_hat_json(s.sys.nu_hat_of);
  j["q_estimate"] = s.sys.q_estimate;
  j["init"] = {{"seconds", s.init_seconds}, {"max_newton_steps", s.init_newton_max}};
  {
    // Per-frequency symbol magnitudes, a cheap conditioning indicator for the
    // frequency blocks lambda_k M + K_hat.
    std::vector<double> symbol_abs;
    const PeriodicSolver probe(s.sys.M, s.sys.K_hat, s.tau, cfg.steps,
                               [&] {
                                 PeriodicSolverOptions o = make_periodic_options(cfg.solver);
                                 o.cache = CachePolicy::never;
                                 return o;
                               }());
    for (int k = 0; k <= cfg.steps / 2; ++k) symbol_abs.push_back(std::abs(probe.symbol(k)));
    j["frequency_symbol_abs"] = symbol_abs;
  }
  j["methods"] = methods_json;
  write_json(cfg.output_dir / "report.json", j);
  std::vector<const SolveReport*> pointers;
  for (const SolveReport& r : reports) pointers.push_back(&r);
  write_residuals_csv(cfg.output_dir / "residuals.csv", pointers);
  if (cfg.write_fields) {
    for (int i = 0; i < cfg.steps; ++i) {
      std::vector<double> u(first_state.block(i), first_state.block(i) + first_state.n_dof);
      write_field_vtk(cfg.output_dir / ("u_" + std::to_string(i + 1) + ".vtk"), *s.mesh, u);
    }
  }
  return detail::exit_code(reports);
}

/// Runs all three methods for every (refinements, steps) pair of the sweep
/// and writes table.csv, flushing after each row.  Returns 0 once the sweep
/// completes; per-run convergence statuses live in the report, not the exit
/// code (the sequential baseline is expected to hit its cycle cap).
inline int run_table(const RunConfig& cfg) {
  if (cfg.problem != ProblemKind::transformer)
    throw ConfigError("table mode: only the transformer problem has a mesh sweep");
  std::filesystem::create_directories(cfg.output_dir);
  TableWriter writer(cfg.output_dir / "table.csv");
  for (const SweepEntry& entry : cfg.sweep) {
    const TransformerSetup s = setup_transformer(cfg, entry.refinements, entry.steps);
    std::cout << "sweep: refinements " << entry.refinements << ", steps " << entry.steps << ", "
              << s.sys.n_dof << " unknowns\n";
    TableRow row;
    row.steps = entry.steps;
    row.n_dof = s.sys.n_dof;
    row.init_seconds = s.init_seconds;
    for (Method m : {Method::m1, Method::m2, Method::m3}) {
      const auto [state, report] = run_transformer_method(s, m, cfg.solver);
      detail::print_report_line(report);
      switch (m) {
        case Method::m1:
          row.m1_iterations = report.iterations;
          row.m1_seconds = report.wall_time;
          break;
        case Method::m2:
          row.m2_iterations = report.iterations;
          row.m2_seconds = report.wall_time;
          break;
        case Method::m3:
          row.m3_iterations = report.iterations;
          row.m3_seconds = report.wall_time;
          break;
      }
    }
    writer.add_row(row);
  }
  return 0;
}

/// Repeats the M1 solve once per requested thread count and writes
/// speedup.csv.  Iteration counts and residual histories must be identical
/// across thread counts (the determinism contract); a mismatch returns 1.
inline int run_speedup(const RunConfig& cfg, const std::vector<int>& thread_counts) {
  if (cfg.problem != ProblemKind::transformer)
    throw ConfigError("speedup mode: requires the transformer problem");
  if (thread_counts.empty()) throw ConfigError("speedup mode: no thread counts given");
  for (int t : thread_counts)
    if (t < 1) throw ConfigError("speedup mode: thread counts must be positive");
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir / "speedup.csv");
  if (!out) throw std::runtime_error("cannot open speedup.csv for writing");
  out << "threads,iterations,m1_seconds,init_seconds\n" << std::flush;
  std::vector<SolveReport> reports;
  for (int t : thread_counts) {
    RunConfig run = cfg;
    run.solver.threads = t;
    const TransformerSetup s = setup_transformer(run, run.refinements, run.steps);
    auto [state, report] = run_transformer_method(s, Method::m1, run.solver);
    std::cout << "threads " << t << ": ";
    detail::print_report_line(report);
    out << t << "," << report.iterations << "," << detail::format_double(report.wall_time) << ","
        << detail::format_double(s.init_seconds) << "\n"
        << std::flush;
    reports.push_back(std::move(report));
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].iterations != reports[0].iterations ||
        reports[i].residual_history != reports[0].residual_history) {
      std::cerr << "speedup: thread count " << thread_counts[i]
                << " changed the iteration history; determinism contract violated\n";
      return 1;
    }
  }
  return detail::exit_code(reports);
}

}  // namespace tpfem

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpfem/solvers.hpp"

namespace tpfem {

namespace detail {

/// Shortest round-trip decimal form, so report files are reproducible
/// bit-for-bit across runs.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline nlohmann::json report_to_json(const SolveReport& report) {
  nlohmann::json j;
  j["method"] = std::string(method_name(report.method));
  j["status"] = std::string(status_name(report.status));
  j["iterations"] = report.iterations;
  j["wall_seconds"] = report.wall_time;
  j["residual_history"] = report.residual_history;
  j["contraction_history"] = report.contraction_history;
  if (std::isfinite(report.q_estimate)) j["q_estimate"] = report.q_estimate;
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// Residual histories of one or more runs as CSV rows
/// method,iteration,residual,contraction (contraction blank on the first row
/// of each method).  No timing columns: the file is run-to-run reproducible.
inline void write_residuals_csv(const std::filesystem::path& path,
                                const std::vector<const SolveReport*>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << "method,iteration,residual,contraction\n";
  for (const SolveReport* report : reports) {
    for (std::size_t k = 0; k < report->residual_history.size(); ++k) {
      out << method_name(report->method) << "," << k << ","
          << detail::format_double(report->residual_history[k]) << ",";
      if (k >= 1 && k - 1 < report->contraction_history.size())
        out << detail::format_double(report->contraction_history[k - 1]);
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// One benchmark-table row: problem size, initialization cost, and
/// per-method iteration counts and times.
struct TableRow {
  int steps = 0;
  Index n_dof = 0;
  double init_seconds = 0;
  int m1_iterations = 0;
  double m1_seconds = 0;
  int m2_iterations = 0;
  double m2_seconds = 0;
  int m3_iterations = 0;
  double m3_seconds = 0;
};

inline constexpr const char* kTableHeader =
    "steps,n_dof,init_seconds,m1_iterations,m1_seconds,m2_iterations,m2_seconds,"
    "m3_iterations,m3_seconds";

/// Append-style table writer that flushes after every row, so partial sweeps
/// survive a failing later run.
class TableWriter {
 public:
  explicit TableWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out_ << kTableHeader << "\n" << std::flush;
  }

  void add_row(const TableRow& r) {
    out_ << r.steps << "," << r.n_dof << "," << detail::format_double(r.init_seconds) << ","
         << r.m1_iterations << "," << detail::format_double(r.m1_seconds) << ","
         << r.m2_iterations << "," << detail::format_double(r.m2_seconds) << ","
         << r.m3_iterations << "," << detail::format_double(r.m3_seconds) << "\n"
         << std::flush;
  }

 private:
  std::ofstream out_;
};

}  // namespace tpfem

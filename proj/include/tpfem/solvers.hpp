#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tpfem/assembly.hpp"
#include "tpfem/parallel.hpp"
#include "tpfem/periodic.hpp"
#include "tpfem/solve.hpp"
#include "tpfem/sparse.hpp"
#include "tpfem/state.hpp"

namespace tpfem {

enum class Method { m1, m2, m3 };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::m1: return "m1";
    case Method::m2: return "m2";
    case Method::m3: return "m3";
  }
  throw std::invalid_argument("invalid method code");
}

enum class SolveStatus { converged, max_iter, stalled };

inline std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::stalled: return "stalled";
  }
  throw std::invalid_argument("invalid status code");
}

struct ArmijoParams {
  double slope = 1e-4;     // sufficient-decrease factor
  double backtrack = 0.5;  // step halving factor
  int max_halvings = 30;
};

struct SolverConfig {
  double tol = 1e-4;  // relative block-residual tolerance
  int m1_max_outer = 200;
  int m2_max_outer = 50;
  ArmijoParams armijo;
  int m3_max_cycles = 10;
  NuHatMode nu_hat_mode = NuHatMode::frozen_field;
  int threads = 1;
  TransformKind transform = TransformKind::automatic;
  CachePolicy cache = CachePolicy::automatic;
  std::size_t cache_budget_bytes = std::size_t{1536} << 20;
  double imag_tol = 1e-9;
  double static_tol = 1e-8;  // relative residual for static / per-step Newton solves
  int static_max_newton = 50;
  double m2_inner_tol = 1e-8;
  int m2_inner_max = 300;
  int m2_restart = 60;
  // When set, M1 archives its iterates and reports K_hat-norm error ratios
  // against the final iterate instead of residual ratios.
  bool track_error_contraction = false;
};

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.tol > 0 && cfg.tol < 1))
    throw std::invalid_argument("solver config: tol must lie in (0,1)");
  if (!(cfg.armijo.slope > 0 && cfg.armijo.slope < 1))
    throw std::invalid_argument("solver config: armijo slope must lie in (0,1)");
  if (!(cfg.armijo.backtrack > 0 && cfg.armijo.backtrack < 1))
    throw std::invalid_argument("solver config: armijo backtracking factor must lie in (0,1)");
  if (cfg.armijo.max_halvings < 0)
    throw std::invalid_argument("solver config: negative armijo halving cap");
  if (cfg.m1_max_outer < 1 || cfg.m2_max_outer < 1 || cfg.m3_max_cycles < 1 ||
      cfg.static_max_newton < 1 || cfg.m2_inner_max < 1 || cfg.m2_restart < 1)
    throw std::invalid_argument("solver config: iteration caps must be positive");
  if (cfg.threads < 1) throw std::invalid_argument("solver config: threads must be positive");
  if (!(cfg.static_tol > 0 && cfg.static_tol < 1) || !(cfg.m2_inner_tol > 0 && cfg.m2_inner_tol < 1))
    throw std::invalid_argument("solver config: inner tolerances must lie in (0,1)");
}

struct SolveReport {
  Method method = Method::m1;
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<double> contraction_history;
  double q_estimate = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0;
  SolveStatus status = SolveStatus::converged;
};

/// Relative residual stopping rule: last <= tol * first (boundary inclusive;
/// an exactly-zero initial residual converges immediately).
inline bool stopping_check(const std::vector<double>& history, double tol) {
  if (history.empty()) throw std::invalid_argument("stopping check: empty history");
  return history.back() <= tol * history.front();
}

inline PeriodicSolverOptions make_periodic_options(const SolverConfig& cfg) {
  PeriodicSolverOptions opts;
  opts.threads = cfg.threads;
  opts.transform = cfg.transform;
  opts.cache = cfg.cache;
  opts.cache_budget_bytes = cfg.cache_budget_bytes;
  opts.imag_tol = cfg.imag_tol;
  return opts;
}

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Damped Newton for the elliptic problem  mass_scale*M u + K(u) = rhs.
/// Convergence is relative to max(|rhs|, initial residual); returns the
/// number of Newton steps taken.
template <class Problem>
int newton_elliptic(const Problem& p, double mass_scale, const std::vector<double>& rhs,
                    std::vector<double>& u, double rel_tol, int max_newton,
                    const ArmijoParams& armijo) {
  const Index n = p.n_dof();
  if (static_cast<Index>(u.size()) != n || static_cast<Index>(rhs.size()) != n)
    throw std::invalid_argument("newton: size mismatch");
  const SparseMatrix<double>& M = p.mass();
  std::vector<double> work(static_cast<std::size_t>(n));
  const auto residual_at = [&](const std::vector<double>& v, std::vector<double>& r) {
    p.apply_k(v.data(), r.data());
    M.multiply(v.data(), work.data());
    for (Index j = 0; j < n; ++j)
      r[static_cast<std::size_t>(j)] =
          rhs[static_cast<std::size_t>(j)] - mass_scale * work[static_cast<std::size_t>(j)] -
          r[static_cast<std::size_t>(j)];
  };
  std::vector<double> r(static_cast<std::size_t>(n));
  residual_at(u, r);
  double rnorm = norm2(r);
  const double scale = std::max(norm2(rhs), rnorm);
  if (scale == 0 || rnorm <= rel_tol * scale) return 0;
  std::vector<double> trial(static_cast<std::size_t>(n));
  std::vector<double> rtrial(static_cast<std::size_t>(n));
  for (int step = 1; step <= max_newton; ++step) {
    SparseMatrix<double> J = add_scaled(mass_scale, M, 1.0, p.jacobian_k(u.data()));
    const std::vector<double> delta = SparseSolver<double>(J).solve(r);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= armijo.max_halvings; ++h) {
      for (Index j = 0; j < n; ++j)
        trial[static_cast<std::size_t>(j)] =
            u[static_cast<std::size_t>(j)] + alpha * delta[static_cast<std::size_t>(j)];
      residual_at(trial, rtrial);
      const double tnorm = norm2(rtrial);
      if (tnorm <= (1.0 - armijo.slope * alpha) * rnorm) {
        u.swap(trial);
        r.swap(rtrial);
        rnorm = tnorm;
        accepted = true;
        break;
      }
      alpha *= armijo.backtrack;
    }
    if (!accepted)
      throw SolveError("newton: line search exhausted at residual " + std::to_string(rnorm),
                       rnorm / scale);
    if (rnorm <= rel_tol * scale) return step;
  }
  throw SolveError("newton: no convergence within " + std::to_string(max_newton) + " steps",
                   rnorm / scale);
}

/// Restarted flexible GMRES, right-preconditioned.  apply_a and apply_p map a
/// flat vector to a flat vector; returns total iterations or -1 if the
/// relative tolerance was not met within max_total iterations.
template <class ApplyA, class ApplyP>
int fgmres(std::size_t size, ApplyA&& apply_a, ApplyP&& apply_p, const std::vector<double>& b,
           std::vector<double>& x, double rel_tol, int max_total, int restart) {
  const double bnorm = norm2(b);
  x.assign(size, 0.0);
  if (bnorm == 0) return 0;
  const double target = rel_tol * bnorm;
  int total = 0;
  std::vector<double> r = b;  // r = b - A*0
  while (true) {
    const double beta = norm2(r);
    if (beta <= target) return total;
    const int m = restart;
    std::vector<std::vector<double>> V(1, r);
    for (double& v : V[0]) v /= beta;
    std::vector<std::vector<double>> Z;
    std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0);
    const auto h = [&](int i, int j) -> double& {
      return H[static_cast<std::size_t>(i) * m + j];
    };
    std::vector<double> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m));
    std::vector<double> g(static_cast<std::size_t>(m) + 1, 0.0);
    g[0] = beta;
    int cols = 0;
    for (int j = 0; j < m && total < max_total; ++j, ++total) {
      Z.push_back(apply_p(V[static_cast<std::size_t>(j)]));
      std::vector<double> w = apply_a(Z.back());
      for (int i = 0; i <= j; ++i) {
        double dot = 0;
        for (std::size_t l = 0; l < size; ++l) dot += w[l] * V[static_cast<std::size_t>(i)][l];
        h(i, j) = dot;
        for (std::size_t l = 0; l < size; ++l) w[l] -= dot * V[static_cast<std::size_t>(i)][l];
      }
      const double wnorm = norm2(w);
      h(j + 1, j) = wnorm;
      for (int i = 0; i < j; ++i) {
        const double t = cs[static_cast<std::size_t>(i)] * h(i, j) +
                         sn[static_cast<std::size_t>(i)] * h(i + 1, j);
        h(i + 1, j) = -sn[static_cast<std::size_t>(i)] * h(i, j) +
                      cs[static_cast<std::size_t>(i)] * h(i + 1, j);
        h(i, j) = t;
      }
      const double denom = std::hypot(h(j, j), h(j + 1, j));
      if (denom == 0) {
        cols = j;  // dead column; keep the solved part only
        ++total;
        break;
      }
      cs[static_cast<std::size_t>(j)] = h(j, j) / denom;
      sn[static_cast<std::size_t>(j)] = h(j + 1, j) / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0;
      g[static_cast<std::size_t>(j) + 1] =
          -sn[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(j)] =
          cs[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
      cols = j + 1;
      if (wnorm == 0 || std::abs(g[static_cast<std::size_t>(j) + 1]) <= target) {
        ++total;
        break;
      }
      if (j + 1 < m) {
        V.push_back(std::move(w));
        for (double& v : V.back()) v /= wnorm;
      }
    }
    // Back-substitute y from the triangular H and accumulate x += Z y.
    std::vector<double> y(static_cast<std::size_t>(cols), 0.0);
    for (int i = cols - 1; i >= 0; --i) {
      double acc = g[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < cols; ++j) acc -= h(i, j) * y[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] = acc / h(i, i);
    }
    for (int j = 0; j < cols; ++j)
      for (std::size_t l = 0; l < size; ++l) x[l] += y[static_cast<std::size_t>(j)] * Z[static_cast<std::size_t>(j)][l];
    r = b;
    {
      std::vector<double> ax = apply_a(x);
      for (std::size_t l = 0; l < size; ++l) r[l] -= ax[l];
    }
    if (norm2(r) <= target) return total;
    if (total >= max_total) return -1;
  }
}

}  // namespace detail

/// Decoupled static problems K(u^n) = f^n solved independently per step by
/// damped Newton from zero; the standard initial guess for all three methods.
template <class Problem>
PeriodicState static_init(const Problem& p, const BlockRhs& F, double tau,
                          const SolverConfig& cfg, std::vector<int>* newton_counts = nullptr) {
  validate(cfg);
  PeriodicState U(F.steps, F.n_dof, tau);
  if (newton_counts) newton_counts->assign(static_cast<std::size_t>(F.steps), 0);
  parallel_for(0, F.steps, cfg.threads, [&](int i) {
    std::vector<double> rhs(F.block(i), F.block(i) + F.n_dof);
    std::vector<double> u(static_cast<std::size_t>(F.n_dof), 0.0);
    try {
      const int steps_taken = detail::newton_elliptic(p, 0.0, rhs, u, cfg.static_tol,
                                                      cfg.static_max_newton, cfg.armijo);
      if (newton_counts) (*newton_counts)[static_cast<std::size_t>(i)] = steps_taken;
    } catch (const SolveError& e) {
      throw SolveError("static init, step " + std::to_string(i + 1) + ": " + e.what(),
                       e.residual());
    }
    std::copy(u.begin(), u.end(), U.block(i));
  });
  return U;
}

/// Fixed-point iteration: each sweep moves the nonlinearity to the right-hand
/// side, g^n = f^n + K_hat u^n - K(u^n), and solves the linear time-periodic
/// system with frozen K_hat exactly through the frequency-domain solver.
template <class Problem>
std::pair<PeriodicState, SolveReport> solve_m1_fixed_point(
    const Problem& p, const SparseMatrix<double>& K_hat, const BlockRhs& F,
    const PeriodicState& U0, const SolverConfig& cfg,
    double q_estimate = std::numeric_limits<double>::quiet_NaN(),
    std::vector<PeriodicState>* iterate_log = nullptr) {
  validate(cfg);
  const detail::Stopwatch timer;
  const int N = U0.steps;
  const Index n = p.n_dof();
  if (F.steps != N || F.n_dof != n || U0.n_dof != n)
    throw std::invalid_argument("fixed-point solver: shape mismatch");
  SolveReport report;
  report.method = Method::m1;
  report.q_estimate = q_estimate;
  PeriodicState U = U0;
  const bool archive = cfg.track_error_contraction || iterate_log != nullptr;
  std::vector<PeriodicState> iterates;
  if (archive) iterates.push_back(U);
  BlockRhs R = residual(p, U, F, cfg.threads);
  report.residual_history.push_back(block_l2(R));
  if (!stopping_check(report.residual_history, cfg.tol)) {
    const PeriodicSolver periodic(p.mass(), K_hat, U0.tau, N, make_periodic_options(cfg));
    BlockRhs G(N, n);
    for (int k = 1; k <= cfg.m1_max_outer; ++k) {
      parallel_for(0, N, cfg.threads, [&](int i) {
        const double* u = U.block(i);
        double* g = G.block(i);
        std::vector<double> ku(static_cast<std::size_t>(n));
        p.apply_k(u, ku.data());
        std::vector<double> khu(static_cast<std::size_t>(n));
        K_hat.multiply(u, khu.data());
        const double* f = F.block(i);
        for (Index j = 0; j < n; ++j)
          g[j] = f[j] + khu[static_cast<std::size_t>(j)] - ku[static_cast<std::size_t>(j)];
      });
      U = periodic.solve(G);
      report.iterations = k;
      if (archive) iterates.push_back(U);
      R = residual(p, U, F, cfg.threads);
      report.residual_history.push_back(block_l2(R));
      if (stopping_check(report.residual_history, cfg.tol)) break;
    }
  }
  report.status = stopping_check(report.residual_history, cfg.tol) ? SolveStatus::converged
                                                                   : SolveStatus::max_iter;
  if (cfg.track_error_contraction && iterates.size() >= 2) {
    // K_hat-norm errors against the final iterate as the solution proxy.
    std::vector<double> errors;
    for (std::size_t k = 0; k + 1 < iterates.size(); ++k) {
      PeriodicState diff = iterates[k];
      for (std::size_t l = 0; l < diff.data.size(); ++l) diff.data[l] -= U.data[l];
      errors.push_back(block_norm_khat(diff, K_hat));
    }
    const double floor = 1e-13 * std::max(1.0, block_norm_khat(U, K_hat));
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
      if (errors[k] <= floor || errors[k + 1] <= floor) break;
      report.contraction_history.push_back(errors[k + 1] / errors[k]);
    }
  } else {
    for (std::size_t k = 0; k + 1 < report.residual_history.size(); ++k)
      if (report.residual_history[k] > 0)
        report.contraction_history.push_back(report.residual_history[k + 1] /
                                             report.residual_history[k]);
  }
  if (iterate_log) *iterate_log = std::move(iterates);
  report.wall_time = timer.seconds();
  return {std::move(U), std::move(report)};
}

/// All-at-once Newton with Armijo backtracking on the block residual.  The
/// linearized system couples all steps through time-varying Jacobians, so it
/// is solved by flexible GMRES right-preconditioned with the frequency-domain
/// solver built on the time-averaged Jacobian.
template <class Problem>
std::pair<PeriodicState, SolveReport> solve_m2_newton(const Problem& p, const BlockRhs& F,
                                                      const PeriodicState& U0,
                                                      const SolverConfig& cfg) {
  validate(cfg);
  const detail::Stopwatch timer;
  const int N = U0.steps;
  const Index n = p.n_dof();
  if (F.steps != N || F.n_dof != n || U0.n_dof != n)
    throw std::invalid_argument("newton solver: shape mismatch");
  const std::size_t flat = static_cast<std::size_t>(N) * static_cast<std::size_t>(n);
  SolveReport report;
  report.method = Method::m2;
  PeriodicState U = U0;
  BlockRhs R = residual(p, U, F, cfg.threads);
  double rnorm = block_l2(R);
  report.residual_history.push_back(rnorm);
  const SparseMatrix<double>& M = p.mass();
  while (!stopping_check(report.residual_history, cfg.tol)) {
    if (report.iterations >= cfg.m2_max_outer) {
      report.status = SolveStatus::max_iter;
      break;
    }
    std::vector<SparseMatrix<double>> jacobians(static_cast<std::size_t>(N));
    parallel_for(0, N, cfg.threads, [&](int i) {
      jacobians[static_cast<std::size_t>(i)] = p.jacobian_k(U.block(i));
    });
    // Time-averaged Jacobian for the time-invariant preconditioner.
    SparseMatrix<double> averaged = jacobians[0];
    bool same_pattern = true;
    for (int i = 1; i < N && same_pattern; ++i)
      same_pattern = jacobians[static_cast<std::size_t>(i)].row_offsets() == averaged.row_offsets() &&
                     jacobians[static_cast<std::size_t>(i)].col_indices() == averaged.col_indices();
    if (same_pattern) {
      for (int i = 1; i < N; ++i) {
        const auto& vals = jacobians[static_cast<std::size_t>(i)].values();
        for (std::size_t l = 0; l < vals.size(); ++l) averaged.values()[l] += vals[l];
      }
      for (double& v : averaged.values()) v /= N;
    } else {
      for (int i = 1; i < N; ++i)
        averaged = add_scaled(1.0, averaged, 1.0, jacobians[static_cast<std::size_t>(i)]);
      for (double& v : averaged.values()) v /= N;
    }
    const PeriodicSolver preconditioner(M, averaged, U0.tau, N, make_periodic_options(cfg));
    const auto apply_a = [&](const std::vector<double>& v) {
      std::vector<double> out(flat);
      parallel_for(0, N, cfg.threads, [&](int i) {
        const double* vi = v.data() + static_cast<std::size_t>(i) * n;
        const double* vprev = v.data() + static_cast<std::size_t>((i + N - 1) % N) * n;
        double* oi = out.data() + static_cast<std::size_t>(i) * n;
        std::vector<double> jv(static_cast<std::size_t>(n));
        jacobians[static_cast<std::size_t>(i)].multiply(vi, jv.data());
        std::vector<double> dv(static_cast<std::size_t>(n));
        for (Index j = 0; j < n; ++j)
          dv[static_cast<std::size_t>(j)] = (vi[j] - vprev[j]) / U0.tau;
        std::vector<double> mdv(static_cast<std::size_t>(n));
        M.multiply(dv.data(), mdv.data());
        for (Index j = 0; j < n; ++j)
          oi[j] = mdv[static_cast<std::size_t>(j)] + jv[static_cast<std::size_t>(j)];
      });
      return out;
    };
    const auto apply_p = [&](const std::vector<double>& v) {
      BlockRhs g(N, n);
      g.data = v;
      PeriodicState z = preconditioner.solve(g);
      return std::move(z.data);
    };
    std::vector<double> delta;
    const int inner = detail::fgmres(flat, apply_a, apply_p, R.data, delta, cfg.m2_inner_tol,
                                     cfg.m2_inner_max, cfg.m2_restart);
    if (inner < 0)
      throw SolveError("newton solver: inner linear solve missed its tolerance within " +
                       std::to_string(cfg.m2_inner_max) + " iterations");
    double alpha = 1.0;
    bool accepted = false;
    PeriodicState trial = U;
    for (int h = 0; h <= cfg.armijo.max_halvings; ++h) {
      for (std::size_t l = 0; l < flat; ++l) trial.data[l] = U.data[l] + alpha * delta[l];
      BlockRhs Rtrial = residual(p, trial, F, cfg.threads);
      const double tnorm = block_l2(Rtrial);
      if (tnorm < rnorm && tnorm <= (1.0 - cfg.armijo.slope * alpha) * rnorm) {
        U = trial;
        R = std::move(Rtrial);
        rnorm = tnorm;
        accepted = true;
        break;
      }
      alpha *= cfg.armijo.backtrack;
    }
    if (!accepted) {
      report.status = SolveStatus::stalled;
      break;
    }
    report.iterations += 1;
    report.residual_history.push_back(rnorm);
    if (stopping_check(report.residual_history, cfg.tol)) {
      report.status = SolveStatus::converged;
      break;
    }
  }
  if (stopping_check(report.residual_history, cfg.tol)) report.status = SolveStatus::converged;
  for (std::size_t k = 0; k + 1 < report.residual_history.size(); ++k)
    if (report.residual_history[k] > 0)
      report.contraction_history.push_back(report.residual_history[k + 1] /
                                           report.residual_history[k]);
  report.wall_time = timer.seconds();
  return {std::move(U), std::move(report)};
}

/// Sequential time stepping toward the limit cycle: march the implicit-Euler
/// recursion period after period from the static initialization, checking the
/// periodic block residual once per cycle.
template <class Problem>
std::pair<PeriodicState, SolveReport> solve_m3_timestepping(const Problem& p, const BlockRhs& F,
                                                            const PeriodicState& U0,
                                                            const SolverConfig& cfg) {
  validate(cfg);
  const detail::Stopwatch timer;
  const int N = U0.steps;
  const Index n = p.n_dof();
  if (F.steps != N || F.n_dof != n || U0.n_dof != n)
    throw std::invalid_argument("time stepping: shape mismatch");
  SolveReport report;
  report.method = Method::m3;
  PeriodicState U = U0;
  BlockRhs R = residual(p, U, F, cfg.threads);
  report.residual_history.push_back(block_l2(R));
  const SparseMatrix<double>& M = p.mass();
  const double inv_tau = 1.0 / U0.tau;
  std::vector<double> u_prev(U.block(N - 1), U.block(N - 1) + n);
  std::vector<double> m_uprev(static_cast<std::size_t>(n));
  while (!stopping_check(report.residual_history, cfg.tol)) {
    if (report.iterations >= cfg.m3_max_cycles) {
      report.status = SolveStatus::max_iter;
      break;
    }
    for (int i = 0; i < N; ++i) {
      M.multiply(u_prev.data(), m_uprev.data());
      std::vector<double> rhs(F.block(i), F.block(i) + n);
      for (Index j = 0; j < n; ++j) rhs[static_cast<std::size_t>(j)] += inv_tau * m_uprev[static_cast<std::size_t>(j)];
      try {
        detail::newton_elliptic(p, inv_tau, rhs, u_prev, cfg.static_tol, cfg.static_max_newton,
                                cfg.armijo);
      } catch (const SolveError& e) {
        throw SolveError("time stepping, cycle " + std::to_string(report.iterations + 1) +
                             ", step " + std::to_string(i + 1) + ": " + e.what(),
                         e.residual());
      }
      std::copy(u_prev.begin(), u_prev.end(), U.block(i));
    }
    report.iterations += 1;
    R = residual(p, U, F, cfg.threads);
    report.residual_history.push_back(block_l2(R));
    if (stopping_check(report.residual_history, cfg.tol)) {
      report.status = SolveStatus::converged;
      break;
    }
  }
  if (stopping_check(report.residual_history, cfg.tol)) report.status = SolveStatus::converged;
  for (std::size_t k = 0; k + 1 < report.residual_history.size(); ++k)
    if (report.residual_history[k] > 0)
      report.contraction_history.push_back(report.residual_history[k + 1] /
                                           report.residual_history[k]);
  report.wall_time = timer.seconds();
  return {std::move(U), std::move(report)};
}

// Assembled-system wrappers.

inline PeriodicState static_init(const FemSystem& sys, const NonlinearOperator& op,
                                 const BlockRhs& F, double tau, const SolverConfig& cfg,
                                 std::vector<int>* newton_counts = nullptr) {
  return static_init(FemProblem{&sys.M, &op}, F, tau, cfg, newton_counts);
}

inline std::pair<PeriodicState, SolveReport> solve_m1_fixed_point(
    const FemSystem& sys, const NonlinearOperator& op, const BlockRhs& F, const PeriodicState& U0,
    const SolverConfig& cfg, std::vector<PeriodicState>* iterate_log = nullptr) {
  return solve_m1_fixed_point(FemProblem{&sys.M, &op}, sys.K_hat, F, U0, cfg, sys.q_estimate,
                              iterate_log);
}

inline std::pair<PeriodicState, SolveReport> solve_m2_newton(const FemSystem& sys,
                                                             const NonlinearOperator& op,
                                                             const BlockRhs& F,
                                                             const PeriodicState& U0,
                                                             const SolverConfig& cfg) {
  return solve_m2_newton(FemProblem{&sys.M, &op}, F, U0, cfg);
}

inline std::pair<PeriodicState, SolveReport> solve_m3_timestepping(const FemSystem& sys,
                                                                   const NonlinearOperator& op,
                                                                   const BlockRhs& F,
                                                                   const PeriodicState& U0,
                                                                   const SolverConfig& cfg) {
  return solve_m3_timestepping(FemProblem{&sys.M, &op}, F, U0, cfg);
}

}  // namespace tpfem

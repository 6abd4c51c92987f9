#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tpfem/solve.hpp"
#include "tpfem/solvers.hpp"
#include "tpfem/sparse.hpp"
#include "tpfem/state.hpp"

namespace tpfem {

/// Scalar periodic ODE  m (u^n - u^{n-1})/tau + kappa(u^n) = f^n, u^0 = u^N:
/// the smallest instance of the block problem, with a monotone nonlinearity
/// whose strong-monotonicity and Lipschitz constants are known exactly.  The
/// default curve kappa(u) = u + 0.5 sin(u) has gamma = 0.5 and L = 1.5.
class ToyProblem {
 public:
  ToyProblem(double m, int steps, double tau, std::vector<double> f)
      : m_(m), steps_(steps), tau_(tau), f_(std::move(f)) {
    if (!(m >= 0)) throw std::invalid_argument("toy problem: mass must be >= 0");
    if (steps < 1) throw std::invalid_argument("toy problem: need at least one step");
    if (!(tau > 0)) throw std::invalid_argument("toy problem: step size must be positive");
    if (static_cast<int>(f_.size()) != steps)
      throw std::invalid_argument("toy problem: need one source sample per step");
    mass_ = SparseMatrix<double>::from_triplets(1, 1, {{0, 0, m_}}, true);
  }

  void set_kappa(std::function<double(double)> kappa, std::function<double(double)> kappa_prime,
                 double gamma, double lipschitz) {
    kappa_ = std::move(kappa);
    kappa_prime_ = std::move(kappa_prime);
    gamma_ = gamma;
    lipschitz_ = lipschitz;
  }

  double m() const { return m_; }
  int steps() const { return steps_; }
  double tau() const { return tau_; }
  double gamma() const { return gamma_; }
  double lipschitz() const { return lipschitz_; }
  double kappa(double u) const { return kappa_(u); }
  double kappa_prime(double u) const { return kappa_prime_(u); }

  BlockRhs rhs() const {
    BlockRhs F(steps_, 1);
    F.data = f_;
    return F;
  }

  // Block-problem interface shared with the assembled systems.
  Index n_dof() const { return 1; }
  const SparseMatrix<double>& mass() const { return mass_; }
  void apply_k(const double* u, double* out) const { out[0] = kappa_(u[0]); }
  SparseMatrix<double> jacobian_k(const double* u) const {
    return SparseMatrix<double>::from_triplets(1, 1, {{0, 0, kappa_prime_(u[0])}}, true);
  }

 private:
  double m_;
  int steps_;
  double tau_;
  std::vector<double> f_;
  std::function<double(double)> kappa_ = [](double u) { return u + 0.5 * std::sin(u); };
  std::function<double(double)> kappa_prime_ = [](double u) { return 1.0 + 0.5 * std::cos(u); };
  double gamma_ = 0.5;
  double lipschitz_ = 1.5;
  SparseMatrix<double> mass_;
};

/// Ground truth for the toy problem: assemble the whole N-unknown periodic
/// system densely and drive damped Newton to an absolute residual of 1e-12
/// (one extra polish step sharpens the tail well below that).
inline PeriodicState oracle_solve_dense(const ToyProblem& p) {
  const int N = p.steps();
  if (N > 1000) throw std::invalid_argument("dense oracle: too many unknowns");
  const double mt = p.m() / p.tau();
  const BlockRhs F = p.rhs();
  std::vector<double> x(static_cast<std::size_t>(N), 0.0);
  const auto residual_at = [&](const std::vector<double>& v) {
    std::vector<double> r(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      const double prev = v[static_cast<std::size_t>((i + N - 1) % N)];
      r[static_cast<std::size_t>(i)] = F.block(i)[0] - mt * (v[static_cast<std::size_t>(i)] - prev) -
                                       p.kappa(v[static_cast<std::size_t>(i)]);
    }
    return r;
  };
  std::vector<double> r = residual_at(x);
  double rnorm = norm2(r);
  // Residual evaluation carries roundoff of order (m/tau)*eps*|x| per entry,
  // so an absolute 1e-12 is unreachable once m/tau is large; scale by the
  // forcing instead.  Newton still drives the residual to the machine floor.
  const double target = 1e-12 * std::max(1.0, norm2(F.data));
  int polish = 1;
  for (int step = 0; step < 200; ++step) {
    if (rnorm <= 0.5 * target && polish-- <= 0) break;
    if (rnorm == 0) break;
    std::vector<double> J(static_cast<std::size_t>(N) * static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) {
      J[static_cast<std::size_t>(i) * N + i] = mt + p.kappa_prime(x[static_cast<std::size_t>(i)]);
      if (N > 1) J[static_cast<std::size_t>(i) * N + (i + N - 1) % N] -= mt;
    }
    const std::vector<double> delta = solve_dense(J, N, r);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 40; ++h) {
      std::vector<double> trial = x;
      for (int i = 0; i < N; ++i) trial[static_cast<std::size_t>(i)] += alpha * delta[static_cast<std::size_t>(i)];
      std::vector<double> rt = residual_at(trial);
      const double tnorm = norm2(rt);
      if (tnorm <= (1.0 - 1e-4 * alpha) * rnorm || tnorm <= 0.5 * target) {
        x = std::move(trial);
        r = std::move(rt);
        rnorm = tnorm;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No direction decreases the residual: we are at the rounding floor.
      if (rnorm <= target) break;
      throw SolveError("dense oracle: newton line search failed at residual " +
                           std::to_string(rnorm),
                       rnorm);
    }
  }
  if (!(rnorm <= target))
    throw SolveError("dense oracle: residual " + std::to_string(rnorm) + " above 1e-12", rnorm);
  PeriodicState U(N, 1, p.tau());
  for (int i = 0; i < N; ++i) U.block(i)[0] = x[static_cast<std::size_t>(i)];
  return U;
}

/// Runs the fixed-point iteration on the toy problem with scalar K_hat =
/// nu_hat and returns the exact error contraction ratios
/// |U^{k+1} - U*| / |U^k - U*| in the K_hat norm, with U* from the dense
/// oracle.  Ratios stop once the error reaches the oracle's noise floor.
inline std::vector<double> verify_contraction(const ToyProblem& p, double nu_hat, int k_iters,
                                              const PeriodicState* start = nullptr) {
  if (!(nu_hat > 0)) throw std::invalid_argument("verify_contraction: nu_hat must be positive");
  if (k_iters < 1) throw std::invalid_argument("verify_contraction: need at least one iteration");
  const PeriodicState exact = oracle_solve_dense(p);
  const SparseMatrix<double> K_hat =
      SparseMatrix<double>::from_triplets(1, 1, {{0, 0, nu_hat}}, true);
  SolverConfig cfg;
  cfg.tol = 1e-300;  // run all requested iterations
  cfg.m1_max_outer = k_iters;
  PeriodicState U0 = start ? *start : PeriodicState(p.steps(), 1, p.tau());
  std::vector<PeriodicState> iterates;
  solve_m1_fixed_point(p, K_hat, p.rhs(), U0, cfg,
                       std::numeric_limits<double>::quiet_NaN(), &iterates);
  std::vector<double> errors;
  errors.reserve(iterates.size());
  for (const PeriodicState& it : iterates) {
    PeriodicState diff = it;
    for (std::size_t l = 0; l < diff.data.size(); ++l) diff.data[l] -= exact.data[l];
    errors.push_back(block_norm_khat(diff, K_hat));
  }
  // Below this the oracle's own ~1e-13 relative error would contaminate the
  // ratios by more than 1e-4.
  const double floor = 1e-9 * std::max(1.0, block_norm_khat(exact, K_hat));
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k] <= floor || errors[k + 1] <= floor) break;
    ratios.push_back(errors[k + 1] / errors[k]);
  }
  return ratios;
}

/// Strong monotonicity margin of the all-at-once operator: samples random
/// pairs U, V in [-3,3]^N and returns the minimum over trials of
/// <A(U)-A(V), U-V> - gamma*|U-V|^2, which theory keeps >= 0 (the mass term
/// telescopes to a non-negative circulant quadratic).
inline double verify_monotonicity(const ToyProblem& p, int trials,
                                  unsigned long long seed = 0x5eed2024ull) {
  if (trials < 1) throw std::invalid_argument("verify_monotonicity: need at least one trial");
  const int N = p.steps();
  const double mt = p.m() / p.tau();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  const auto apply_block = [&](const std::vector<double>& v, std::vector<double>& av) {
    for (int i = 0; i < N; ++i) {
      const double prev = v[static_cast<std::size_t>((i + N - 1) % N)];
      av[static_cast<std::size_t>(i)] =
          mt * (v[static_cast<std::size_t>(i)] - prev) + p.kappa(v[static_cast<std::size_t>(i)]);
    }
  };
  double worst = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(N)), v(static_cast<std::size_t>(N));
  std::vector<double> au(static_cast<std::size_t>(N)), av(static_cast<std::size_t>(N));
  for (int trial = 0; trial < trials; ++trial) {
    for (int i = 0; i < N; ++i) {
      u[static_cast<std::size_t>(i)] = dist(rng);
      v[static_cast<std::size_t>(i)] = dist(rng);
    }
    apply_block(u, au);
    apply_block(v, av);
    double inner = 0, dist2 = 0;
    for (int i = 0; i < N; ++i) {
      const double d = u[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i)];
      inner += (au[static_cast<std::size_t>(i)] - av[static_cast<std::size_t>(i)]) * d;
      dist2 += d * d;
    }
    worst = std::min(worst, inner - p.gamma() * dist2);
  }
  return worst;
}

/// Richardson-type contraction of the scalar fixed point u <- u - omega*(kappa(u) - f):
/// q(omega)^2 = 1 - 2*omega*gamma + omega^2 L^2, minimized at omega = gamma/L^2.
inline double richardson_contraction(double gamma, double L, double omega) {
  return std::sqrt(std::max(0.0, 1.0 - 2.0 * omega * gamma + omega * omega * L * L));
}

inline double richardson_weight_opt(double gamma, double L) { return gamma / (L * L); }

inline double richardson_q_opt(double gamma, double L) {
  return std::sqrt(std::max(0.0, 1.0 - (gamma * gamma) / (L * L)));
}

/// Contraction of the averaged choice nu_hat = (gamma+L)/2.
inline double midpoint_contraction(double gamma, double L) { return (L - gamma) / (L + gamma); }

}  // namespace tpfem

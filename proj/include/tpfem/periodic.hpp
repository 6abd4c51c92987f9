#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tpfem/assembly.hpp"
#include "tpfem/fft.hpp"
#include "tpfem/parallel.hpp"
#include "tpfem/solve.hpp"
#include "tpfem/sparse.hpp"
#include "tpfem/state.hpp"

namespace tpfem {

/// Couples a mass matrix and the nonlinear operator into the block problem
/// interface shared by all periodic solvers: a mass action plus a (possibly
/// nonlinear) stiffness action and its Jacobian.
struct FemProblem {
  const SparseMatrix<double>* M;
  const NonlinearOperator* op;

  Index n_dof() const { return op->n_dof(); }
  const SparseMatrix<double>& mass() const { return *M; }
  void apply_k(const double* u, double* out) const { op->apply(u, out); }
  SparseMatrix<double> jacobian_k(const double* u) const { return op->jacobian(u); }
};

/// Block residual F - A(U) with A(U)^n = M(u^n - u^{n-1})/tau + K(u^n) and
/// the periodic wrap u^0 = u^N.
template <class Problem>
BlockRhs residual(const Problem& p, const PeriodicState& U, const BlockRhs& F, int threads = 1) {
  const int N = U.steps;
  const Index n = p.n_dof();
  if (F.steps != N || F.n_dof != n || U.n_dof != n)
    throw std::invalid_argument("periodic residual: shape mismatch");
  BlockRhs R(N, n);
  const SparseMatrix<double>& M = p.mass();
  parallel_for(0, N, threads, [&](int i) {
    const double* u = U.block(i);
    const double* uprev = U.block((i + N - 1) % N);
    double* r = R.block(i);
    std::vector<double> ku(static_cast<std::size_t>(n));
    std::vector<double> du(static_cast<std::size_t>(n));
    p.apply_k(u, ku.data());
    for (Index j = 0; j < n; ++j) du[static_cast<std::size_t>(j)] = (u[j] - uprev[j]) / U.tau;
    std::vector<double> mdu(static_cast<std::size_t>(n));
    M.multiply(du.data(), mdu.data());
    const double* f = F.block(i);
    for (Index j = 0; j < n; ++j)
      r[j] = f[j] - mdu[static_cast<std::size_t>(j)] - ku[static_cast<std::size_t>(j)];
  });
  return R;
}

inline BlockRhs residual(const FemSystem& sys, const NonlinearOperator& op, const PeriodicState& U,
                         const BlockRhs& F, int threads = 1) {
  return residual(FemProblem{&sys.M, &op}, U, F, threads);
}

inline double block_l2(const BlockRhs& R) {
  return norm2(R.data);
}

/// sqrt of sum_n (u^n)^T K_hat u^n.
inline double block_norm_khat(const PeriodicState& U, const SparseMatrix<double>& K_hat) {
  if (K_hat.rows() != U.n_dof) throw std::invalid_argument("block norm: shape mismatch");
  double acc = 0;
  for (int i = 0; i < U.steps; ++i) acc += K_hat.quadratic_form(U.block(i));
  return std::sqrt(std::max(0.0, acc));
}

/// sqrt of sum_n (f^n)^T K_hat^{-1} f^n, one solve per block.  Extra workers
/// get factorization clones; per-block values are reduced sequentially, so
/// the result does not depend on the thread count.
inline double block_dualnorm_khat(const BlockRhs& F, const SparseSolver<double>& khat_solver,
                                  int threads = 1) {
  if (khat_solver.size() != F.n_dof) throw std::invalid_argument("dual norm: shape mismatch");
  std::vector<double> terms(static_cast<std::size_t>(F.steps));
  parallel_chunks(F.steps, threads, [&](int lo, int hi, int worker) {
    std::unique_ptr<SparseSolver<double>> local;
    const SparseSolver<double>* solver = &khat_solver;
    if (worker > 0) {
      local = std::make_unique<SparseSolver<double>>(khat_solver.clone());
      solver = local.get();
    }
    std::vector<double> f(static_cast<std::size_t>(F.n_dof));
    for (int i = lo; i < hi; ++i) {
      std::copy(F.block(i), F.block(i) + F.n_dof, f.begin());
      const std::vector<double> x = solver->solve(f);
      double dot = 0;
      for (Index j = 0; j < F.n_dof; ++j) dot += x[static_cast<std::size_t>(j)] * f[static_cast<std::size_t>(j)];
      terms[static_cast<std::size_t>(i)] = dot;
    }
  });
  double acc = 0;
  for (double t : terms) acc += t;
  return std::sqrt(std::max(0.0, acc));
}

enum class CachePolicy {
  automatic,  ///< cache frequency factorizations when the estimate fits the budget
  always,
  never,
};

struct PeriodicSolverOptions {
  int threads = 1;
  TransformKind transform = TransformKind::automatic;
  CachePolicy cache = CachePolicy::automatic;
  std::size_t cache_budget_bytes = std::size_t{1536} << 20;
  double imag_tol = 1e-9;
};

/// Solves the linear time-periodic system  M(u^n - u^{n-1})/tau + K_hat u^n = g^n,
/// u^0 = u^N, by diagonalizing the circulant time coupling with a DFT.  The
/// backward-difference symbol lambda_k = (1 - e^{-2 pi i k/N})/tau makes each
/// frequency block (lambda_k M + K_hat) exactly decoupled, so the result is
/// the direct solution of the block system up to linear-solver tolerance.
/// Blocks are complex symmetric, not Hermitian; conjugate symmetry of real
/// input halves the work (k and N-k are conjugate solutions).
class PeriodicSolver {
 public:
  PeriodicSolver(const SparseMatrix<double>& M, const SparseMatrix<double>& K_hat, double tau,
                 int steps, PeriodicSolverOptions opts = {})
      : M_(M), K_(K_hat), tau_(tau), steps_(steps), opt_(opts), plan_(steps, opts.transform) {
    if (M.rows() != M.cols() || K_hat.rows() != K_hat.cols() || M.rows() != K_hat.rows())
      throw std::invalid_argument("periodic solver: M and K_hat must be square and equal-sized");
    if (!(tau > 0)) throw std::invalid_argument("periodic solver: step size must be positive");
    if (steps < 1) throw std::invalid_argument("periodic solver: need at least one step");
    Mc_ = to_complex(M_);
    Kc_ = to_complex(K_);
    n_half_ = steps_ / 2;
    decide_cache();
  }

  int steps() const { return steps_; }
  Index n_dof() const { return K_.rows(); }
  bool caching() const { return cache_; }

  /// Backward-difference circulant symbol for frequency k.
  std::complex<double> symbol(int k) const {
    if (k == 0) return {0.0, 0.0};
    if (2 * k == steps_) return {2.0 / tau_, 0.0};
    const std::complex<double> root =
        std::polar(1.0, -2.0 * std::numbers::pi * k / steps_);
    return (1.0 - root) / tau_;
  }

  PeriodicState solve(const BlockRhs& G) const {
    const Index n = n_dof();
    const int N = steps_;
    if (G.steps != N || G.n_dof != n)
      throw std::invalid_argument("periodic solver: rhs shape mismatch");
    std::vector<std::complex<double>> work(static_cast<std::size_t>(N) *
                                           static_cast<std::size_t>(n));
    // Dof-major columns: work[j*N + i] holds time index i of unknown j, so
    // each transform runs over contiguous memory.
    parallel_for(0, n, opt_.threads, [&](Index j) {
      std::complex<double>* col = work.data() + static_cast<std::size_t>(j) * N;
      for (int i = 0; i < N; ++i) col[i] = G.block(i)[j];
      plan_.forward(col);
    });
    parallel_for(0, n_half_ + 1, opt_.threads, [&](int k) {
      solve_frequency(k, work.data());
    });
    PeriodicState U(N, n, tau_);
    std::vector<double> re2(static_cast<std::size_t>(n), 0.0);
    std::vector<double> im2(static_cast<std::size_t>(n), 0.0);
    parallel_for(0, n, opt_.threads, [&](Index j) {
      std::complex<double>* col = work.data() + static_cast<std::size_t>(j) * N;
      plan_.inverse(col);
      double r = 0, m = 0;
      for (int i = 0; i < N; ++i) {
        U.block(i)[j] = col[i].real();
        r += col[i].real() * col[i].real();
        m += col[i].imag() * col[i].imag();
      }
      re2[static_cast<std::size_t>(j)] = r;
      im2[static_cast<std::size_t>(j)] = m;
    });
    double re_total = 0, im_total = 0;
    for (Index j = 0; j < n; ++j) {
      re_total += re2[static_cast<std::size_t>(j)];
      im_total += im2[static_cast<std::size_t>(j)];
    }
    const double re_norm = std::sqrt(re_total), im_norm = std::sqrt(im_total);
    if (im_norm > opt_.imag_tol * std::max(re_norm, 1e-300))
      throw SolveError("periodic solver: imaginary residue " + std::to_string(im_norm) +
                           " exceeds " + std::to_string(opt_.imag_tol) + " x " +
                           std::to_string(re_norm),
                       im_norm / std::max(re_norm, 1e-300));
    return U;
  }

 private:
  bool symbol_is_real(int k) const { return k == 0 || 2 * k == steps_; }

  SparseMatrix<double> real_block(int k) const {
    return add_scaled(symbol(k).real(), M_, 1.0, K_);
  }

  SparseMatrix<std::complex<double>> complex_block(int k) const {
    return add_scaled(symbol(k), Mc_, {1.0, 0.0}, Kc_);
  }

  void decide_cache() {
    switch (opt_.cache) {
      case CachePolicy::never:
        cache_ = false;
        return;
      case CachePolicy::always:
        cache_ = true;
        break;
      case CachePolicy::automatic: {
        // Measure one representative complex factorization and extrapolate.
        if (n_half_ >= 1 && !symbol_is_real(1)) {
          auto probe = std::make_unique<SparseSolver<std::complex<double>>>(complex_block(1));
          const std::size_t per = probe->factor_bytes();
          cache_ = per * static_cast<std::size_t>(n_half_ + 1) <= opt_.cache_budget_bytes;
          if (cache_) {
            cplx_cache_.resize(static_cast<std::size_t>(n_half_) + 1);
            cplx_cache_[1] = std::move(probe);
          }
        } else {
          cache_ = true;  // at most two real factorizations
        }
        break;
      }
    }
    if (!cache_) return;
    real_cache_.resize(static_cast<std::size_t>(n_half_) + 1);
    if (cplx_cache_.size() != static_cast<std::size_t>(n_half_) + 1)
      cplx_cache_.resize(static_cast<std::size_t>(n_half_) + 1);
    parallel_for(0, n_half_ + 1, opt_.threads, [&](int k) {
      if (symbol_is_real(k)) {
        real_cache_[static_cast<std::size_t>(k)] =
            std::make_unique<SparseSolver<double>>(real_block(k));
      } else if (!cplx_cache_[static_cast<std::size_t>(k)]) {
        cplx_cache_[static_cast<std::size_t>(k)] =
            std::make_unique<SparseSolver<std::complex<double>>>(complex_block(k));
      }
    });
  }

  /// Solves frequency k in place in the dof-major workspace and mirrors the
  /// conjugate solution onto frequency N-k.
  void solve_frequency(int k, std::complex<double>* work) const {
    const Index n = n_dof();
    const int N = steps_;
    const int mirror = (k == 0) ? 0 : N - k;
    if (symbol_is_real(k)) {
      const SparseSolver<double>* solver = cache_ ? real_cache_[static_cast<std::size_t>(k)].get() : nullptr;
      std::unique_ptr<SparseSolver<double>> local;
      if (!solver) {
        local = std::make_unique<SparseSolver<double>>(real_block(k));
        solver = local.get();
      }
      std::vector<double> bre(static_cast<std::size_t>(n)), bim(static_cast<std::size_t>(n));
      for (Index j = 0; j < n; ++j) {
        bre[static_cast<std::size_t>(j)] = work[static_cast<std::size_t>(j) * N + k].real();
        bim[static_cast<std::size_t>(j)] = work[static_cast<std::size_t>(j) * N + k].imag();
      }
      const std::vector<double> xre = solver->solve(bre);
      const std::vector<double> xim = solver->solve(bim);
      for (Index j = 0; j < n; ++j)
        work[static_cast<std::size_t>(j) * N + k] = {xre[static_cast<std::size_t>(j)],
                                                     xim[static_cast<std::size_t>(j)]};
      return;
    }
    const SparseSolver<std::complex<double>>* solver =
        cache_ ? cplx_cache_[static_cast<std::size_t>(k)].get() : nullptr;
    std::unique_ptr<SparseSolver<std::complex<double>>> local;
    if (!solver) {
      local = std::make_unique<SparseSolver<std::complex<double>>>(complex_block(k));
      solver = local.get();
    }
    std::vector<std::complex<double>> b(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) b[static_cast<std::size_t>(j)] = work[static_cast<std::size_t>(j) * N + k];
    const std::vector<std::complex<double>> x = solver->solve(b);
    for (Index j = 0; j < n; ++j) {
      work[static_cast<std::size_t>(j) * N + k] = x[static_cast<std::size_t>(j)];
      work[static_cast<std::size_t>(j) * N + mirror] = std::conj(x[static_cast<std::size_t>(j)]);
    }
  }

  SparseMatrix<double> M_, K_;
  SparseMatrix<std::complex<double>> Mc_, Kc_;
  double tau_;
  int steps_;
  PeriodicSolverOptions opt_;
  DftPlan plan_;
  int n_half_ = 0;
  bool cache_ = false;
  std::vector<std::unique_ptr<SparseSolver<double>>> real_cache_;
  std::vector<std::unique_ptr<SparseSolver<std::complex<double>>>> cplx_cache_;
};

/// One-shot convenience wrapper around PeriodicSolver.
inline PeriodicState dft_periodic_solve(const SparseMatrix<double>& M,
                                        const SparseMatrix<double>& K_hat, const BlockRhs& G,
                                        double tau, PeriodicSolverOptions opts = {}) {
  opts.cache = CachePolicy::never;
  return PeriodicSolver(M, K_hat, tau, G.steps, opts).solve(G);
}

}  // namespace tpfem

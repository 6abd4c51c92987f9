#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tpfem/sparse.hpp"

namespace tpfem {

/// Thrown when a linear solve cannot meet its residual contract.
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what, double residual = -1.0)
      : std::runtime_error(what), residual_(residual) {}
  /// Relative residual actually achieved, or -1 if the factorization failed outright.
  double residual() const { return residual_; }

 private:
  double residual_;
};

namespace detail {

template <class Scalar>
Eigen::SparseMatrix<Scalar> to_eigen(const SparseMatrix<Scalar>& A) {
  Eigen::SparseMatrix<Scalar> E(A.rows(), A.cols());
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(static_cast<std::size_t>(A.nnz()));
  for (Index r = 0; r < A.rows(); ++r)
    for (Index k = A.row_offsets()[static_cast<std::size_t>(r)];
         k < A.row_offsets()[static_cast<std::size_t>(r) + 1]; ++k)
      trips.emplace_back(r, A.col_indices()[static_cast<std::size_t>(k)],
                         A.values()[static_cast<std::size_t>(k)]);
  E.setFromTriplets(trips.begin(), trips.end());
  E.makeCompressed();
  return E;
}

}  // namespace detail

/// Direct factorization of a square sparse matrix.  Symmetric-flagged real
/// matrices go through LDLT, everything else through LU.  Every solve checks
/// the relative residual against kResidualTol and throws SolveError on
/// failure, so callers never consume a silently bad solution.
template <class Scalar>
class SparseSolver {
 public:
  static constexpr double kResidualTol = 1e-10;

  explicit SparseSolver(const SparseMatrix<Scalar>& A) : A_(A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("sparse solver needs a square matrix");
    if (A.rows() == 0) throw std::invalid_argument("sparse solver: empty matrix");
    factorize();
  }

  Index size() const { return A_.rows(); }
  const SparseMatrix<Scalar>& matrix() const { return A_; }

  std::vector<Scalar> solve(const std::vector<Scalar>& b) const {
    if (static_cast<Index>(b.size()) != A_.rows())
      throw std::invalid_argument("sparse solve: rhs size mismatch");
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return std::vector<Scalar>(b.size(), Scalar{});
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Eigen::Map<const Vec> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    Vec x;
    if (ldlt_)
      x = ldlt_->solve(bv);
    else
      x = lu_->solve(bv);
    std::vector<Scalar> out(static_cast<std::size_t>(x.size()));
    Eigen::Map<Vec>(out.data(), x.size()) = x;
    std::vector<Scalar> Ax(out.size());
    A_.multiply(out.data(), Ax.data());
    double rnorm = 0;
    for (std::size_t i = 0; i < Ax.size(); ++i) rnorm += std::norm(Ax[i] - b[i]);
    rnorm = std::sqrt(rnorm);
    const double rel = rnorm / bnorm;
    if (!(rel <= kResidualTol))
      throw SolveError("sparse solve: relative residual " + std::to_string(rel) +
                           " exceeds tolerance",
                       rel);
    return out;
  }

  /// Independent factorization of the same matrix, for per-thread use.
  SparseSolver clone() const { return SparseSolver(A_); }

  /// Rough memory footprint of the stored factors, for cache budgeting.
  std::size_t factor_bytes() const {
    const std::size_t per_entry = sizeof(Scalar) + 8;
    if (ldlt_)
      return static_cast<std::size_t>(ldlt_->matrixL().nestedExpression().nonZeros()) * per_entry;
    return static_cast<std::size_t>(lu_->nnzL() + lu_->nnzU()) * per_entry;
  }

 private:
  using EigenSparse = Eigen::SparseMatrix<Scalar>;

  void factorize() {
    E_ = detail::to_eigen(A_);
    if constexpr (std::is_same_v<Scalar, double>) {
      if (A_.symmetric()) {
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<EigenSparse>>();
        ldlt_->compute(E_);
        if (ldlt_->info() == Eigen::Success) return;
        ldlt_.reset();
      }
    }
    lu_ = std::make_unique<Eigen::SparseLU<EigenSparse>>();
    lu_->compute(E_);
    if (lu_->info() != Eigen::Success)
      throw SolveError("sparse solve: factorization failed (singular matrix?)");
  }

  SparseMatrix<Scalar> A_;
  EigenSparse E_;
  std::unique_ptr<Eigen::SimplicialLDLT<EigenSparse>> ldlt_;
  std::unique_ptr<Eigen::SparseLU<EigenSparse>> lu_;
};

template <class Scalar>
std::vector<Scalar> solve_sparse(const SparseMatrix<Scalar>& A, const std::vector<Scalar>& b) {
  return SparseSolver<Scalar>(A).solve(b);
}

/// Dense LU solve; A is row-major n*n.  Detects matrices that are singular to
/// working precision through the normwise backward error.
template <class Scalar>
std::vector<Scalar> solve_dense(const std::vector<Scalar>& A, Index n,
                                const std::vector<Scalar>& b) {
  if (static_cast<Index>(A.size()) != n * n || static_cast<Index>(b.size()) != n)
    throw std::invalid_argument("dense solve: size mismatch");
  if (n == 0) return {};
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return std::vector<Scalar>(b.size(), Scalar{});
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Eigen::Map<const Mat> Am(A.data(), n, n);
  Eigen::Map<const Vec> bv(b.data(), n);
  Vec x = Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(Am).solve(bv);
  const Vec r = Am * x - bv;
  const double anorm = Am.template lpNorm<Eigen::Infinity>();
  const double backward = r.template lpNorm<Eigen::Infinity>() /
                          (anorm * x.template lpNorm<Eigen::Infinity>() + bnorm);
  if (!std::isfinite(backward) || backward > 1e-12 * n)
    throw SolveError("dense solve: matrix is singular to working precision", backward);
  std::vector<Scalar> out(static_cast<std::size_t>(n));
  Eigen::Map<Vec>(out.data(), n) = x;
  return out;
}

}  // namespace tpfem

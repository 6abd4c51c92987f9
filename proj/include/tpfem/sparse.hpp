#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpfem {

using Index = int;

template <class Scalar>
struct Triplet {
  Index row = 0;
  Index col = 0;
  Scalar value{};
};

namespace detail {

inline std::uint64_t value_bits(double x) { return std::bit_cast<std::uint64_t>(x); }

inline bool value_less(double a, double b) { return value_bits(a) < value_bits(b); }

inline bool value_less(const std::complex<double>& a, const std::complex<double>& b) {
  const auto ar = value_bits(a.real()), br = value_bits(b.real());
  if (ar != br) return ar < br;
  return value_bits(a.imag()) < value_bits(b.imag());
}

}  // namespace detail

/// Compressed-row sparse matrix.  Column indices within a row are strictly
/// increasing and duplicate triplets are summed on construction in an order
/// fixed by (row, col, value bit pattern), so assembly results are identical
/// no matter how the triplet list was produced.
template <class Scalar>
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(Index rows, Index cols)
      : rows_(rows), cols_(cols), row_offsets_(static_cast<std::size_t>(rows) + 1, 0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("sparse matrix: negative dimension");
  }

  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet<Scalar>> entries,
                                    bool symmetric = false) {
    SparseMatrix A(rows, cols);
    A.symmetric_ = symmetric;
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw std::invalid_argument("sparse matrix: triplet (" + std::to_string(t.row) + ", " +
                                    std::to_string(t.col) + ") outside " + std::to_string(rows) +
                                    "x" + std::to_string(cols));
    }
    std::sort(entries.begin(), entries.end(),
              [](const Triplet<Scalar>& a, const Triplet<Scalar>& b) {
                if (a.row != b.row) return a.row < b.row;
                if (a.col != b.col) return a.col < b.col;
                return detail::value_less(a.value, b.value);
              });
    std::size_t i = 0;
    while (i < entries.size()) {
      std::size_t j = i;
      Scalar sum{};
      while (j < entries.size() && entries[j].row == entries[i].row &&
             entries[j].col == entries[i].col) {
        sum += entries[j].value;
        ++j;
      }
      A.col_indices_.push_back(entries[i].col);
      A.values_.push_back(sum);
      ++A.row_offsets_[static_cast<std::size_t>(entries[i].row) + 1];
      i = j;
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r)
      A.row_offsets_[r + 1] += A.row_offsets_[r];
    return A;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  bool symmetric() const { return symmetric_; }

  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<Scalar>& values() const { return values_; }
  std::vector<Scalar>& values() { return values_; }

  /// y = A x
  void multiply(const Scalar* x, Scalar* y) const {
    for (Index r = 0; r < rows_; ++r) {
      Scalar acc{};
      for (Index k = row_offsets_[static_cast<std::size_t>(r)];
           k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
        acc += values_[static_cast<std::size_t>(k)] * x[col_indices_[static_cast<std::size_t>(k)]];
      y[r] = acc;
    }
  }

  std::vector<Scalar> multiply(const std::vector<Scalar>& x) const {
    if (static_cast<Index>(x.size()) != cols_)
      throw std::invalid_argument("sparse multiply: size mismatch");
    std::vector<Scalar> y(static_cast<std::size_t>(rows_));
    multiply(x.data(), y.data());
    return y;
  }

  /// y = A^T x
  void multiply_transpose(const Scalar* x, Scalar* y) const {
    std::fill(y, y + cols_, Scalar{});
    for (Index r = 0; r < rows_; ++r)
      for (Index k = row_offsets_[static_cast<std::size_t>(r)];
           k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
        y[col_indices_[static_cast<std::size_t>(k)]] += values_[static_cast<std::size_t>(k)] * x[r];
  }

  std::vector<Scalar> multiply_transpose(const std::vector<Scalar>& x) const {
    if (static_cast<Index>(x.size()) != rows_)
      throw std::invalid_argument("sparse multiply: size mismatch");
    std::vector<Scalar> y(static_cast<std::size_t>(cols_));
    multiply_transpose(x.data(), y.data());
    return y;
  }

  Scalar quadratic_form(const std::vector<Scalar>& x) const {
    if (static_cast<Index>(x.size()) != rows_)
      throw std::invalid_argument("quadratic form: size mismatch");
    return quadratic_form(x.data());
  }

  /// x^T A x (no conjugation)
  Scalar quadratic_form(const Scalar* x) const {
    if (rows_ != cols_) throw std::invalid_argument("quadratic form needs a square matrix");
    Scalar acc{};
    for (Index r = 0; r < rows_; ++r) {
      Scalar row{};
      for (Index k = row_offsets_[static_cast<std::size_t>(r)];
           k < row_offsets_[static_cast<std::size_t>(r) + 1]; ++k)
        row += values_[static_cast<std::size_t>(k)] * x[col_indices_[static_cast<std::size_t>(k)]];
      acc += x[r] * row;
    }
    return acc;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  bool symmetric_ = false;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<Scalar> values_;
};

/// alpha*A + beta*B on the union of the two patterns.
template <class Scalar, class SA, class SB>
SparseMatrix<Scalar> add_scaled(Scalar alpha, const SparseMatrix<SA>& A, Scalar beta,
                                const SparseMatrix<SB>& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("add_scaled: dimension mismatch");
  std::vector<Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(A.nnz() + B.nnz()));
  for (Index r = 0; r < A.rows(); ++r) {
    for (Index k = A.row_offsets()[static_cast<std::size_t>(r)];
         k < A.row_offsets()[static_cast<std::size_t>(r) + 1]; ++k)
      entries.push_back({r, A.col_indices()[static_cast<std::size_t>(k)],
                         alpha * Scalar(A.values()[static_cast<std::size_t>(k)])});
    for (Index k = B.row_offsets()[static_cast<std::size_t>(r)];
         k < B.row_offsets()[static_cast<std::size_t>(r) + 1]; ++k)
      entries.push_back({r, B.col_indices()[static_cast<std::size_t>(k)],
                         beta * Scalar(B.values()[static_cast<std::size_t>(k)])});
  }
  return SparseMatrix<Scalar>::from_triplets(A.rows(), A.cols(), std::move(entries),
                                             A.symmetric() && B.symmetric());
}

inline SparseMatrix<std::complex<double>> to_complex(const SparseMatrix<double>& A) {
  std::vector<Triplet<std::complex<double>>> entries;
  entries.reserve(static_cast<std::size_t>(A.nnz()));
  for (Index r = 0; r < A.rows(); ++r)
    for (Index k = A.row_offsets()[static_cast<std::size_t>(r)];
         k < A.row_offsets()[static_cast<std::size_t>(r) + 1]; ++k)
      entries.push_back({r, A.col_indices()[static_cast<std::size_t>(k)],
                         std::complex<double>(A.values()[static_cast<std::size_t>(k)], 0.0)});
  return SparseMatrix<std::complex<double>>::from_triplets(A.rows(), A.cols(), std::move(entries),
                                                           A.symmetric());
}

inline double norm2(const std::vector<double>& x) {
  double acc = 0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

inline double norm2(const std::vector<std::complex<double>>& x) {
  double acc = 0;
  for (const auto& v : x) acc += std::norm(v);
  return std::sqrt(acc);
}

}  // namespace tpfem

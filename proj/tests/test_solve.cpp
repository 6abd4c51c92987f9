#include "tpfem/solve.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "tpfem/sparse.hpp"

namespace {

using tpfem::SparseMatrix;
using tpfem::SparseSolver;
using tpfem::Triplet;

TEST(SparseSolver, Identity) {
  std::vector<Triplet<double>> entries;
  for (int i = 0; i < 3; ++i) entries.push_back({i, i, 1.0});
  const auto a = SparseMatrix<double>::from_triplets(3, 3, entries, true);
  SparseSolver<double> solver(a);
  const std::vector<double> x = solver.solve({1.0, -2.0, 3.0});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], -2.0);
  EXPECT_DOUBLE_EQ(x[2], 3.0);
}

TEST(SparseSolver, OneByOneComplex) {
  using C = std::complex<double>;
  const auto a = SparseMatrix<C>::from_triplets(1, 1, {{0, 0, C(2.0, 2.0)}});
  SparseSolver<C> solver(a);
  // (2 + 2i) x = 4  =>  x = 1 - i.
  const std::vector<C> x = solver.solve({C(4.0, 0.0)});
  EXPECT_NEAR(x[0].real(), 1.0, 1e-14);
  EXPECT_NEAR(x[0].imag(), -1.0, 1e-14);
}

TEST(SparseSolver, RandomSpdResidual) {
  // Tridiagonal SPD matrix with random positive diagonal boosts.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  const int n = 50;
  std::vector<Triplet<double>> entries;
  for (int i = 0; i < n; ++i) {
    entries.push_back({i, i, 2.0 + dist(rng)});
    if (i + 1 < n) {
      entries.push_back({i, i + 1, -1.0});
      entries.push_back({i + 1, i, -1.0});
    }
  }
  const auto a = SparseMatrix<double>::from_triplets(n, n, entries, true);
  std::vector<double> b(n);
  for (double& v : b) v = dist(rng) - 0.5;
  SparseSolver<double> solver(a);
  const std::vector<double> x = solver.solve(b);
  std::vector<double> r = a.multiply(x);
  for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] -= b[static_cast<std::size_t>(i)];
  EXPECT_LE(tpfem::norm2(r), 1e-10 * tpfem::norm2(b));
  EXPECT_GT(solver.factor_bytes(), 0u);
}

TEST(SparseSolver, HilbertFourByFour) {
  // H x = (1,1,1,1) has the exact solution given by the row sums of the
  // inverse Hilbert matrix: (-4, 60, -180, 140).
  std::vector<Triplet<double>> entries;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) entries.push_back({i, j, 1.0 / (i + j + 1)});
  const auto h = SparseMatrix<double>::from_triplets(4, 4, entries, true);
  SparseSolver<double> solver(h);
  const std::vector<double> x = solver.solve({1.0, 1.0, 1.0, 1.0});
  const double expected[] = {-4.0, 60.0, -180.0, 140.0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], expected[i], 1e-8);
}

TEST(SparseSolver, SingularMatrixThrows) {
  const auto a = SparseMatrix<double>::from_triplets(
      2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}}, true);
  EXPECT_THROW(
      {
        SparseSolver<double> solver(a);
        solver.solve({1.0, 0.0});
      },
      tpfem::SolveError);
}

TEST(SparseSolver, CloneSolvesIndependently) {
  const auto a = SparseMatrix<double>::from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 4.0}}, true);
  SparseSolver<double> solver(a);
  SparseSolver<double> copy = solver.clone();
  const std::vector<double> x = copy.solve({2.0, 4.0});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);
}

TEST(DenseSolver, TwoByTwo) {
  // [[2, 1], [1, 3]] x = (5, 10)  =>  x = (1, 3).
  const std::vector<double> a = {2.0, 1.0, 1.0, 3.0};
  const std::vector<double> x = tpfem::solve_dense<double>(a, 2, {5.0, 10.0});
  EXPECT_NEAR(x[0], 1.0, 1e-12);
  EXPECT_NEAR(x[1], 3.0, 1e-12);
}

TEST(DenseSolver, ComplexDiagonal) {
  using C = std::complex<double>;
  const std::vector<C> a = {C(0.0, 2.0), C(0.0, 0.0), C(0.0, 0.0), C(1.0, 0.0)};
  const std::vector<C> x = tpfem::solve_dense<C>(a, 2, {C(2.0, 0.0), C(0.0, 3.0)});
  EXPECT_NEAR(x[0].real(), 0.0, 1e-14);
  EXPECT_NEAR(x[0].imag(), -1.0, 1e-14);
  EXPECT_NEAR(x[1].imag(), 3.0, 1e-14);
}

TEST(DenseSolver, SingularThrows) {
  const std::vector<double> a = {1.0, 1.0, 1.0, 1.0};
  EXPECT_THROW(tpfem::solve_dense<double>(a, 2, {1.0, 0.0}), tpfem::SolveError);
}

}  // namespace

#include "tpfem/fft.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace {

using tpfem::DftPlan;
using tpfem::TransformKind;
using C = std::complex<double>;

std::vector<C> random_signal(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<C> x(static_cast<std::size_t>(n));
  for (C& v : x) v = C(dist(rng), dist(rng));
  return x;
}

double max_abs_diff(const std::vector<C>& a, const std::vector<C>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Dft, RoundTripPowerOfTwo) {
  const DftPlan plan(8);
  const std::vector<C> x = random_signal(8, 1);
  std::vector<C> y = x;
  plan.forward(y.data());
  plan.inverse(y.data());
  EXPECT_LE(max_abs_diff(x, y), 1e-12);
}

TEST(Dft, RoundTripNonPowerOfTwo) {
  const DftPlan plan(6);
  const std::vector<C> x = random_signal(6, 2);
  std::vector<C> y = x;
  plan.forward(y.data());
  plan.inverse(y.data());
  EXPECT_LE(max_abs_diff(x, y), 1e-12);
}

TEST(Dft, LengthOneIsIdentity) {
  const DftPlan plan(1);
  std::vector<C> x = {C(2.0, -3.0)};
  plan.forward(x.data());
  EXPECT_NEAR(x[0].real(), 2.0, 1e-15);
  EXPECT_NEAR(x[0].imag(), -3.0, 1e-15);
  plan.inverse(x.data());
  EXPECT_NEAR(x[0].real(), 2.0, 1e-15);
}

TEST(Dft, ConstantSignalTransformsToDelta) {
  const int n = 16;
  const DftPlan plan(n);
  std::vector<C> x(n, C(1.0, 0.0));
  plan.forward(x.data());
  EXPECT_NEAR(x[0].real(), static_cast<double>(n), 1e-12);
  for (int k = 1; k < n; ++k) EXPECT_LE(std::abs(x[static_cast<std::size_t>(k)]), 1e-12);
}

TEST(Dft, SingleModeLandsInOneBin) {
  const int n = 8;
  const int mode = 3;
  const DftPlan plan(n);
  std::vector<C> x(n);
  for (int j = 0; j < n; ++j)
    x[static_cast<std::size_t>(j)] =
        std::polar(1.0, 2.0 * std::numbers::pi * mode * j / n);
  plan.forward(x.data());
  for (int k = 0; k < n; ++k) {
    const double expected = (k == mode) ? static_cast<double>(n) : 0.0;
    EXPECT_NEAR(std::abs(x[static_cast<std::size_t>(k)]), expected, 1e-12) << "bin " << k;
  }
}

TEST(Dft, Radix2MatchesDirect) {
  for (int n : {2, 4, 16, 64}) {
    const DftPlan fast(n, TransformKind::radix2);
    const DftPlan slow(n, TransformKind::direct);
    const std::vector<C> x = random_signal(n, static_cast<unsigned>(n));
    std::vector<C> a = x;
    std::vector<C> b = x;
    fast.forward(a.data());
    slow.forward(b.data());
    EXPECT_LE(max_abs_diff(a, b), 1e-12) << "n = " << n;
    fast.inverse(a.data());
    slow.inverse(b.data());
    EXPECT_LE(max_abs_diff(a, b), 1e-12) << "n = " << n;
  }
}

TEST(Dft, Radix2RejectsNonPowerOfTwo) {
  EXPECT_THROW(DftPlan(12, TransformKind::radix2), std::invalid_argument);
  EXPECT_THROW(DftPlan(0), std::invalid_argument);
}

// Forward then inverse scaling: inverse applies the 1/n factor, so a pure
// forward of a delta yields an all-ones spectrum.
TEST(Dft, DeltaTransformsToConstant) {
  const int n = 8;
  const DftPlan plan(n);
  std::vector<C> x(n, C(0.0, 0.0));
  x[0] = C(1.0, 0.0);
  plan.forward(x.data());
  for (int k = 0; k < n; ++k) {
    EXPECT_NEAR(x[static_cast<std::size_t>(k)].real(), 1.0, 1e-13);
    EXPECT_NEAR(x[static_cast<std::size_t>(k)].imag(), 0.0, 1e-13);
  }
}

}  // namespace

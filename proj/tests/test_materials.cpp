#include "tpfem/materials.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

using tpfem::MaterialCoefficients;
using tpfem::MaterialTable;
using tpfem::Region;

constexpr double kNuAir = 1e7 / (4.0 * std::numbers::pi);

TEST(Materials, IronCurveAnchors) {
  const MaterialTable table = MaterialTable::transformer();
  // At zero field the exponential is 1: nu = a + d = 5.85 + 23.15.
  EXPECT_DOUBLE_EQ(table.nu(Region::iron, 0.0), 29.0);
  // Far in saturation the exponential is capped at c: nu = a*c + d.
  EXPECT_DOUBLE_EQ(table.nu(Region::iron, 3.0), 5.85 * 136026.0 + 23.15);
  EXPECT_DOUBLE_EQ(table.nu(Region::iron, 3.0), 795775.25);
  // The cap makes the curve overflow-safe for any field strength.
  EXPECT_DOUBLE_EQ(table.nu(Region::iron, 1e6), 795775.25);
}

TEST(Materials, SteelCurveAnchors) {
  const MaterialTable table = MaterialTable::transformer();
  EXPECT_DOUBLE_EQ(table.nu(Region::steel, 0.0), 130.171 + 43.742);
  EXPECT_DOUBLE_EQ(table.nu(Region::steel, 0.0), 173.913);
  EXPECT_DOUBLE_EQ(table.at(Region::steel).sigma, 1e7);
  EXPECT_DOUBLE_EQ(table.at(Region::iron).sigma, 0.0);
}

TEST(Materials, AirIsLinear) {
  const MaterialTable table = MaterialTable::transformer();
  for (double s : {0.0, 0.5, 2.0, 100.0}) {
    EXPECT_DOUBLE_EQ(table.nu(Region::air, s), kNuAir);
    EXPECT_DOUBLE_EQ(table.nu(Region::winding_plus, s), kNuAir);
    EXPECT_DOUBLE_EQ(table.nu_prime(Region::air, s), 0.0);
  }
}

TEST(Materials, NuPrimeMatchesFiniteDifferences) {
  const MaterialTable table = MaterialTable::transformer();
  const double h = 1e-6;
  for (Region r : {Region::iron, Region::steel}) {
    for (double s : {0.1, 0.8, 1.5, 2.0}) {
      const double fd = (table.nu(r, s + h) - table.nu(r, s - h)) / (2 * h);
      const double exact = table.nu_prime(r, s);
      EXPECT_NEAR(exact, fd, 1e-5 * std::max(1.0, std::abs(exact)))
          << tpfem::region_name(r) << " at s = " << s;
    }
  }
}

TEST(Materials, NuPrimeVanishesPastTheCap) {
  const MaterialTable table = MaterialTable::transformer();
  // Iron caps at b*s^2 = log(c), i.e. s ~ 2.3201.
  EXPECT_GT(table.nu_prime(Region::iron, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(table.nu_prime(Region::iron, 2.5), 0.0);
  EXPECT_DOUBLE_EQ(table.nu_prime(Region::iron, 1e6), 0.0);
}

TEST(Materials, SourceCurrent) {
  const MaterialTable table = MaterialTable::transformer();
  const double period = 0.02;
  EXPECT_DOUBLE_EQ(table.source_current(Region::winding_plus, 0.0, period), 1.9e4);
  EXPECT_DOUBLE_EQ(table.source_current(Region::winding_minus, 0.0, period), -1.9e4);
  EXPECT_NEAR(table.source_current(Region::winding_plus, period / 4, period), 0.0, 1e-11);
  EXPECT_DOUBLE_EQ(table.source_current(Region::winding_plus, period / 2, period), -1.9e4);
  EXPECT_DOUBLE_EQ(table.source_current(Region::iron, 0.1234, period), 0.0);
  EXPECT_DOUBLE_EQ(table.source_current(Region::air, 0.0, period), 0.0);
}

TEST(Materials, FluxJacobianBoundsAirIsTight) {
  const MaterialTable table = MaterialTable::transformer();
  const tpfem::RegionBounds b = tpfem::flux_jacobian_bounds(table, Region::air, 0.0, 3.0, 100);
  EXPECT_DOUBLE_EQ(b.lambda, kNuAir);
  EXPECT_DOUBLE_EQ(b.Lambda, kNuAir);
}

TEST(Materials, FluxJacobianBoundsIron) {
  const MaterialTable table = MaterialTable::transformer();
  const tpfem::RegionBounds b = tpfem::flux_jacobian_bounds(table, Region::iron, 0.0, 3.0, 2001);
  // Both nu and the chord slope nu + nu'*s are minimized at s = 0.
  EXPECT_DOUBLE_EQ(b.lambda, 29.0);
  EXPECT_GT(b.Lambda, 795775.25);  // the derivative term pushes past nu's cap value
  EXPECT_TRUE(std::isfinite(b.Lambda));
}

TEST(Materials, BoundsWidenWithTheSampleInterval) {
  const MaterialTable table = MaterialTable::transformer();
  const auto narrow = tpfem::flux_jacobian_bounds(table, Region::iron, 0.5, 1.0, 501);
  const auto wide = tpfem::flux_jacobian_bounds(table, Region::iron, 0.0, 3.0, 501);
  EXPECT_LE(wide.lambda, narrow.lambda);
  EXPECT_GE(wide.Lambda, narrow.Lambda);
}

TEST(Materials, FluxBoundsCoverAllRegions) {
  const MaterialTable table = MaterialTable::transformer();
  const tpfem::FluxBounds b = tpfem::flux_bounds(table, 3.0, 501);
  EXPECT_DOUBLE_EQ(b.s_max, 3.0);
  EXPECT_DOUBLE_EQ(b.per_region[static_cast<std::size_t>(Region::air)].lambda, kNuAir);
  EXPECT_DOUBLE_EQ(b.lambda_min(), 29.0);
  EXPECT_GE(b.Lambda_max(), b.per_region[static_cast<std::size_t>(Region::iron)].Lambda);
  for (const auto& r : b.per_region) {
    EXPECT_GT(r.lambda, 0.0);
    EXPECT_GE(r.Lambda, r.lambda);
  }
}

TEST(Materials, RejectsInvalidCoefficients) {
  MaterialTable table = MaterialTable::transformer();
  MaterialCoefficients bad = table.at(Region::iron);
  bad.sigma = -1.0;
  EXPECT_THROW(table.set(Region::iron, bad), std::invalid_argument);
  bad = table.at(Region::iron);
  bad.d = 0.0;
  EXPECT_THROW(table.set(Region::iron, bad), std::invalid_argument);
  bad = table.at(Region::iron);
  bad.c = -2.0;
  EXPECT_THROW(table.set(Region::iron, bad), std::invalid_argument);
  bad = table.at(Region::iron);
  bad.a = -0.5;
  EXPECT_THROW(table.set(Region::iron, bad), std::invalid_argument);
}

TEST(Materials, RejectsInvalidQueries) {
  const MaterialTable table = MaterialTable::transformer();
  EXPECT_THROW(table.nu(Region::iron, -1.0), std::invalid_argument);
  EXPECT_THROW(table.source_current(Region::winding_plus, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(tpfem::flux_jacobian_bounds(table, Region::iron, 2.0, 1.0, 100),
               std::invalid_argument);
  EXPECT_THROW(tpfem::flux_jacobian_bounds(table, Region::iron, 0.0, 1.0, 1),
               std::invalid_argument);
}

}  // namespace

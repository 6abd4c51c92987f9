#include "tpfem/assembly.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "tpfem/materials.hpp"
#include "tpfem/mesh.hpp"
#include "tpfem/solve.hpp"

namespace {

using tpfem::MaterialTable;
using tpfem::Mesh;
using tpfem::NonlinearOperator;
using tpfem::Region;
using tpfem::SparseMatrix;

std::shared_ptr<const Mesh> unit_square(Region label, int n) {
  return std::make_shared<const Mesh>(
      tpfem::build_rectilinear_mesh({{0, 0, 1, 1, label}}, n, n));
}

std::shared_ptr<const Mesh> small_transformer(int n) {
  return std::make_shared<const Mesh>(
      tpfem::build_rectilinear_mesh(tpfem::transformer_regions(), n, n));
}

std::vector<double> random_vector(int n, double amplitude, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = dist(rng);
  return v;
}

constexpr std::array<double, tpfem::kNumRegions> kUnitNuHat = {1, 1, 1, 1, 1};

TEST(Assembly, ElementGradientsReproduceLinearFunctions) {
  const auto mesh = small_transformer(6);
  for (const tpfem::ElementData& e : tpfem::compute_element_data(*mesh)) {
    double gx = 0, gy = 0, sum_gx = 0, sum_gy = 0;
    for (int i = 0; i < 3; ++i) {
      const auto& v = mesh->vertices[static_cast<std::size_t>(e.vertex[i])];
      // f(x, y) = 2 + 3x - 5y has gradient (3, -5).
      const double f = 2.0 + 3.0 * v[0] - 5.0 * v[1];
      gx += f * e.gx[i];
      gy += f * e.gy[i];
      sum_gx += e.gx[i];
      sum_gy += e.gy[i];
    }
    EXPECT_NEAR(gx, 3.0, 1e-10);
    EXPECT_NEAR(gy, -5.0, 1e-10);
    // Shape function gradients sum to zero (partition of unity).
    EXPECT_NEAR(sum_gx, 0.0, 1e-10);
    EXPECT_NEAR(sum_gy, 0.0, 1e-10);
  }
}

TEST(Assembly, MassMatrixSingleInteriorVertex) {
  // 2x2 grid of the unit square: one interior vertex shared by 6 triangles of
  // area 1/8 each.  The P1 mass diagonal is sigma * sum(area)/6 = sigma/8.
  MaterialTable table = MaterialTable::transformer();
  tpfem::MaterialCoefficients steel = table.at(Region::steel);
  steel.sigma = 2.0;
  table.set(Region::steel, steel);
  const auto mesh = unit_square(Region::steel, 2);
  const auto m = tpfem::assemble_mass(*mesh, table);
  ASSERT_EQ(m.rows(), 1);
  EXPECT_NEAR(m.quadratic_form({1.0}), 2.0 / 8.0, 1e-14);
}

TEST(Assembly, MassMatrixVanishesOnNonConductingRegions) {
  // Iron has sigma = 0, so an all-iron mesh has no mass entries at all.
  const auto mesh = unit_square(Region::iron, 3);
  const auto m = tpfem::assemble_mass(*mesh, MaterialTable::transformer());
  EXPECT_EQ(m.nnz(), 0);
  EXPECT_EQ(m.rows(), mesh->n_dof());
}

TEST(Assembly, FrozenStiffnessIsTheFivePointStencil) {
  // Right-triangle P1 stiffness on a square grid assembles to the classical
  // five-point stencil: the interior diagonal entry is 4*nu_hat, independent
  // of the grid spacing.
  const auto mesh = unit_square(Region::air, 2);
  const auto k1 = tpfem::assemble_stiffness_frozen(*mesh, kUnitNuHat);
  ASSERT_EQ(k1.rows(), 1);
  EXPECT_NEAR(k1.quadratic_form({1.0}), 4.0, 1e-13);
  const auto k2 = tpfem::assemble_stiffness_frozen(*mesh, {2.5, 2.5, 2.5, 2.5, 2.5});
  EXPECT_NEAR(k2.quadratic_form({1.0}), 10.0, 1e-13);
}

TEST(Assembly, FrozenStiffnessRejectsNonPositiveNuHat) {
  const auto mesh = unit_square(Region::air, 2);
  EXPECT_THROW(tpfem::assemble_stiffness_frozen(*mesh, {1, 1, 0, 1, 1}), std::invalid_argument);
}

TEST(Assembly, FrozenStiffnessIsSpd) {
  const auto mesh = small_transformer(6);
  const auto k = tpfem::assemble_stiffness_frozen(*mesh, kUnitNuHat);
  const std::vector<double> x = random_vector(k.rows(), 1.0, 42);
  EXPECT_GT(k.quadratic_form(x), 0.0);
  // LDLT factorization succeeds and solves to the library tolerance.
  tpfem::SparseSolver<double> solver(k);
  const std::vector<double> sol = solver.solve(x);
  std::vector<double> r = k.multiply(sol);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= x[i];
  EXPECT_LE(tpfem::norm2(r), 1e-10 * tpfem::norm2(x));
}

TEST(Assembly, NonlinearOperatorVanishesAtZero) {
  const NonlinearOperator op(small_transformer(5), MaterialTable::transformer());
  const std::vector<double> zero(static_cast<std::size_t>(op.n_dof()), 0.0);
  for (double v : op.apply(zero)) EXPECT_DOUBLE_EQ(v, 0.0);
  for (double s : op.field_magnitudes(zero.data())) EXPECT_DOUBLE_EQ(s, 0.0);
}

TEST(Assembly, NonlinearOperatorReducesToFrozenOnLinearMaterial) {
  // Air is linear (a = 0), so K(u) = K_frozen(nu_air) u exactly.
  const auto mesh = unit_square(Region::air, 4);
  const MaterialTable table = MaterialTable::transformer();
  const NonlinearOperator op(mesh, table);
  const double nu_air = table.nu(Region::air, 0.0);
  const auto k = tpfem::assemble_stiffness_frozen(
      *mesh, {nu_air, nu_air, nu_air, nu_air, nu_air});
  const std::vector<double> u = random_vector(op.n_dof(), 0.3, 7);
  const std::vector<double> a = op.apply(u);
  const std::vector<double> b = k.multiply(u);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_NEAR(a[i], b[i], 1e-9 * std::max(1.0, std::abs(b[i])));
}

TEST(Assembly, JacobianAtZeroEqualsFrozenAtNuZero) {
  // nu'(0) = 0, so the rank-one part drops and J(0) is the frozen stiffness
  // with each region's nu(0).
  const auto mesh = small_transformer(5);
  const MaterialTable table = MaterialTable::transformer();
  const NonlinearOperator op(mesh, table);
  std::array<double, tpfem::kNumRegions> nu0{};
  for (int r = 0; r < tpfem::kNumRegions; ++r)
    nu0[static_cast<std::size_t>(r)] = table.nu(static_cast<Region>(r), 0.0);
  const auto frozen = tpfem::assemble_stiffness_frozen(*mesh, nu0);
  const std::vector<double> zero(static_cast<std::size_t>(op.n_dof()), 0.0);
  const auto j = op.jacobian(zero);
  ASSERT_EQ(j.nnz(), frozen.nnz());
  for (int k = 0; k < j.nnz(); ++k) {
    EXPECT_EQ(j.col_indices()[k], frozen.col_indices()[k]);
    EXPECT_NEAR(j.values()[k], frozen.values()[k],
                1e-12 * std::max(1.0, std::abs(frozen.values()[k])));
  }
}

TEST(Assembly, JacobianIsSymmetric) {
  const auto mesh = small_transformer(5);
  const NonlinearOperator op(mesh, MaterialTable::transformer());
  const std::vector<double> u = random_vector(op.n_dof(), 0.02, 11);
  const auto j = op.jacobian(u);
  const std::vector<double> x = random_vector(op.n_dof(), 1.0, 12);
  const std::vector<double> jx = j.multiply(x);
  const std::vector<double> jtx = j.multiply_transpose(x);
  for (std::size_t i = 0; i < jx.size(); ++i)
    EXPECT_NEAR(jx[i], jtx[i], 1e-10 * std::max(1.0, std::abs(jx[i])));
}

TEST(Assembly, JacobianMatchesFiniteDifferences) {
  // Column-by-column central differences on a mesh small enough to afford it.
  // Iron and steel strips side by side exercise both nonlinear curves; the
  // amplitude puts |grad u| near 1 where the derivative term dominates.
  const auto mesh = std::make_shared<const Mesh>(tpfem::build_rectilinear_mesh(
      {{0, 0, 1.5, 1, Region::iron}, {0.5, 0, 1, 1, Region::steel}, {1, 0, 1.5, 1, Region::air}},
      6, 4));
  const NonlinearOperator op(mesh, MaterialTable::transformer());
  const int n = op.n_dof();
  ASSERT_LE(n, 50);
  ASSERT_GE(n, 4);
  std::vector<double> u = random_vector(n, 0.25, 21);
  const auto j = op.jacobian(u);
  double scale = 0.0;
  for (int k = 0; k < j.nnz(); ++k) scale = std::max(scale, std::abs(j.values()[k]));
  const double h = 1e-7;
  for (int col = 0; col < n; ++col) {
    const double saved = u[static_cast<std::size_t>(col)];
    u[static_cast<std::size_t>(col)] = saved + h;
    const std::vector<double> kp = op.apply(u);
    u[static_cast<std::size_t>(col)] = saved - h;
    const std::vector<double> km = op.apply(u);
    u[static_cast<std::size_t>(col)] = saved;
    std::vector<double> unit(static_cast<std::size_t>(n), 0.0);
    unit[static_cast<std::size_t>(col)] = 1.0;
    const std::vector<double> jcol = j.multiply(unit);
    for (int row = 0; row < n; ++row) {
      const double fd = (kp[static_cast<std::size_t>(row)] - km[static_cast<std::size_t>(row)]) /
                        (2 * h);
      EXPECT_NEAR(jcol[static_cast<std::size_t>(row)], fd, 1e-5 * scale)
          << "entry (" << row << ", " << col << ")";
    }
  }
}

TEST(Assembly, JacobianDirectionalDerivativeOnTransformerMesh) {
  // Cheap directional check J(u) v ~ (K(u + h v) - K(u - h v)) / 2h on the
  // full geometry, complementing the columnwise test on the small mesh.
  const auto mesh = small_transformer(5);
  const NonlinearOperator op(mesh, MaterialTable::transformer());
  const int n = op.n_dof();
  const std::vector<double> u = random_vector(n, 0.02, 31);
  const std::vector<double> v = random_vector(n, 1.0, 32);
  const std::vector<double> jv = op.jacobian(u).multiply(v);
  const double h = 1e-7;
  std::vector<double> up(u), um(u);
  for (int i = 0; i < n; ++i) {
    up[static_cast<std::size_t>(i)] += h * v[static_cast<std::size_t>(i)];
    um[static_cast<std::size_t>(i)] -= h * v[static_cast<std::size_t>(i)];
  }
  const std::vector<double> kp = op.apply(up);
  const std::vector<double> km = op.apply(um);
  double scale = 0.0;
  for (double x : jv) scale = std::max(scale, std::abs(x));
  for (int i = 0; i < n; ++i) {
    const double fd =
        (kp[static_cast<std::size_t>(i)] - km[static_cast<std::size_t>(i)]) / (2 * h);
    EXPECT_NEAR(jv[static_cast<std::size_t>(i)], fd, 1e-5 * scale) << "row " << i;
  }
}

TEST(Assembly, LoadsHaveOppositeSignsOnTheTwoWindings) {
  const auto mesh = small_transformer(8);
  const MaterialTable table = MaterialTable::transformer();
  const int steps = 4;
  const tpfem::BlockRhs f = tpfem::assemble_loads(*mesh, table, steps, 0.02);
  // The last block corresponds to t = T where cos = 1: entries supported on
  // winding vertices carry the sign of the winding polarity.
  const double* last = f.block(steps - 1);
  std::vector<int> sign(static_cast<std::size_t>(mesh->n_dof()), 0);
  for (const auto& e : tpfem::compute_element_data(*mesh)) {
    int s = 0;
    if (e.region == Region::winding_plus) s = 1;
    if (e.region == Region::winding_minus) s = -1;
    if (s == 0) continue;
    for (int i = 0; i < 3; ++i)
      if (e.dof[i] >= 0) sign[static_cast<std::size_t>(e.dof[i])] += s;
  }
  int checked = 0;
  for (int d = 0; d < mesh->n_dof(); ++d) {
    if (sign[static_cast<std::size_t>(d)] > 0) {
      EXPECT_GT(last[d], 0.0);
      ++checked;
    } else if (sign[static_cast<std::size_t>(d)] < 0) {
      EXPECT_LT(last[d], 0.0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
  // Blocks sum to ~zero over one period because sum of cos(2 pi n / N) = 0.
  double scale = 0.0;
  for (int i = 0; i < steps; ++i)
    scale = std::max(scale, tpfem::norm2(std::vector<double>(
                                f.block(i), f.block(i) + mesh->n_dof())));
  std::vector<double> sum(static_cast<std::size_t>(mesh->n_dof()), 0.0);
  for (int i = 0; i < steps; ++i)
    for (int d = 0; d < mesh->n_dof(); ++d) sum[static_cast<std::size_t>(d)] += f.block(i)[d];
  EXPECT_LE(tpfem::norm2(sum), 1e-12 * scale);
}

TEST(Assembly, LoadsQuarterPeriodBlockIsTiny) {
  const auto mesh = small_transformer(8);
  const tpfem::BlockRhs f =
      tpfem::assemble_loads(*mesh, MaterialTable::transformer(), 4, 0.02);
  // Block 0 is t = T/4 where cos(pi/2) ~ 0.
  const std::vector<double> b0(f.block(0), f.block(0) + mesh->n_dof());
  const std::vector<double> b3(f.block(3), f.block(3) + mesh->n_dof());
  EXPECT_LE(tpfem::norm2(b0), 1e-12 * tpfem::norm2(b3));
}

TEST(Assembly, TheoryNuHatIsTheMidpointAndQTheRatio) {
  tpfem::FluxBounds bounds;
  bounds.s_max = 1.0;
  for (auto& b : bounds.per_region) b = {1.0, 1.0};
  bounds.per_region[static_cast<std::size_t>(Region::iron)] = {0.5, 1.5};
  const tpfem::NuHatChoice choice = tpfem::choose_nu_hat(bounds);
  EXPECT_DOUBLE_EQ(choice.nu_hat[static_cast<std::size_t>(Region::iron)], 1.0);
  EXPECT_DOUBLE_EQ(choice.nu_hat[static_cast<std::size_t>(Region::air)], 1.0);
  EXPECT_DOUBLE_EQ(choice.q, 0.5);
}

TEST(Assembly, FrozenFieldChoiceUsesObservedRangesOnly) {
  const MaterialTable table = MaterialTable::transformer();
  const tpfem::FluxBounds bounds = tpfem::flux_bounds(table, 3.0, 501);
  tpfem::RegionFieldRanges ranges{};  // nothing observed
  ranges[static_cast<std::size_t>(Region::iron)].absorb(0.20);
  ranges[static_cast<std::size_t>(Region::iron)].absorb(0.30);
  const tpfem::NuHatChoice frozen =
      tpfem::choose_nu_hat(tpfem::NuHatMode::frozen_field, bounds, table, &ranges, 501);
  const tpfem::NuHatChoice theory = tpfem::choose_nu_hat(bounds);
  // Unobserved regions inherit the theory midpoint.
  EXPECT_DOUBLE_EQ(frozen.nu_hat[static_cast<std::size_t>(Region::air)],
                   theory.nu_hat[static_cast<std::size_t>(Region::air)]);
  // The observed iron interval is far from saturation, so its local bounds
  // are much tighter than the global ones and the contraction factor drops.
  EXPECT_LT(frozen.nu_hat[static_cast<std::size_t>(Region::iron)],
            theory.nu_hat[static_cast<std::size_t>(Region::iron)]);
  EXPECT_LT(frozen.q, theory.q);
  EXPECT_GT(frozen.q, 0.0);
}

TEST(Assembly, OperatorIsStronglyMonotoneAndBounded) {
  // For any pair of states, <K(u) - K(v), u - v> lies between lambda_min and
  // Lambda_max times the Dirichlet energy of the difference, with lambda_min =
  // min_r nu_r(0) globally valid because both eigenvalues of the flux
  // Jacobian are nondecreasing from s = 0.
  const auto mesh = small_transformer(6);
  const MaterialTable table = MaterialTable::transformer();
  const NonlinearOperator op(mesh, table);
  const auto k1 = tpfem::assemble_stiffness_frozen(*mesh, kUnitNuHat);
  std::mt19937_64 rng(0x5eed2024ull);
  std::uniform_real_distribution<double> dist(-0.02, 0.02);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u(static_cast<std::size_t>(op.n_dof()));
    std::vector<double> v(static_cast<std::size_t>(op.n_dof()));
    for (double& x : u) x = dist(rng);
    for (double& x : v) x = dist(rng);
    const std::vector<double> ku = op.apply(u);
    const std::vector<double> kv = op.apply(v);
    std::vector<double> d(u.size());
    double inner = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      d[i] = u[i] - v[i];
      inner += (ku[i] - kv[i]) * d[i];
    }
    const double energy = k1.quadratic_form(d);
    double s_obs = 0.0;
    for (double s : op.field_magnitudes(u.data())) s_obs = std::max(s_obs, s);
    for (double s : op.field_magnitudes(v.data())) s_obs = std::max(s_obs, s);
    const tpfem::FluxBounds bounds = tpfem::flux_bounds(table, std::max(s_obs, 1e-6), 2001);
    EXPECT_GE(inner, 29.0 * energy - 1e-10 * std::max(1.0, std::abs(inner)));
    EXPECT_LE(inner, bounds.Lambda_max() * energy * (1 + 1e-10) + 1e-10);
  }
}

TEST(Assembly, MakeFemSystemWiresEverythingTogether) {
  const auto mesh = small_transformer(5);
  const MaterialTable table = MaterialTable::transformer();
  const tpfem::FluxBounds bounds = tpfem::flux_bounds(table, 3.0, 501);
  const tpfem::NuHatChoice choice = tpfem::choose_nu_hat(bounds);
  const tpfem::FemSystem sys = tpfem::make_fem_system(mesh, table, choice);
  EXPECT_EQ(sys.n_dof, mesh->n_dof());
  EXPECT_EQ(sys.M.rows(), mesh->n_dof());
  EXPECT_EQ(sys.K_hat.rows(), mesh->n_dof());
  EXPECT_DOUBLE_EQ(sys.q_estimate, choice.q);
  EXPECT_GT(sys.K_hat.nnz(), 0);
}

}  // namespace

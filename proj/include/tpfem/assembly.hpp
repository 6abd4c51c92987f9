#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tpfem/materials.hpp"
#include "tpfem/mesh.hpp"
#include "tpfem/sparse.hpp"
#include "tpfem/state.hpp"

namespace tpfem {

/// Per-triangle quantities cached for repeated evaluation: the P1 basis
/// gradients (constant on the element), area, region, and the free-dof index
/// of each corner (-1 on the boundary).
struct ElementData {
  std::array<Index, 3> vertex;
  std::array<Index, 3> dof;
  std::array<double, 3> gx, gy;  // gradient of the corner basis functions
  double area;
  Region region;
};

inline std::vector<ElementData> compute_element_data(const Mesh& mesh) {
  std::vector<ElementData> elems(static_cast<std::size_t>(mesh.n_triangles()));
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    ElementData& e = elems[static_cast<std::size_t>(t)];
    e.vertex = tri;
    e.region = mesh.region[static_cast<std::size_t>(t)];
    e.area = mesh.triangle_area(t);
    if (!(e.area > 0)) throw std::invalid_argument("mesh: non-positive triangle area");
    const auto& p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const auto& p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const auto& p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const double inv2A = 1.0 / (2.0 * e.area);
    e.gx = {(p1[1] - p2[1]) * inv2A, (p2[1] - p0[1]) * inv2A, (p0[1] - p1[1]) * inv2A};
    e.gy = {(p2[0] - p1[0]) * inv2A, (p0[0] - p2[0]) * inv2A, (p1[0] - p0[0]) * inv2A};
    for (int k = 0; k < 3; ++k) e.dof[k] = mesh.dof_of[static_cast<std::size_t>(tri[k])];
  }
  return elems;
}

/// sigma-weighted mass matrix over the free vertices, exact P1 integration
/// (element matrix sigma*area/12 * [2 1 1; 1 2 1; 1 1 2]).
inline SparseMatrix<double> assemble_mass(const Mesh& mesh, const MaterialTable& materials) {
  std::vector<Triplet<double>> trips;
  for (const ElementData& e : compute_element_data(mesh)) {
    const double sigma = materials.at(e.region).sigma;
    if (sigma == 0) continue;
    const double scale = sigma * e.area / 12.0;
    for (int i = 0; i < 3; ++i) {
      if (e.dof[i] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (e.dof[j] < 0) continue;
        trips.push_back({e.dof[i], e.dof[j], scale * (i == j ? 2.0 : 1.0)});
      }
    }
  }
  return SparseMatrix<double>::from_triplets(mesh.n_dof(), mesh.n_dof(), std::move(trips), true);
}

/// Stiffness matrix with a frozen per-region reluctivity nu_hat.
inline SparseMatrix<double> assemble_stiffness_frozen(const Mesh& mesh,
                                                      const std::array<double, kNumRegions>& nu_hat) {
  for (double v : nu_hat)
    if (!(v > 0)) throw std::invalid_argument("frozen stiffness: nu_hat must be positive");
  std::vector<Triplet<double>> trips;
  for (const ElementData& e : compute_element_data(mesh)) {
    const double coeff = nu_hat[static_cast<std::size_t>(e.region)] * e.area;
    for (int i = 0; i < 3; ++i) {
      if (e.dof[i] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (e.dof[j] < 0) continue;
        trips.push_back({e.dof[i], e.dof[j], coeff * (e.gx[i] * e.gx[j] + e.gy[i] * e.gy[j])});
      }
    }
  }
  return SparseMatrix<double>::from_triplets(mesh.n_dof(), mesh.n_dof(), std::move(trips), true);
}

/// Load vectors f^n with components integral of j(t^n) * phi_i, one per time
/// step at t^n = n*period/N (one-third rule, exact for piecewise-constant j).
inline BlockRhs assemble_loads(const Mesh& mesh, const MaterialTable& materials, int N,
                               double period) {
  if (N < 1) throw std::invalid_argument("loads: need at least one time step");
  if (!(period > 0)) throw std::invalid_argument("loads: period must be positive");
  BlockRhs f(N, mesh.n_dof());
  const auto elems = compute_element_data(mesh);
  for (int n = 0; n < N; ++n) {
    const double t = (n + 1) * period / N;
    double* fn = f.block(n);
    for (const ElementData& e : elems) {
      const double j = materials.source_current(e.region, t, period);
      if (j == 0) continue;
      const double contrib = j * e.area / 3.0;
      for (int k = 0; k < 3; ++k)
        if (e.dof[k] >= 0) fn[e.dof[k]] += contrib;
    }
  }
  return f;
}

/// The nonlinear curl-curl operator u -> K(u) with per-element caches, plus
/// its Jacobian for Newton solves.
class NonlinearOperator {
 public:
  NonlinearOperator(std::shared_ptr<const Mesh> mesh, MaterialTable materials)
      : mesh_(std::move(mesh)), materials_(std::move(materials)) {
    if (!mesh_) throw std::invalid_argument("nonlinear operator: null mesh");
    elems_ = compute_element_data(*mesh_);
  }

  Index n_dof() const { return mesh_->n_dof(); }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const MaterialTable& materials() const { return materials_; }
  const std::vector<ElementData>& elements() const { return elems_; }

  /// out_i = integral of nu(|grad u|) grad u . grad phi_i; u lives on the
  /// free vertices (homogeneous Dirichlet data on the rest).
  void apply(const double* u, double* out) const {
    for (Index i = 0; i < n_dof(); ++i) out[i] = 0;
    for (const ElementData& e : elems_) {
      double gx = 0, gy = 0;
      for (int k = 0; k < 3; ++k) {
        if (e.dof[k] < 0) continue;
        gx += u[e.dof[k]] * e.gx[k];
        gy += u[e.dof[k]] * e.gy[k];
      }
      const double s = std::hypot(gx, gy);
      const double nu = materials_.nu(e.region, s);
      for (int k = 0; k < 3; ++k)
        if (e.dof[k] >= 0) out[e.dof[k]] += nu * e.area * (gx * e.gx[k] + gy * e.gy[k]);
    }
  }

  std::vector<double> apply(const std::vector<double>& u) const {
    if (static_cast<Index>(u.size()) != n_dof())
      throw std::invalid_argument("nonlinear operator: size mismatch");
    std::vector<double> out(u.size());
    apply(u.data(), out.data());
    return out;
  }

  /// Jacobian of apply at u: element contribution
  /// [nu(|g|) I + (nu'(|g|)/|g|) g g^T] with g = grad u, the rank-one part
  /// dropped at g = 0 where it vanishes exactly.
  SparseMatrix<double> jacobian(const double* u) const {
    std::vector<Triplet<double>> trips;
    for (const ElementData& e : elems_) {
      double gx = 0, gy = 0;
      for (int k = 0; k < 3; ++k) {
        if (e.dof[k] < 0) continue;
        gx += u[e.dof[k]] * e.gx[k];
        gy += u[e.dof[k]] * e.gy[k];
      }
      const double s = std::hypot(gx, gy);
      const double nu = materials_.nu(e.region, s);
      double rank1 = 0;
      if (s > 0) rank1 = materials_.nu_prime(e.region, s) / s;
      for (int i = 0; i < 3; ++i) {
        if (e.dof[i] < 0) continue;
        for (int j = 0; j < 3; ++j) {
          if (e.dof[j] < 0) continue;
          const double iso = nu * (e.gx[i] * e.gx[j] + e.gy[i] * e.gy[j]);
          const double dir = rank1 * (gx * e.gx[i] + gy * e.gy[i]) * (gx * e.gx[j] + gy * e.gy[j]);
          trips.push_back({e.dof[i], e.dof[j], e.area * (iso + dir)});
        }
      }
    }
    return SparseMatrix<double>::from_triplets(n_dof(), n_dof(), std::move(trips), true);
  }

  SparseMatrix<double> jacobian(const std::vector<double>& u) const {
    if (static_cast<Index>(u.size()) != n_dof())
      throw std::invalid_argument("nonlinear operator: size mismatch");
    return jacobian(u.data());
  }

  /// |grad u| per triangle, for field-range estimation.
  std::vector<double> field_magnitudes(const double* u) const {
    std::vector<double> out(elems_.size());
    for (std::size_t t = 0; t < elems_.size(); ++t) {
      const ElementData& e = elems_[t];
      double gx = 0, gy = 0;
      for (int k = 0; k < 3; ++k) {
        if (e.dof[k] < 0) continue;
        gx += u[e.dof[k]] * e.gx[k];
        gy += u[e.dof[k]] * e.gy[k];
      }
      out[t] = std::hypot(gx, gy);
    }
    return out;
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  MaterialTable materials_;
  std::vector<ElementData> elems_;
};

enum class NuHatMode {
  theory,        ///< midpoint of the bounds over the whole sampled range [0, s_max]
  frozen_field,  ///< midpoint over the field range observed per region in u_init
};

/// Frozen reluctivity choice together with its contraction estimate
/// q = max over populated regions of (Lambda - lambda)/(Lambda + lambda).
struct NuHatChoice {
  std::array<double, kNumRegions> nu_hat{};
  double q = 0;
};

/// Field-magnitude range observed in one region.
struct FieldRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0;
  bool any = false;

  void absorb(double s) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    any = true;
  }
};

using RegionFieldRanges = std::array<FieldRange, kNumRegions>;

/// Per-region |grad u| ranges of one or more states (pass each state in turn
/// to widen the ranges).
inline void absorb_field_ranges(const NonlinearOperator& op, const double* u,
                                RegionFieldRanges& ranges) {
  const auto mags = op.field_magnitudes(u);
  const auto& elems = op.elements();
  for (std::size_t t = 0; t < elems.size(); ++t)
    ranges[static_cast<std::size_t>(elems[t].region)].absorb(mags[t]);
}

namespace detail {

inline double midpoint_q(const RegionBounds& b) {
  return (b.Lambda - b.lambda) / (b.Lambda + b.lambda);
}

}  // namespace detail

/// Theory mode: per-region midpoint of the flux-map derivative bounds over
/// the full sampled range.
inline NuHatChoice choose_nu_hat(const FluxBounds& bounds) {
  NuHatChoice out;
  for (int r = 0; r < kNumRegions; ++r) {
    const auto& b = bounds.per_region[static_cast<std::size_t>(r)];
    out.nu_hat[static_cast<std::size_t>(r)] = 0.5 * (b.lambda + b.Lambda);
    out.q = std::max(out.q, detail::midpoint_q(b));
  }
  return out;
}

/// Mode dispatch.  Frozen-field mode resamples the derivative bounds per
/// region over the |grad u| range present in `ranges` (widened by a 20%
/// margin); regions without elements or observations fall back to the
/// theory-mode value and do not weigh in on q.
inline NuHatChoice choose_nu_hat(NuHatMode mode, const FluxBounds& bounds,
                                 const MaterialTable& table, const RegionFieldRanges* ranges,
                                 int samples = 2000) {
  if (mode == NuHatMode::theory) return choose_nu_hat(bounds);
  if (ranges == nullptr)
    throw std::invalid_argument("choose_nu_hat: frozen-field mode needs field ranges");
  NuHatChoice out;
  for (int r = 0; r < kNumRegions; ++r) {
    const auto& full = bounds.per_region[static_cast<std::size_t>(r)];
    const FieldRange& range = (*ranges)[static_cast<std::size_t>(r)];
    if (!range.any) {
      out.nu_hat[static_cast<std::size_t>(r)] = 0.5 * (full.lambda + full.Lambda);
      continue;
    }
    const double margin = 0.2 * (range.hi - range.lo) + 1e-3;
    const double lo = std::max(0.0, range.lo - margin);
    const double hi = range.hi + margin;
    const RegionBounds b =
        flux_jacobian_bounds(table, static_cast<Region>(r), lo, hi, samples);
    out.nu_hat[static_cast<std::size_t>(r)] = 0.5 * (b.lambda + b.Lambda);
    out.q = std::max(out.q, detail::midpoint_q(b));
  }
  return out;
}

/// Overload matching the single-state call: ranges taken from one vector.
inline NuHatChoice choose_nu_hat(NuHatMode mode, const FluxBounds& bounds,
                                 const NonlinearOperator& op, const double* u_init,
                                 int samples = 2000) {
  if (mode == NuHatMode::theory) return choose_nu_hat(bounds);
  if (u_init == nullptr)
    throw std::invalid_argument("choose_nu_hat: frozen-field mode needs u_init");
  RegionFieldRanges ranges;
  absorb_field_ranges(op, u_init, ranges);
  return choose_nu_hat(mode, bounds, op.materials(), &ranges, samples);
}

/// Assembled operators for the time-periodic problem over the free vertices.
struct FemSystem {
  std::shared_ptr<const Mesh> mesh;
  MaterialTable materials;
  SparseMatrix<double> M;
  SparseMatrix<double> K_hat;
  std::array<double, kNumRegions> nu_hat_of{};
  double q_estimate = 0;
  Index n_dof = 0;
};

inline FemSystem make_fem_system(std::shared_ptr<const Mesh> mesh, const MaterialTable& materials,
                                 const NuHatChoice& choice) {
  if (!mesh) throw std::invalid_argument("fem system: null mesh");
  FemSystem sys;
  sys.mesh = std::move(mesh);
  sys.materials = materials;
  sys.M = assemble_mass(*sys.mesh, materials);
  sys.K_hat = assemble_stiffness_frozen(*sys.mesh, choice.nu_hat);
  sys.nu_hat_of = choice.nu_hat;
  sys.q_estimate = choice.q;
  sys.n_dof = sys.mesh->n_dof();
  return sys;
}

}  // namespace tpfem

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "tpfem/mesh.hpp"

namespace tpfem {

/// Per-region coefficients of the reluctivity curve
///   nu(s) = a * min{exp(b s^2), c} + d
/// plus conductivity sigma and the source current amplitude j_amp.
struct MaterialCoefficients {
  double sigma = 0;  // S/m
  double a = 0;      // m/H
  double b = 0;      // dimensionless
  double c = 1;      // dimensionless cap on exp(b s^2)
  double d = 0;      // m/H, ellipticity floor
  double j_amp = 0;  // A/m^2
};

class MaterialTable {
 public:
  MaterialTable() = default;

  void set(Region region, const MaterialCoefficients& m) {
    if (!(m.sigma >= 0)) throw std::invalid_argument(bad(region, "sigma must be >= 0"));
    if (!(m.d > 0)) throw std::invalid_argument(bad(region, "d must be > 0"));
    if (!(m.a >= 0)) throw std::invalid_argument(bad(region, "a must be >= 0"));
    if (!(m.b >= 0)) throw std::invalid_argument(bad(region, "b must be >= 0"));
    if (!(m.c > 0)) throw std::invalid_argument(bad(region, "c must be > 0"));
    coeffs_[index(region)] = m;
  }

  const MaterialCoefficients& at(Region region) const { return coeffs_[index(region)]; }

  /// Reluctivity nu(s) = a*min{exp(b s^2), c} + d.
  double nu(Region region, double s) const {
    if (!(s >= 0)) throw std::invalid_argument("nu: field magnitude must be >= 0");
    const auto& m = at(region);
    if (m.a == 0) return m.d;
    return m.a * capped_exp(m, s) + m.d;
  }

  /// d nu / d s; zero on the capped branch and for constant-nu regions.
  double nu_prime(Region region, double s) const {
    if (!(s >= 0)) throw std::invalid_argument("nu_prime: field magnitude must be >= 0");
    const auto& m = at(region);
    if (m.a == 0) return 0;
    const double e = capped_exp(m, s);
    if (e >= m.c) return 0;
    return 2.0 * m.a * m.b * s * e;
  }

  /// j_amp * cos(2 pi t / period).
  double source_current(Region region, double t, double period) const {
    if (!(period > 0)) throw std::invalid_argument("source_current: period must be > 0");
    const auto& m = at(region);
    if (m.j_amp == 0) return 0;
    return m.j_amp * std::cos(2.0 * std::numbers::pi * t / period);
  }

  /// Coefficients of the transformer benchmark: saturating iron core,
  /// conducting steel shell, constant-reluctivity air and windings driven at
  /// +/- 1.9e4 A/m^2.
  static MaterialTable transformer() {
    const double nu_air = 1e7 / (4.0 * std::numbers::pi);
    MaterialTable t;
    t.set(Region::iron, {0.0, 5.85, 2.196, 136026.0, 23.15, 0.0});
    t.set(Region::steel, {1e7, 130.171, 1.102, 6112.97, 43.742, 0.0});
    t.set(Region::air, {0.0, 0.0, 0.0, 1.0, nu_air, 0.0});
    t.set(Region::winding_plus, {0.0, 0.0, 0.0, 1.0, nu_air, 1.9e4});
    t.set(Region::winding_minus, {0.0, 0.0, 0.0, 1.0, nu_air, -1.9e4});
    return t;
  }

 private:
  static std::size_t index(Region region) {
    const int i = static_cast<int>(region);
    if (i < 0 || i >= kNumRegions)
      throw std::invalid_argument("material table: invalid region code " + std::to_string(i));
    return static_cast<std::size_t>(i);
  }

  static std::string bad(Region region, const char* what) {
    return "material table (" + std::string(region_name(region)) + "): " + what;
  }

  static double capped_exp(const MaterialCoefficients& m, double s) {
    // Evaluate min{exp(b s^2), c} without overflowing for large s.
    const double expo = m.b * s * s;
    if (expo >= std::log(m.c)) return m.c;
    return std::exp(expo);
  }

  std::array<MaterialCoefficients, kNumRegions> coeffs_{};
};

/// Eigenvalue range of the flux-map Jacobian over one region and one
/// field-magnitude interval.  The 2d Jacobian nu(s)I + (nu'(s)/s) g g^T has
/// eigenvalues nu(s) and g'(s) = nu(s) + nu'(s) s, so sampling those two
/// functions bounds the spectrum on the interval.
struct RegionBounds {
  double lambda = 0;  // smallest sampled eigenvalue
  double Lambda = 0;  // largest sampled eigenvalue
};

inline RegionBounds flux_jacobian_bounds(const MaterialTable& table, Region region, double s_lo,
                                         double s_hi, int samples) {
  if (!(s_lo >= 0) || !(s_hi >= s_lo))
    throw std::invalid_argument("flux bounds: need 0 <= s_lo <= s_hi");
  if (samples < 2) throw std::invalid_argument("flux bounds: need at least 2 samples");
  RegionBounds b;
  b.lambda = std::numeric_limits<double>::infinity();
  b.Lambda = 0;
  for (int j = 0; j < samples; ++j) {
    const double s = s_lo + (s_hi - s_lo) * j / (samples - 1);
    const double nu = table.nu(region, s);
    const double gp = nu + table.nu_prime(region, s) * s;
    b.lambda = std::min({b.lambda, nu, gp});
    b.Lambda = std::max({b.Lambda, nu, gp});
  }
  return b;
}

struct FluxBounds {
  std::array<RegionBounds, kNumRegions> per_region{};
  double s_max = 0;

  double lambda_min() const {
    double v = per_region[0].lambda;
    for (const auto& b : per_region) v = std::min(v, b.lambda);
    return v;
  }
  double Lambda_max() const {
    double v = per_region[0].Lambda;
    for (const auto& b : per_region) v = std::max(v, b.Lambda);
    return v;
  }
};

/// Samples every region's flux-map eigenvalue range on [0, s_max].
inline FluxBounds flux_bounds(const MaterialTable& table, double s_max, int samples) {
  if (!(s_max > 0)) throw std::invalid_argument("flux bounds: s_max must be > 0");
  FluxBounds out;
  out.s_max = s_max;
  for (int r = 0; r < kNumRegions; ++r)
    out.per_region[static_cast<std::size_t>(r)] =
        flux_jacobian_bounds(table, static_cast<Region>(r), 0.0, s_max, samples);
  return out;
}

}  // namespace tpfem

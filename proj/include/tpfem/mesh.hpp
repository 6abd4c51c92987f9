#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tpfem/sparse.hpp"

namespace tpfem {

enum class Region : int {
  steel = 0,
  iron = 1,
  air = 2,
  winding_plus = 3,
  winding_minus = 4,
};

inline constexpr int kNumRegions = 5;

inline std::string_view region_name(Region r) {
  switch (r) {
    case Region::steel: return "steel";
    case Region::iron: return "iron";
    case Region::air: return "air";
    case Region::winding_plus: return "winding_plus";
    case Region::winding_minus: return "winding_minus";
  }
  throw std::invalid_argument("region_name: invalid region code " +
                              std::to_string(static_cast<int>(r)));
}

inline Region parse_region(std::string_view name) {
  for (int i = 0; i < kNumRegions; ++i)
    if (region_name(static_cast<Region>(i)) == name) return static_cast<Region>(i);
  throw std::invalid_argument("unknown region label '" + std::string(name) + "'");
}

/// Axis-aligned rectangle [x0,x1] x [y0,y1] carrying a region label.
struct RectRegion {
  double x0, y0, x1, y1;
  Region label;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Conforming triangulation of a rectangle.  Triangles are positively
/// oriented; vertices on the outer boundary carry no degree of freedom
/// (dof_of == -1), interior vertices are numbered 0..n_dof-1.
struct Mesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<Region> region;        // per triangle
  std::vector<char> boundary;        // per vertex
  std::vector<Index> dof_of;         // per vertex, -1 on the boundary
  std::vector<Index> vertex_of_dof;  // inverse of dof_of
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;

  Index n_vertices() const { return static_cast<Index>(vertices.size()); }
  Index n_triangles() const { return static_cast<Index>(triangles.size()); }
  Index n_dof() const { return static_cast<Index>(vertex_of_dof.size()); }

  double triangle_area(Index t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const auto& a = vertices[static_cast<std::size_t>(tri[0])];
    const auto& b = vertices[static_cast<std::size_t>(tri[1])];
    const auto& c = vertices[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  }

  double total_area() const {
    double acc = 0;
    for (Index t = 0; t < n_triangles(); ++t) acc += triangle_area(t);
    return acc;
  }
};

namespace detail {

/// Marks outer-boundary vertices and numbers the interior degrees of freedom.
inline void finalize_mesh(Mesh& mesh) {
  const double tol = 1e-12 * std::max(mesh.xmax - mesh.xmin, mesh.ymax - mesh.ymin);
  mesh.boundary.assign(mesh.vertices.size(), 0);
  mesh.dof_of.assign(mesh.vertices.size(), -1);
  mesh.vertex_of_dof.clear();
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const double x = mesh.vertices[v][0], y = mesh.vertices[v][1];
    const bool on_edge = std::abs(x - mesh.xmin) <= tol || std::abs(x - mesh.xmax) <= tol ||
                         std::abs(y - mesh.ymin) <= tol || std::abs(y - mesh.ymax) <= tol;
    if (on_edge) {
      mesh.boundary[v] = 1;
    } else {
      mesh.dof_of[v] = static_cast<Index>(mesh.vertex_of_dof.size());
      mesh.vertex_of_dof.push_back(static_cast<Index>(v));
    }
  }
}

/// All rectangle edge coordinates in [lo, hi], deduplicated, then each gap
/// subdivided so no interval exceeds (hi-lo)/target_cells.
inline std::vector<double> grid_lines(double lo, double hi, std::vector<double> edges,
                                      int target_cells) {
  edges.push_back(lo);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  const double merge_tol = 1e-12 * (hi - lo);
  std::vector<double> breaks;
  for (double e : edges) {
    if (e < lo - merge_tol || e > hi + merge_tol)
      throw std::invalid_argument("mesh: region rectangle outside the domain");
    if (breaks.empty() || e - breaks.back() > merge_tol) breaks.push_back(e);
  }
  breaks.front() = lo;
  breaks.back() = hi;
  const double target = (hi - lo) / target_cells;
  std::vector<double> lines;
  lines.push_back(lo);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / target - 1e-9)));
    for (int p = 1; p < pieces; ++p) lines.push_back(a + (b - a) * p / pieces);
    lines.push_back(b);
  }
  return lines;
}

}  // namespace detail

/// Triangulates the bounding box of `regions` on a rectilinear grid.  Every
/// rectangle edge lands on a grid line, so region interfaces are resolved
/// exactly; nx and ny set the target cell counts used to subdivide the gaps
/// between those snapped lines.  Each cell becomes two triangles split along
/// its lower-left/upper-right diagonal, labelled by the last region in the
/// list containing the cell centroid (painter's order).
inline Mesh build_rectilinear_mesh(const std::vector<RectRegion>& regions, int nx, int ny) {
  if (regions.empty()) throw std::invalid_argument("mesh: no regions given");
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh: cell counts must be positive");
  Mesh mesh;
  mesh.xmin = mesh.xmax = regions.front().x0;
  mesh.ymin = mesh.ymax = regions.front().y0;
  std::vector<double> xs, ys;
  for (const auto& r : regions) {
    if (!(r.x0 < r.x1) || !(r.y0 < r.y1))
      throw std::invalid_argument("mesh: degenerate region rectangle");
    mesh.xmin = std::min(mesh.xmin, r.x0);
    mesh.xmax = std::max(mesh.xmax, r.x1);
    mesh.ymin = std::min(mesh.ymin, r.y0);
    mesh.ymax = std::max(mesh.ymax, r.y1);
    xs.insert(xs.end(), {r.x0, r.x1});
    ys.insert(ys.end(), {r.y0, r.y1});
  }
  const std::vector<double> gx = detail::grid_lines(mesh.xmin, mesh.xmax, std::move(xs), nx);
  const std::vector<double> gy = detail::grid_lines(mesh.ymin, mesh.ymax, std::move(ys), ny);
  const Index cols = static_cast<Index>(gx.size());
  for (std::size_t j = 0; j < gy.size(); ++j)
    for (std::size_t i = 0; i < gx.size(); ++i) mesh.vertices.push_back({gx[i], gy[j]});
  const auto vid = [cols](Index i, Index j) { return j * cols + i; };
  for (std::size_t j = 0; j + 1 < gy.size(); ++j) {
    for (std::size_t i = 0; i + 1 < gx.size(); ++i) {
      const double cx = 0.5 * (gx[i] + gx[i + 1]);
      const double cy = 0.5 * (gy[j] + gy[j + 1]);
      Region label{};
      bool covered = false;
      for (const auto& r : regions)
        if (r.contains(cx, cy)) {
          label = r.label;
          covered = true;
        }
      if (!covered)
        throw std::invalid_argument("mesh: cell centroid (" + std::to_string(cx) + ", " +
                                    std::to_string(cy) + ") not covered by any region");
      const Index v00 = vid(static_cast<Index>(i), static_cast<Index>(j));
      const Index v10 = v00 + 1;
      const Index v01 = v00 + cols;
      const Index v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
      mesh.region.push_back(label);
      mesh.region.push_back(label);
    }
  }
  detail::finalize_mesh(mesh);
  return mesh;
}

/// Splits every triangle into four by its edge midpoints.  Children inherit
/// the parent's region label; boundary markers and dof numbers are rebuilt,
/// which puts midpoints of boundary edges on the boundary.
inline Mesh refine_uniform(const Mesh& mesh) {
  Mesh fine;
  fine.xmin = mesh.xmin;
  fine.xmax = mesh.xmax;
  fine.ymin = mesh.ymin;
  fine.ymax = mesh.ymax;
  fine.vertices = mesh.vertices;
  std::unordered_map<std::uint64_t, Index> midpoint;
  midpoint.reserve(mesh.triangles.size() * 2);
  const auto mid = [&](Index a, Index b) {
    const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                              static_cast<std::uint64_t>(std::max(a, b));
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const auto& pa = mesh.vertices[static_cast<std::size_t>(a)];
    const auto& pb = mesh.vertices[static_cast<std::size_t>(b)];
    const Index v = static_cast<Index>(fine.vertices.size());
    fine.vertices.push_back({0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])});
    midpoint.emplace(key, v);
    return v;
  };
  for (Index t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const Index m01 = mid(tri[0], tri[1]);
    const Index m12 = mid(tri[1], tri[2]);
    const Index m20 = mid(tri[2], tri[0]);
    const Region label = mesh.region[static_cast<std::size_t>(t)];
    fine.triangles.push_back({tri[0], m01, m20});
    fine.triangles.push_back({m01, tri[1], m12});
    fine.triangles.push_back({m20, m12, tri[2]});
    fine.triangles.push_back({m01, m12, m20});
    fine.region.insert(fine.region.end(), 4, label);
  }
  detail::finalize_mesh(fine);
  return fine;
}

/// Region layout of the 2d transformer cross-section: a steel shell around an
/// air gap, an iron core with an air window, and four winding bars (outer
/// pair wound against the inner pair).  Painter's order, first entry last.
inline std::vector<RectRegion> transformer_regions() {
  std::vector<RectRegion> regions;
  regions.push_back({0.000, 0.000, 0.355, 0.466, Region::steel});
  regions.push_back({0.010, 0.010, 0.345, 0.456, Region::air});
  regions.push_back({0.060, 0.028, 0.295, 0.438, Region::iron});
  regions.push_back({0.140, 0.108, 0.215, 0.358, Region::air});
  regions.push_back({0.028, 0.123, 0.041, 0.343, Region::winding_minus});
  regions.push_back({0.159, 0.123, 0.172, 0.343, Region::winding_plus});
  regions.push_back({0.183, 0.123, 0.196, 0.343, Region::winding_minus});
  regions.push_back({0.314, 0.123, 0.327, 0.343, Region::winding_plus});
  return regions;
}

}  // namespace tpfem

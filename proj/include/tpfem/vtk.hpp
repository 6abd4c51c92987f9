#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tpfem/mesh.hpp"

namespace tpfem {

namespace detail {

inline std::ofstream open_vtk(const std::filesystem::path& path, const Mesh& mesh,
                              const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices) out << v[0] << " " << v[1] << " 0\n";
  out << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (Index t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
  return out;
}

}  // namespace detail

/// Mesh with its region labels as cell data (legacy ASCII VTK).
inline void write_mesh_vtk(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out = detail::open_vtk(path, mesh, "mesh regions");
  out << "CELL_DATA " << mesh.n_triangles() << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (Region r : mesh.region) out << static_cast<int>(r) << "\n";
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

/// Scalar vertex field given on the free dofs; boundary vertices get the
/// homogeneous Dirichlet value zero.
inline void write_field_vtk(const std::filesystem::path& path, const Mesh& mesh,
                            const std::vector<double>& free_values,
                            const std::string& name = "u") {
  if (static_cast<Index>(free_values.size()) != mesh.n_dof())
    throw std::invalid_argument("vtk field: size mismatch");
  std::ofstream out = detail::open_vtk(path, mesh, "vertex field");
  out << "POINT_DATA " << mesh.n_vertices() << "\nSCALARS " << name
      << " double 1\nLOOKUP_TABLE default\n";
  for (Index v = 0; v < mesh.n_vertices(); ++v) {
    const Index dof = mesh.dof_of[static_cast<std::size_t>(v)];
    out << (dof >= 0 ? free_values[static_cast<std::size_t>(dof)] : 0.0) << "\n";
  }
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace tpfem

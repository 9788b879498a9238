// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexbp/quadrature.hpp"

namespace hexbp {

/// Box mesh of (ex, ey, ez) hexahedral elements of geometric degree p.
/// Global nodes sit at mapped GLL positions with lexicographic x-fastest
/// numbering; nodes shared between elements are stored once, so face
/// conformity is exact by construction.
///
/// The optional deformation displaces every node by
///   x_i += a * L_i * sin(2 pi x/Lx) * sin(2 pi y/Ly) * sin(2 pi z/Lz)
/// evaluated at the undeformed position. The displacement vanishes on the
/// box boundary, so boundary nodes keep their coordinates.
struct HexMesh {
  std::array<int, 3> dims{1, 1, 1};
  int degree = 1;
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  double deform_amplitude = 0.0;

  std::vector<std::array<double, 3>> coords;  // per global node
  std::vector<int> elem_nodes;                // E * (p+1)^3 global indices

  int num_elements() const { return dims[0] * dims[1] * dims[2]; }
  int nodes_per_elem() const { return (degree + 1) * (degree + 1) * (degree + 1); }
  std::array<int, 3> node_grid() const {
    return {dims[0] * degree + 1, dims[1] * degree + 1, dims[2] * degree + 1};
  }
  int num_nodes() const {
    const auto g = node_grid();
    return g[0] * g[1] * g[2];
  }
  std::span<const int> element(int e) const {
    return {elem_nodes.data() + static_cast<std::size_t>(e) * nodes_per_elem(),
            static_cast<std::size_t>(nodes_per_elem())};
  }
};

inline constexpr double kMaxDeformAmplitude = 0.15;

namespace detail {

// 1D global node coordinates along one axis: per element, p+1 GLL points
// mapped into its subinterval; the shared interface node is computed once.
inline std::vector<double> axis_node_coords(int elems, int p, double length) {
  const QuadRule1D gll = gll_rule(p + 1);
  const double h = length / elems;
  std::vector<double> x(static_cast<std::size_t>(elems) * p + 1);
  for (int e = 0; e < elems; ++e)
    for (int k = 0; k < p; ++k) x[static_cast<std::size_t>(e) * p + k] = (e + 0.5 * (gll.points[k] + 1.0)) * h;
  x.back() = length;
  return x;
}

// Lexicographic element connectivity for a structured node grid.
inline void fill_elem_nodes(HexMesh& mesh) {
  const auto grid = mesh.node_grid();
  const int p = mesh.degree;
  mesh.elem_nodes.resize(static_cast<std::size_t>(mesh.num_elements()) * mesh.nodes_per_elem());
  std::size_t pos = 0;
  for (int ez = 0; ez < mesh.dims[2]; ++ez)
    for (int ey = 0; ey < mesh.dims[1]; ++ey)
      for (int ex = 0; ex < mesh.dims[0]; ++ex)
        for (int k = 0; k <= p; ++k)
          for (int j = 0; j <= p; ++j)
            for (int i = 0; i <= p; ++i)
              mesh.elem_nodes[pos++] = (ex * p + i) + grid[0] * ((ey * p + j) + grid[1] * (ez * p + k));
}

}  // namespace detail

inline HexMesh build_box_mesh(std::array<int, 3> dims, int p, std::array<double, 3> extent,
                              double deform_amplitude) {
  for (int d = 0; d < 3; ++d) {
    if (dims[d] < 1) throw std::invalid_argument("build_box_mesh: element counts must be >= 1");
    if (!(extent[d] > 0.0)) throw std::invalid_argument("build_box_mesh: extents must be positive");
  }
  if (p < 1) throw std::invalid_argument("build_box_mesh: degree must be >= 1");
  if (!(deform_amplitude >= 0.0 && deform_amplitude <= kMaxDeformAmplitude))
    throw std::invalid_argument("build_box_mesh: deform amplitude outside [0, 0.15]");

  HexMesh mesh;
  mesh.dims = dims;
  mesh.degree = p;
  mesh.extent = extent;
  mesh.deform_amplitude = deform_amplitude;

  const std::array<std::vector<double>, 3> axis = {detail::axis_node_coords(dims[0], p, extent[0]),
                                                   detail::axis_node_coords(dims[1], p, extent[1]),
                                                   detail::axis_node_coords(dims[2], p, extent[2])};
  const auto grid = mesh.node_grid();
  mesh.coords.resize(static_cast<std::size_t>(grid[0]) * grid[1] * grid[2]);
  for (int kz = 0; kz < grid[2]; ++kz)
    for (int ky = 0; ky < grid[1]; ++ky)
      for (int kx = 0; kx < grid[0]; ++kx) {
        const double x = axis[0][kx], y = axis[1][ky], z = axis[2][kz];
        double disp = 0.0;
        if (deform_amplitude > 0.0) {
          disp = deform_amplitude * std::sin(2.0 * std::numbers::pi * x / extent[0]) *
                 std::sin(2.0 * std::numbers::pi * y / extent[1]) *
                 std::sin(2.0 * std::numbers::pi * z / extent[2]);
        }
        const std::size_t g = static_cast<std::size_t>(kx) + static_cast<std::size_t>(grid[0]) * (ky + static_cast<std::size_t>(grid[1]) * kz);
        mesh.coords[g] = {x + extent[0] * disp, y + extent[1] * disp, z + extent[2] * disp};
      }

  detail::fill_elem_nodes(mesh);
  return mesh;
}

/// Global node indices on the box boundary (any face), ascending.
inline std::vector<int> boundary_nodes(const HexMesh& mesh) {
  const auto g = mesh.node_grid();
  std::vector<int> out;
  for (int kz = 0; kz < g[2]; ++kz)
    for (int ky = 0; ky < g[1]; ++ky)
      for (int kx = 0; kx < g[0]; ++kx)
        if (kx == 0 || kx == g[0] - 1 || ky == 0 || ky == g[1] - 1 || kz == 0 || kz == g[2] - 1)
          out.push_back(kx + g[0] * (ky + g[1] * kz));
  return out;
}

/// Plain-text mesh dump: header `hexmesh ex ey ez p a`, then one line per
/// global node `x y z` in node-index order, 17 significant digits
/// (coordinates survive the decimal round-trip bitwise).
inline void dump_mesh(const HexMesh& mesh, std::ostream& os) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "hexmesh %d %d %d %d %.17g\n", mesh.dims[0], mesh.dims[1],
                mesh.dims[2], mesh.degree, mesh.deform_amplitude);
  os << buf;
  for (const auto& c : mesh.coords) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", c[0], c[1], c[2]);
    os << buf;
  }
}

/// Read back a dump_mesh file. Connectivity is rebuilt from the header;
/// the extent is recovered from the far-corner node (the deformation
/// leaves boundary nodes in place).
inline HexMesh load_mesh(std::istream& is) {
  std::string tag;
  HexMesh mesh;
  is >> tag >> mesh.dims[0] >> mesh.dims[1] >> mesh.dims[2] >> mesh.degree >> mesh.deform_amplitude;
  if (!is || tag != "hexmesh") throw std::runtime_error("load_mesh: bad header");
  if (mesh.dims[0] < 1 || mesh.dims[1] < 1 || mesh.dims[2] < 1 || mesh.degree < 1)
    throw std::runtime_error("load_mesh: bad header values");

  const auto grid = mesh.node_grid();
  const std::size_t nn = static_cast<std::size_t>(grid[0]) * grid[1] * grid[2];
  mesh.coords.resize(nn);
  for (std::size_t g = 0; g < nn; ++g) {
    if (!(is >> mesh.coords[g][0] >> mesh.coords[g][1] >> mesh.coords[g][2]))
      throw std::runtime_error("load_mesh: truncated node list");
  }
  mesh.extent = mesh.coords.back();
  detail::fill_elem_nodes(mesh);
  return mesh;
}

}  // namespace hexbp

// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexbp/mesh.hpp"
#include "hexbp/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hexbp {

class degenerate_element_error : public std::runtime_error {
 public:
  degenerate_element_error(int element, int qpt, double det)
      : std::runtime_error("non-positive Jacobian determinant " + std::to_string(det) + " at element " +
                           std::to_string(element) + ", quadrature point " + std::to_string(qpt)),
        element_(element),
        qpt_(qpt) {}
  int element() const { return element_; }
  int qpt() const { return qpt_; }

 private:
  int element_;
  int qpt_;
};

enum class FactorKind { Mass, Diffusion };

/// Precomputed per-quadrature-point geometric data, one block of
/// `components` doubles per point:
///   Mass      -> { w * detJ }
///   Diffusion -> { G_rr, G_rs, G_rt, G_ss, G_st, G_tt } of
///                G = w * detJ * J^-1 J^-T (symmetric, SPD).
struct GeomFactors {
  FactorKind kind = FactorKind::Mass;
  int components = 1;
  int quad_pts_per_elem = 0;
  int num_elements = 0;
  std::vector<double> data;

  std::span<const double> at(int elem, int qpt) const {
    const std::size_t off =
        (static_cast<std::size_t>(elem) * quad_pts_per_elem + qpt) * components;
    return {data.data() + off, static_cast<std::size_t>(components)};
  }
  std::span<const double> elem(int e) const {
    const std::size_t n = static_cast<std::size_t>(quad_pts_per_elem) * components;
    return {data.data() + static_cast<std::size_t>(e) * n, n};
  }
};

/// Mapping Jacobians at every quadrature point: 3x3 row-major blocks
/// J(c,d) = d x_c / d r_d, plus determinants.
struct ElementJacobians {
  int quad_pts_per_elem = 0;
  int num_elements = 0;
  std::vector<double> jac;  // E * q^3 * 9
  std::vector<double> det;  // E * q^3
};

namespace detail {

// Gathers one coordinate component of an element into nodal order.
inline void gather_coords(const HexMesh& mesh, int e, int component, std::span<double> out) {
  const auto nodes = mesh.element(e);
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = mesh.coords[nodes[i]][component];
}

}  // namespace detail

inline ElementJacobians compute_jacobians(const HexMesh& mesh, const TensorBasis& basis) {
  if (basis.p != mesh.degree)
    throw std::invalid_argument("compute_jacobians: basis degree must match mesh degree (isoparametric)");

  const int ne = mesh.num_elements();
  const int q3 = basis.quad_pts_per_elem();
  ElementJacobians out;
  out.quad_pts_per_elem = q3;
  out.num_elements = ne;
  out.jac.resize(static_cast<std::size_t>(ne) * q3 * 9);
  out.det.resize(static_cast<std::size_t>(ne) * q3);

  int bad_elem = -1, bad_qpt = -1;
  double bad_det = 0.0;
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    ElemScratch ws(basis.num_nodes_1d(), basis.num_quad_1d());
    std::vector<double> nodal(basis.nodes_per_elem());
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (int e = 0; e < ne; ++e) {
      double* J = out.jac.data() + static_cast<std::size_t>(e) * q3 * 9;
      for (int c = 0; c < 3; ++c) {
        detail::gather_coords(mesh, e, c, nodal);
        elem_grad(basis, nodal, ws.qfield[0], ws.qfield[1], ws.qfield[2], ws);
        for (int qp = 0; qp < q3; ++qp)
          for (int d = 0; d < 3; ++d) J[qp * 9 + c * 3 + d] = ws.qfield[d][qp];
      }
      for (int qp = 0; qp < q3; ++qp) {
        const double* j = J + qp * 9;
        const double det = j[0] * (j[4] * j[8] - j[5] * j[7]) - j[1] * (j[3] * j[8] - j[5] * j[6]) +
                           j[2] * (j[3] * j[7] - j[4] * j[6]);
        out.det[static_cast<std::size_t>(e) * q3 + qp] = det;
        if (!(det > 0.0)) {
#ifdef _OPENMP
#pragma omp critical
#endif
          {
            if (bad_elem < 0 || e < bad_elem) {
              bad_elem = e;
              bad_qpt = qp;
              bad_det = det;
            }
          }
        }
      }
    }
  }
  if (bad_elem >= 0) throw degenerate_element_error(bad_elem, bad_qpt, bad_det);
  return out;
}

namespace detail {

// Tensor-product quadrature weight at linear point index qp (x fastest).
inline double tensor_weight(const QuadRule1D& rule, int qp) {
  const int q = rule.size();
  const int a = qp % q, b = (qp / q) % q, c = qp / (q * q);
  return rule.weights[a] * rule.weights[b] * rule.weights[c];
}

}  // namespace detail

inline GeomFactors mass_factors(const HexMesh& mesh, const TensorBasis& basis) {
  const ElementJacobians jac = compute_jacobians(mesh, basis);
  GeomFactors f;
  f.kind = FactorKind::Mass;
  f.components = 1;
  f.quad_pts_per_elem = jac.quad_pts_per_elem;
  f.num_elements = jac.num_elements;
  f.data.resize(jac.det.size());
  const int q3 = f.quad_pts_per_elem;
  for (int e = 0; e < f.num_elements; ++e)
    for (int qp = 0; qp < q3; ++qp)
      f.data[static_cast<std::size_t>(e) * q3 + qp] =
          detail::tensor_weight(basis.quad, qp) * jac.det[static_cast<std::size_t>(e) * q3 + qp];
  return f;
}

inline GeomFactors diffusion_factors(const HexMesh& mesh, const TensorBasis& basis) {
  const ElementJacobians jac = compute_jacobians(mesh, basis);
  GeomFactors f;
  f.kind = FactorKind::Diffusion;
  f.components = 6;
  f.quad_pts_per_elem = jac.quad_pts_per_elem;
  f.num_elements = jac.num_elements;
  const int q3 = f.quad_pts_per_elem;
  f.data.resize(static_cast<std::size_t>(f.num_elements) * q3 * 6);

  for (int e = 0; e < f.num_elements; ++e)
    for (int qp = 0; qp < q3; ++qp) {
      const std::size_t idx = static_cast<std::size_t>(e) * q3 + qp;
      const double* j = jac.jac.data() + idx * 9;
      const double det = jac.det[idx];
      const double w = detail::tensor_weight(basis.quad, qp);

      // J^-1 = adj(J) / det, rows of J^-1 indexed by reference direction.
      const double inv[9] = {
          (j[4] * j[8] - j[5] * j[7]) / det, (j[2] * j[7] - j[1] * j[8]) / det, (j[1] * j[5] - j[2] * j[4]) / det,
          (j[5] * j[6] - j[3] * j[8]) / det, (j[0] * j[8] - j[2] * j[6]) / det, (j[2] * j[3] - j[0] * j[5]) / det,
          (j[3] * j[7] - j[4] * j[6]) / det, (j[1] * j[6] - j[0] * j[7]) / det, (j[0] * j[4] - j[1] * j[3]) / det};

      double* g = f.data.data() + idx * 6;
      int c = 0;
      for (int r = 0; r < 3; ++r)
        for (int s = r; s < 3; ++s) {
          double dot = 0.0;
          for (int k = 0; k < 3; ++k) dot += inv[r * 3 + k] * inv[s * 3 + k];
          g[c++] = w * det * dot;
        }
    }
  return f;
}

}  // namespace hexbp

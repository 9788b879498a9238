// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "hexbp/dense.hpp"
#include "hexbp/quadrature.hpp"

namespace hexbp {

/// Degree-p tensor-product Lagrange basis on GLL nodes, tabulated at a
/// 1D quadrature rule: B(a,j) = l_j(q_a) and D(a,j) = l'_j(q_a).
/// Bt/Dt cache the transposes for the reverse-mode contractions.
struct TensorBasis {
  int p = 0;          // polynomial degree
  QuadRule1D nodes;   // GLL, p+1 points
  QuadRule1D quad;    // q points
  DenseMatrix B;      // q x (p+1) interpolation
  DenseMatrix D;      // q x (p+1) differentiation
  DenseMatrix Bt;     // (p+1) x q
  DenseMatrix Dt;     // (p+1) x q
  bool collocated = false;

  int num_nodes_1d() const { return p + 1; }
  int num_quad_1d() const { return quad.size(); }
  int nodes_per_elem() const { return (p + 1) * (p + 1) * (p + 1); }
  int quad_pts_per_elem() const { const int q = quad.size(); return q * q * q; }
};

/// Barycentric weights w_j = 1 / prod_{k != j} (x_j - x_k).
inline std::vector<double> barycentric_weights(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> w(n, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) w[j] *= x[j] - x[k];
  for (double& v : w) v = 1.0 / v;
  return w;
}

/// Values and first derivatives of all Lagrange polynomials on `x` at the
/// point y, in barycentric form. Exact coincidence with a node (as happens
/// for collocated rules and shared +-1 endpoints) takes the nodal branch,
/// which makes B rows exact unit vectors and D rows sum to zero exactly.
inline void lagrange_eval(const std::vector<double>& x, const std::vector<double>& w, double y,
                          std::span<double> values, std::span<double> derivs) {
  const int n = static_cast<int>(x.size());
  int at_node = -1;
  for (int j = 0; j < n; ++j)
    if (y == x[j]) at_node = j;

  if (at_node >= 0) {
    const int m = at_node;
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      values[j] = (j == m) ? 1.0 : 0.0;
      if (j != m) {
        derivs[j] = (w[j] / w[m]) / (x[m] - x[j]);
        diag -= derivs[j];
      }
    }
    derivs[m] = diag;  // negative-sum trick: exact zero row sum
    return;
  }

  double s = 0.0, t = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = y - x[k];
    s += w[k] / d;
    t += w[k] / (d * d);
  }
  for (int j = 0; j < n; ++j) {
    const double d = y - x[j];
    const double lj = (w[j] / d) / s;
    values[j] = lj;
    derivs[j] = lj * (t / s - 1.0 / d);
  }
}

/// Build the tabulated basis for degree p with a q-point rule of the given
/// kind. kind = GLL with q = p+1 is the collocated case (B is exactly the
/// identity).
inline TensorBasis build_basis(int p, int q, QuadKind kind) {
  if (p < 1) throw std::invalid_argument("build_basis: degree must be >= 1");
  if (q < 1) throw std::invalid_argument("build_basis: need at least 1 quadrature point");

  TensorBasis basis;
  basis.p = p;
  basis.nodes = gll_rule(p + 1);
  basis.quad = (kind == QuadKind::GLL) ? gll_rule(q) : gl_rule(q);
  basis.collocated = (kind == QuadKind::GLL && q == p + 1);

  const int n = p + 1;
  basis.B = DenseMatrix(q, n);
  basis.D = DenseMatrix(q, n);
  const std::vector<double> bw = barycentric_weights(basis.nodes.points);
  std::vector<double> vals(n), ders(n);
  for (int a = 0; a < q; ++a) {
    lagrange_eval(basis.nodes.points, bw, basis.quad.points[a], vals, ders);
    for (int j = 0; j < n; ++j) {
      basis.B(a, j) = vals[j];
      basis.D(a, j) = ders[j];
    }
  }
  basis.Bt = basis.B.transposed();
  basis.Dt = basis.D.transposed();
  return basis;
}

}  // namespace hexbp

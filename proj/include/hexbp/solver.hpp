// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hexbp/dense.hpp"
#include "hexbp/operator.hpp"

namespace hexbp {

class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Essential (Dirichlet) constraints: strictly increasing dof indices with
/// prescribed values.
struct BCSet {
  std::vector<int> dofs;
  std::vector<double> values;

  void validate(int l_size) const {
    if (dofs.size() != values.size()) throw std::invalid_argument("BCSet: dofs/values size mismatch");
    for (std::size_t i = 0; i < dofs.size(); ++i) {
      if (dofs[i] < 0 || dofs[i] >= l_size) throw std::invalid_argument("BCSet: dof index out of range");
      if (i > 0 && dofs[i] <= dofs[i - 1]) throw std::invalid_argument("BCSet: dof indices must be strictly increasing");
    }
  }
};

/// Homogeneous constraints on every boundary node of the mesh.
inline BCSet boundary_bcs(const HexMesh& mesh, double value = 0.0) {
  BCSet bcs;
  bcs.dofs = boundary_nodes(mesh);
  bcs.values.assign(bcs.dofs.size(), value);
  return bcs;
}

/// Constrained operator w = P A P u + (I - P) u, where P zeroes the
/// essential dofs. Symmetric; SPD on the free subspace when A is
/// semidefinite with nullspace eliminated by the constraints.
class ConstrainedOperator {
 public:
  ConstrainedOperator(const OperatorHandle& op, BCSet bcs) : op_(op), bcs_(std::move(bcs)) {
    bcs_.validate(op.size());
    essential_.assign(op.size(), 0);
    for (int d : bcs_.dofs) essential_[d] = 1;
  }

  int size() const { return op_.size(); }
  const BCSet& bcs() const { return bcs_; }
  bool is_essential(int dof) const { return essential_[dof] != 0; }

  void apply(std::span<const double> u, std::vector<double>& w) const {
    scratch_.assign(u.begin(), u.end());
    for (int d : bcs_.dofs) scratch_[d] = 0.0;
    op_.apply(scratch_, w);
    for (int d : bcs_.dofs) w[d] = u[d];
  }

  const OperatorHandle& raw() const { return op_; }

 private:
  const OperatorHandle& op_;
  BCSet bcs_;
  std::vector<int> essential_;
  mutable std::vector<double> scratch_;
};

struct CGReport {
  int iterations = 0;
  bool converged = false;
  double final_rel_residual = 0.0;
  std::vector<double> residual_history;  // |r_k|, k = 0 .. iterations
  double seconds = 0.0;
};

/// Preconditioned conjugate gradient. `apply` must be symmetric positive
/// (semi)definite on the subspace reached from b - A x0. The optional
/// `diag` is the operator diagonal for Jacobi preconditioning. Stops when
/// |r_k| / |r_0| <= rel_tol or after max_iter iterations (converged stays
/// false); a rel_tol of 0 runs exactly max_iter iterations. All inner
/// products use the fixed-order partitioned summation, so the recurrence
/// is bitwise reproducible.
template <class ApplyFn>
CGReport cg(ApplyFn&& apply, std::span<const double> b, std::vector<double>& x, double rel_tol = 1e-8,
            int max_iter = 2000, const std::vector<double>* diag = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = b.size();
  if (x.size() != n) throw std::invalid_argument("cg: x0 length mismatch");
  if (diag && diag->size() != n) throw std::invalid_argument("cg: diagonal length mismatch");

  CGReport report;
  std::vector<double> r(n), z(n), p(n), Ap;

  apply(x, Ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];

  auto precondition = [&](const std::vector<double>& rin, std::vector<double>& zout) {
    if (diag)
      for (std::size_t i = 0; i < n; ++i) zout[i] = rin[i] / (*diag)[i];
    else
      zout = rin;
  };

  const double r0_norm = deterministic_norm(r);
  report.residual_history.push_back(r0_norm);
  if (!std::isfinite(r0_norm)) throw divergence_error("cg: non-finite initial residual");
  if (r0_norm == 0.0) {
    report.converged = true;
    report.final_rel_residual = 0.0;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  }

  precondition(r, z);
  p = z;
  double rz = deterministic_dot(r, z);

  for (int k = 1; k <= max_iter; ++k) {
    apply(p, Ap);
    const double pAp = deterministic_dot(p, Ap);
    if (!std::isfinite(pAp) || pAp <= 0.0)
      throw divergence_error("cg: operator not positive definite on the search space");
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];

    const double rnorm = deterministic_norm(r);
    if (!std::isfinite(rnorm)) throw divergence_error("cg: non-finite residual");
    report.residual_history.push_back(rnorm);
    report.iterations = k;
    if (rnorm / r0_norm <= rel_tol) {
      report.converged = true;
      break;
    }
    precondition(r, z);
    const double rz_next = deterministic_dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  report.final_rel_residual = report.residual_history.back() / r0_norm;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

/// Operator diagonal assembled element by element (no size guard): the
/// diagonal entry of A^e at local node i is sum_q of the factor-weighted
/// squares of the 3D basis (BP1) or basis-gradient (BP3/BP5) entries.
inline std::vector<double> jacobi_diagonal(const OperatorSetup& s) {
  const auto& basis = s.basis;
  const int n = basis.num_nodes_1d();
  const int q = basis.num_quad_1d();
  const int nen = basis.nodes_per_elem();
  const int ne = s.num_elements();
  std::vector<double> diag_e(static_cast<std::size_t>(ne) * nen);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int e = 0; e < ne; ++e) {
    double* de = diag_e.data() + static_cast<std::size_t>(e) * nen;
    const auto factors = s.factors.elem(e);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          double sum = 0.0;
          for (int c = 0; c < q; ++c)
            for (int b = 0; b < q; ++b)
              for (int a = 0; a < q; ++a) {
                const int qp = a + q * (b + q * c);
                if (is_diffusion(s.kind)) {
                  const double* g = factors.data() + static_cast<std::size_t>(qp) * 6;
                  const double dr = basis.D(a, i) * basis.B(b, j) * basis.B(c, k);
                  const double ds = basis.B(a, i) * basis.D(b, j) * basis.B(c, k);
                  const double dt = basis.B(a, i) * basis.B(b, j) * basis.D(c, k);
                  sum += g[0] * dr * dr + g[3] * ds * ds + g[5] * dt * dt +
                         2.0 * (g[1] * dr * ds + g[2] * dr * dt + g[4] * ds * dt);
                } else {
                  const double phi = basis.B(a, i) * basis.B(b, j) * basis.B(c, k);
                  sum += factors[qp] * phi * phi;
                }
              }
          de[i + n * (j + n * k)] = sum;
        }
  }
  return scatter_add(s.restriction, diag_e);
}

inline std::vector<double> jacobi_diagonal(const OperatorHandle& op) { return jacobi_diagonal(op.setup()); }

/// Jacobi diagonal of the constrained operator: 1 on essential dofs.
inline std::vector<double> jacobi_diagonal(const ConstrainedOperator& op) {
  std::vector<double> d = jacobi_diagonal(op.raw().setup());
  for (int dof : op.bcs().dofs) d[dof] = 1.0;
  return d;
}

/// Consistent load vector: b_i = sum_q wdetJ_q f(x_q) phi_i(x_q), built
/// with the same quadrature as `basis`. `mass` must hold mass-kind
/// factors on that rule.
template <class F>
std::vector<double> assemble_load(const HexMesh& mesh, const TensorBasis& basis, const GeomFactors& mass,
                                  const ElementRestriction& restriction, F&& f) {
  if (mass.kind != FactorKind::Mass) throw std::invalid_argument("assemble_load: mass factors required");
  const int ne = mesh.num_elements();
  const int nen = basis.nodes_per_elem();
  const int q3 = basis.quad_pts_per_elem();
  std::vector<double> load_e(static_cast<std::size_t>(ne) * nen);

#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    ElemScratch ws(basis.num_nodes_1d(), basis.num_quad_1d());
    std::vector<double> nodal(nen), fq(q3);
    std::array<std::vector<double>, 3> xq;
    for (auto& v : xq) v.resize(q3);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (int e = 0; e < ne; ++e) {
      for (int c = 0; c < 3; ++c) {
        detail::gather_coords(mesh, e, c, nodal);
        elem_interp(basis, nodal, xq[c], ws.a, ws.b);
      }
      const auto wdetj = mass.elem(e);
      for (int qp = 0; qp < q3; ++qp) fq[qp] = wdetj[qp] * f(xq[0][qp], xq[1][qp], xq[2][qp]);
      elem_interp_transpose(basis, fq, std::span<double>(load_e.data() + static_cast<std::size_t>(e) * nen, nen),
                            ws.a, ws.b);
    }
  }
  return scatter_add(restriction, load_e);
}

/// L-vector of g evaluated at the mesh nodes.
template <class F>
std::vector<double> nodal_interpolant(const HexMesh& mesh, F&& g) {
  std::vector<double> out(mesh.coords.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g(mesh.coords[i][0], mesh.coords[i][1], mesh.coords[i][2]);
  return out;
}

/// Discrete L2 norm sqrt(v^T M v) with M the BP1 mass operator.
inline double mass_weighted_norm(const OperatorHandle& mass_op, std::span<const double> v) {
  std::vector<double> mv;
  mass_op.apply(v, mv);
  return std::sqrt(deterministic_dot(v, mv));
}

/// Discrete L2 error |u_h - g|: the finite element function is
/// interpolated to the quadrature points and the difference to g at the
/// mapped points integrated with the wdetJ weights. Unlike the nodal
/// difference to the interpolant (which superconverges on structured
/// meshes), this measures the plain O(h^{p+1}) error.
template <class F>
double discrete_l2_error(const HexMesh& mesh, const TensorBasis& basis, const GeomFactors& mass,
                         const ElementRestriction& restriction, std::span<const double> u_h, F&& g) {
  if (mass.kind != FactorKind::Mass) throw std::invalid_argument("discrete_l2_error: mass factors required");
  const int ne = mesh.num_elements();
  const int nen = basis.nodes_per_elem();
  const int q3 = basis.quad_pts_per_elem();
  const std::vector<double> u_e = gather(restriction, u_h);

  std::vector<double> per_elem(ne, 0.0);  // fixed-order final sum keeps the result thread-count independent
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    ElemScratch ws(basis.num_nodes_1d(), basis.num_quad_1d());
    std::vector<double> nodal(nen), uq(q3);
    std::array<std::vector<double>, 3> xq;
    for (auto& v : xq) v.resize(q3);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (int e = 0; e < ne; ++e) {
      for (int c = 0; c < 3; ++c) {
        detail::gather_coords(mesh, e, c, nodal);
        elem_interp(basis, nodal, xq[c], ws.a, ws.b);
      }
      std::copy_n(u_e.data() + static_cast<std::size_t>(e) * nen, nen, nodal.data());
      elem_interp(basis, nodal, uq, ws.a, ws.b);
      const auto wdetj = mass.elem(e);
      double sum = 0.0;
      for (int qp = 0; qp < q3; ++qp) {
        const double d = uq[qp] - g(xq[0][qp], xq[1][qp], xq[2][qp]);
        sum += wdetj[qp] * d * d;
      }
      per_elem[e] = sum;
    }
  }
  return std::sqrt(deterministic_sum(per_elem));
}

}  // namespace hexbp

// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>

#include "hexbp/basis.hpp"
#include "hexbp/dense.hpp"

namespace hexbp {

/// Floating-point multiply/add tallies for one kernel invocation. Counts
/// are derived from the executed loop trip counts, so they are exact and
/// cost nothing when the pointer passed to a kernel is null.
struct FlopCount {
  std::uint64_t mul = 0;
  std::uint64_t add = 0;

  std::uint64_t total() const { return mul + add; }
  FlopCount& operator+=(const FlopCount& o) {
    mul += o.mul;
    add += o.add;
    return *this;
  }
};

namespace detail {

inline void check_contract_shapes(const DenseMatrix& A, int axis, std::size_t x_size,
                                  const std::array<int, 3>& xdims, std::size_t y_size) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("contract_dim: axis must be 0, 1 or 2");
  if (xdims[axis] != A.cols()) throw std::invalid_argument("contract_dim: axis length does not match matrix columns");
  const std::size_t xn = static_cast<std::size_t>(xdims[0]) * xdims[1] * xdims[2];
  if (x_size != xn) throw std::invalid_argument("contract_dim: input size does not match dims");
  std::array<int, 3> yd = xdims;
  yd[axis] = A.rows();
  const std::size_t yn = static_cast<std::size_t>(yd[0]) * yd[1] * yd[2];
  if (y_size != yn) throw std::invalid_argument("contract_dim: output size does not match dims");
}

}  // namespace detail

/// Contract one axis of a rank-3 tensor (x-fastest layout) with the
/// matrix A: Y[.. i ..] = sum_m A(i, m) X[.. m ..]. Returns the output
/// dims. `accumulate` adds into y instead of overwriting.
inline std::array<int, 3> contract_dim(const DenseMatrix& A, int axis, std::span<const double> x,
                                       std::array<int, 3> xdims, std::span<double> y,
                                       FlopCount* flops = nullptr, bool accumulate = false) {
  detail::check_contract_shapes(A, axis, x.size(), xdims, y.size());
  const int m = A.rows(), n = A.cols();
  const int n0 = xdims[0], n1 = xdims[1], n2 = xdims[2];

  if (axis == 0) {
    // X viewed as an n0 x (n1*n2) matrix with contiguous columns.
    const int rest = n1 * n2;
    for (int c = 0; c < rest; ++c) {
      const double* xc = x.data() + static_cast<std::size_t>(c) * n0;
      double* yc = y.data() + static_cast<std::size_t>(c) * m;
      for (int a = 0; a < m; ++a) {
        const double* Ar = A.row(a);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += Ar[i] * xc[i];
        yc[a] = accumulate ? yc[a] + sum : sum;
      }
    }
    if (flops) {
      flops->mul += static_cast<std::uint64_t>(rest) * m * n;
      flops->add += static_cast<std::uint64_t>(rest) * m * (n - 1 + (accumulate ? 1 : 0));
    }
  } else if (axis == 1) {
    for (int k = 0; k < n2; ++k) {
      const double* xk = x.data() + static_cast<std::size_t>(k) * n0 * n1;
      double* yk = y.data() + static_cast<std::size_t>(k) * n0 * m;
      for (int a = 0; a < m; ++a) {
        double* yrow = yk + static_cast<std::size_t>(a) * n0;
        if (!accumulate) std::memset(yrow, 0, sizeof(double) * n0);
        const double* Ar = A.row(a);
        for (int j = 0; j < n; ++j) {
          const double c = Ar[j];
          const double* xrow = xk + static_cast<std::size_t>(j) * n0;
          for (int i = 0; i < n0; ++i) yrow[i] += c * xrow[i];
        }
      }
    }
    if (flops) {
      flops->mul += static_cast<std::uint64_t>(n2) * m * n * n0;
      flops->add += static_cast<std::uint64_t>(n2) * m * n * n0;
    }
  } else {
    const int plane = n0 * n1;
    for (int a = 0; a < m; ++a) {
      double* yplane = y.data() + static_cast<std::size_t>(a) * plane;
      if (!accumulate) std::memset(yplane, 0, sizeof(double) * plane);
      const double* Ar = A.row(a);
      for (int k = 0; k < n; ++k) {
        const double c = Ar[k];
        const double* xplane = x.data() + static_cast<std::size_t>(k) * plane;
        for (int i = 0; i < plane; ++i) yplane[i] += c * xplane[i];
      }
    }
    if (flops) {
      flops->mul += static_cast<std::uint64_t>(m) * n * plane;
      flops->add += static_cast<std::uint64_t>(m) * n * plane;
    }
  }

  std::array<int, 3> ydims = xdims;
  ydims[axis] = m;
  return ydims;
}

/// Per-element scratch for the sum-factorization sweeps: three
/// max(n,q)^3 temporaries plus nodal/quadrature staging buffers.
struct ElemScratch {
  ElemScratch(int n1d, int q1d) {
    const std::size_t big = static_cast<std::size_t>(std::max(n1d, q1d));
    const std::size_t cap = big * big * big;
    a.resize(cap);
    b.resize(cap);
    c.resize(cap);
    nodal.resize(static_cast<std::size_t>(n1d) * n1d * n1d);
    for (auto& g : qfield) g.resize(static_cast<std::size_t>(q1d) * q1d * q1d);
  }

  std::vector<double> a, b, c;
  std::vector<double> nodal;
  std::array<std::vector<double>, 3> qfield;

  std::size_t bytes() const {
    return sizeof(double) * (a.capacity() + b.capacity() + c.capacity() + nodal.capacity() +
                             qfield[0].capacity() + qfield[1].capacity() + qfield[2].capacity());
  }
};

/// Interpolate nodal values to quadrature points: out = (B x B x B) u.
/// Collocated rules skip the identity contractions.
inline void elem_interp(const TensorBasis& basis, std::span<const double> u, std::span<double> out,
                        std::span<double> tmp0, std::span<double> tmp1, FlopCount* flops = nullptr) {
  const int n = basis.num_nodes_1d(), q = basis.num_quad_1d();
  if (basis.collocated) {
    std::memcpy(out.data(), u.data(), sizeof(double) * u.size());
    return;
  }
  auto d1 = contract_dim(basis.B, 0, u, {n, n, n}, tmp0.subspan(0, static_cast<std::size_t>(q) * n * n), flops);
  auto d2 = contract_dim(basis.B, 1, tmp0.subspan(0, static_cast<std::size_t>(q) * n * n), d1,
                         tmp1.subspan(0, static_cast<std::size_t>(q) * q * n), flops);
  contract_dim(basis.B, 2, tmp1.subspan(0, static_cast<std::size_t>(q) * q * n), d2, out, flops);
}

/// Transpose of elem_interp: out (+)= (B x B x B)^T v.
inline void elem_interp_transpose(const TensorBasis& basis, std::span<const double> v, std::span<double> out,
                                  std::span<double> tmp0, std::span<double> tmp1, FlopCount* flops = nullptr,
                                  bool accumulate = false) {
  const int n = basis.num_nodes_1d(), q = basis.num_quad_1d();
  if (basis.collocated) {
    if (accumulate) {
      for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
      if (flops) flops->add += v.size();
    } else {
      std::memcpy(out.data(), v.data(), sizeof(double) * v.size());
    }
    return;
  }
  auto d1 = contract_dim(basis.Bt, 2, v, {q, q, q}, tmp0.subspan(0, static_cast<std::size_t>(q) * q * n), flops);
  auto d2 = contract_dim(basis.Bt, 1, tmp0.subspan(0, static_cast<std::size_t>(q) * q * n), d1,
                         tmp1.subspan(0, static_cast<std::size_t>(q) * n * n), flops);
  contract_dim(basis.Bt, 0, tmp1.subspan(0, static_cast<std::size_t>(q) * n * n), d2, out, flops, accumulate);
}

/// Reference-space gradient at quadrature points:
///   g_r = (B x B x D) u,  g_s = (B x D x B) u,  g_t = (D x B x B) u,
/// with the interpolation sweep along r shared by the s and t components.
inline void elem_grad(const TensorBasis& basis, std::span<const double> u, std::span<double> gr,
                      std::span<double> gs, std::span<double> gt, ElemScratch& ws,
                      FlopCount* flops = nullptr) {
  const int n = basis.num_nodes_1d(), q = basis.num_quad_1d();
  const std::array<int, 3> nd = {n, n, n};

  if (basis.collocated) {
    contract_dim(basis.D, 0, u, nd, gr, flops);
    contract_dim(basis.D, 1, u, nd, gs, flops);
    contract_dim(basis.D, 2, u, nd, gt, flops);
    return;
  }

  std::span<double> ta(ws.a.data(), static_cast<std::size_t>(q) * n * n);
  std::span<double> tb(ws.b.data(), static_cast<std::size_t>(q) * q * n);

  auto d1 = contract_dim(basis.D, 0, u, nd, ta, flops);
  auto d2 = contract_dim(basis.B, 1, ta, d1, tb, flops);
  contract_dim(basis.B, 2, tb, d2, gr, flops);

  d1 = contract_dim(basis.B, 0, u, nd, ta, flops);  // shared interpolation along r
  d2 = contract_dim(basis.D, 1, ta, d1, tb, flops);
  contract_dim(basis.B, 2, tb, d2, gs, flops);

  d2 = contract_dim(basis.B, 1, ta, d1, tb, flops);
  contract_dim(basis.D, 2, tb, d2, gt, flops);
}

/// Transpose of elem_grad: out (+)= sum_d (chain_d)^T g_d, sweeping axes
/// in the reverse order (t, s, r) of the forward pass.
inline void elem_grad_transpose(const TensorBasis& basis, std::span<const double> gr,
                                std::span<const double> gs, std::span<const double> gt,
                                std::span<double> out, ElemScratch& ws, FlopCount* flops = nullptr,
                                bool accumulate = false) {
  const int n = basis.num_nodes_1d(), q = basis.num_quad_1d();
  const std::array<int, 3> qd = {q, q, q};

  if (basis.collocated) {
    contract_dim(basis.Dt, 0, gr, qd, out, flops, accumulate);
    contract_dim(basis.Dt, 1, gs, qd, out, flops, true);
    contract_dim(basis.Dt, 2, gt, qd, out, flops, true);
    return;
  }

  std::span<double> ta(ws.a.data(), static_cast<std::size_t>(q) * q * n);
  std::span<double> tb(ws.b.data(), static_cast<std::size_t>(q) * n * n);
  std::span<double> tc(ws.c.data(), static_cast<std::size_t>(q) * q * n);

  // s and t chains share the trailing B^T sweep along r.
  auto d1 = contract_dim(basis.Bt, 2, gs, qd, ta, flops);
  auto d2 = contract_dim(basis.Dt, 1, ta, d1, tb, flops);
  d1 = contract_dim(basis.Dt, 2, gt, qd, tc, flops);
  contract_dim(basis.Bt, 1, tc, d1, tb, flops, true);
  contract_dim(basis.Bt, 0, tb, d2, out, flops, accumulate);

  d1 = contract_dim(basis.Bt, 2, gr, qd, ta, flops);
  d2 = contract_dim(basis.Bt, 1, ta, d1, tb, flops);
  contract_dim(basis.Dt, 0, tb, d2, out, flops, true);
}

}  // namespace hexbp

// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hexbp/alloc_stats.hpp"
#include "hexbp/cost_model.hpp"
#include "hexbp/dense.hpp"
#include "hexbp/geometry.hpp"
#include "hexbp/restriction.hpp"
#include "hexbp/tensor.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hexbp {

/// Benchmark operators: BP1 = mass, BP3 = stiffness on a Gauss rule,
/// BP5 = stiffness collocated on the GLL nodes.
enum class BPKind { BP1, BP3, BP5 };

enum class Backend { Multipass, Fused, Oracle };

inline std::string to_string(BPKind k) {
  switch (k) {
    case BPKind::BP1: return "bp1";
    case BPKind::BP3: return "bp3";
    case BPKind::BP5: return "bp5";
  }
  return "?";
}

inline std::string to_string(Backend b) {
  switch (b) {
    case Backend::Multipass: return "multipass";
    case Backend::Fused: return "fused";
    case Backend::Oracle: return "oracle";
  }
  return "?";
}

inline bool is_diffusion(BPKind k) { return k != BPKind::BP1; }

/// Quadrature convention: BP1/BP3 integrate on p+2 Gauss points per
/// dimension, BP5 collocates on the p+1 GLL nodes.
inline int default_quad_points(BPKind kind, int p) { return kind == BPKind::BP5 ? p + 1 : p + 2; }
inline QuadKind quad_kind_for(BPKind kind) { return kind == BPKind::BP5 ? QuadKind::GLL : QuadKind::GL; }

/// Everything an operator application needs that is independent of the
/// backend; built once per (mesh, problem) and shared between handles.
struct OperatorSetup {
  BPKind kind = BPKind::BP1;
  TensorBasis basis;
  ElementRestriction restriction;
  GeomFactors factors;

  int l_size() const { return restriction.num_global; }
  int num_elements() const { return restriction.num_elements; }
};

inline std::shared_ptr<const OperatorSetup> make_setup(BPKind kind, const HexMesh& mesh) {
  auto setup = std::make_shared<OperatorSetup>();
  setup->kind = kind;
  setup->basis = build_basis(mesh.degree, default_quad_points(kind, mesh.degree), quad_kind_for(kind));
  setup->restriction = build_restriction(mesh);
  setup->factors = is_diffusion(kind) ? diffusion_factors(mesh, setup->basis) : mass_factors(mesh, setup->basis);
  return setup;
}

/// Column-compressed symmetric sparse matrix used by the oracle backend.
struct SparseMatrix {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> cols;  // (row, value), rows ascending

  void apply(std::span<const double> u, std::span<double> w) const {
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      const double uj = u[j];
      if (uj == 0.0) continue;
      for (const auto& [i, v] : cols[j]) w[i] += v * uj;
    }
  }

  double at(int i, int j) const {
    const auto& col = cols[j];
    auto it = std::lower_bound(col.begin(), col.end(), i,
                               [](const std::pair<int, double>& e, int row) { return e.first < row; });
    return (it != col.end() && it->first == i) ? it->second : 0.0;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& col : cols)
      for (const auto& [i, v] : col) m = std::max(m, std::abs(v));
    return m;
  }

  double inf_norm() const {
    std::vector<double> rowsum(n, 0.0);
    for (const auto& col : cols)
      for (const auto& [i, v] : col) rowsum[i] += std::abs(v);
    return *std::max_element(rowsum.begin(), rowsum.end());
  }

  double max_asymmetry() const {
    double m = 0.0;
    for (int j = 0; j < n; ++j)
      for (const auto& [i, v] : cols[j]) m = std::max(m, std::abs(v - at(j, i)));
    return m;
  }
};

/// Pointwise application of the 6-entry symmetric tensor: 9 multiplies
/// and 6 adds per quadrature point.
inline void apply_diffusion_factors(std::span<const double> g6, int q3, std::span<double> vr,
                                    std::span<double> vs, std::span<double> vt, FlopCount* flops) {
  for (int qp = 0; qp < q3; ++qp) {
    const double* g = g6.data() + static_cast<std::size_t>(qp) * 6;
    const double r = vr[qp], s = vs[qp], t = vt[qp];
    vr[qp] = g[0] * r + g[1] * s + g[2] * t;
    vs[qp] = g[1] * r + g[3] * s + g[4] * t;
    vt[qp] = g[2] * r + g[4] * s + g[5] * t;
  }
  if (flops) {
    flops->mul += static_cast<std::uint64_t>(q3) * 9;
    flops->add += static_cast<std::uint64_t>(q3) * 6;
  }
}

inline void apply_mass_factors(std::span<const double> wdetj, int q3, std::span<double> v, FlopCount* flops) {
  for (int qp = 0; qp < q3; ++qp) v[qp] *= wdetj[qp];
  if (flops) flops->mul += static_cast<std::uint64_t>(q3);
}

/// Backend scratch. Multipass owns global E-vectors plus one set of
/// quadrature-point fields per pipeline stage; fused owns a single
/// E-vector of per-element results plus per-thread element buffers. All
/// buffers are sized here; apply never allocates.
class Workspace {
 public:
  Workspace() = default;

  Workspace(BPKind kind, Backend backend, const ElementRestriction& r, const TensorBasis& basis) {
    const int nthreads =
#ifdef _OPENMP
        omp_get_max_threads();
#else
        1;
#endif
    const std::size_t esize = static_cast<std::size_t>(r.e_size());
    const std::size_t qsize = static_cast<std::size_t>(r.num_elements) * basis.quad_pts_per_elem();
    const int nfields = is_diffusion(kind) ? 3 : 1;

    if (backend == Backend::Multipass) {
      u_e.resize(esize);
      w_e.resize(esize);
      for (int f = 0; f < nfields; ++f) {
        grad_q[f].resize(qsize);
        flux_q[f].resize(qsize);
      }
      qpoint_fields_ = 2 * nfields;
    } else if (backend == Backend::Fused) {
      w_e.resize(esize);
      qpoint_fields_ = 0;
    }
    if (backend != Backend::Oracle) {
      elem.reserve(nthreads);
      for (int t = 0; t < nthreads; ++t) elem.emplace_back(basis.num_nodes_1d(), basis.num_quad_1d());
    }
  }

  TrackedBuffer u_e, w_e;
  std::array<TrackedBuffer, 3> grad_q, flux_q;
  std::vector<ElemScratch> elem;

  ElemScratch& thread_scratch() {
#ifdef _OPENMP
    return elem[omp_get_thread_num()];
#else
    return elem[0];
#endif
  }

  /// Number of global quadrature-point fields owned (multipass staging).
  int qpoint_fields() const { return qpoint_fields_; }

  std::size_t global_bytes() const {
    std::size_t b = u_e.bytes() + w_e.bytes();
    for (const auto& f : grad_q) b += f.bytes();
    for (const auto& f : flux_q) b += f.bytes();
    return b;
  }
  std::size_t per_thread_bytes() const {
    std::size_t b = 0;
    for (const auto& s : elem) b += s.bytes();
    return b;
  }
  std::size_t bytes() const { return global_bytes() + per_thread_bytes(); }

 private:
  int qpoint_fields_ = 0;
};

namespace detail {

// Fused element pipeline: load, forward contractions, pointwise factors,
// transpose contractions; the result stays in ws.nodal.
inline void element_apply(const OperatorSetup& s, int e, std::span<const double> lvec, ElemScratch& ws,
                          FlopCount* flops) {
  const auto& basis = s.basis;
  const auto& r = s.restriction;
  const int nen = r.nodes_per_elem;
  const int q3 = basis.quad_pts_per_elem();
  const int* gids = r.elem_to_global.data() + static_cast<std::size_t>(e) * nen;

  for (int i = 0; i < nen; ++i) ws.nodal[i] = lvec[gids[i]];

  if (is_diffusion(s.kind)) {
    elem_grad(basis, ws.nodal, ws.qfield[0], ws.qfield[1], ws.qfield[2], ws, flops);
    apply_diffusion_factors(s.factors.elem(e), q3, ws.qfield[0], ws.qfield[1], ws.qfield[2], flops);
    elem_grad_transpose(basis, ws.qfield[0], ws.qfield[1], ws.qfield[2], ws.nodal, ws, flops);
  } else {
    elem_interp(basis, ws.nodal, ws.qfield[0], ws.a, ws.b, flops);
    apply_mass_factors(s.factors.elem(e), q3, ws.qfield[0], flops);
    elem_interp_transpose(basis, ws.qfield[0], ws.nodal, ws.a, ws.b, flops);
  }
}

}  // namespace detail

/// A BP problem bound to an execution backend. The handle is immutable
/// after construction; apply() uses the workspace created alongside the
/// handle, so concurrent applications of the same handle must pass their
/// own Workspace to the three-argument overload.
class OperatorHandle {
 public:
  OperatorHandle(Backend backend, std::shared_ptr<const OperatorSetup> setup)
      : backend_(backend), setup_(std::move(setup)) {
    if (backend_ == Backend::Oracle) oracle_ = std::make_shared<SparseMatrix>(assemble_oracle(*setup_));
    default_ws_ = std::make_unique<Workspace>(setup_->kind, backend_, setup_->restriction, setup_->basis);
  }

  BPKind kind() const { return setup_->kind; }
  Backend backend() const { return backend_; }
  const OperatorSetup& setup() const { return *setup_; }
  std::shared_ptr<const OperatorSetup> setup_ptr() const { return setup_; }
  int size() const { return setup_->l_size(); }
  const SparseMatrix& oracle_matrix() const {
    if (!oracle_) throw std::logic_error("oracle_matrix: not an oracle backend");
    return *oracle_;
  }

  Workspace make_workspace() const { return Workspace(setup_->kind, backend_, setup_->restriction, setup_->basis); }
  const Workspace& workspace() const { return *default_ws_; }

  void apply(std::span<const double> u, std::vector<double>& w) const { apply(u, w, *default_ws_, nullptr); }

  void apply(std::span<const double> u, std::vector<double>& w, Workspace& ws, FlopCount* flops = nullptr) const {
    if (static_cast<int>(u.size()) != size()) throw std::invalid_argument("apply: L-vector length mismatch");
#ifdef _OPENMP
    if (backend_ != Backend::Oracle && omp_get_max_threads() > static_cast<int>(ws.elem.size()))
      throw std::runtime_error("apply: thread count exceeds workspace capacity; create a fresh workspace");
#endif
    w.resize(u.size());
    switch (backend_) {
      case Backend::Oracle: oracle_->apply(u, w); break;
      case Backend::Multipass: apply_multipass(u, w, ws, flops); break;
      case Backend::Fused: apply_fused(u, w, ws, flops); break;
    }
  }

  /// Average per-element multiply/add count of one application, measured
  /// by running the element kernels with counting enabled.
  FlopCount count_flops() const {
    if (backend_ == Backend::Oracle) throw std::logic_error("count_flops: oracle backend has no element kernel");
    std::vector<double> u(size()), w;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : u) v = dist(rng);
    FlopCount total;
    Workspace ws = make_workspace();
    apply(u, w, ws, &total);
    const auto ne = static_cast<std::uint64_t>(setup_->num_elements());
    return FlopCount{total.mul / ne, total.add / ne};
  }

  /// Brute-force assembly by probing multipass columns with unit vectors.
  /// Guarded: refuses systems larger than 20000 unknowns.
  static SparseMatrix assemble_oracle(const OperatorSetup& setup) {
    const int n = setup.l_size();
    if (n > 20000) throw std::invalid_argument("assemble_oracle: system too large (limit 20000 unknowns)");
    SparseMatrix m;
    m.n = n;
    m.cols.resize(n);
    Workspace ws(setup.kind, Backend::Multipass, setup.restriction, setup.basis);
    std::vector<double> unit(n, 0.0), col(n);
    OperatorHandle probe(Backend::Multipass, std::make_shared<OperatorSetup>(setup));
    for (int j = 0; j < n; ++j) {
      unit[j] = 1.0;
      probe.apply(unit, col, ws, nullptr);
      unit[j] = 0.0;
      for (int i = 0; i < n; ++i)
        if (col[i] != 0.0) m.cols[j].emplace_back(i, col[i]);
    }
    return m;
  }

 private:
  void apply_multipass(std::span<const double> u, std::span<double> w, Workspace& ws, FlopCount* flops) const {
    const auto& s = *setup_;
    const int ne = s.num_elements();
    const int nen = s.restriction.nodes_per_elem;
    const int q3 = s.basis.quad_pts_per_elem();
    FlopCount local{};
    FlopCount* fc = flops ? &local : nullptr;

    gather(s.restriction, u, ws.u_e.span());

    if (is_diffusion(s.kind)) {
      // Pass: forward gradient to three global quadrature fields.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!fc)
#endif
      for (int e = 0; e < ne; ++e) {
        ElemScratch& es = ws.thread_scratch();
        const std::size_t qoff = static_cast<std::size_t>(e) * q3;
        elem_grad(s.basis, std::span<const double>(ws.u_e.data() + static_cast<std::size_t>(e) * nen, nen),
                  std::span<double>(ws.grad_q[0].data() + qoff, q3),
                  std::span<double>(ws.grad_q[1].data() + qoff, q3),
                  std::span<double>(ws.grad_q[2].data() + qoff, q3), es, fc);
      }
      // Pass: pointwise geometric factors into fresh fields.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!fc)
#endif
      for (int e = 0; e < ne; ++e) {
        const std::size_t qoff = static_cast<std::size_t>(e) * q3;
        for (int f = 0; f < 3; ++f)
          std::copy_n(ws.grad_q[f].data() + qoff, q3, ws.flux_q[f].data() + qoff);
        apply_diffusion_factors(s.factors.elem(e), q3, std::span<double>(ws.flux_q[0].data() + qoff, q3),
                                std::span<double>(ws.flux_q[1].data() + qoff, q3),
                                std::span<double>(ws.flux_q[2].data() + qoff, q3), fc);
      }
      // Pass: transpose gradient back to the element nodal space.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!fc)
#endif
      for (int e = 0; e < ne; ++e) {
        ElemScratch& es = ws.thread_scratch();
        const std::size_t qoff = static_cast<std::size_t>(e) * q3;
        elem_grad_transpose(s.basis, std::span<const double>(ws.flux_q[0].data() + qoff, q3),
                            std::span<const double>(ws.flux_q[1].data() + qoff, q3),
                            std::span<const double>(ws.flux_q[2].data() + qoff, q3),
                            std::span<double>(ws.w_e.data() + static_cast<std::size_t>(e) * nen, nen), es, fc);
      }
    } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!fc)
#endif
      for (int e = 0; e < ne; ++e) {
        ElemScratch& es = ws.thread_scratch();
        elem_interp(s.basis, std::span<const double>(ws.u_e.data() + static_cast<std::size_t>(e) * nen, nen),
                    std::span<double>(ws.grad_q[0].data() + static_cast<std::size_t>(e) * q3, q3), es.a, es.b, fc);
      }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!fc)
#endif
      for (int e = 0; e < ne; ++e) {
        const std::size_t qoff = static_cast<std::size_t>(e) * q3;
        std::copy_n(ws.grad_q[0].data() + qoff, q3, ws.flux_q[0].data() + qoff);
        apply_mass_factors(s.factors.elem(e), q3, std::span<double>(ws.flux_q[0].data() + qoff, q3), fc);
      }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!fc)
#endif
      for (int e = 0; e < ne; ++e) {
        ElemScratch& es = ws.thread_scratch();
        elem_interp_transpose(s.basis, std::span<const double>(ws.flux_q[0].data() + static_cast<std::size_t>(e) * q3, q3),
                              std::span<double>(ws.w_e.data() + static_cast<std::size_t>(e) * nen, nen), es.a, es.b, fc);
      }
    }

    scatter_add(s.restriction, ws.w_e.span(), w);
    if (flops) *flops += local;
  }

  void apply_fused(std::span<const double> u, std::span<double> w, Workspace& ws, FlopCount* flops) const {
    const auto& s = *setup_;
    const int ne = s.num_elements();
    const int nen = s.restriction.nodes_per_elem;
    FlopCount local{};
    FlopCount* fc = flops ? &local : nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!fc)
#endif
    for (int e = 0; e < ne; ++e) {
      ElemScratch& es = ws.thread_scratch();
      detail::element_apply(s, e, u, es, fc);
      std::copy_n(es.nodal.data(), nen, ws.w_e.data() + static_cast<std::size_t>(e) * nen);
    }

    scatter_add(s.restriction, ws.w_e.span(), w);
    if (flops) *flops += local;
  }

  Backend backend_;
  std::shared_ptr<const OperatorSetup> setup_;
  std::shared_ptr<SparseMatrix> oracle_;
  std::unique_ptr<Workspace> default_ws_;
};

inline OperatorHandle make_operator(BPKind kind, Backend backend, const HexMesh& mesh) {
  return OperatorHandle(backend, make_setup(kind, mesh));
}

inline SparseMatrix assemble_oracle(const OperatorSetup& setup) { return OperatorHandle::assemble_oracle(setup); }

inline FlopCount count_flops(const OperatorHandle& handle) { return handle.count_flops(); }

}  // namespace hexbp

// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <limits>
#include <random>
#include <vector>

#include "hexbp/operator.hpp"
#include "hexbp/solver.hpp"

namespace hexbp {

inline constexpr double kEquivalenceTol = 1e-12;

struct EquivalenceCase {
  BPKind bp = BPKind::BP1;
  int p = 1;
  std::array<int, 3> dims{1, 1, 1};
  double amplitude = 0.0;
};

struct EquivalenceResult {
  EquivalenceCase config;
  double max_rel_multipass = 0.0;  // vs oracle, over random vectors
  double max_rel_fused = 0.0;
  double max_symmetry = 0.0;       // |u'Av - v'Au| / (|Au| |v|)
  double max_asymmetry_matrix = 0.0;  // max |A - A'| / max |A|
  double nullspace_residual = 0.0;    // |A 1|_inf / |A|_inf (diffusion only)
  double min_quadratic_form = 0.0;    // min u'Au / (u'u) over probes (BP1 only)
  bool pass = false;
};

/// The standard verification matrix: every BP, p in 1..4, three box
/// shapes, undeformed and deformed.
inline std::vector<EquivalenceCase> default_equivalence_cases() {
  std::vector<EquivalenceCase> cases;
  for (BPKind bp : {BPKind::BP1, BPKind::BP3, BPKind::BP5})
    for (int p : {1, 2, 3, 4})
      for (const auto& dims : {std::array<int, 3>{1, 1, 1}, std::array<int, 3>{2, 2, 2}, std::array<int, 3>{3, 2, 1}})
        for (double a : {0.0, 0.1}) cases.push_back({bp, p, dims, a});
  return cases;
}

/// Compare the fused and multipass backends against the assembled oracle
/// on `num_vectors` random inputs, and run the operator-algebra checks
/// (symmetry, constant nullspace for the diffusion kinds, positivity for
/// the mass kind).
inline EquivalenceResult check_equivalence(const EquivalenceCase& c, int num_vectors = 10,
                                           double tol = kEquivalenceTol, std::uint64_t seed = 2024) {
  EquivalenceResult res;
  res.config = c;

  const HexMesh mesh = build_box_mesh(c.dims, c.p, {1.0, 1.0, 1.0}, c.amplitude);
  auto setup = make_setup(c.bp, mesh);
  const OperatorHandle oracle(Backend::Oracle, setup);
  const OperatorHandle multipass(Backend::Multipass, setup);
  const OperatorHandle fused(Backend::Fused, setup);
  const SparseMatrix& mat = oracle.oracle_matrix();
  const int n = oracle.size();

  std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(c.p) << 32) ^ static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(n), v(n), wo, wm, wf, wv;

  res.min_quadratic_form = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < num_vectors; ++trial) {
    for (double& x : u) x = dist(rng);
    for (double& x : v) x = dist(rng);

    oracle.apply(u, wo);
    multipass.apply(u, wm);
    fused.apply(u, wf);

    const double ref = deterministic_norm(wo);
    double dm = 0.0, df = 0.0;
    for (int i = 0; i < n; ++i) {
      dm += (wm[i] - wo[i]) * (wm[i] - wo[i]);
      df += (wf[i] - wo[i]) * (wf[i] - wo[i]);
    }
    res.max_rel_multipass = std::max(res.max_rel_multipass, std::sqrt(dm) / ref);
    res.max_rel_fused = std::max(res.max_rel_fused, std::sqrt(df) / ref);

    fused.apply(v, wv);
    const double uav = deterministic_dot(u, wv);
    const double vau = deterministic_dot(v, wf);
    res.max_symmetry =
        std::max(res.max_symmetry, std::abs(uav - vau) / (deterministic_norm(wf) * deterministic_norm(v)));

    if (c.bp == BPKind::BP1)
      res.min_quadratic_form = std::min(res.min_quadratic_form, deterministic_dot(u, wf) / deterministic_dot(u, u));
  }

  res.max_asymmetry_matrix = mat.max_asymmetry() / mat.max_abs();

  if (is_diffusion(c.bp)) {
    std::vector<double> ones(n, 1.0), w1;
    fused.apply(ones, w1);
    res.nullspace_residual = max_abs(w1) / mat.inf_norm();
  }

  res.pass = res.max_rel_multipass <= tol && res.max_rel_fused <= tol && res.max_symmetry <= tol &&
             res.max_asymmetry_matrix <= tol;
  if (is_diffusion(c.bp)) res.pass = res.pass && res.nullspace_residual <= tol;
  else res.pass = res.pass && res.min_quadratic_form > 0.0;
  return res;
}

}  // namespace hexbp

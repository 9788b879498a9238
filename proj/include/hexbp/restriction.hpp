// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hexbp/mesh.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hexbp {

/// L-vector <-> E-vector maps for a mesh. The transpose table lists, for
/// each global dof, its referencing E-vector slots in ascending order;
/// scatter_add sums along that fixed order, which makes the result
/// bitwise reproducible for any thread count.
struct ElementRestriction {
  int num_elements = 0;
  int nodes_per_elem = 0;
  int num_global = 0;

  std::vector<int> elem_to_global;      // E * nen
  std::vector<int> multiplicity;        // per global dof
  std::vector<std::int64_t> dof_offsets;  // num_global + 1
  std::vector<int> dof_slots;           // E-vector indices, ascending per dof

  std::int64_t e_size() const { return static_cast<std::int64_t>(num_elements) * nodes_per_elem; }
};

inline ElementRestriction build_restriction(const HexMesh& mesh) {
  ElementRestriction r;
  r.num_elements = mesh.num_elements();
  r.nodes_per_elem = mesh.nodes_per_elem();
  r.num_global = mesh.num_nodes();
  r.elem_to_global = mesh.elem_nodes;

  r.multiplicity.assign(r.num_global, 0);
  for (int g : r.elem_to_global) ++r.multiplicity[g];

  r.dof_offsets.assign(r.num_global + 1, 0);
  for (int g = 0; g < r.num_global; ++g) r.dof_offsets[g + 1] = r.dof_offsets[g] + r.multiplicity[g];

  r.dof_slots.resize(r.elem_to_global.size());
  std::vector<std::int64_t> cursor(r.dof_offsets.begin(), r.dof_offsets.end() - 1);
  for (std::size_t slot = 0; slot < r.elem_to_global.size(); ++slot)
    r.dof_slots[cursor[r.elem_to_global[slot]]++] = static_cast<int>(slot);
  return r;
}

inline void gather(const ElementRestriction& r, std::span<const double> lvec, std::span<double> evec) {
  if (static_cast<std::int64_t>(lvec.size()) != r.num_global)
    throw std::invalid_argument("gather: L-vector length mismatch");
  if (static_cast<std::int64_t>(evec.size()) != r.e_size())
    throw std::invalid_argument("gather: E-vector length mismatch");
  const std::int64_t n = r.e_size();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i) evec[i] = lvec[r.elem_to_global[i]];
}

inline void scatter_add(const ElementRestriction& r, std::span<const double> evec, std::span<double> lvec) {
  if (static_cast<std::int64_t>(evec.size()) != r.e_size())
    throw std::invalid_argument("scatter_add: E-vector length mismatch");
  if (static_cast<std::int64_t>(lvec.size()) != r.num_global)
    throw std::invalid_argument("scatter_add: L-vector length mismatch");
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int g = 0; g < r.num_global; ++g) {
    double sum = 0.0;
    for (std::int64_t k = r.dof_offsets[g]; k < r.dof_offsets[g + 1]; ++k) sum += evec[r.dof_slots[k]];
    lvec[g] = sum;
  }
}

inline std::vector<double> gather(const ElementRestriction& r, std::span<const double> lvec) {
  std::vector<double> evec(r.e_size());
  gather(r, lvec, evec);
  return evec;
}

inline std::vector<double> scatter_add(const ElementRestriction& r, std::span<const double> evec) {
  std::vector<double> lvec(r.num_global);
  scatter_add(r, evec, lvec);
  return lvec;
}

}  // namespace hexbp

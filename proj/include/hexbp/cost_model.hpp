// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>

namespace hexbp {

/// Idealized per-element cost of one stiffness-operator application.
///
/// flops_per_elem = 12(p+1)^4 + 15(p+1)^3 with collocated quadrature and
/// 24(p+1)^4 + 15(p+1)^3 otherwise; reads_per_elem = 7(p+1)^3 (the nodal
/// values plus six geometric-factor arrays). The read figure assumes the
/// factor arrays hold (p+1)^3 points per element; a non-collocated rule
/// actually stores q^3 > (p+1)^3 points, which this model does not count.
struct CostModel {
  int p = 0;
  bool collocated = true;
  std::uint64_t flops_per_elem = 0;
  std::uint64_t reads_per_elem = 0;
  double arithmetic_intensity = 0.0;  // flops per 8-byte value read

  double intensity_per_byte() const { return arithmetic_intensity / 8.0; }
};

inline CostModel cost_model(int p, bool collocated) {
  if (p < 1) throw std::invalid_argument("cost_model: degree must be >= 1");
  CostModel m;
  m.p = p;
  m.collocated = collocated;
  const std::uint64_t n = static_cast<std::uint64_t>(p) + 1;
  const std::uint64_t n3 = n * n * n;
  m.flops_per_elem = (collocated ? 12 : 24) * n3 * n + 15 * n3;
  m.reads_per_elem = 7 * n3;
  m.arithmetic_intensity = static_cast<double>(m.flops_per_elem) / static_cast<double>(m.reads_per_elem);
  return m;
}

}  // namespace hexbp

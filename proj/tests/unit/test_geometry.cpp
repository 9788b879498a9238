// Part of the hexbp project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
#include "hexbp/geometry.hpp"

#include <gtest/gtest.h>

#include "hexbp/operator.hpp"
#include "test_support.hpp"

namespace hexbp {
namespace {

// The reference element [-1,1]^3 realized as a single [0,2]^3 box: the
// mapping Jacobian is exactly the identity.
TEST(Jacobians, IdentityMap) {
  const HexMesh mesh = build_box_mesh({1, 1, 1}, 2, {2, 2, 2}, 0.0);
  const TensorBasis basis = build_basis(2, 4, QuadKind::GL);
  const ElementJacobians jac = compute_jacobians(mesh, basis);
  for (int qp = 0; qp < jac.quad_pts_per_elem; ++qp) {
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) EXPECT_NEAR(jac.jac[qp * 9 + c * 3 + d], c == d ? 1.0 : 0.0, 1e-13);
    EXPECT_NEAR(jac.det[qp], 1.0, 1e-13);
  }
}

TEST(Jacobians, AffineMapScalesByHalfH) {
  const double h = 0.4;
  const HexMesh mesh = build_box_mesh({1, 1, 1}, 3, {h, h, h}, 0.0);
  const TensorBasis basis = build_basis(3, 5, QuadKind::GL);
  const ElementJacobians jac = compute_jacobians(mesh, basis);
  for (int qp = 0; qp < jac.quad_pts_per_elem; ++qp) {
    for (int c = 0; c < 3; ++c)
      for (int d = 0; d < 3; ++d) EXPECT_NEAR(jac.jac[qp * 9 + c * 3 + d], c == d ? h / 2 : 0.0, 1e-13);
    EXPECT_NEAR(jac.det[qp], h * h * h / 8.0, 1e-14);
  }
}

TEST(Jacobians, DeformedMeshStaysValid) {
  const HexMesh mesh = build_box_mesh({3, 3, 3}, 3, {1, 1, 1}, 0.1);
  const TensorBasis basis = build_basis(3, 5, QuadKind::GL);
  const ElementJacobians jac = compute_jacobians(mesh, basis);
  for (double d : jac.det) EXPECT_GT(d, 0.0);
}

TEST(Jacobians, RejectsDegreeMismatch) {
  const HexMesh mesh = build_box_mesh({1, 1, 1}, 2, {1, 1, 1}, 0.0);
  const TensorBasis basis = build_basis(3, 5, QuadKind::GL);
  EXPECT_THROW(compute_jacobians(mesh, basis), std::invalid_argument);
}

TEST(Jacobians, ReportsDegenerateElement) {
  HexMesh mesh = build_box_mesh({2, 1, 1}, 1, {1, 1, 1}, 0.0);
  // Collapse the second element by folding its far face onto its near face.
  for (auto& c : mesh.coords)
    if (c[0] == 1.0) c[0] = 0.5;
  const TensorBasis basis = build_basis(1, 3, QuadKind::GL);
  try {
    compute_jacobians(mesh, basis);
    FAIL() << "expected degenerate_element_error";
  } catch (const degenerate_element_error& e) {
    EXPECT_EQ(e.element(), 1);
    EXPECT_GE(e.qpt(), 0);
  }
}

TEST(Jacobians, SingleCubicElementInvertsAtFullAmplitude) {
  // Known geometric fact, cross-checked against an independent dense
  // computation: the a=0.1 displacement interpolated by one p=3 element
  // spanning the whole sine period folds over near a corner. The GLL(4)
  // collocated rule sees detJ = -0.009081 there; the GL(5) rule used by
  // the Gauss-quadrature operators stays positive (min detJ = +0.0129).
  const HexMesh mesh = build_box_mesh({1, 1, 1}, 3, {1, 1, 1}, 0.1);
  EXPECT_THROW(compute_jacobians(mesh, build_basis(3, 4, QuadKind::GLL)), degenerate_element_error);
  EXPECT_NO_THROW(compute_jacobians(mesh, build_basis(3, 5, QuadKind::GL)));
}

TEST(MassFactors, IdentityMapGivesTensorWeights) {
  const HexMesh mesh = build_box_mesh({1, 1, 1}, 2, {2, 2, 2}, 0.0);
  const TensorBasis basis = build_basis(2, 4, QuadKind::GL);
  const GeomFactors f = mass_factors(mesh, basis);
  const int q = 4;
  for (int c = 0; c < q; ++c)
    for (int b = 0; b < q; ++b)
      for (int a = 0; a < q; ++a) {
        const double expect = basis.quad.weights[a] * basis.quad.weights[b] * basis.quad.weights[c];
        EXPECT_NEAR(f.at(0, a + q * (b + q * c))[0], expect, 1e-13);
      }
}

TEST(MassFactors, UnitCubeVolume) {
  for (QuadKind kind : {QuadKind::GL, QuadKind::GLL}) {
    const HexMesh mesh = build_box_mesh({1, 1, 1}, 3, {1, 1, 1}, 0.0);
    const TensorBasis basis = build_basis(3, 4, kind);
    const GeomFactors f = mass_factors(mesh, basis);
    double vol = 0.0;
    for (double v : f.data) vol += v;
    EXPECT_NEAR(vol, 1.0, 1e-13);
  }
}

TEST(MassFactors, VolumeSumOnMultiElementBox) {
  const HexMesh mesh = build_box_mesh({3, 2, 2}, 2, {1.5, 1.0, 0.5}, 0.0);
  const TensorBasis basis = build_basis(2, 4, QuadKind::GL);
  const GeomFactors f = mass_factors(mesh, basis);
  double vol = 0.0;
  for (double v : f.data) vol += v;
  EXPECT_NEAR(vol, 1.5 * 1.0 * 0.5, 1e-12);
}

TEST(MassFactors, AffineScalesByDetJ) {
  const double h = 0.7;
  const HexMesh ref = build_box_mesh({1, 1, 1}, 2, {2, 2, 2}, 0.0);
  const HexMesh small = build_box_mesh({1, 1, 1}, 2, {h, h, h}, 0.0);
  const TensorBasis basis = build_basis(2, 4, QuadKind::GL);
  const GeomFactors fr = mass_factors(ref, basis);
  const GeomFactors fs = mass_factors(small, basis);
  for (std::size_t i = 0; i < fr.data.size(); ++i)
    EXPECT_NEAR(fs.data[i], fr.data[i] * h * h * h / 8.0, 1e-14);
}

TEST(DiffusionFactors, IdentityMapIsDiagonalWeights) {
  const HexMesh mesh = build_box_mesh({1, 1, 1}, 2, {2, 2, 2}, 0.0);
  const TensorBasis basis = build_basis(2, 4, QuadKind::GL);
  const GeomFactors f = diffusion_factors(mesh, basis);
  const int q = 4;
  for (int c = 0; c < q; ++c)
    for (int b = 0; b < q; ++b)
      for (int a = 0; a < q; ++a) {
        const double w = basis.quad.weights[a] * basis.quad.weights[b] * basis.quad.weights[c];
        const auto g = f.at(0, a + q * (b + q * c));
        EXPECT_NEAR(g[0], w, 1e-13);
        EXPECT_NEAR(g[3], w, 1e-13);
        EXPECT_NEAR(g[5], w, 1e-13);
        EXPECT_NEAR(g[1], 0.0, 1e-14);
        EXPECT_NEAR(g[2], 0.0, 1e-14);
        EXPECT_NEAR(g[4], 0.0, 1e-14);
      }
}

TEST(DiffusionFactors, AffineDiagonalIsHalfH) {
  const double h = 0.3;
  const HexMesh mesh = build_box_mesh({1, 1, 1}, 1, {h, h, h}, 0.0);
  const TensorBasis basis = build_basis(1, 3, QuadKind::GL);
  const GeomFactors f = diffusion_factors(mesh, basis);
  const int q = 3;
  for (int c = 0; c < q; ++c)
    for (int b = 0; b < q; ++b)
      for (int a = 0; a < q; ++a) {
        const double w = basis.quad.weights[a] * basis.quad.weights[b] * basis.quad.weights[c];
        const auto g = f.at(0, a + q * (b + q * c));
        EXPECT_NEAR(g[0], w * h / 2.0, 1e-14);  // (h^3/8) * (2/h)^2
        EXPECT_NEAR(g[3], w * h / 2.0, 1e-14);
        EXPECT_NEAR(g[5], w * h / 2.0, 1e-14);
      }
}

TEST(DiffusionFactors, DeformedTensorIsPositiveDefinite) {
  const HexMesh mesh = build_box_mesh({2, 2, 2}, 3, {1, 1, 1}, 0.1);
  const TensorBasis basis = build_basis(3, 5, QuadKind::GL);
  const GeomFactors f = diffusion_factors(mesh, basis);
  for (int e = 0; e < f.num_elements; ++e)
    for (int qp = 0; qp < f.quad_pts_per_elem; ++qp) {
      const auto g = f.at(e, qp);
      const double m1 = g[0];
      const double m2 = g[0] * g[3] - g[1] * g[1];
      const double m3 = g[0] * (g[3] * g[5] - g[4] * g[4]) - g[1] * (g[1] * g[5] - g[4] * g[2]) +
                        g[2] * (g[1] * g[4] - g[3] * g[2]);
      EXPECT_GT(m1, 0.0);
      EXPECT_GT(m2, 0.0);
      EXPECT_GT(m3, 0.0);
    }
}

TEST(GeomFactors, ScalingCovariance) {
  // Scaling the domain by s multiplies wdetJ by s^3 and G by s.
  const double s = 1.7;
  const HexMesh base = build_box_mesh({2, 2, 1}, 2, {1, 1, 1}, 0.1);
  const HexMesh scaled = build_box_mesh({2, 2, 1}, 2, {s, s, s}, 0.1);
  const TensorBasis basis = build_basis(2, 4, QuadKind::GL);

  const GeomFactors m0 = mass_factors(base, basis);
  const GeomFactors m1 = mass_factors(scaled, basis);
  for (std::size_t i = 0; i < m0.data.size(); ++i)
    EXPECT_NEAR(m1.data[i], m0.data[i] * s * s * s, 1e-12 * std::abs(m1.data[i]) + 1e-15);

  const GeomFactors d0 = diffusion_factors(base, basis);
  const GeomFactors d1 = diffusion_factors(scaled, basis);
  for (std::size_t i = 0; i < d0.data.size(); ++i)
    EXPECT_NEAR(d1.data[i], d0.data[i] * s, 1e-12 * std::abs(d1.data[i]) + 1e-15);
}

}  // namespace
}  // namespace hexbp

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/divergence.hpp"
#include "hdiv/operators.hpp"
#include "hdiv/spaces.hpp"

#include <gtest/gtest.h>

#include <array>
#include <map>

namespace hdiv {
namespace {

std::shared_ptr<const Mesh> box(int dim, int nx, int ny, int nz = 1) {
  return std::make_shared<const Mesh>(cartesian_mesh(dim, {nx, ny, nz}));
}

TEST(RtSpace, SingleQuadLowestOrder) { EXPECT_EQ(RtSpace(box(2, 1, 1), 1).num_dofs(), 4); }

TEST(RtSpace, TwoQuadsShareOneFace) { EXPECT_EQ(RtSpace(box(2, 2, 1), 1).num_dofs(), 7); }

TEST(RtSpace, ClosedFormCount) {
  for (int n = 1; n <= 4; ++n)
    for (int p = 1; p <= 4; ++p) {
      const int np = n * p;
      EXPECT_EQ(RtSpace(box(2, n, n), p).num_dofs(), 2 * np * (np + 1)) << n << " " << p;
    }
  // 3D: three directions of (np+1) np^2 faces.
  EXPECT_EQ(RtSpace(box(3, 2, 2, 2), 2).num_dofs(), 3 * 5 * 16);
}

TEST(RtSpace, OrientationsAreSigns) {
  const RtSpace rt(box(3, 2, 2, 2), 2);
  for (int e = 0; e < rt.mesh().num_elements(); ++e)
    for (int s : rt.element_orientation(e)) EXPECT_TRUE(s == 1 || s == -1);
}

TEST(RtSpace, EveryGlobalDofReferencedOnceOrTwice) {
  const RtSpace rt(box(2, 3, 2), 3);
  std::vector<int> count(rt.num_dofs(), 0);
  for (int e = 0; e < rt.mesh().num_elements(); ++e)
    for (int g : rt.element_dofs(e)) ++count[g];
  for (int g = 0; g < rt.num_dofs(); ++g) {
    EXPECT_GE(count[g], 1);
    EXPECT_LE(count[g], 2);
    if (rt.boundary_attribute(g) != 0) EXPECT_EQ(count[g], 1) << g;
    if (count[g] == 2) EXPECT_EQ(rt.boundary_attribute(g), 0) << g;
  }
}

TEST(L2Space, Counts) {
  EXPECT_EQ(L2Space(box(2, 1, 1), 3).num_dofs(), 9);
  const L2Space l2(box(2, 2, 2), 2);
  EXPECT_EQ(l2.num_dofs(), 16);
  EXPECT_EQ(l2.element_of(11), 2);
  EXPECT_EQ(l2.local_index(11), 3);
}

TEST(BoundaryDofs, Examples) {
  EXPECT_EQ(boundary_dofs(RtSpace(box(2, 1, 1), 1), all_boundary_attributes(2)).size(), 4u);
  EXPECT_EQ(boundary_dofs(RtSpace(box(2, 1, 1), 2), all_boundary_attributes(2)).size(), 8u);
  EXPECT_TRUE(boundary_dofs(RtSpace(box(2, 2, 2), 2), {}).empty());
  EXPECT_EQ(boundary_dofs(RtSpace(box(2, 2, 2), 2), {1}).size(), 4u);
}

TEST(BoundaryDofs, UnknownAttribute) {
  try {
    boundary_dofs(RtSpace(box(2, 1, 1), 1), {5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

// Normal component of global basis function g, seen from element e at
// reference point xh; 0 if g is not supported on e.
double normal_trace(const RtSpace& rt, int e, int g, int axis, const Point& xh) {
  const Matrix phi = rt_reference_values(rt.degree(), rt.dim(), xh);
  const auto dofs = rt.element_dofs(e);
  const auto sg = rt.element_orientation(e);
  double v = 0.0;
  for (int j = 0; j < rt.dofs_per_element(); ++j)
    if (dofs[j] == g) v += sg[j] * phi(j, axis);
  return v;
}

TEST(RtSpace, NormalTraceConformity) {
  // Skewed two-element mesh; the shared face is x_hat = 1 in element 0 and
  // x_hat = 0 in element 1, both parametrized by y_hat.
  auto mesh = std::make_shared<const Mesh>(skew_mesh(cartesian_mesh(2, {2, 1, 1}), [](const Point& x, int) {
    return Point{0.1 * x[1] * x[0] * (2 - x[0]), 0.05 * x[0], 0};
  }));
  for (int p = 1; p <= 4; ++p) {
    const RtSpace rt(mesh, p);
    for (int g = 0; g < rt.num_dofs(); ++g) {
      for (double y : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        const double a = normal_trace(rt, 0, g, 0, {1.0, y, 0});
        const double b = normal_trace(rt, 1, g, 0, {0.0, y, 0});
        EXPECT_NEAR(a, b, 1e-12) << "p=" << p << " g=" << g << " y=" << y;
      }
    }
  }
}

TEST(L2Space, DimensionEqualsDivergenceRank) {
  for (int n = 1; n <= 4; ++n)
    for (int p = 1; p <= 3; ++p) {
      auto mesh = box(2, n, n);
      const RtSpace rt(mesh, p);
      const L2Space l2(mesh, p);
      const Matrix D = build_divergence_csr(rt, l2).to_dense();
      Eigen::FullPivLU<Matrix> lu(D);
      EXPECT_EQ(lu.rank(), l2.num_dofs()) << n << " " << p;
    }
}

TEST(Sites, RtAndL2SitesAreUnique) {
  auto mesh = box(3, 2, 1, 2);
  const RtSpace rt(mesh, 2);
  const L2Space l2(mesh, 2);
  std::map<std::pair<int, std::array<int, 3>>, int> seen;
  for (int g = 0; g < rt.num_dofs(); ++g) EXPECT_TRUE(seen.insert({{rt.site(g).axis, rt.site(g).index}, g}).second);
  std::map<std::array<int, 3>, int> vols;
  for (int g = 0; g < l2.num_dofs(); ++g) EXPECT_TRUE(vols.insert({l2.site(g).index, g}).second);
}

}  // namespace
}  // namespace hdiv

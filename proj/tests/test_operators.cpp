// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/analysis.hpp"
#include "hdiv/divergence.hpp"
#include "hdiv/operators.hpp"

#include <gtest/gtest.h>

#include <random>

namespace hdiv {
namespace {

std::shared_ptr<const Mesh> box(int dim, int n) { return std::make_shared<const Mesh>(cartesian_mesh(dim, {n, n, n})); }

std::shared_ptr<const Mesh> skewed(int n) {
  return std::make_shared<const Mesh>(skew_mesh(cartesian_mesh(2, {n, n, 1}), [](const Point& x, int) {
    return Point{0.08 * std::sin(3.0 * x[1]) * x[0] * (1 - x[0]), 0.06 * x[0] * x[1] * (1 - x[1]), 0};
  }));
}

Vec random_vec(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Vec v(n);
  for (double& x : v) x = u(gen);
  return v;
}

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

TEST(RtMass, LowestOrderUnitSquare) {
  const RtSpace rt(box(2, 1), 1);
  const RtMassOperator M(rt, 1.0);
  const Matrix local = M.local_matrix(0);
  Matrix expect(2, 2);
  expect << 2, 1, 1, 2;
  expect /= 6.0;
  EXPECT_LE(max_abs(local.topLeftCorner(2, 2) - expect), 1e-14);
  EXPECT_LE(max_abs(local.bottomRightCorner(2, 2) - expect), 1e-14);
  EXPECT_LE(max_abs(local.topRightCorner(2, 2)), 1e-14);
}

TEST(RtMass, LinearInConstantCoefficient) {
  const RtSpace rt(skewed(2), 2);
  const Matrix a = RtMassOperator(rt, 1.0).assemble_dense();
  const Matrix b = RtMassOperator(rt, 2.0).assemble_dense();
  EXPECT_LE(max_abs(b - 2.0 * a), 1e-14 * max_abs(b));
}

TEST(RtMass, MatrixFreeMatchesDense) {
  const RtSpace rt(skewed(2), 3);
  const RtMassOperator M(rt, Coefficient::function([](const Point& x) { return 1.0 + x[0] * x[1]; }));
  const Matrix A = M.assemble_dense();
  const Vec x = random_vec(rt.num_dofs(), 1);
  const Vec y = M * x;
  const Eigen::VectorXd yd = A * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  EXPECT_LE((Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()) - yd).norm(), 1e-12 * yd.norm());
  EXPECT_LE(max_abs(A - A.transpose()), 1e-12 * max_abs(A));
}

TEST(RtMass, DiagonalMatchesDense) {
  const RtSpace rt(skewed(3), 3);
  const RtMassOperator M(rt, Coefficient::per_element(Vec{1, 2, 3, 4, 5, 6, 7, 8, 9}));
  const Matrix A = M.assemble_dense();
  const DiagonalMatrix d = M.diagonal();
  for (int i = 0; i < rt.num_dofs(); ++i) {
    EXPECT_NEAR(d[i], A(i, i), 1e-13 * std::abs(A(i, i)));
    EXPECT_GT(d[i], 0.0);
  }
}

TEST(RtMass, SerialAndParallelAgree) {
  const RtSpace rt(box(3, 2), 2);
  const RtMassOperator M(rt, 1.5);
  const Vec x = random_vec(rt.num_dofs(), 2);
  Vec a(x.size()), b(x.size());
  M.apply(x, a, Exec::Serial);
  M.apply(x, b, Exec::Parallel);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14 * (1 + std::abs(a[i])));
}

TEST(RtMass, NegativeCoefficientRejected) {
  const RtSpace rt(box(2, 2), 1);
  try {
    RtMassOperator M(rt, Coefficient::per_element(Vec{1, 1, -1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Coefficient);
  }
}

TEST(L2Mass, UnitQuadLowestOrder) {
  const L2Space l2(box(2, 1), 1);
  const L2MassOperator W(l2, 1.0);
  EXPECT_NEAR(W.local_matrix(0)(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(W.diagonal()[0], 1.0, 1e-14);
}

TEST(L2Mass, GlNodalDiagonalOnAffineElements) {
  auto mesh = std::make_shared<const Mesh>(cartesian_mesh(2, {2, 1, 1}, {0, 0, 0}, {3, 1, 0}));
  for (int p = 1; p <= 6; ++p) {
    const L2MassOperator W(L2Space(mesh, p), 1.0, Basis1D::GlNodal);
    const Matrix B = W.local_matrix(1);
    const Matrix off = B - Matrix(B.diagonal().asDiagonal());
    EXPECT_LE(max_abs(off), 1e-13) << p;
  }
}

TEST(L2Mass, SkewedNotDiagonal) {
  const L2Space l2(std::make_shared<const Mesh>(canonical_skewed_element(2)), 3);
  const L2MassOperator W(l2, 1.0, Basis1D::GlNodal);
  const Matrix B = W.local_matrix(0);
  EXPECT_GT(max_abs(B - Matrix(B.diagonal().asDiagonal())), 1e-8);
}

TEST(L2Mass, DiagonalAndApplyMatchDense) {
  const L2Space l2(skewed(2), 4);
  const L2MassOperator W(l2, Coefficient::function([](const Point& x) { return 2.0 + x[0]; }));
  const Matrix A = W.assemble_dense();
  EXPECT_LE(max_abs(A - A.transpose()), 1e-12 * max_abs(A));
  const DiagonalMatrix d = W.diagonal();
  for (int i = 0; i < l2.num_dofs(); ++i) EXPECT_NEAR(d[i], A(i, i), 1e-13 * A(i, i));
  const Vec x = random_vec(l2.num_dofs(), 3);
  const Vec y = W * x;
  const Eigen::VectorXd yd = A * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  EXPECT_LE((Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()) - yd).norm(), 1e-12 * yd.norm());
}

TEST(L2Mass, ZeroCoefficientNeedsPermission) {
  const L2Space l2(box(2, 1), 2);
  EXPECT_THROW(L2MassOperator(l2, 0.0), Error);
  EXPECT_NO_THROW(L2MassOperator(l2, 0.0, Basis1D::Histopolation, Exec::Serial, 0, true));
}

TEST(BAlpha, LowestOrderRowIsFaceSigns) {
  auto mesh = box(2, 1);
  const RtSpace rt(mesh, 1);
  const L2Space l2(mesh, 1);
  const Matrix B = dense_b_alpha_direct(rt, l2, 1.0);
  ASSERT_EQ(B.rows(), 1);
  double sum = 0.0;
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(std::abs(B(0, j)), 1.0, 1e-14);
    sum += B(0, j);
  }
  EXPECT_NEAR(sum, 0.0, 1e-14);
}

TEST(BAlpha, EqualsWeightedMassTimesDivergence) {
  auto mesh = skewed(2);
  for (int p = 1; p <= 4; ++p) {
    const RtSpace rt(mesh, p);
    const L2Space l2(mesh, p);
    const Coefficient alpha = Coefficient::per_element(Vec{0.5, 2, 3, 7});
    const L2MassOperator W(l2, alpha);
    const SparseMatrixCsr D = build_divergence_csr(rt, l2);
    const Matrix B = dense_b_alpha_direct(rt, l2, alpha);
    const Matrix WD = W.assemble_dense() * D.to_dense();
    EXPECT_LE(max_abs(B - WD), 1e-12 * max_abs(B)) << p;
    const BAlphaOperator op(W, D);
    const Vec x = random_vec(rt.num_dofs(), 4);
    Vec y(l2.num_dofs());
    op.apply(x, y);
    const Eigen::VectorXd yd = B * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    EXPECT_LE((Eigen::Map<const Eigen::VectorXd>(y.data(), y.size()) - yd).norm(), 1e-12 * yd.norm());
    const Matrix B3 = dense_b_alpha_direct(rt, l2, alpha.scaled(3.0));
    EXPECT_LE(max_abs(B3 - 3.0 * B), 1e-12 * max_abs(B3));
  }
}

TEST(GradDivPrimal, TwoAssemblyPathsAgree) {
  auto mesh = skewed(2);
  const RtSpace rt(mesh, 2);
  const L2Space l2(mesh, 2);
  const Coefficient alpha = Coefficient::per_element(Vec{1, 10, 0.1, 3});
  const Coefficient beta = Coefficient::function([](const Point& x) { return 1.0 + x[1]; });
  const RtMassOperator M(rt, beta);
  const L2MassOperator W(l2, alpha);
  const SparseMatrixCsr D = build_divergence_csr(rt, l2);
  const GradDivPrimalOperator A(M, W, D);
  const Matrix Ad = densify(A);
  const Matrix direct = dense_grad_div_direct(rt, alpha, beta);
  EXPECT_LE(max_abs(Ad - direct), 1e-12 * max_abs(direct));
  EXPECT_LE(max_abs(Ad - Ad.transpose()), 1e-12 * max_abs(Ad));
  const DiagonalMatrix d = A.diagonal();
  for (int i = 0; i < rt.num_dofs(); ++i) EXPECT_NEAR(d[i], direct(i, i), 1e-12 * direct(i, i));

  // SPD after eliminating boundary DOFs.
  const auto bdr = boundary_dofs(rt, all_boundary_attributes(2));
  std::vector<char> is_bdr(rt.num_dofs(), 0);
  for (int g : bdr) is_bdr[g] = 1;
  std::vector<int> free;
  for (int i = 0; i < rt.num_dofs(); ++i)
    if (!is_bdr[i]) free.push_back(i);
  Matrix Af(free.size(), free.size());
  for (std::size_t i = 0; i < free.size(); ++i)
    for (std::size_t j = 0; j < free.size(); ++j) Af(i, j) = direct(free[i], free[j]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(Af);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(GradDivPrimal, LargeBetaLimitIsMass) {
  auto mesh = box(2, 2);
  const RtSpace rt(mesh, 2);
  const double big = 1e8;
  const Matrix A = dense_grad_div_direct(rt, 1.0, big) / big;
  const Matrix M = RtMassOperator(rt, 1.0).assemble_dense();
  EXPECT_LE(max_abs(A - M), 1e-6 * max_abs(M));
}

TEST(MassDiagonal, SpectralEquivalenceOnSkewedElement) {
  auto mesh = std::make_shared<const Mesh>(canonical_skewed_element(2));
  double max_low_rt = 0.0, max_low_w = 0.0, rt8 = 0.0, w8 = 0.0;
  for (int p = 1; p <= 8; ++p) {
    const Matrix m = RtMassOperator(RtSpace(mesh, p), 1.0).assemble_dense();
    const Matrix w = L2MassOperator(L2Space(mesh, p), 1.0).assemble_dense();
    const double km = generalized_condition(m, Matrix(m.diagonal().asDiagonal()));
    const double kw = generalized_condition(w, Matrix(w.diagonal().asDiagonal()));
    if (p <= 4) {
      max_low_rt = std::max(max_low_rt, km);
      max_low_w = std::max(max_low_w, kw);
    }
    if (p == 8) {
      rt8 = km;
      w8 = kw;
    }
  }
  EXPECT_LE(rt8, 2.0 * max_low_rt);
  EXPECT_LE(w8, 2.0 * max_low_w);
}

TEST(Interpolation, RtInterpolantReproducesLinearFields) {
  auto mesh = skewed(2);
  const RtSpace rt(mesh, 2);
  const VectorField u = [](const Point& x) { return Point{1 + x[0], 2 - x[1], 0}; };
  // The mapped space reproduces constants on any mesh.
  const VectorField c = [](const Point&) { return Point{0.3, -1.2, 0}; };
  EXPECT_LE(rt_l2_error(rt, rt_interpolate(rt, c), c), 1e-12);
  const RtSpace rt_affine(box(2, 2), 2);
  EXPECT_LE(rt_l2_error(rt_affine, rt_interpolate(rt_affine, u), u), 1e-12);
}

TEST(Interpolation, ConstantCoefficientsSumToArea) {
  const L2Space l2(skewed(3), 3);
  const Vec ones = l2_constant_coefficients(l2);
  double area = 0.0;
  for (double v : ones) area += v;
  EXPECT_NEAR(area, 1.0, 1e-12);
  EXPECT_LE(l2_l2_error(l2, ones, [](const Point&) { return 1.0; }), 1e-12);
  const Vec gi = l2_interpolate(l2, [](const Point&) { return 1.0; });
  for (std::size_t i = 0; i < gi.size(); ++i) EXPECT_NEAR(gi[i], ones[i], 1e-13);
}

TEST(Load, CommutingInterpolantPreservesTotalDivergence) {
  // Domain stays the unit square under the skew; div u = 3x integrates to 1.5.
  auto mesh = skewed(2);
  const RtSpace rt(mesh, 2);
  const L2Space l2(mesh, 2);
  const VectorField u = [](const Point& x) { return Point{x[0] * x[0], x[0] * x[1], 0}; };
  const SparseMatrixCsr D = build_divergence_csr(rt, l2);
  Vec du(l2.num_dofs());
  D.multiply(rt_interpolate(rt, u), du);
  // Constant 1 has coefficients c (subvolume measures) in the histopolation basis.
  const Vec c = l2_constant_coefficients(l2);
  const Vec gl = assemble_l2_load(l2, [](const Point& x) { return 3.0 * x[0]; });
  double total = 0.0, load = 0.0;
  for (double v : du) total += v;
  for (std::size_t i = 0; i < gl.size(); ++i) load += c[i] * gl[i];
  EXPECT_NEAR(total, 1.5, 1e-12);
  EXPECT_NEAR(load, 1.5, 1e-12);
}

}  // namespace
}  // namespace hdiv

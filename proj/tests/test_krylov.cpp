// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/analysis.hpp"
#include "hdiv/krylov.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace hdiv {
namespace {

class DenseOp : public SpdOperator {
 public:
  explicit DenseOp(Matrix a) : a_(std::move(a)) {}
  int size() const override { return static_cast<int>(a_.rows()); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) = a_ * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  }

 private:
  Matrix a_;
};

// Random saddle system with diagonal M, so diag(M) is the exact (1,1) block.
struct Saddle {
  Vec m;
  Matrix D, C, A, S;
};

Saddle make_saddle(int nu, int nq, unsigned seed, double c_scale = 0.3) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0), s(-1, 1);
  Saddle r;
  r.m.resize(nu);
  for (double& v : r.m) v = u(gen);
  r.D = Matrix(nq, nu);
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < nu; ++j) r.D(i, j) = s(gen);
  r.C = Matrix::Zero(nq, nq);
  for (int i = 0; i < nq; ++i) r.C(i, i) = c_scale * u(gen);
  const Eigen::VectorXd mv = Eigen::Map<const Eigen::VectorXd>(r.m.data(), nu);
  r.A = Matrix::Zero(nu + nq, nu + nq);
  r.A.topLeftCorner(nu, nu) = mv.asDiagonal();
  r.A.topRightCorner(nu, nq) = r.D.transpose();
  r.A.bottomLeftCorner(nq, nu) = r.D;
  r.A.bottomRightCorner(nq, nq) = -r.C;
  r.S = r.C + r.D * mv.cwiseInverse().asDiagonal() * r.D.transpose();
  return r;
}

Vec ones(int n) { return Vec(n, 1.0); }

Eigen::Map<const Eigen::VectorXd> view(const Vec& v) { return {v.data(), static_cast<Eigen::Index>(v.size())}; }

TEST(Cg, IdentityOneIteration) {
  const IdentityOperator I(5);
  Vec x(5, 0.0);
  const auto rep = cg(I, I, ones(5), x, {});
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 1);
}

TEST(Cg, FiniteTermination) {
  const DiagonalMatrix A(Vec{1, 4});
  const IdentityOperator I(2);
  Vec x(2, 0.0);
  const auto rep = cg(A, I, Vec{1, 1}, x, {});
  EXPECT_LE(rep.iterations, 2);
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 0.25, 1e-14);
}

TEST(Cg, JacobiMatchesDenseSolve) {
  Matrix B = Matrix::Random(30, 30);
  const Matrix A = B * B.transpose() + 30 * Matrix::Identity(30, 30);
  const DenseOp op(A);
  Vec d(30);
  for (int i = 0; i < 30; ++i) d[i] = 1.0 / A(i, i);
  const DiagonalMatrix jac(d);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(30);
  Vec x(30, 0.0);
  const auto rep = cg(op, jac, {b.data(), 30}, x, {1e-14, 200, 0});
  EXPECT_TRUE(rep.converged);
  const Eigen::VectorXd ref = A.llt().solve(b);
  EXPECT_LE((view(x) - ref).norm(), 1e-10 * ref.norm());
}

TEST(Cg, IndefiniteDetected) {
  const DiagonalMatrix A(Vec{1, -1});
  const IdentityOperator I(2);
  Vec x(2, 0.0);
  try {
    cg(A, I, Vec{0, 1}, x, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Definiteness);
  }
}

TEST(Minres, IndefiniteDiagonal) {
  const DiagonalMatrix A(Vec{1, -1});
  const IdentityOperator I(2);
  Vec x(2, 0.0);
  const auto rep = minres(A, I, Vec{2, 3}, x, {});
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 2);
  EXPECT_NEAR(x[0], 2.0, 1e-13);
  EXPECT_NEAR(x[1], -3.0, 1e-13);
}

TEST(Minres, MatchesCgOnSpd) {
  Matrix B = Matrix::Random(25, 25);
  const DenseOp op(B * B.transpose() + 5 * Matrix::Identity(25, 25));
  const IdentityOperator I(25);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(25);
  Vec x1(25, 0.0), x2(25, 0.0);
  cg(op, I, {b.data(), 25}, x1, {1e-14, 500, 0});
  minres(op, I, {b.data(), 25}, x2, {1e-14, 500, 0});
  EXPECT_LE((view(x1) - view(x2)).norm(), 1e-10 * view(x1).norm());
}

TEST(Minres, ResidualHistoryMonotone) {
  const Saddle s = make_saddle(40, 15, 3);
  const DenseOp A(s.A);
  const IdentityOperator I(55);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(55);
  Vec x(55, 0.0);
  const auto rep = minres(A, I, {b.data(), 55}, x, {1e-12, 500, 0});
  ASSERT_GE(rep.history.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.history[0], 1.0);
  for (std::size_t i = 1; i < rep.history.size(); ++i) EXPECT_LE(rep.history[i], rep.history[i - 1] * (1 + 1e-12));
}

TEST(Minres, NonConvergenceReported) {
  const Saddle s = make_saddle(40, 15, 4);
  const DenseOp A(s.A);
  const IdentityOperator I(55);
  Vec x(55, 0.0);
  const auto rep = minres(A, I, ones(55), x, {1e-14, 3, 0});
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.iterations, 3);
}

TEST(BlockDiagonal, ExactBlocksEigenvalueIntervals) {
  for (double tau : {1.0, 2.0}) {
    for (unsigned seed = 0; seed < 3; ++seed) {
      const Saddle s = make_saddle(30, 12, seed);
      const DenseOp Sinv(s.S.inverse());
      const DiagonalMatrix md(s.m);
      const BlockDiagonalPreconditioner P(md, Sinv, tau);
      const Matrix Pd = densify(P);
      const Eigen::EigenSolver<Matrix> es(Pd * s.A);
      Vec ev;
      for (auto l : es.eigenvalues()) {
        EXPECT_NEAR(l.imag(), 0.0, 1e-8);
        ev.push_back(l.real());
      }
      EXPECT_TRUE(interval_check(ev, exact_block_intervals(tau)).ok) << tau;
      Matrix Pinv = Matrix::Zero(42, 42);
      Pinv.topLeftCorner(30, 30) = tau * view(s.m).asDiagonal();
      Pinv.bottomRightCorner(12, 12) = s.S;
      const double kappa = generalized_spectrum(s.A, Pinv).kappa;
      EXPECT_LE(kappa, tau == 1.0 ? 2.62 : 2.0 + 1e-8);
    }
  }
}

TEST(BlockDiagonal, OtherScalingsWorse) {
  const Saddle s = make_saddle(30, 12, 11, 1.0);
  for (double tau : {1.0, 4.0}) {
    Matrix Pinv = Matrix::Zero(42, 42);
    Pinv.topLeftCorner(30, 30) = tau * view(s.m).asDiagonal();
    Pinv.bottomRightCorner(12, 12) = s.S;
    EXPECT_GT(generalized_spectrum(s.A, Pinv).kappa, 2.0) << tau;
  }
}

TEST(BlockDiagonal, MinresIterationsBounded) {
  for (unsigned seed = 0; seed < 4; ++seed) {
    const Saddle s = make_saddle(60 + 20 * seed, 20 + 5 * seed, seed);
    const int n = s.A.rows();
    const DenseOp A(s.A), Sinv(s.S.inverse());
    const DiagonalMatrix md(s.m);
    const BlockDiagonalPreconditioner P(md, Sinv, 2.0);
    Vec x(n, 0.0);
    const auto rep = minres(A, P, ones(n), x, {1e-12, 200, 0});
    EXPECT_TRUE(rep.converged);
    EXPECT_LE(rep.iterations, 25);
  }
}

TEST(Gmres, IdentityOneIteration) {
  const IdentityOperator I(4);
  Vec x(4, 0.0);
  const auto rep = gmres(I, I, ones(4), x, {});
  EXPECT_EQ(rep.iterations, 1);
}

TEST(Gmres, ExactBlockTriangularTwoIterations) {
  const Saddle s = make_saddle(30, 12, 5);
  Vec minv(30);
  for (int i = 0; i < 30; ++i) minv[i] = 1.0 / s.m[i];
  const DiagonalMatrix Minv(minv);
  const DenseOp A(s.A), Sinv(s.S.inverse());
  const SparseMatrixCsr Dt = SparseMatrixCsr::from_dense(s.D.transpose());
  const BlockTriangularPreconditioner P(Minv, Dt, Sinv);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(42);
  Vec x(42, 0.0);
  const auto rep = gmres(A, P, {b.data(), 42}, x, {1e-12, 50, 50});
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 2);
  const Eigen::VectorXd ref = s.A.lu().solve(b);
  EXPECT_LE((view(x) - ref).norm(), 1e-10 * ref.norm());
}

TEST(Gmres, MatchesMinresOnSymmetric) {
  const Saddle s = make_saddle(30, 12, 6);
  const DenseOp A(s.A), Sinv(s.S.inverse());
  const DiagonalMatrix md(s.m);
  const BlockDiagonalPreconditioner P(md, Sinv, 2.0);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(42);
  Vec x1(42, 0.0), x2(42, 0.0);
  minres(A, P, {b.data(), 42}, x1, {1e-13, 200, 0});
  gmres(A, P, {b.data(), 42}, x2, {1e-13, 200, 50});
  EXPECT_LE((view(x1) - view(x2)).norm(), 1e-9 * view(x1).norm());
}

TEST(BlockTriangular, ZeroCouplingIsBlockDiagonal) {
  const Saddle s = make_saddle(10, 4, 7);
  Vec minv(10);
  for (int i = 0; i < 10; ++i) minv[i] = 1.0 / s.m[i];
  const DiagonalMatrix Minv(minv);
  const DenseOp Sinv(s.S.inverse());
  const SparseMatrixCsr Z(10, 4);
  const BlockTriangularPreconditioner T(Minv, Z, Sinv);
  const DiagonalMatrix md(s.m);
  const BlockDiagonalPreconditioner B(md, Sinv, 1.0);
  EXPECT_LE((densify(T) - densify(B)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectConstants, Properties) {
  const Vec w{1, 2, 3};
  Vec c{2, 4, 6};
  project_constants(c, w);
  for (double v : c) EXPECT_NEAR(v, 0.0, 1e-15);
  Vec o{3, 0, -1};
  project_constants(o, w);
  EXPECT_EQ(o, (Vec{3, 0, -1}));
  Vec r{0.3, -2, 5};
  project_constants(r, w);
  const Vec once = r;
  project_constants(r, w);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r[i], once[i], 1e-15);
}

TEST(SolverReport, HistoryCsv) {
  SolverReport r;
  r.history = {1.0, 0.5};
  std::ostringstream os;
  r.write_history_csv(os);
  EXPECT_EQ(os.str(), "iteration,relative_residual\n0,1\n1,0.5\n");
}

}  // namespace
}  // namespace hdiv

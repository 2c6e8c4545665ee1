// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/tensor1d.hpp"

#include <cmath>
#include <numbers>

namespace hdiv {

namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIt = 100;

// Mirror the lower half so the node set is symmetric about 1/2 to rounding.
void symmetrize(NodeSet1D& s) {
  const int n = s.size();
  for (int i = 0; i < n / 2; ++i) {
    s.nodes[n - 1 - i] = 1.0 - s.nodes[i];
    const double w = 0.5 * (s.weights[i] + s.weights[n - 1 - i]);
    s.weights[i] = w;
    s.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) s.nodes[n / 2] = 0.5;
}

void check_distinct(std::span<const double> nodes) {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (nodes[i] == nodes[j])
        throw Error(ErrorCode::DegenerateBasis, "duplicate interpolation node " + std::to_string(nodes[i]));
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidOrder: return "invalid-order";
    case ErrorCode::DegenerateBasis: return "degenerate-basis";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::InvalidMesh: return "invalid-mesh";
    case ErrorCode::Coefficient: return "coefficient";
    case ErrorCode::Config: return "config";
    case ErrorCode::StructuralIntegrity: return "structural-integrity";
    case ErrorCode::Mapping: return "mapping";
    case ErrorCode::Numerical: return "numerical";
    case ErrorCode::IterationLimit: return "iteration-limit";
    case ErrorCode::Definiteness: return "definiteness";
    case ErrorCode::Symmetry: return "symmetry";
    case ErrorCode::Scale: return "scale";
  }
  return "unknown";
}

NodeSet1D gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidOrder, "gauss_legendre needs n >= 1, got " + std::to_string(n));
  NodeSet1D s{NodeFamily::GaussLegendre, Vec(n), Vec(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n over [-1,1], starting from the Chebyshev-like guess.
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < kNewtonMaxIt; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = (n == 1) ? t : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (t * pn - pnm1) / (t * t - 1.0);
      const double dt = pn / dp;
      t -= dt;
      if (std::abs(dt) < kNewtonTol) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    const double pn = (n == 1) ? t : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    dp = n * (t * pn - pnm1) / (t * t - 1.0);
    // t is decreasing in i; map so nodes ascend.
    s.nodes[i] = 0.5 * (1.0 - t);
    s.weights[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    s.weights[n - 1 - i] = s.weights[i];
  }
  symmetrize(s);
  return s;
}

NodeSet1D gauss_lobatto(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidOrder, "gauss_lobatto needs n >= 2, got " + std::to_string(n));
  const int N = n - 1;
  Vec t(n), told(n), pN(n), pNm1(n);
  for (int i = 0; i < n; ++i) t[i] = -std::cos(std::numbers::pi * i / N);
  for (int it = 0; it < kNewtonMaxIt; ++it) {
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double p0 = 1.0, p1 = t[i];
      for (int k = 2; k <= N; ++k) {
        const double pk = ((2.0 * k - 1.0) * t[i] * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      pN[i] = p1;
      pNm1[i] = p0;
      told[i] = t[i];
      t[i] = told[i] - (t[i] * pN[i] - pNm1[i]) / (n * pN[i]);
      err = std::max(err, std::abs(t[i] - told[i]));
    }
    if (err < kNewtonTol) break;
  }
  NodeSet1D s{NodeFamily::GaussLobatto, Vec(n), Vec(n)};
  for (int i = 0; i < n; ++i) {
    double p0 = 1.0, p1 = t[i];
    for (int k = 2; k <= N; ++k) {
      const double pk = ((2.0 * k - 1.0) * t[i] * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    s.nodes[i] = 0.5 * (1.0 + t[i]);
    s.weights[i] = 1.0 / (N * n * p1 * p1);
  }
  s.nodes.front() = 0.0;
  s.nodes.back() = 1.0;
  symmetrize(s);
  return s;
}

Matrix interp_matrix(std::span<const double> nodes, std::span<const double> points) {
  check_distinct(nodes);
  const int n = static_cast<int>(nodes.size());
  Matrix B(points.size(), n);
  for (std::size_t q = 0; q < points.size(); ++q) {
    for (int j = 0; j < n; ++j) {
      double v = 1.0;
      for (int m = 0; m < n; ++m)
        if (m != j) v *= (points[q] - nodes[m]) / (nodes[j] - nodes[m]);
      B(q, j) = v;
    }
  }
  return B;
}

Matrix interp_derivative_matrix(std::span<const double> nodes, std::span<const double> points) {
  check_distinct(nodes);
  const int n = static_cast<int>(nodes.size());
  Matrix G(points.size(), n);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const double x = points[q];
    for (int j = 0; j < n; ++j) {
      double denom = 1.0;
      for (int m = 0; m < n; ++m)
        if (m != j) denom *= nodes[j] - nodes[m];
      // d/dx prod_{m != j}(x - x_m) = sum_l prod_{m != j,l}(x - x_m)
      double sum = 0.0;
      for (int l = 0; l < n; ++l) {
        if (l == j) continue;
        double prod = 1.0;
        for (int m = 0; m < n; ++m)
          if (m != j && m != l) prod *= x - nodes[m];
        sum += prod;
      }
      G(q, j) = sum / denom;
    }
  }
  return G;
}

Matrix histopolation_matrix(int p) {
  if (p < 1) throw Error(ErrorCode::InvalidOrder, "histopolation needs p >= 1");
  if (p == 1) return Matrix::Ones(1, 1);
  const NodeSet1D gll = gauss_lobatto(p + 1);
  const NodeSet1D gl = gauss_legendre(p);
  // A(i,k) = integral of g_k over the i-th GLL subinterval (exact: p GL points
  // integrate degree p-1 polynomials).
  Matrix A = Matrix::Zero(p, p);
  Vec pts(p);
  for (int i = 0; i < p; ++i) {
    const double a = gll.nodes[i], b = gll.nodes[i + 1];
    for (int q = 0; q < p; ++q) pts[q] = a + (b - a) * gl.nodes[q];
    const Matrix G = interp_matrix(gl.nodes, pts);
    for (int q = 0; q < p; ++q)
      for (int k = 0; k < p; ++k) A(i, k) += (b - a) * gl.weights[q] * G(q, k);
  }
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible() || lu.rcond() < 1e-14)
    throw Error(ErrorCode::DegenerateBasis, "singular histopolation integral matrix at p=" + std::to_string(p));
  return lu.inverse();
}

const char* to_string(Basis1D b) {
  switch (b) {
    case Basis1D::GllNodal: return "gll";
    case Basis1D::GlNodal: return "gl";
    case Basis1D::Histopolation: return "histopolation";
  }
  return "unknown";
}

Matrix eval_basis(Basis1D kind, int n, std::span<const double> points) {
  if (n < 1) throw Error(ErrorCode::InvalidOrder, "basis dimension must be >= 1");
  if (n == 1) return Matrix::Ones(points.size(), 1);  // all families reduce to the constant
  switch (kind) {
    case Basis1D::GllNodal: return interp_matrix(gauss_lobatto(n).nodes, points);
    case Basis1D::GlNodal: return interp_matrix(gauss_legendre(n).nodes, points);
    case Basis1D::Histopolation:
      return interp_matrix(gauss_legendre(n).nodes, points) * histopolation_matrix(n);
  }
  throw Error(ErrorCode::Config, "unknown basis");
}

Matrix eval_basis_derivative(Basis1D kind, int n, std::span<const double> points) {
  if (n < 1) throw Error(ErrorCode::InvalidOrder, "basis dimension must be >= 1");
  if (n == 1) return Matrix::Zero(points.size(), 1);
  switch (kind) {
    case Basis1D::GllNodal: return interp_derivative_matrix(gauss_lobatto(n).nodes, points);
    case Basis1D::GlNodal: return interp_derivative_matrix(gauss_legendre(n).nodes, points);
    case Basis1D::Histopolation:
      return interp_derivative_matrix(gauss_legendre(n).nodes, points) * histopolation_matrix(n);
  }
  throw Error(ErrorCode::Config, "unknown basis");
}

BasisChange1D basis_change(int n, Basis1D from, Basis1D to) {
  if (n < 1) throw Error(ErrorCode::Shape, "basis dimension must be >= 1");
  if (from == to) return {from, to, Matrix::Identity(n, n)};
  // Both bases span polynomials of degree n-1; collocate at the GL points.
  const Vec pts = gauss_legendre(n).nodes;
  const Matrix Vfrom = eval_basis(from, n, pts);
  const Matrix Vto = eval_basis(to, n, pts);
  return {from, to, Vto.partialPivLu().solve(Vfrom)};
}

}  // namespace hdiv

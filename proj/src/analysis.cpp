// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/analysis.hpp"

#include "hdiv/operators.hpp"

#include <cmath>
#include <random>

namespace hdiv {

Matrix densify(const LinearOperator& op) {
  const int n = op.size();
  if (n > 5000) throw Error(ErrorCode::Scale, "densify: dimension " + std::to_string(n) + " exceeds 5000");
  Matrix a(n, n);
  Vec e(n, 0.0), y(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, y);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i) a(i, j) = y[i];
  }
  return a;
}

namespace {

void finish(SpectrumReport& r) {
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end());
  r.abs_min = INFINITY;
  r.abs_max = 0.0;
  for (double l : r.eigenvalues) {
    r.abs_min = std::min(r.abs_min, std::abs(l));
    r.abs_max = std::max(r.abs_max, std::abs(l));
  }
  r.kappa = r.abs_max / r.abs_min;
}

}  // namespace

SpectrumReport generalized_spectrum(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Error(ErrorCode::Shape, "generalized_spectrum: shapes differ");
  Eigen::LLT<Matrix> llt(0.5 * (b + b.transpose()));
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::Definiteness, "generalized_spectrum: b is not SPD");
  // L^{-1} a L^{-T} has the same eigenvalues as b^{-1} a.
  const Matrix L = llt.matrixL();
  Matrix c = L.triangularView<Eigen::Lower>().solve(Matrix(0.5 * (a + a.transpose())));
  c = L.triangularView<Eigen::Lower>().solve(Matrix(c.transpose()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
  SpectrumReport r;
  r.method = "dense";
  r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  finish(r);
  return r;
}

double generalized_condition(const Matrix& a, const Matrix& b) { return generalized_spectrum(a, b).kappa; }

SpectralIntervals exact_block_intervals(double tau) {
  const double s5 = std::sqrt(5.0);
  if (tau == 1.0) return {-1.0, (1.0 - s5) / 2.0, 1.0, (1.0 + s5) / 2.0};
  if (tau == 2.0) return {-1.0, -0.5, 0.5, 1.0};
  throw Error(ErrorCode::Config, "eigenvalue intervals are known only for tau = 1 and tau = 2");
}

IntervalReport interval_check(const Vec& eigenvalues, const SpectralIntervals& iv, double tol) {
  IntervalReport r;
  for (double l : eigenvalues) {
    const bool neg = l >= iv.neg_lo - tol && l <= iv.neg_hi + tol;
    const bool pos = l >= iv.pos_lo - tol && l <= iv.pos_hi + tol;
    if (!neg && !pos) {
      r.ok = false;
      r.offending.push_back(l);
    }
  }
  return r;
}

SpectrumReport lanczos_condition(const LinearOperator& A, const SpdOperator& Pinv, int max_steps, unsigned seed) {
  const int n = A.size();
  const int m = std::min(max_steps, n);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec r(n), z(n), u(n);
  for (double& v : r) v = dist(rng);
  // Pairs (w_k, v_k = P^{-1} w_k) with v_j . w_k = delta_jk.
  std::vector<Vec> W, V;
  Vec alpha, beta;
  auto dot = [](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  Pinv.apply(r, z);
  double b = std::sqrt(dot(z, r));
  for (int k = 0; k < m; ++k) {
    if (!(b > 0.0)) break;
    Vec wk(n), vk(n);
    for (int i = 0; i < n; ++i) {
      wk[i] = r[i] / b;
      vk[i] = z[i] / b;
    }
    W.push_back(std::move(wk));
    V.push_back(std::move(vk));
    if (k > 0) beta.push_back(b);
    A.apply(V[k], u);
    const double a = dot(V[k], u);
    alpha.push_back(a);
    r = u;
    for (int i = 0; i < n; ++i) r[i] -= a * W[k][i] + (k > 0 ? beta.back() * W[k - 1][i] : 0.0);
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j <= k; ++j) {
        const double c = dot(V[j], r);
        for (int i = 0; i < n; ++i) r[i] -= c * W[j][i];
      }
    Pinv.apply(r, z);
    const double bb = dot(z, r);
    b = bb > 0.0 ? std::sqrt(bb) : 0.0;
    if (b < 1e-14 * std::abs(a)) break;
  }
  const int k = static_cast<int>(alpha.size());
  Matrix T = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
  SpectrumReport rep;
  rep.method = "lanczos";
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
  finish(rep);
  return rep;
}

std::vector<MassConditioningRow> mass_basis_conditioning(int dim, bool skewed, int p_min, int p_max,
                                                         const std::vector<Basis1D>& bases) {
  auto mesh = std::make_shared<const Mesh>(skewed ? canonical_skewed_element(dim)
                                                  : cartesian_mesh(dim, {1, 1, 1}));
  std::vector<MassConditioningRow> rows;
  for (int p = p_min; p <= p_max; ++p) {
    const L2Space l2(mesh, p);
    for (Basis1D b : bases) {
      const L2MassOperator W(l2, 1.0, b, Exec::Serial);
      const Matrix w = W.local_matrix(0);
      const Matrix d = w.diagonal().asDiagonal();
      rows.push_back({dim, p, "l2", b, generalized_condition(w, d)});
    }
    const RtSpace rt(mesh, p);
    const RtMassOperator M(rt, 1.0, Exec::Serial);
    const Matrix m = M.local_matrix(0);
    const Matrix d = m.diagonal().asDiagonal();
    rows.push_back({dim, p, "rt", Basis1D::Histopolation, generalized_condition(m, d)});
  }
  return rows;
}

}  // namespace hdiv

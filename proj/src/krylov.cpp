// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/krylov.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

namespace hdiv {

namespace {

// Serial reductions keep results independent of the thread count.
double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

void SolverReport::write_history_csv(std::ostream& os) const {
  os << "iteration,relative_residual\n";
  for (std::size_t i = 0; i < history.size(); ++i) os << i << ',' << history[i] << '\n';
}

SolverReport cg(const LinearOperator& A, const SpdOperator& P, std::span<const double> b, std::span<double> x,
                const KrylovOptions& opts) {
  const auto t0 = Clock::now();
  const std::size_t n = b.size();
  SolverReport rep;
  Vec r(n), z(n), p(n), ap(n);
  A.apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  P.apply(r, z);
  double rz = dot(r, z);
  if (rz < 0.0) throw Error(ErrorCode::Definiteness, "cg: preconditioner is not positive definite");
  const double r0 = std::sqrt(rz);
  rep.history.push_back(1.0);
  if (r0 == 0.0) {
    rep.converged = true;
    rep.seconds = since(t0);
    return rep;
  }
  p = z;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    A.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw Error(ErrorCode::Definiteness, "cg: operator is not positive definite (p.Ap <= 0)");
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    P.apply(r, z);
    const double rz_new = dot(r, z);
    if (rz_new < 0.0) throw Error(ErrorCode::Definiteness, "cg: preconditioner is not positive definite");
    const double rel = std::sqrt(rz_new) / r0;
    rep.history.push_back(rel);
    rep.iterations = it;
    rep.final_residual = rel;
    if (rel <= opts.tol) {
      rep.converged = true;
      break;
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  rep.seconds = since(t0);
  return rep;
}

SolverReport minres(const LinearOperator& A, const SpdOperator& P, std::span<const double> b, std::span<double> x,
                    const KrylovOptions& opts) {
  const auto t0 = Clock::now();
  const std::size_t n = b.size();
  SolverReport rep;
  Vec v_old(n, 0.0), v(n), v_new(n), z(n), z_new(n), az(n), w_old(n, 0.0), w(n, 0.0), w_new(n);

  A.apply(x, az);
  for (std::size_t i = 0; i < n; ++i) v[i] = b[i] - az[i];
  P.apply(v, z);
  double g2 = dot(z, v);
  if (g2 < 0.0) throw Error(ErrorCode::Definiteness, "minres: preconditioner is not positive definite");
  double gamma = std::sqrt(g2), gamma_old = 1.0;
  const double eta0 = gamma;
  double eta = gamma;
  double s_old = 0.0, s = 0.0, c_old = 1.0, c = 1.0;
  rep.history.push_back(1.0);
  if (eta0 == 0.0) {
    rep.converged = true;
    rep.seconds = since(t0);
    return rep;
  }
  for (int it = 1; it <= opts.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) z[i] /= gamma;
    A.apply(z, az);
    const double delta = dot(az, z);
    for (std::size_t i = 0; i < n; ++i) v_new[i] = az[i] - (delta / gamma) * v[i] - (gamma / gamma_old) * v_old[i];
    P.apply(v_new, z_new);
    double g2n = dot(z_new, v_new);
    if (g2n < 0.0) {
      if (g2n < -1e-12 * dot(v_new, v_new))
        throw Error(ErrorCode::Definiteness, "minres: preconditioner is not positive definite");
      g2n = 0.0;
    }
    const double gamma_new = std::sqrt(g2n);
    const double a0 = c * delta - c_old * s * gamma;
    const double a1 = std::sqrt(a0 * a0 + gamma_new * gamma_new);
    const double a2 = s * delta + c_old * c * gamma;
    const double a3 = s_old * gamma;
    const double c_new = a0 / a1, s_new = gamma_new / a1;
    for (std::size_t i = 0; i < n; ++i) {
      w_new[i] = (z[i] - a3 * w_old[i] - a2 * w[i]) / a1;
      x[i] += c_new * eta * w_new[i];
    }
    eta = -s_new * eta;
    const double rel = std::abs(eta) / eta0;
    rep.history.push_back(rel);
    rep.iterations = it;
    rep.final_residual = rel;
    if (rel <= opts.tol || gamma_new == 0.0) {
      rep.converged = rel <= opts.tol || gamma_new == 0.0;
      break;
    }
    std::swap(v_old, v);
    std::swap(v, v_new);
    std::swap(z, z_new);
    std::swap(w_old, w);
    std::swap(w, w_new);
    gamma_old = gamma;
    gamma = gamma_new;
    c_old = c;
    c = c_new;
    s_old = s;
    s = s_new;
  }
  rep.seconds = since(t0);
  return rep;
}

SolverReport gmres(const LinearOperator& A, const LinearOperator& P, std::span<const double> b, std::span<double> x,
                   const KrylovOptions& opts) {
  const auto t0 = Clock::now();
  const std::size_t n = b.size();
  const int m = std::max(1, opts.restart);
  SolverReport rep;
  Vec r(n), t(n), pz(n);
  std::vector<Vec> V(m + 1, Vec(n));
  Matrix H = Matrix::Zero(m + 1, m);
  Vec cs(m), sn(m), g(m + 1);

  auto residual = [&]() {
    A.apply(x, t);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
    return norm(r);
  };
  double beta = residual();
  const double r0 = beta;
  rep.history.push_back(1.0);
  if (r0 == 0.0) {
    rep.converged = true;
    rep.seconds = since(t0);
    return rep;
  }
  int total = 0;
  while (total < opts.max_iterations) {
    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    bool done = false;
    for (; k < m && total < opts.max_iterations; ++k) {
      P.apply(V[k], pz);
      A.apply(pz, V[k + 1]);
      // Modified Gram-Schmidt, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const double h = dot(V[k + 1], V[j]);
          H(j, k) += h;
          for (std::size_t i = 0; i < n; ++i) V[k + 1][i] -= h * V[j][i];
        }
      const double hn = norm(V[k + 1]);
      H(k + 1, k) = hn;
      if (hn > 0.0)
        for (double& vi : V[k + 1]) vi /= hn;
      for (int j = 0; j < k; ++j) {
        const double h0 = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = h0;
      }
      const double den = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / den;
      sn[k] = H(k + 1, k) / den;
      H(k, k) = den;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++total;
      const double rel = std::abs(g[k + 1]) / r0;
      rep.history.push_back(rel);
      rep.iterations = total;
      rep.final_residual = rel;
      // A zero subdiagonal is a lucky breakdown: the solution is exact.
      if (rel <= opts.tol || hn == 0.0) {
        done = true;
        ++k;
        break;
      }
    }
    // Back substitution and update x += P V y.
    Eigen::VectorXd y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    std::fill(t.begin(), t.end(), 0.0);
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) t[i] += y[j] * V[j][i];
    P.apply(t, pz);
    for (std::size_t i = 0; i < n; ++i) x[i] += pz[i];
    beta = residual();
    rep.final_residual = beta / r0;
    if (!rep.history.empty()) rep.history.back() = rep.final_residual;
    if (done || rep.final_residual <= opts.tol) {
      rep.converged = rep.final_residual <= opts.tol || done;
      break;
    }
    H.setZero();
  }
  rep.seconds = since(t0);
  return rep;
}

void project_constants(std::span<double> v, std::span<const double> w) {
  const double ww = dot(w, w);
  if (ww == 0.0) return;
  const double c = dot(w, v) / ww;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * w[i];
}

BlockDiagonalPreconditioner::BlockDiagonalPreconditioner(const DiagonalMatrix& m_diag, const SpdOperator& schur_inv,
                                                         double tau)
    : m_(m_diag), schur_(schur_inv), tau_(tau), nu_(m_diag.size()) {
  if (!(tau > 0.0)) throw Error(ErrorCode::Config, "tau must be positive");
}

void BlockDiagonalPreconditioner::apply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < nu_; ++i) y[i] = x[i] / (tau_ * m_[i]);
  const std::size_t nq = schur_.size();
  auto xq = x.subspan(nu_, nq);
  auto yq = y.subspan(nu_, nq);
  if (proj_.empty()) {
    schur_.apply(xq, yq);
    return;
  }
  tmp_.assign(xq.begin(), xq.end());
  project_constants(tmp_, proj_);
  schur_.apply(tmp_, yq);
  project_constants(yq, proj_);
}

BlockTriangularPreconditioner::BlockTriangularPreconditioner(const LinearOperator& m_inv, const SparseMatrixCsr& Dt,
                                                             const LinearOperator& schur_inv)
    : m_inv_(m_inv), Dt_(Dt), schur_(schur_inv), nu_(m_inv.size()) {}

void BlockTriangularPreconditioner::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t nq = schur_.size();
  auto xq = x.subspan(nu_, nq);
  auto yq = y.subspan(nu_, nq);
  if (proj_.empty()) {
    schur_.apply(xq, yq);
  } else {
    tmp_.assign(xq.begin(), xq.end());
    project_constants(tmp_, proj_);
    schur_.apply(tmp_, yq);
    project_constants(yq, proj_);
  }
  tmp_.resize(nu_);
  tmp2_.resize(nu_);
  Dt_.multiply(yq, tmp_);
  for (int i = 0; i < nu_; ++i) tmp_[i] = x[i] - tmp_[i];
  m_inv_.apply(tmp_, tmp2_);
  std::copy(tmp2_.begin(), tmp2_.end(), y.begin());
}

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/massinv.hpp"

#include <chrono>
#include <cmath>

namespace hdiv {

const char* to_string(MassInverseKind k) {
  switch (k) {
    case MassInverseKind::Factorize: return "factorize";
    case MassInverseKind::ExplicitInverse: return "explicit";
    case MassInverseKind::LocalCg: return "localcg";
  }
  return "?";
}

MassInverseKind mass_inverse_kind_from_string(const std::string& s) {
  if (s == "factorize" || s == "cholesky") return MassInverseKind::Factorize;
  if (s == "explicit" || s == "inverse") return MassInverseKind::ExplicitInverse;
  if (s == "localcg" || s == "cg") return MassInverseKind::LocalCg;
  throw Error(ErrorCode::Config, "unknown mass-inverse strategy '" + s + "'");
}

MassInverseKind default_mass_inverse(int p) {
  return p <= 2 ? MassInverseKind::ExplicitInverse : MassInverseKind::LocalCg;
}

struct LocalWork {
  Vec r, z, pdir, ap, b2, x2, apply_work;
};

MassInverse::MassInverse(const L2MassOperator& W, MassInverseOptions opts)
    : W_(W), opts_(opts), nb_(W.block_size()) {
  const auto t0 = std::chrono::steady_clock::now();
  const int ne = W.num_blocks();
  census_.assign(ne, 0);
  if (opts_.kind == MassInverseKind::LocalCg) {
    const Basis1D solve_basis = opts_.gl_basis ? Basis1D::GlNodal : W.basis();
    if (solve_basis != W.basis()) {
      W_solve_ = std::make_unique<L2MassOperator>(W.space(), W.coefficient(), solve_basis, opts_.exec);
      to_solve_ = Dense1D(basis_change(W.space().degree(), solve_basis, W.basis()).matrix);
    }
    const L2MassOperator& Ws = W_solve_ ? *W_solve_ : W_;
    diag_ = Ws.diagonal().entries();
    for (int i = 0; i < static_cast<int>(diag_.size()); ++i)
      if (!(diag_[i] > 0.0)) throw Error(ErrorCode::Numerical, "non-positive mass diagonal on element " + std::to_string(i / nb_));
  } else {
    const std::size_t bytes = static_cast<std::size_t>(ne) * nb_ * nb_ * sizeof(double);
    if (bytes > opts_.memory_limit) throw Error(ErrorCode::Scale, "dense mass-inverse blocks exceed the memory limit");
    blocks_.resize(ne);
    const bool explicit_inverse = opts_.kind == MassInverseKind::ExplicitInverse;
    auto setup_block = [&](int e) {
      Eigen::LLT<Matrix> llt(W.local_matrix(e));
      if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::Numerical, "Cholesky breakdown on element " + std::to_string(e));
      blocks_[e] = explicit_inverse ? Matrix(llt.solve(Matrix::Identity(nb_, nb_))) : Matrix(llt.matrixL());
    };
    // Exceptions must not escape an OpenMP region; set up serially if any
    // block fails so the error names the element.
    bool failed = false;
    if (opts_.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
      for (int e = 0; e < ne; ++e) {
        try {
          setup_block(e);
        } catch (const Error&) {
#pragma omp atomic write
          failed = true;
        }
      }
    }
    if (opts_.exec == Exec::Serial || failed)
      for (int e = 0; e < ne; ++e) setup_block(e);
  }
  setup_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MassInverse::~MassInverse() = default;

std::size_t MassInverse::memory_bytes() const {
  std::size_t b = 0;
  for (const Matrix& m : blocks_) b += static_cast<std::size_t>(m.size()) * sizeof(double);
  b += diag_.size() * sizeof(double);
  b += to_solve_.data.size() * sizeof(double);
  return b;
}

void MassInverse::solve_block(int e, const double* b, double* x, LocalWork& w) const {
  const int n = nb_;
  if (opts_.kind != MassInverseKind::LocalCg) {
    Eigen::Map<const Eigen::VectorXd> bv(b, n);
    Eigen::Map<Eigen::VectorXd> xv(x, n);
    if (opts_.kind == MassInverseKind::ExplicitInverse) {
      xv.noalias() = blocks_[e] * bv;
    } else {
      const auto L = blocks_[e].triangularView<Eigen::Lower>();
      xv = L.solve(bv);
      L.transpose().solveInPlace(xv);
    }
    return;
  }

  // Local diagonally preconditioned CG, zero initial guess. With C mapping
  // solve-basis to discretization-basis coefficients, W_s = C^T W C and so
  // x = C W_s^{-1} C^T b.
  const int d = W_.space().dim();
  const std::array<const Dense1D*, 3> C{&to_solve_, &to_solve_, &to_solve_};
  const L2MassOperator& Ws = W_solve_ ? *W_solve_ : W_;
  w.r.resize(n);
  w.z.resize(n);
  w.pdir.resize(n);
  w.ap.resize(n);
  w.x2.assign(n, 0.0);
  Vec tw;
  if (W_solve_) {
    tensor_apply(d, C, true, b, w.r.data(), tw);
  } else {
    std::copy(b, b + n, w.r.begin());
  }
  const double* dg = diag_.data() + static_cast<std::size_t>(e) * n;
  double bnorm = 0.0;
  for (int i = 0; i < n; ++i) bnorm += w.r[i] * w.r[i];
  bnorm = std::sqrt(bnorm);
  int it = 0;
  if (bnorm > 0.0) {
    double rz = 0.0;
    for (int i = 0; i < n; ++i) {
      w.z[i] = w.r[i] / dg[i];
      w.pdir[i] = w.z[i];
      rz += w.r[i] * w.z[i];
    }
    while (true) {
      Ws.local_apply(e, w.pdir.data(), w.ap.data(), w.apply_work);
      ++it;
      double pap = 0.0;
      for (int i = 0; i < n; ++i) pap += w.pdir[i] * w.ap[i];
      const double a = rz / pap;
      double rn = 0.0, rz_new = 0.0;
      for (int i = 0; i < n; ++i) {
        w.x2[i] += a * w.pdir[i];
        w.r[i] -= a * w.ap[i];
        rn += w.r[i] * w.r[i];
      }
      if (std::sqrt(rn) <= opts_.tol * bnorm) break;
      if (it >= opts_.max_iterations) {
        it = -1;
        break;
      }
      for (int i = 0; i < n; ++i) {
        w.z[i] = w.r[i] / dg[i];
        rz_new += w.r[i] * w.z[i];
      }
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int i = 0; i < n; ++i) w.pdir[i] = w.z[i] + beta * w.pdir[i];
    }
  }
  census_[e] = it;
  if (W_solve_) {
    tensor_apply(d, C, false, w.x2.data(), x, tw);
  } else {
    std::copy(w.x2.begin(), w.x2.end(), x);
  }
}

void MassInverse::apply(std::span<const double> x, std::span<double> y) const {
  const int ne = W_.num_blocks();
  if (opts_.exec == Exec::Parallel) {
#pragma omp parallel
    {
      LocalWork w;
#pragma omp for schedule(static)
      for (int e = 0; e < ne; ++e)
        solve_block(e, x.data() + static_cast<std::size_t>(e) * nb_, y.data() + static_cast<std::size_t>(e) * nb_, w);
    }
  } else {
    LocalWork w;
    for (int e = 0; e < ne; ++e)
      solve_block(e, x.data() + static_cast<std::size_t>(e) * nb_, y.data() + static_cast<std::size_t>(e) * nb_, w);
  }
  ++applies_;
  if (opts_.kind == MassInverseKind::LocalCg) {
    int worst = -1;
    for (int e = 0; e < ne; ++e)
      if (census_[e] < 0) {
        worst = e;
        break;
      }
    if (worst >= 0)
      throw Error(ErrorCode::IterationLimit,
                  "local CG did not converge in " + std::to_string(opts_.max_iterations) + " iterations on element " +
                      std::to_string(worst));
  }
}

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/csr.hpp"
#include "hdiv/linop.hpp"

#include <iosfwd>

namespace hdiv {

struct SolverReport {
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;  // relative
  Vec history;                  // relative residual per iteration, history[0] = 1
  double seconds = 0.0;

  /// "iteration,relative_residual" rows with a header.
  void write_history_csv(std::ostream& os) const;
};

struct KrylovOptions {
  double tol = 1e-12;
  int max_iterations = 1000;
  int restart = 100;  // GMRES only
};

/// Preconditioned conjugate gradients. Stops on the relative
/// preconditioned residual sqrt(r.z)/sqrt(r0.z0). `x` holds the initial
/// guess on entry.
SolverReport cg(const LinearOperator& A, const SpdOperator& P, std::span<const double> b, std::span<double> x,
                const KrylovOptions& opts);

/// Preconditioned MINRES (three-term Lanczos recurrence). The residual
/// criterion is the preconditioned residual norm relative to its initial
/// value.
SolverReport minres(const LinearOperator& A, const SpdOperator& P, std::span<const double> b, std::span<double> x,
                    const KrylovOptions& opts);

/// Right-preconditioned restarted GMRES; residuals are true residuals
/// relative to the initial one.
SolverReport gmres(const LinearOperator& A, const LinearOperator& P, std::span<const double> b, std::span<double> x,
                   const KrylovOptions& opts);

/// Removes the component of the q-part along `w`: v <- v - (w.v / w.w) w.
/// With w = 1 this subtracts the mean.
void project_constants(std::span<double> v, std::span<const double> w);

/// Saddle vectors are flat: the first `nu` entries are the u-part.
/// diag(tau M)^{-1} on the u-part, schur_inv on the q-part, and an optional
/// projection of the q-part (pure-Neumann problems).
class BlockDiagonalPreconditioner : public SpdOperator {
 public:
  BlockDiagonalPreconditioner(const DiagonalMatrix& m_diag, const SpdOperator& schur_inv, double tau = 2.0);
  int size() const override { return nu_ + schur_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  /// Enables the q-part projection against `w` before and after the Schur solve.
  void set_projection(Vec w) { proj_ = std::move(w); }

 private:
  const DiagonalMatrix& m_;
  const SpdOperator& schur_;
  double tau_;
  int nu_;
  Vec proj_;
  mutable Vec tmp_;
};

/// Upper block-triangular preconditioner [M D^T; 0 S]:
/// y_q = S^{-1} x_q, y_u = M^{-1}(x_u - D^T y_q). Not symmetric, GMRES only.
class BlockTriangularPreconditioner : public LinearOperator {
 public:
  BlockTriangularPreconditioner(const LinearOperator& m_inv, const SparseMatrixCsr& Dt, const LinearOperator& schur_inv);
  int size() const override { return nu_ + schur_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void set_projection(Vec w) { proj_ = std::move(w); }

 private:
  const LinearOperator& m_inv_;
  const SparseMatrixCsr& Dt_;
  const LinearOperator& schur_;
  int nu_;
  Vec proj_;
  mutable Vec tmp_, tmp2_;
};

}  // namespace hdiv

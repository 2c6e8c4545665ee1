// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/amg.hpp"
#include "hdiv/divergence.hpp"
#include "hdiv/krylov.hpp"
#include "hdiv/massinv.hpp"
#include "hdiv/operators.hpp"

#include <optional>

namespace hdiv {

enum class ProblemKind { GradDiv, DarcyNonzero, DarcyZero };
enum class PrecondKind { BlockDiagonal, BlockTriangular };
enum class SchurSolverKind { Amg, Direct };

const char* to_string(ProblemKind k);
ProblemKind problem_kind_from_string(const std::string& s);

struct SolveOptions {
  double tau = 2.0;
  double tol = 1e-12;
  int max_iterations = 5000;
  int restart = 200;
  PrecondKind precond = PrecondKind::BlockDiagonal;
  SchurSolverKind schur = SchurSolverKind::Amg;
  std::optional<MassInverseKind> mass_inverse;  // default: by degree
  double local_tol = -1.0;                      // < 0: tol * 1e-2
  AmgOptions amg;
  bool pure_neumann = false;
  /// Darcy with element-wise constant gamma: use W_{1/gamma}^{-1} for the
  /// (2,2) block instead of W^{-1} W_gamma W^{-1}.
  bool simplify_darcy = true;
  Exec exec = Exec::Parallel;
};

/// Grad-div:  -grad(alpha div u) + beta u = f,  u.n given.
/// Darcy:     u + eps grad p = f,  div u + gamma p = g,  u.n given on the
///            essential attributes (p = 0 weakly elsewhere).
struct SaddleProblem {
  ProblemKind kind = ProblemKind::GradDiv;
  std::shared_ptr<const Mesh> mesh;
  int p = 2;
  Coefficient alpha = 1.0, beta = 1.0;
  Coefficient eps = 1.0, gamma = 1.0;
  VectorField f;           // empty: zero
  ScalarField g;           // empty: zero
  VectorField u_boundary;  // normal trace taken from this field; empty: zero
  std::set<int> essential; // boundary attributes with prescribed u.n
  SolveOptions options;
};

/// Assembled transformed saddle system
///   [ M   D^T ] [u ]   [f_u]
///   [ D   -Z  ] [q~] = [f_q]
/// with Z = W_alpha^{-1} (grad-div), W^{-1} W_gamma W^{-1} or W_{1/gamma}^{-1}
/// (Darcy), 0 (Darcy with gamma = 0). Vectors are flat [u; q~]; essential
/// u-rows act as the identity.
class SaddleSystem : public LinearOperator {
 public:
  explicit SaddleSystem(const SaddleProblem& problem);
  ~SaddleSystem() override;

  int size() const override { return nu() + nq(); }
  void apply(std::span<const double> x, std::span<double> y) const override;

  int nu() const { return rt_->num_dofs(); }
  int nq() const { return l2_->num_dofs(); }
  const SaddleProblem& problem() const { return problem_; }
  const RtSpace& rt() const { return *rt_; }
  const L2Space& l2() const { return *l2_; }
  const SparseMatrixCsr& D() const { return D_; }
  const SparseMatrixCsr& Dt_free() const { return Dt_free_; }
  const RtMassOperator& M() const { return *M_; }
  const L2MassOperator& W() const { return *W_; }
  const MassInverse& W_inverse() const { return *Winv_; }
  const std::vector<char>& essential_mask() const { return essential_; }
  const std::vector<int>& free_dofs() const { return free_; }
  const Vec& lifting() const { return u_bc_; }

  /// y = Z x for the (2,2) block (without the sign).
  void apply_c(std::span<const double> x, std::span<double> y) const;
  /// The two Darcy forms, exposed for the algebraic identity check.
  void apply_darcy_general(std::span<const double> x, std::span<double> y) const;
  void apply_darcy_simplified(std::span<const double> x, std::span<double> y) const;

  /// Mass-inverse applications performed so far (all inner W^{-1} solves).
  long mass_inverse_applies() const;

  /// Right-hand side of the transformed system (after lifting).
  Vec rhs() const;
  /// Diagonal of M with essential entries replaced by 1.
  const DiagonalMatrix& m_diag() const { return m_diag_; }
  /// Diagonal approximation of Z used in the Schur approximation.
  Vec schur_shift() const;
  SparseMatrixCsr schur_approx() const;

  /// (u, q) from the transformed solution: u += lifting, q = W^{-1} q~.
  void recover(std::span<const double> x, Vec& u, Vec& q) const;
  /// Residual of the untransformed system relative to its right-hand side.
  double untransformed_residual(const Vec& u, const Vec& q) const;

 private:
  SaddleProblem problem_;
  std::unique_ptr<RtSpace> rt_;
  std::unique_ptr<L2Space> l2_;
  SparseMatrixCsr D_, Dt_free_;
  std::unique_ptr<RtMassOperator> M_;
  std::unique_ptr<L2MassOperator> W_, W_gamma_, W_inv_gamma_;
  std::unique_ptr<MassInverse> Winv_, Winv_gamma_;
  std::vector<char> essential_;
  std::vector<int> free_;
  Vec u_bc_;
  DiagonalMatrix m_diag_;
  mutable Vec tu_, tu2_, tq_, tq2_;
};

struct SaddleSolution {
  Vec u, q;  // Darcy: q = -p
  SolverReport report;
  /// Extra MINRES/GMRES iterations spent after convergence to bring the
  /// untransformed residual below 10 tol.
  int polish_iterations = 0;
  AmgStats amg;
  long mass_inverse_applies = 0;  // inside Krylov iterations only
  double untransformed_residual = 0.0;
  double setup_seconds = 0.0;
};

/// MINRES + block-diagonal (or GMRES + block-triangular) on the transformed
/// system with diag(M), S~ and one AMG V-cycle.
SaddleSolution solve(const SaddleSystem& system);
SaddleSolution solve(const SaddleProblem& problem);

struct PrimalSolution {
  Vec u;
  SolverReport report;
};

/// Jacobi-preconditioned CG on the primal H(div) system
/// (M_beta + D^T W_alpha D) u = f. Darcy problems with element-wise constant
/// gamma > 0 map to beta = 1/eps, alpha = 1/gamma.
PrimalSolution solve_primal(const SaddleProblem& problem, double tol = 1e-14, int max_iterations = 0);

/// ||a - b||_M / ||b||_M (absolute when b = 0).
double m_norm_difference(const RtMassOperator& M, std::span<const double> a, std::span<const double> b);

/// Dense blocks of the transformed system restricted to the free u DOFs.
struct DenseSaddleBlocks {
  Matrix M, D, C;
};
DenseSaddleBlocks dense_transformed_blocks(const SaddleSystem& system);
Matrix assemble_saddle(const DenseSaddleBlocks& b);
/// blockdiag(tau M, C + D M^{-1} D^T).
Matrix exact_block_preconditioner(const DenseSaddleBlocks& b, double tau);

struct SchurStudyRow {
  int p = 0;
  double kappa_transformed = 0.0;    // kappa(S~^{-1} S)
  double kappa_untransformed = 0.0;  // kappa(S~'^{-1} S')
};

/// Dense Schur-complement conditioning on a single element with natural
/// boundary conditions, alpha = beta = 1.
SchurStudyRow untransformed_schur_study(std::shared_ptr<const Mesh> mesh, int p);

/// Two materials split at x = 0.5: alpha = 1.88e-3, beta = 2000 for x < 0.5,
/// and alpha = 1.641, beta = 0.2 otherwise (element centers).
std::pair<Coefficient, Coefficient> two_material_coefficients(const Mesh& mesh);

/// Per-element values 10^u with u uniform in [-log10(contrast)/2, +...].
Coefficient log_uniform_field(const Mesh& mesh, double contrast, unsigned long seed);

/// Smooth grad-div solution with alpha = beta = 1 and its forcing.
struct ManufacturedSolution {
  VectorField u;
  VectorField f;
  ScalarField div_u;
};
ManufacturedSolution graddiv_manufactured(int dim);

struct MmsRow {
  int n = 0;
  double h = 0.0;
  double error = 0.0;
  double rate = 0.0;  // vs previous row (0 for the first)
  int iterations = 0;
};

/// L2 errors of the saddle solve on n x n (x n) meshes for n in `ns`.
std::vector<MmsRow> mms_study(int dim, int p, const std::vector<int>& ns, const SolveOptions& opts = {});

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/csr.hpp"
#include "hdiv/spaces.hpp"
#include "hdiv/sumfact.hpp"
#include "hdiv/tensor1d.hpp"

#include <functional>

namespace hdiv {

/// Scalar coefficient: constant, one value per element, or a function of
/// physical position.
class Coefficient {
 public:
  enum class Kind { Constant, PerElement, Function };
  using Fn = std::function<double(const Point&)>;

  Coefficient(double c = 1.0) : kind_(Kind::Constant), constant_(c) {}  // NOLINT(implicit)
  static Coefficient per_element(Vec values);
  static Coefficient function(Fn f);

  Kind kind() const { return kind_; }
  bool elementwise_constant() const { return kind_ != Kind::Function; }
  double operator()(int element, const Point& x) const;
  double element_value(int element) const;  // not for Function
  Coefficient reciprocal() const;
  Coefficient scaled(double s) const;
  bool is_zero() const;

  /// Throws coefficient error unless every value sampled on the mesh
  /// quadrature is > 0 (or >= 0 when `allow_zero`).
  void check_positive(const std::string& name, int element, double value, bool allow_zero = false) const;

 private:
  Kind kind_;
  double constant_ = 1.0;
  Vec values_;
  Fn fn_;
};

/// Reference-element quadrature and geometry shared by the operators:
/// (p+2)-point Gauss-Legendre per axis by default.
struct ElementQuadrature {
  int dim = 2;
  int n1d = 0;
  NodeSet1D rule;
  int num_points() const { return dim == 3 ? n1d * n1d * n1d : n1d * n1d; }
  Point point(int q) const;
  double weight(int q) const;
};

ElementQuadrature make_quadrature(int dim, int n1d);

/// Lexicographic element coloring (2^d colors by coordinate parity): no two
/// elements of one color share a face, so RT scatters within a color are
/// race-free.
std::vector<std::vector<int>> element_colors(const Mesh& mesh);

/// Raviart-Thomas mass (beta u, v) with partial assembly: per quadrature
/// point geometric factors w beta J^T J / det J are stored, and the apply is
/// sum-factorized.
class RtMassOperator : public SpdOperator {
 public:
  RtMassOperator(const RtSpace& space, Coefficient beta, Exec exec = Exec::Parallel, int nq1d = 0);

  int size() const override { return space_.num_dofs(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply(std::span<const double> x, std::span<double> y, Exec exec) const;

  /// Element-local action on local (orientation-applied) coefficients.
  void local_apply(int e, const double* x, double* y, Vec& work) const;
  DiagonalMatrix diagonal() const;
  /// Direct (non sum-factorized) element matrix, oracle path.
  Matrix local_matrix(int e) const;
  /// Globally assembled dense matrix; desk scale only.
  Matrix assemble_dense() const;

  const RtSpace& space() const { return space_; }
  const Coefficient& coefficient() const { return beta_; }

 private:
  RtSpace space_;
  Coefficient beta_;
  Exec exec_;
  ElementQuadrature quad_;
  int ncomp_ = 0;          // symmetric tensor entries per point
  Vec geo_;                // [element][point][ncomp]
  Dense1D bl_, bh_;        // GLL-Lagrange (p+1) and histopolation (p) at quad points
  Dense1D bl2_, bh2_;      // entrywise squares for the diagonal
  std::vector<std::vector<int>> colors_;

  const double* geo(int e) const { return geo_.data() + static_cast<std::size_t>(e) * quad_.num_points() * ncomp_; }
};

/// L2 mass (alpha q, r) in a chosen 1D tensor basis (histopolation by
/// default). Element-block diagonal.
class L2MassOperator : public SpdOperator {
 public:
  L2MassOperator(const L2Space& space, Coefficient alpha, Basis1D basis = Basis1D::Histopolation,
                 Exec exec = Exec::Parallel, int nq1d = 0, bool allow_zero = false);

  int size() const override { return space_.num_dofs(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply(std::span<const double> x, std::span<double> y, Exec exec) const;

  void local_apply(int e, const double* x, double* y, Vec& work) const;
  /// Diagonal of element block e, sum-factorized.
  void local_diagonal(int e, double* d, Vec& work) const;
  DiagonalMatrix diagonal() const;
  Matrix local_matrix(int e) const;
  Matrix assemble_dense() const;

  const L2Space& space() const { return space_; }
  Basis1D basis() const { return basis_; }
  int block_size() const { return space_.dofs_per_element(); }
  int num_blocks() const { return space_.mesh().num_elements(); }
  const Coefficient& coefficient() const { return alpha_; }

  /// Number of completed applies (global or local), for cost accounting.
  long applies() const { return applies_; }

 private:
  L2Space space_;
  Coefficient alpha_;
  Basis1D basis_;
  Exec exec_;
  ElementQuadrature quad_;
  Vec geo_;  // [element][point] w alpha / det J
  Dense1D b_, b2_;
  mutable long applies_ = 0;
};

/// Weighted divergence B_alpha = W_alpha D realized by composition.
class BAlphaOperator {
 public:
  BAlphaOperator(const L2MassOperator& w, const SparseMatrixCsr& D) : w_(w), D_(D) {}
  void apply(std::span<const double> x, std::span<double> y) const;
  void apply_transpose(std::span<const double> x, std::span<double> y) const;

 private:
  const L2MassOperator& w_;
  const SparseMatrixCsr& D_;
};

/// Dense B_alpha assembled from basis divergences and Piola factors; oracle
/// for the identity B_alpha = W_alpha D.
Matrix dense_b_alpha_direct(const RtSpace& rt, const L2Space& l2, const Coefficient& alpha);

/// Primal grad-div operator A = M_beta + D^T W_alpha D.
class GradDivPrimalOperator : public SpdOperator {
 public:
  GradDivPrimalOperator(const RtMassOperator& m, const L2MassOperator& w, const SparseMatrixCsr& D);
  int size() const override { return m_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  DiagonalMatrix diagonal() const;

 private:
  const RtMassOperator& m_;
  const L2MassOperator& w_;
  const SparseMatrixCsr& D_;
  SparseMatrixCsr Dt_;
  mutable Vec t1_, t2_, t3_;
};

/// Dense (alpha div u, div v) + (beta u, v) assembled directly from basis
/// derivatives; independent of D.
Matrix dense_grad_div_direct(const RtSpace& rt, const Coefficient& alpha, const Coefficient& beta);

/// Reference RT basis values at a reference point: rows = local DOFs,
/// columns = vector components.
Matrix rt_reference_values(int p, int dim, const Point& xhat);
/// Reference divergence of the local RT basis at a point.
Vec rt_reference_divergence(int p, int dim, const Point& xhat);

using VectorField = std::function<Point(const Point&)>;
using ScalarField = std::function<double(const Point&)>;

/// (w f, v_i) for all RT basis functions.
Vec assemble_rt_load(const RtSpace& space, const VectorField& f, const Coefficient& w = 1.0);
/// (g, r_i) for all L2 basis functions.
Vec assemble_l2_load(const L2Space& space, const ScalarField& g);

/// Canonical RT interpolant: every DOF is the flux of u through its
/// subelement face (in the DOF's global orientation).
Vec rt_interpolate(const RtSpace& space, const VectorField& u);
/// Subvolume integrals of g, i.e. the L2 interpolant in the histopolation basis.
Vec l2_interpolate(const L2Space& space, const ScalarField& g);

/// ||u - u_h||_{L2} with a (p+3)-point rule.
double rt_l2_error(const RtSpace& space, std::span<const double> uh, const VectorField& u);
double l2_l2_error(const L2Space& space, std::span<const double> qh, const ScalarField& q);

/// Physical measure of each subelement volume, in L2 DOF order (the
/// coefficient vector of the constant function 1).
Vec l2_constant_coefficients(const L2Space& space);

}  // namespace hdiv

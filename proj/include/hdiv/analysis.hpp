// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/linop.hpp"
#include "hdiv/tensor1d.hpp"

#include <string>

namespace hdiv {

/// Applies `op` to every canonical basis vector (n <= 5000).
Matrix densify(const LinearOperator& op);

struct SpectrumReport {
  std::string label;
  std::string method;  // "dense" or "lanczos"
  Vec eigenvalues;     // ascending; extremal Ritz values for Lanczos
  double abs_min = 0.0;
  double abs_max = 0.0;
  double kappa = 0.0;
};

/// Eigenvalues of a x = lambda b x (a symmetric, b SPD) and
/// kappa = |lambda|max / |lambda|min.
SpectrumReport generalized_spectrum(const Matrix& a, const Matrix& b);
double generalized_condition(const Matrix& a, const Matrix& b);

/// Eigen-intervals [neg_lo, neg_hi] U [pos_lo, pos_hi] predicted for the
/// block-diagonal preconditioner with exact blocks; tau must be 1 or 2.
struct SpectralIntervals {
  double neg_lo, neg_hi, pos_lo, pos_hi;
};
SpectralIntervals exact_block_intervals(double tau);

struct IntervalReport {
  bool ok = true;
  Vec offending;
};
IntervalReport interval_check(const Vec& eigenvalues, const SpectralIntervals& iv, double tol = 1e-8);

/// kappa of P^{-1} A by preconditioned Lanczos with full
/// reorthogonalization (A symmetric, P SPD, A assumed definite).
SpectrumReport lanczos_condition(const LinearOperator& A, const SpdOperator& Pinv, int max_steps = 200,
                                 unsigned seed = 7);

struct MassConditioningRow {
  int dim;
  int p;
  std::string form;  // "l2" or "rt"
  Basis1D basis;
  double kappa;
};

/// kappa(diag^{-1} W) of the L2 mass on `mesh` (a single element) in each
/// requested basis, and kappa(diag^{-1} M) of the RT mass, for p in
/// [p_min, p_max].
std::vector<MassConditioningRow> mass_basis_conditioning(int dim, bool skewed, int p_min, int p_max,
                                                         const std::vector<Basis1D>& bases);

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/operators.hpp"

#include <memory>

namespace hdiv {

enum class MassInverseKind { Factorize, ExplicitInverse, LocalCg };

const char* to_string(MassInverseKind k);
MassInverseKind mass_inverse_kind_from_string(const std::string& s);

/// Explicit inverses up to p = 2, local CG above.
MassInverseKind default_mass_inverse(int p);

struct MassInverseOptions {
  MassInverseKind kind = MassInverseKind::LocalCg;
  double tol = 1e-12;  // LocalCg relative residual
  int max_iterations = 200;
  bool gl_basis = true;  // solve in the Gauss-Legendre nodal basis
  Exec exec = Exec::Parallel;
  /// Dense strategies refuse to set up beyond this many bytes of blocks.
  std::size_t memory_limit = std::size_t(2) << 30;
};

/// Element-by-element action of W^{-1} for a block-diagonal L2 mass.
class MassInverse : public SpdOperator {
 public:
  MassInverse(const L2MassOperator& W, MassInverseOptions opts);
  ~MassInverse() override;

  int size() const override { return W_.size(); }
  void apply(std::span<const double> x, std::span<double> y) const override;

  MassInverseKind kind() const { return opts_.kind; }
  const MassInverseOptions& options() const { return opts_; }

  /// LocalCg: iterations used by each element in the most recent apply.
  const std::vector<int>& iteration_census() const { return census_; }
  /// Completed applies since construction.
  long applies() const { return applies_; }
  /// Bytes of per-element data held by the strategy.
  std::size_t memory_bytes() const;
  double setup_seconds() const { return setup_seconds_; }

 private:
  void solve_block(int e, const double* b, double* x, struct LocalWork& w) const;

  const L2MassOperator& W_;
  MassInverseOptions opts_;
  int nb_ = 0;
  std::vector<Matrix> blocks_;               // factors or inverses
  std::unique_ptr<L2MassOperator> W_solve_;  // LocalCg operator in the solve basis
  Vec diag_;                                 // LocalCg Jacobi diagonal
  Dense1D to_solve_;                         // solve-basis -> discretization-basis change (1D)
  mutable std::vector<int> census_;
  mutable long applies_ = 0;
  double setup_seconds_ = 0.0;
};

}  // namespace hdiv

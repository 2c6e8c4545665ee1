// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/csr.hpp"

#include <iosfwd>

namespace hdiv {

struct AmgOptions {
  double theta = 0.25;   // classical strength threshold
  int coarse_limit = 64;  // direct solve at or below this size
  int max_levels = 30;
  int pre_sweeps = 1;
  int post_sweeps = 1;
  Exec exec = Exec::Parallel;
};

struct AmgLevel {
  SparseMatrixCsr A;
  SparseMatrixCsr P;  // interpolation to this level from the next coarser one
  SparseMatrixCsr R;  // P^T
  Vec l1_inv;         // 1 / (row l1 norm)
};

struct AmgStats {
  int levels = 0;
  std::vector<int> sizes;
  std::vector<int> nnz;
  double operator_complexity = 0.0;
  double grid_complexity = 0.0;
  void write(std::ostream& os) const;
};

/// Classical AMG for symmetric M-matrices: symmetric strength graph,
/// greedy maximal independent set in index order, direct interpolation,
/// Galerkin coarse operators, l1-Jacobi smoothing. `apply` is one V-cycle
/// with zero initial guess.
class AmgHierarchy : public SpdOperator {
 public:
  AmgHierarchy(const SparseMatrixCsr& A, AmgOptions opts = {});

  int size() const override { return levels_.front().A.rows; }
  void apply(std::span<const double> b, std::span<double> x) const override;

  int num_levels() const { return static_cast<int>(levels_.size()); }
  const AmgLevel& level(int l) const { return levels_[l]; }
  AmgStats stats() const;
  const AmgOptions& options() const { return opts_; }
  double setup_seconds() const { return setup_seconds_; }

 private:
  void cycle(int l, std::span<const double> b, std::span<double> x) const;
  void smooth(int l, std::span<const double> b, std::span<double> x, int sweeps) const;

  AmgOptions opts_;
  std::vector<AmgLevel> levels_;
  Matrix coarse_pinv_;
  double setup_seconds_ = 0.0;
  mutable std::vector<Vec> r_, bc_, xc_;
};

/// Boolean C/F splitting (1 = coarse) of the symmetric strength graph.
std::vector<char> amg_coarsen(const SparseMatrixCsr& A, double theta);

struct VcycleCheck {
  double asymmetry = 0.0;  // max |V - V^T| / max |V|
  double min_eigenvalue = 0.0;
  bool symmetric = false;
  bool positive = false;
};

/// Densifies the V-cycle operator (desk scale) and tests symmetry to
/// 1e-10 and positivity of its spectrum.
VcycleCheck vcycle_spd_check(const AmgHierarchy& h);

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/csr.hpp"
#include "hdiv/spaces.hpp"

namespace hdiv {

/// Topological divergence: one row per L2 DOF with 2d entries in {+1,-1},
/// entry = sigma_loc * orientation for the faces of the subelement volume.
SparseMatrixCsr build_divergence_csr(const RtSpace& rt, const L2Space& l2, Exec exec = Exec::Parallel);

struct DivergenceColumnReport {
  int rows = 0;
  int cols = 0;
  int two_entry_columns = 0;
  int one_entry_columns = 0;
};

/// Verifies 2d entries of +-1 per row and, per column, either one entry or
/// two entries of opposite sign. With `rt`, additionally requires boundary
/// columns to have exactly one entry and interior columns two. Throws
/// structural-integrity error naming the first offending row or column.
DivergenceColumnReport divergence_column_check(const SparseMatrixCsr& D, int dim, const RtSpace* rt = nullptr);

/// Builds the Gauss-Lobatto refined mesh, its lowest-order divergence, and
/// compares with D under the lattice-site bijection of the DOFs.
bool refined_mesh_equivalence(const SparseMatrixCsr& D, const RtSpace& rt, const L2Space& l2);

/// Approximate Schur complement by the explicit stencil:
///   S_ii = shift_i + sum_{k in F(i)} 1/m_k,  S_ij = -1/m_k for a shared face k.
/// Faces flagged in `essential` (may be empty) are dropped from the sums.
SparseMatrixCsr build_schur_approx_shift(const RtSpace& rt, const L2Space& l2, const Vec& shift, const Vec& m_diag,
                                         const std::vector<char>& essential = {});

/// The grad-div form: shift = 1 / w_diag.
SparseMatrixCsr build_schur_approx(const RtSpace& rt, const L2Space& l2, const Vec& w_diag, const Vec& m_diag,
                                   const std::vector<char>& essential = {});

/// Diagonal > 0, off-diagonals <= 0, and row sums >= max(shift_i, 0) up to
/// rounding. `shift` may be empty (then row sums >= 0).
bool m_matrix_check(const SparseMatrixCsr& S, const Vec& shift = {});

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/linop.hpp"

namespace hdiv {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Rows are kept sorted by column index.
struct SparseMatrixCsr {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  Vec val;

  SparseMatrixCsr() = default;
  SparseMatrixCsr(int r, int c) : rows(r), cols(c), row_ptr(r + 1, 0) {}

  int nnz() const { return row_ptr.back(); }
  int row_nnz(int i) const { return row_ptr[i + 1] - row_ptr[i]; }

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y, Exec exec = Exec::Parallel) const;
  /// y = A^T x (serial scatter; use a stored transpose on hot paths).
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;

  /// Entry (i,j) or 0; binary search within the row.
  double at(int i, int j) const;

  SparseMatrixCsr transpose() const;
  Matrix to_dense() const;

  bool rows_sorted() const;
  /// Throws structural-integrity error on malformed offsets or indices.
  void validate() const;

  /// Sums duplicates and sorts rows.
  static SparseMatrixCsr from_triplets(int rows, int cols, std::vector<Triplet> t);
  static SparseMatrixCsr from_dense(const Matrix& a, double drop_tol = 0.0);
  static SparseMatrixCsr identity(int n);
};

/// C = A B (row-by-row accumulation with a dense marker).
SparseMatrixCsr matmul(const SparseMatrixCsr& a, const SparseMatrixCsr& b);

/// Returns D diag(d) D^T with duplicates merged and rows sorted.
SparseMatrixCsr triple_product(const SparseMatrixCsr& D, const Vec& d);

/// A + diag(shift).
SparseMatrixCsr add_diagonal(const SparseMatrixCsr& a, const Vec& shift);

/// Keeps only the listed rows and columns (in the given order).
SparseMatrixCsr submatrix(const SparseMatrixCsr& a, const std::vector<int>& rows, const std::vector<int>& cols);

/// max |A - A^T| over stored entries of either.
double asymmetry(const SparseMatrixCsr& a);

/// Wraps a CSR matrix as a LinearOperator.
class CsrOperator : public LinearOperator {
 public:
  explicit CsrOperator(const SparseMatrixCsr& a, Exec exec = Exec::Parallel) : a_(a), exec_(exec) {}
  int size() const override { return a_.rows; }
  void apply(std::span<const double> x, std::span<double> y) const override { a_.multiply(x, y, exec_); }

 private:
  const SparseMatrixCsr& a_;
  Exec exec_;
};

}  // namespace hdiv

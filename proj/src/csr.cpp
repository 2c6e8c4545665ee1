// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/csr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hdiv {

void SparseMatrixCsr::multiply(std::span<const double> x, std::span<double> y, Exec exec) const {
  if (static_cast<int>(x.size()) < cols || static_cast<int>(y.size()) < rows)
    throw Error(ErrorCode::Shape, "csr multiply: vector length mismatch");
  const int* rp = row_ptr.data();
  const int* ci = col.data();
  const double* v = val.data();
  const double* xp = x.data();
  double* yp = y.data();
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * xp[ci[k]];
      yp[i] = s;
    }
  } else {
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int k = rp[i]; k < rp[i + 1]; ++k) s += v[k] * xp[ci[k]];
      yp[i] = s;
    }
  }
}

void SparseMatrixCsr::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  if (static_cast<int>(x.size()) < rows || static_cast<int>(y.size()) < cols)
    throw Error(ErrorCode::Shape, "csr multiply_transpose: vector length mismatch");
  std::fill(y.begin(), y.begin() + cols, 0.0);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) y[col[k]] += val[k] * x[i];
}

double SparseMatrixCsr::at(int i, int j) const {
  auto b = col.begin() + row_ptr[i], e = col.begin() + row_ptr[i + 1];
  auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? val[it - col.begin()] : 0.0;
}

SparseMatrixCsr SparseMatrixCsr::transpose() const {
  SparseMatrixCsr t(cols, rows);
  for (int k = 0; k < nnz(); ++k) ++t.row_ptr[col[k] + 1];
  std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
  t.col.resize(nnz());
  t.val.resize(nnz());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Visiting rows in order keeps the transposed rows sorted.
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const int dst = next[col[k]]++;
      t.col[dst] = i;
      t.val[dst] = val[k];
    }
  return t;
}

Matrix SparseMatrixCsr::to_dense() const {
  Matrix a = Matrix::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) a(i, col[k]) += val[k];
  return a;
}

bool SparseMatrixCsr::rows_sorted() const {
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i] + 1; k < row_ptr[i + 1]; ++k)
      if (col[k - 1] >= col[k]) return false;
  return true;
}

void SparseMatrixCsr::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::StructuralIntegrity, "csr: " + m); };
  if (static_cast<int>(row_ptr.size()) != rows + 1) fail("row_ptr has wrong length");
  if (row_ptr[0] != 0) fail("row_ptr[0] != 0");
  for (int i = 0; i < rows; ++i)
    if (row_ptr[i + 1] < row_ptr[i]) fail("row_ptr decreases at row " + std::to_string(i));
  if (static_cast<int>(col.size()) != nnz() || static_cast<int>(val.size()) != nnz()) fail("nnz mismatch");
  for (int c : col)
    if (c < 0 || c >= cols) fail("column index out of range");
}

SparseMatrixCsr SparseMatrixCsr::from_triplets(int rows, int cols, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrixCsr m(rows, cols);
  for (std::size_t k = 0; k < t.size();) {
    const int r = t[k].row, c = t[k].col;
    if (r < 0 || r >= rows || c < 0 || c >= cols) throw Error(ErrorCode::Shape, "triplet out of range");
    double s = 0.0;
    while (k < t.size() && t[k].row == r && t[k].col == c) s += t[k++].value;
    m.col.push_back(c);
    m.val.push_back(s);
    ++m.row_ptr[r + 1];
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
  return m;
}

SparseMatrixCsr SparseMatrixCsr::from_dense(const Matrix& a, double drop_tol) {
  SparseMatrixCsr m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j)
      if (std::abs(a(i, j)) > drop_tol) {
        m.col.push_back(j);
        m.val.push_back(a(i, j));
      }
    m.row_ptr[i + 1] = static_cast<int>(m.col.size());
  }
  return m;
}

SparseMatrixCsr SparseMatrixCsr::identity(int n) {
  SparseMatrixCsr m(n, n);
  m.col.resize(n);
  m.val.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    m.col[i] = i;
    m.row_ptr[i + 1] = i + 1;
  }
  return m;
}

SparseMatrixCsr matmul(const SparseMatrixCsr& a, const SparseMatrixCsr& b) {
  if (a.cols != b.rows) throw Error(ErrorCode::Shape, "matmul: inner dimensions differ");
  SparseMatrixCsr c(a.rows, b.cols);
  std::vector<int> marker(b.cols, -1);
  std::vector<int> cols;
  Vec acc(b.cols, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    cols.clear();
    for (int ka = a.row_ptr[i]; ka < a.row_ptr[i + 1]; ++ka) {
      const int k = a.col[ka];
      const double av = a.val[ka];
      for (int kb = b.row_ptr[k]; kb < b.row_ptr[k + 1]; ++kb) {
        const int j = b.col[kb];
        if (marker[j] != i) {
          marker[j] = i;
          cols.push_back(j);
          acc[j] = 0.0;
        }
        acc[j] += av * b.val[kb];
      }
    }
    std::sort(cols.begin(), cols.end());
    for (int j : cols) {
      c.col.push_back(j);
      c.val.push_back(acc[j]);
    }
    c.row_ptr[i + 1] = static_cast<int>(c.col.size());
  }
  return c;
}

SparseMatrixCsr triple_product(const SparseMatrixCsr& D, const Vec& d) {
  if (static_cast<int>(d.size()) != D.cols) throw Error(ErrorCode::Shape, "triple_product: diagonal length");
  SparseMatrixCsr scaled_t = D.transpose();
  for (int k = 0; k < scaled_t.rows; ++k)
    for (int j = scaled_t.row_ptr[k]; j < scaled_t.row_ptr[k + 1]; ++j) scaled_t.val[j] *= d[k];
  return matmul(D, scaled_t);
}

SparseMatrixCsr add_diagonal(const SparseMatrixCsr& a, const Vec& shift) {
  if (a.rows != a.cols || static_cast<int>(shift.size()) != a.rows)
    throw Error(ErrorCode::Shape, "add_diagonal: shape");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + a.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) t.push_back({i, a.col[k], a.val[k]});
    t.push_back({i, i, shift[i]});
  }
  return SparseMatrixCsr::from_triplets(a.rows, a.cols, std::move(t));
}

SparseMatrixCsr submatrix(const SparseMatrixCsr& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> cmap(a.cols, -1);
  for (std::size_t j = 0; j < cols.size(); ++j) cmap[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = a.row_ptr[rows[i]]; k < a.row_ptr[rows[i] + 1]; ++k)
      if (cmap[a.col[k]] >= 0) t.push_back({static_cast<int>(i), cmap[a.col[k]], a.val[k]});
  return SparseMatrixCsr::from_triplets(static_cast<int>(rows.size()), static_cast<int>(cols.size()), std::move(t));
}

double asymmetry(const SparseMatrixCsr& a) {
  double m = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) m = std::max(m, std::abs(a.val[k] - a.at(a.col[k], i)));
  return m;
}

RestrictedOperator::RestrictedOperator(const LinearOperator& full, std::vector<int> keep)
    : full_(full), keep_(std::move(keep)), xf_(full.size(), 0.0), yf_(full.size(), 0.0) {}

void RestrictedOperator::apply(std::span<const double> x, std::span<double> y) const {
  std::fill(xf_.begin(), xf_.end(), 0.0);
  for (std::size_t i = 0; i < keep_.size(); ++i) xf_[keep_[i]] = x[i];
  full_.apply(xf_, yf_);
  for (std::size_t i = 0; i < keep_.size(); ++i) y[i] = yf_[keep_[i]];
}

}  // namespace hdiv

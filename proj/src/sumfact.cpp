// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/sumfact.hpp"

#include <algorithm>

namespace hdiv {

Dense1D::Dense1D(const Matrix& m) : rows(static_cast<int>(m.rows())), cols(static_cast<int>(m.cols())) {
  data.resize(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) data[static_cast<std::size_t>(r) * cols + c] = m(r, c);
}

Dense1D Dense1D::squared() const {
  Dense1D s = *this;
  for (double& v : s.data) v *= v;
  return s;
}

namespace {

// Contract one tensor axis: out[a, q, b] = sum_i M(q, i) in[a, i, b]
// (or with M transposed).
void contract_axis(const double* in, const std::array<int, 3>& shape, int axis, const Dense1D& M, bool transpose,
                   double* out) {
  int pre = 1, post = 1;
  for (int k = 0; k < axis; ++k) pre *= shape[k];
  for (int k = axis + 1; k < 3; ++k) post *= shape[k];
  const int n_in = transpose ? M.rows : M.cols;
  const int n_out = transpose ? M.cols : M.rows;
  for (int b = 0; b < post; ++b) {
    const double* src = in + static_cast<std::size_t>(b) * n_in * pre;
    double* dst = out + static_cast<std::size_t>(b) * n_out * pre;
    std::fill(dst, dst + static_cast<std::size_t>(n_out) * pre, 0.0);
    for (int i = 0; i < n_in; ++i) {
      const double* s = src + static_cast<std::size_t>(i) * pre;
      for (int q = 0; q < n_out; ++q) {
        const double m = transpose ? M(i, q) : M(q, i);
        if (m == 0.0) continue;
        double* t = dst + static_cast<std::size_t>(q) * pre;
        for (int a = 0; a < pre; ++a) t[a] += m * s[a];
      }
    }
  }
}

}  // namespace

void tensor_apply(int dim, const std::array<const Dense1D*, 3>& B, bool transpose, const double* in, double* out,
                  Vec& work) {
  std::array<int, 3> shape{1, 1, 1};
  std::size_t max_size = 1, in_size = 1;
  for (int a = 0; a < dim; ++a) {
    shape[a] = transpose ? B[a]->rows : B[a]->cols;
    in_size *= shape[a];
  }
  // Largest intermediate: axes already contracted take the output extent.
  std::size_t running = in_size;
  for (int a = 0; a < dim; ++a) {
    const int from = transpose ? B[a]->rows : B[a]->cols;
    const int to = transpose ? B[a]->cols : B[a]->rows;
    running = running / from * to;
    max_size = std::max(max_size, running);
  }
  max_size = std::max(max_size, in_size);
  work.resize(2 * max_size);
  double* bufs[2] = {work.data(), work.data() + max_size};

  const double* src = in;
  for (int a = 0; a < dim; ++a) {
    double* dst = (a == dim - 1) ? out : bufs[a % 2];
    contract_axis(src, shape, a, *B[a], transpose, dst);
    shape[a] = transpose ? B[a]->cols : B[a]->rows;
    src = dst;
  }
}

}  // namespace hdiv

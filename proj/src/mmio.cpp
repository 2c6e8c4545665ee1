// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/mmio.hpp"

#include <fstream>
#include <iomanip>

namespace hdiv {

void write_matrix_market(const std::string& path, const SparseMatrixCsr& a) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Config, "cannot open " + path);
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows << ' ' << a.cols << ' ' << a.nnz() << '\n';
  os << std::setprecision(17);
  for (int i = 0; i < a.rows; ++i)
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) os << i + 1 << ' ' << a.col[k] + 1 << ' ' << a.val[k] << '\n';
}

void write_matrix_market(const std::string& path, const Matrix& a, double drop_tol) {
  write_matrix_market(path, SparseMatrixCsr::from_dense(a, drop_tol));
}

}  // namespace hdiv

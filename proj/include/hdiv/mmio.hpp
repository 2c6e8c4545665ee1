// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/csr.hpp"

#include <string>

namespace hdiv {

/// Matrix Market "coordinate real general" export.
void write_matrix_market(const std::string& path, const SparseMatrixCsr& a);
void write_matrix_market(const std::string& path, const Matrix& a, double drop_tol = 0.0);

}  // namespace hdiv

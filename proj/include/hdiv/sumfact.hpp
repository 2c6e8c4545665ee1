// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/common.hpp"

#include <array>

namespace hdiv {

/// Row-major copy of a 1D basis evaluation matrix (rows = points).
struct Dense1D {
  int rows = 0;
  int cols = 0;
  Vec data;

  Dense1D() = default;
  explicit Dense1D(const Matrix& m);
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  /// Entrywise square, used for sum-factorized diagonals.
  Dense1D squared() const;
};

/// Sum-factorized application of B[0] (x) B[1] (x) B[2] to a lexicographic
/// (x fastest) tensor. With `transpose`, applies the transposed factors.
/// In 2D only the first two factors are used. `work` is resized as needed.
void tensor_apply(int dim, const std::array<const Dense1D*, 3>& B, bool transpose, const double* in, double* out,
                  Vec& work);

}  // namespace hdiv

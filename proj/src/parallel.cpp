// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/common.hpp"

#ifdef HDIV_USE_OPENMP
#include <omp.h>
#endif

namespace hdiv {

int max_threads() {
#ifdef HDIV_USE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef HDIV_USE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace hdiv

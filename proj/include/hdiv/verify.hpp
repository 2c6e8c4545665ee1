// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/common.hpp"

#include <string>
#include <vector>

namespace hdiv {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  double tau = 2.0;          // interval check uses the tau = 1 intervals only for tau == 1
  int p_max = 3;
  bool flip_d_sign = false;  // test hook: negate one entry of every D used
  Exec exec = Exec::Parallel;
};

/// Desk-scale invariant suite: eigenvalue intervals, divergence structure,
/// Schur stencil, M-matrix property, oracle identities, mass-inverse
/// agreement, V-cycle symmetry and solver cross-validation.
std::vector<CheckResult> run_verify(const VerifyOptions& opts);

}  // namespace hdiv

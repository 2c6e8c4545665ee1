// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace hdiv {

using Matrix = Eigen::MatrixXd;
using Vec = std::vector<double>;

enum class ErrorCode {
  InvalidOrder,
  DegenerateBasis,
  Shape,
  InvalidMesh,
  Coefficient,
  Config,
  StructuralIntegrity,
  Mapping,
  Numerical,
  IterationLimit,
  Definiteness,
  Symmetry,
  Scale,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class so callers
/// (and the CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Execution policy for the data-parallel kernels. `Serial` is the reference
/// path kept for testing; `Parallel` uses OpenMP when available.
enum class Exec { Serial, Parallel };

/// Number of OpenMP threads (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace hdiv

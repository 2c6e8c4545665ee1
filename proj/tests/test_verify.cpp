// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/verify.hpp"

#include <gtest/gtest.h>

namespace hdiv {
namespace {

bool all_pass(const std::vector<CheckResult>& r) {
  for (const auto& c : r)
    if (!c.passed) return false;
  return !r.empty();
}

TEST(Verify, DefaultPasses) {
  const auto r = run_verify({});
  for (const auto& c : r) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_EQ(r.size(), 8u);
}

TEST(Verify, FlippedDivergenceFails) {
  VerifyOptions o;
  o.flip_d_sign = true;
  EXPECT_FALSE(all_pass(run_verify(o)));
}

TEST(Verify, TauThreeFlagsIntervals) {
  VerifyOptions o;
  o.tau = 3.0;
  const auto r = run_verify(o);
  bool flagged = false;
  for (const auto& c : r)
    if (c.name == "eigenvalue_intervals") flagged = !c.passed && !c.detail.empty();
  EXPECT_TRUE(flagged);
}

}  // namespace
}  // namespace hdiv

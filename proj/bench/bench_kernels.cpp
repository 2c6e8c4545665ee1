// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

// Serial reference path vs OpenMP path for the hot kernels.

#include "hdiv/divergence.hpp"
#include "hdiv/massinv.hpp"
#include "hdiv/operators.hpp"

#include <benchmark/benchmark.h>

#include <memory>

namespace hdiv {
namespace {

std::shared_ptr<const Mesh> mesh3d(int n) {
  return std::make_shared<const Mesh>(skew_mesh(cartesian_mesh(3, {n, n, n}), [](const Point& x, int) {
    return Point{0.03 * x[1] * x[0] * (1 - x[0]), 0.02 * x[2] * x[1] * (1 - x[1]), 0.02 * x[0] * x[2] * (1 - x[2])};
  }));
}

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::Parallel : Exec::Serial; }

void RtMassApply(benchmark::State& state) {
  const RtSpace rt(mesh3d(6), static_cast<int>(state.range(0)));
  const RtMassOperator M(rt, 1.0);
  const Vec x(rt.num_dofs(), 1.0);
  Vec y(rt.num_dofs());
  for (auto _ : state) {
    M.apply(x, y, exec_of(state));
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * rt.num_dofs());
}

void L2MassApply(benchmark::State& state) {
  const L2Space l2(mesh3d(6), static_cast<int>(state.range(0)));
  const L2MassOperator W(l2, 1.0);
  const Vec x(l2.num_dofs(), 1.0);
  Vec y(l2.num_dofs());
  for (auto _ : state) {
    W.apply(x, y, exec_of(state));
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * l2.num_dofs());
}

void MassInverseLocalCg(benchmark::State& state) {
  const L2Space l2(mesh3d(6), static_cast<int>(state.range(0)));
  const L2MassOperator W(l2, 1.0);
  MassInverseOptions o;
  o.kind = MassInverseKind::LocalCg;
  o.exec = exec_of(state);
  const MassInverse inv(W, o);
  const Vec x(l2.num_dofs(), 1.0);
  Vec y(l2.num_dofs());
  for (auto _ : state) {
    inv.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * l2.num_dofs());
}

void DivergenceSpmv(benchmark::State& state) {
  auto mesh = mesh3d(8);
  const int p = static_cast<int>(state.range(0));
  const RtSpace rt(mesh, p);
  const L2Space l2(mesh, p);
  const SparseMatrixCsr D = build_divergence_csr(rt, l2);
  const Vec x(rt.num_dofs(), 1.0);
  Vec y(l2.num_dofs());
  for (auto _ : state) {
    D.multiply(x, y, exec_of(state));
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * D.nnz());
}

void DivergenceBuild(benchmark::State& state) {
  auto mesh = mesh3d(8);
  const int p = static_cast<int>(state.range(0));
  const RtSpace rt(mesh, p);
  const L2Space l2(mesh, p);
  for (auto _ : state) {
    SparseMatrixCsr D = build_divergence_csr(rt, l2, exec_of(state));
    benchmark::DoNotOptimize(D.val.data());
  }
}

// Second argument: 0 = serial reference, 1 = OpenMP.
#define HDIV_BENCH(fn) BENCHMARK(fn)->ArgsProduct({{2, 4, 6}, {0, 1}})->Unit(benchmark::kMillisecond)
HDIV_BENCH(RtMassApply);
HDIV_BENCH(L2MassApply);
HDIV_BENCH(MassInverseLocalCg);
HDIV_BENCH(DivergenceSpmv);
HDIV_BENCH(DivergenceBuild);

}  // namespace
}  // namespace hdiv

BENCHMARK_MAIN();

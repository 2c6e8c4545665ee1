// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/amg.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <set>

namespace hdiv {

namespace {

// Symmetric strength pattern: j ~ i when -a_ij >= theta max_k(-a_ik) in
// either row.
std::vector<std::vector<int>> strength_graph(const SparseMatrixCsr& A, double theta) {
  const int n = A.rows;
  std::vector<double> maxoff(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col[k] != i) maxoff[i] = std::max(maxoff[i], -A.val[k]);
  std::vector<std::vector<int>> g(n);
  for (int i = 0; i < n; ++i)
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const int j = A.col[k];
      if (j == i) continue;
      const double s = -A.val[k];
      if ((maxoff[i] > 0.0 && s >= theta * maxoff[i]) || (maxoff[j] > 0.0 && s >= theta * maxoff[j])) {
        g[i].push_back(j);
        g[j].push_back(i);
      }
    }
  for (auto& row : g) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return g;
}

}  // namespace

std::vector<char> amg_coarsen(const SparseMatrixCsr& A, double theta) {
  const auto g = strength_graph(A, theta);
  const int n = A.rows;
  std::vector<char> state(n, -1);  // -1 undecided, 0 fine, 1 coarse

  // First pass: maximal independent set, highest measure first (number of
  // undecided strong neighbors plus twice the fine ones), lowest index on ties.
  std::vector<int> measure(n);
  std::set<std::pair<int, int>> queue;  // (-measure, index)
  for (int i = 0; i < n; ++i) {
    if (g[i].empty()) {
      // No strong couplings: the smoother handles the point alone.
      state[i] = 0;
      continue;
    }
    measure[i] = static_cast<int>(g[i].size());
    queue.insert({-measure[i], i});
  }
  auto bump = [&](int j, int by) {
    if (state[j] != -1) return;
    queue.erase({-measure[j], j});
    measure[j] += by;
    queue.insert({-measure[j], j});
  };
  while (!queue.empty()) {
    const int i = queue.begin()->second;
    queue.erase(queue.begin());
    state[i] = 1;
    for (int j : g[i]) {
      if (state[j] != -1) continue;
      queue.erase({-measure[j], j});
      state[j] = 0;
      for (int k : g[j]) bump(k, 1);
    }
  }

  // Second pass: strongly connected fine points must share a coarse
  // neighbor, otherwise one of them becomes coarse.
  std::vector<int> mark(n, -1);
  for (int i = 0; i < n; ++i) {
    if (state[i] != 0) continue;
    for (int k : g[i])
      if (state[k] == 1) mark[k] = i;
    for (int j : g[i]) {
      if (state[j] != 0) continue;
      bool shared = false;
      for (int k : g[j])
        if (state[k] == 1 && mark[k] == i) {
          shared = true;
          break;
        }
      if (!shared) {
        state[j] = 1;
        mark[j] = i;
      }
    }
  }
  return state;
}

AmgHierarchy::AmgHierarchy(const SparseMatrixCsr& A, AmgOptions opts) : opts_(opts) {
  const auto t0 = std::chrono::steady_clock::now();
  if (A.rows != A.cols) throw Error(ErrorCode::Shape, "amg: matrix is not square");
  double amax = 0.0;
  for (double v : A.val) amax = std::max(amax, std::abs(v));
  if (asymmetry(A) > 1e-12 * std::max(amax, 1.0)) throw Error(ErrorCode::Symmetry, "amg: matrix is not symmetric");

  levels_.push_back({A, {}, {}, {}});
  while (levels_.back().A.rows > opts_.coarse_limit && static_cast<int>(levels_.size()) < opts_.max_levels) {
    const SparseMatrixCsr& Af = levels_.back().A;
    const int n = Af.rows;
    const auto g = strength_graph(Af, opts_.theta);
    const auto cf = amg_coarsen(Af, opts_.theta);
    std::vector<int> cidx(n, -1);
    int nc = 0;
    for (int i = 0; i < n; ++i)
      if (cf[i] == 1) cidx[i] = nc++;
    if (nc == 0 || nc >= n) break;

    // Direct interpolation from strong coarse neighbors, scaled so the sum
    // over all off-diagonal couplings is represented.
    std::vector<Triplet> pt;
    for (int i = 0; i < n; ++i) {
      if (cf[i] == 1) {
        pt.push_back({i, cidx[i], 1.0});
        continue;
      }
      double diag = 0.0, sum_all = 0.0, sum_c = 0.0;
      for (int k = Af.row_ptr[i]; k < Af.row_ptr[i + 1]; ++k) {
        const int j = Af.col[k];
        if (j == i) {
          diag = Af.val[k];
        } else {
          sum_all += Af.val[k];
          if (cf[j] == 1 && std::binary_search(g[i].begin(), g[i].end(), j)) sum_c += Af.val[k];
        }
      }
      if (sum_c == 0.0 || diag == 0.0) continue;
      const double scale = sum_all / sum_c;
      for (int k = Af.row_ptr[i]; k < Af.row_ptr[i + 1]; ++k) {
        const int j = Af.col[k];
        if (j != i && cf[j] == 1 && std::binary_search(g[i].begin(), g[i].end(), j))
          pt.push_back({i, cidx[j], -scale * Af.val[k] / diag});
      }
    }
    AmgLevel& fine = levels_.back();
    fine.P = SparseMatrixCsr::from_triplets(n, nc, std::move(pt));
    fine.R = fine.P.transpose();
    SparseMatrixCsr Ac = matmul(fine.R, matmul(fine.A, fine.P));
    levels_.push_back({std::move(Ac), {}, {}, {}});
  }

  for (AmgLevel& L : levels_) {
    L.l1_inv.resize(L.A.rows);
    for (int i = 0; i < L.A.rows; ++i) {
      double s = 0.0;
      for (int k = L.A.row_ptr[i]; k < L.A.row_ptr[i + 1]; ++k) s += std::abs(L.A.val[k]);
      L.l1_inv[i] = s > 0.0 ? 1.0 / s : 0.0;
    }
  }

  // Coarsest level: symmetric pseudo-inverse, which also covers the
  // singular pure-Neumann Schur complement.
  const Matrix Ac = levels_.back().A.to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Ac + Ac.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues();
  const double lmax = lam.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (int i = 0; i < lam.size(); ++i)
    if (std::abs(lam[i]) > 1e-13 * lmax) inv[i] = 1.0 / lam[i];
  coarse_pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();

  r_.resize(levels_.size());
  bc_.resize(levels_.size());
  xc_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    r_[l].resize(levels_[l].A.rows);
    bc_[l].resize(levels_[l].A.rows);
    xc_[l].resize(levels_[l].A.rows);
  }
  setup_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void AmgHierarchy::smooth(int l, std::span<const double> b, std::span<double> x, int sweeps) const {
  const AmgLevel& L = levels_[l];
  Vec& r = r_[l];
  for (int s = 0; s < sweeps; ++s) {
    L.A.multiply(x, r, opts_.exec);
    const int n = L.A.rows;
    for (int i = 0; i < n; ++i) x[i] += L.l1_inv[i] * (b[i] - r[i]);
  }
}

void AmgHierarchy::cycle(int l, std::span<const double> b, std::span<double> x) const {
  const int n = levels_[l].A.rows;
  if (l + 1 == num_levels()) {
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
    Eigen::Map<Eigen::VectorXd>(x.data(), n).noalias() = coarse_pinv_ * bv;
    return;
  }
  const AmgLevel& L = levels_[l];
  std::fill(x.begin(), x.begin() + n, 0.0);
  smooth(l, b, x, opts_.pre_sweeps);
  Vec& r = r_[l];
  L.A.multiply(x, r, opts_.exec);
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  L.R.multiply(r, bc_[l + 1], opts_.exec);
  cycle(l + 1, bc_[l + 1], xc_[l + 1]);
  L.P.multiply(xc_[l + 1], r, opts_.exec);
  for (int i = 0; i < n; ++i) x[i] += r[i];
  smooth(l, b, x, opts_.post_sweeps);
}

void AmgHierarchy::apply(std::span<const double> b, std::span<double> x) const { cycle(0, b, x); }

AmgStats AmgHierarchy::stats() const {
  AmgStats s;
  s.levels = num_levels();
  double nnz = 0.0, rows = 0.0;
  for (const AmgLevel& L : levels_) {
    s.sizes.push_back(L.A.rows);
    s.nnz.push_back(L.A.nnz());
    nnz += L.A.nnz();
    rows += L.A.rows;
  }
  s.operator_complexity = nnz / std::max(1, levels_.front().A.nnz());
  s.grid_complexity = rows / std::max(1, levels_.front().A.rows);
  return s;
}

void AmgStats::write(std::ostream& os) const {
  os << "# amg levels=" << levels << " operator_complexity=" << operator_complexity
     << " grid_complexity=" << grid_complexity << '\n';
  for (int l = 0; l < levels; ++l) os << "# amg level " << l << " rows=" << sizes[l] << " nnz=" << nnz[l] << '\n';
}

VcycleCheck vcycle_spd_check(const AmgHierarchy& h) {
  const int n = h.size();
  if (n > 5000) throw Error(ErrorCode::Scale, "vcycle_spd_check: operator too large to densify");
  Matrix V(n, n);
  Vec e(n, 0.0), y(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    h.apply(e, y);
    e[j] = 0.0;
    for (int i = 0; i < n; ++i) V(i, j) = y[i];
  }
  VcycleCheck c;
  const double vmax = V.cwiseAbs().maxCoeff();
  c.asymmetry = (V - V.transpose()).cwiseAbs().maxCoeff() / std::max(vmax, 1e-300);
  c.symmetric = c.asymmetry <= 1e-10;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (V + V.transpose()), Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  c.positive = c.min_eigenvalue > 0.0;
  return c;
}

}  // namespace hdiv

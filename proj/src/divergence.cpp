// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hdiv {

SparseMatrixCsr build_divergence_csr(const RtSpace& rt, const L2Space& l2, Exec exec) {
  if (&rt.mesh() != &l2.mesh() || rt.degree() != l2.degree())
    throw Error(ErrorCode::Shape, "divergence: RT and L2 spaces built on different meshes or degrees");
  const SubelementTopology& topo = rt.topology();
  const int nf = topo.faces_per_volume();
  const int nrows = l2.num_dofs(), nb = l2.dofs_per_element();
  SparseMatrixCsr D(nrows, rt.num_dofs());
  for (int i = 0; i <= nrows; ++i) D.row_ptr[i] = i * nf;
  D.col.resize(static_cast<std::size_t>(nrows) * nf);
  D.val.resize(D.col.size());

  auto row = [&](int i) {
    const int e = i / nb, v = i % nb;
    std::array<std::pair<int, double>, 6> entries;
    for (int k = 0; k < nf; ++k) {
      const int j = topo.volume_to_face[v * nf + k];
      entries[k] = {rt.local_to_global(e, j), double(topo.volume_face_sign[v * nf + k] * rt.orientation(e, j))};
    }
    std::sort(entries.begin(), entries.begin() + nf);
    for (int k = 0; k < nf; ++k) {
      D.col[static_cast<std::size_t>(i) * nf + k] = entries[k].first;
      D.val[static_cast<std::size_t>(i) * nf + k] = entries[k].second;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nrows; ++i) row(i);
  } else {
    for (int i = 0; i < nrows; ++i) row(i);
  }
  return D;
}

DivergenceColumnReport divergence_column_check(const SparseMatrixCsr& D, int dim, const RtSpace* rt) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::StructuralIntegrity, m); };
  D.validate();
  for (int i = 0; i < D.rows; ++i) {
    if (D.row_nnz(i) != 2 * dim) fail("row " + std::to_string(i) + " has " + std::to_string(D.row_nnz(i)) + " entries");
    for (int k = D.row_ptr[i]; k < D.row_ptr[i + 1]; ++k)
      if (D.val[k] != 1.0 && D.val[k] != -1.0) fail("row " + std::to_string(i) + " has a value other than +-1");
  }
  const SparseMatrixCsr Dt = D.transpose();
  DivergenceColumnReport r{D.rows, D.cols, 0, 0};
  for (int j = 0; j < Dt.rows; ++j) {
    const int n = Dt.row_nnz(j);
    const std::string name = "column " + std::to_string(j);
    if (n == 1) {
      ++r.one_entry_columns;
      if (rt && rt->boundary_attribute(j) == 0) fail(name + " is interior but has one entry");
    } else if (n == 2) {
      ++r.two_entry_columns;
      if (Dt.val[Dt.row_ptr[j]] + Dt.val[Dt.row_ptr[j] + 1] != 0.0) fail(name + " entries do not have opposite signs");
      if (rt && rt->boundary_attribute(j) != 0) fail(name + " is on the boundary but has two entries");
    } else {
      fail(name + " has " + std::to_string(n) + " entries");
    }
  }
  return r;
}

namespace {

struct SiteLess {
  bool operator()(const LatticeSite& a, const LatticeSite& b) const {
    return std::tie(a.axis, a.index) < std::tie(b.axis, b.index);
  }
};

}  // namespace

bool refined_mesh_equivalence(const SparseMatrixCsr& D, const RtSpace& rt, const L2Space& l2) {
  const int p = rt.degree();
  auto fine = std::make_shared<const Mesh>(gll_refined_mesh(rt.mesh(), p));
  const RtSpace rt1(fine, 1);
  const L2Space l21(fine, 1);
  const SparseMatrixCsr D1 = build_divergence_csr(rt1, l21, Exec::Serial);
  if (D1.rows != D.rows || D1.cols != D.cols || D1.nnz() != D.nnz()) return false;

  std::map<LatticeSite, int, SiteLess> fine_rt;
  for (int g = 0; g < rt1.num_dofs(); ++g) fine_rt.emplace(rt1.site(g), g);
  std::vector<int> col_map(rt.num_dofs());
  for (int g = 0; g < rt.num_dofs(); ++g) {
    auto it = fine_rt.find(rt.site(g));
    if (it == fine_rt.end()) throw Error(ErrorCode::Mapping, "RT DOF " + std::to_string(g) + " has no refined image");
    col_map[g] = it->second;
  }
  for (int i = 0; i < D.rows; ++i) {
    const LatticeSite s = l2.site(i);
    const int fi = fine->element_index(s.index);
    if (fi < 0 || fi >= D1.rows) throw Error(ErrorCode::Mapping, "L2 DOF " + std::to_string(i) + " has no refined image");
    if (D.row_nnz(i) != D1.row_nnz(fi)) return false;
    for (int k = D.row_ptr[i]; k < D.row_ptr[i + 1]; ++k)
      if (D1.at(fi, col_map[D.col[k]]) != D.val[k]) return false;
  }
  return true;
}

SparseMatrixCsr build_schur_approx_shift(const RtSpace& rt, const L2Space& l2, const Vec& shift, const Vec& m_diag,
                                         const std::vector<char>& essential) {
  const int n = l2.num_dofs(), nb = l2.dofs_per_element();
  if (static_cast<int>(shift.size()) != n || static_cast<int>(m_diag.size()) != rt.num_dofs())
    throw Error(ErrorCode::Shape, "schur: diagonal lengths do not match the spaces");
  for (double s : shift)
    if (!(s >= 0.0)) throw Error(ErrorCode::Coefficient, "schur: negative diagonal shift");
  for (double m : m_diag)
    if (!(m > 0.0)) throw Error(ErrorCode::Coefficient, "schur: non-positive RT mass diagonal");
  const SubelementTopology& topo = rt.topology();
  const int nf = topo.faces_per_volume();

  // Volumes incident to each face (at most two).
  std::vector<std::array<int, 2>> face_vol(rt.num_dofs(), {-1, -1});
  for (int i = 0; i < n; ++i) {
    const int e = i / nb, v = i % nb;
    for (int k = 0; k < nf; ++k) {
      auto& fv = face_vol[rt.local_to_global(e, topo.volume_to_face[v * nf + k])];
      fv[fv[0] < 0 ? 0 : 1] = i;
    }
  }
  SparseMatrixCsr S(n, n);
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < n; ++i) {
    const int e = i / nb, v = i % nb;
    row.clear();
    double diag = shift[i];
    for (int k = 0; k < nf; ++k) {
      const int g = rt.local_to_global(e, topo.volume_to_face[v * nf + k]);
      if (!essential.empty() && essential[g]) continue;
      const double w = 1.0 / m_diag[g];
      diag += w;
      const auto& fv = face_vol[g];
      const int j = fv[0] == i ? fv[1] : fv[0];
      if (j >= 0) row.emplace_back(j, -w);
    }
    row.emplace_back(i, diag);
    std::sort(row.begin(), row.end());
    for (const auto& [j, a] : row) {
      S.col.push_back(j);
      S.val.push_back(a);
    }
    S.row_ptr[i + 1] = static_cast<int>(S.col.size());
  }
  return S;
}

SparseMatrixCsr build_schur_approx(const RtSpace& rt, const L2Space& l2, const Vec& w_diag, const Vec& m_diag,
                                   const std::vector<char>& essential) {
  Vec shift(w_diag.size());
  for (std::size_t i = 0; i < w_diag.size(); ++i) {
    if (!(w_diag[i] > 0.0)) throw Error(ErrorCode::Coefficient, "schur: non-positive L2 mass diagonal");
    shift[i] = 1.0 / w_diag[i];
  }
  return build_schur_approx_shift(rt, l2, shift, m_diag, essential);
}

bool m_matrix_check(const SparseMatrixCsr& S, const Vec& shift) {
  for (int i = 0; i < S.rows; ++i) {
    double diag = 0.0, sum = 0.0, scale = 0.0;
    for (int k = S.row_ptr[i]; k < S.row_ptr[i + 1]; ++k) {
      const double a = S.val[k];
      sum += a;
      scale += std::abs(a);
      if (S.col[k] == i) {
        diag = a;
      } else if (a > 0.0) {
        return false;
      }
    }
    if (!(diag > 0.0)) return false;
    const double floor = shift.empty() ? 0.0 : std::max(shift[i], 0.0);
    if (sum < floor - 1e-12 * scale) return false;
  }
  return true;
}

}  // namespace hdiv

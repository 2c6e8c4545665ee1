// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/spaces.hpp"

namespace hdiv {

RtSpace::RtSpace(std::shared_ptr<const Mesh> mesh, int p)
    : mesh_(std::move(mesh)), p_(p), topo_(subelement_topology(p, mesh_->dim())) {
  const Mesh& m = *mesh_;
  const int d = m.dim();
  const int ne = m.num_elements();
  const int nloc = topo_.num_faces;

  // Extents of the face lattice per normal axis; used to deduplicate faces
  // shared between neighboring elements.
  std::array<std::array<int, 3>, 3> ext{};
  std::array<int, 4> lat_offset{};
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < 3; ++b) ext[a][b] = b < d ? m.cells()[b] * p : 1;
    ext[a][a] += 1;
    lat_offset[a + 1] = lat_offset[a] + ext[a][0] * ext[a][1] * ext[a][2];
  }
  std::vector<int> lattice_to_global(lat_offset[d], -1);

  l2g_.resize(static_cast<std::size_t>(ne) * nloc);
  orient_.resize(l2g_.size());
  for (int e = 0; e < ne; ++e) {
    const auto c = m.element_coords(e);
    for (int a = 0; a < d; ++a) {
      std::array<int, 3> fe{p, p, d == 3 ? p : 1};
      fe[a] = p + 1;
      const int nblock = fe[0] * fe[1] * fe[2];
      for (int f = 0; f < nblock; ++f) {
        const std::array<int, 3> fl{f % fe[0], (f / fe[0]) % fe[1], f / (fe[0] * fe[1])};
        LatticeSite s{a, {0, 0, 0}};
        for (int b = 0; b < d; ++b) s.index[b] = c[b] * p + fl[b];
        const int lat = lat_offset[a] + s.index[0] + ext[a][0] * (s.index[1] + ext[a][1] * s.index[2]);
        int& g = lattice_to_global[lat];
        if (g < 0) {
          // First (lowest-index) element touching the face owns it.
          g = ndofs_++;
          sites_.push_back(s);
          int attr = 0;
          if (s.index[a] == 0) attr = 2 * a + 1;
          if (s.index[a] == m.cells()[a] * p) attr = 2 * a + 2;
          bdr_attr_.push_back(attr);
        }
        const std::size_t slot = static_cast<std::size_t>(e) * nloc + topo_.face_offset[a] + f;
        l2g_[slot] = g;
        // Local normals point along +axis in every element and the
        // structured mesh orients all elements alike, so the global normal
        // (lower element -> higher element) agrees with both local ones.
        orient_[slot] = +1;
      }
    }
  }
}

L2Space::L2Space(std::shared_ptr<const Mesh> mesh, int p) : mesh_(std::move(mesh)), p_(p) {
  if (p < 1) throw Error(ErrorCode::InvalidOrder, "p must be >= 1");
  block_ = p * p * (mesh_->dim() == 3 ? p : 1);
}

LatticeSite L2Space::site(int g) const {
  const int e = element_of(g), i = local_index(g);
  const auto c = mesh_->element_coords(e);
  const std::array<int, 3> v{i % p_, (i / p_) % p_, mesh_->dim() == 3 ? i / (p_ * p_) : 0};
  LatticeSite s{-1, {0, 0, 0}};
  for (int b = 0; b < mesh_->dim(); ++b) s.index[b] = c[b] * p_ + v[b];
  return s;
}

RtSpace build_rt_space(std::shared_ptr<const Mesh> mesh, int p) { return RtSpace(std::move(mesh), p); }
L2Space build_l2_space(std::shared_ptr<const Mesh> mesh, int p) { return L2Space(std::move(mesh), p); }

std::set<int> all_boundary_attributes(int dim) {
  std::set<int> s;
  for (int a = 1; a <= 2 * dim; ++a) s.insert(a);
  return s;
}

std::vector<int> boundary_dofs(const RtSpace& space, const std::set<int>& attributes) {
  for (int a : attributes)
    if (a < 1 || a > 2 * space.dim())
      throw Error(ErrorCode::Config, "unknown boundary attribute " + std::to_string(a));
  std::vector<int> out;
  for (int g = 0; g < space.num_dofs(); ++g)
    if (const int a = space.boundary_attribute(g); a != 0 && attributes.count(a)) out.push_back(g);
  return out;
}

}  // namespace hdiv

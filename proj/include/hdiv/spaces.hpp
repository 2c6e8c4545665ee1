// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/mesh.hpp"

#include <memory>
#include <set>

namespace hdiv {

/// Position of a degree of freedom in the Gauss-Lobatto refined lattice of
/// the whole mesh: the subelement face normal to `axis` at integer
/// coordinates `index` (RT), or the subelement volume at `index` (L2).
struct LatticeSite {
  int axis = -1;
  std::array<int, 3> index{0, 0, 0};
  bool operator==(const LatticeSite&) const = default;
};

/// Degree-p Raviart-Thomas space in the interpolation-histopolation basis.
/// Each DOF is the normal flux through one subelement face. Local DOFs are
/// grouped by component (x, y[, z]) and ordered lexicographically, x fastest.
class RtSpace {
 public:
  RtSpace(std::shared_ptr<const Mesh> mesh, int p);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return p_; }
  int dim() const { return mesh_->dim(); }
  int num_dofs() const { return ndofs_; }
  int dofs_per_element() const { return topo_.num_faces; }
  const SubelementTopology& topology() const { return topo_; }

  /// Global DOF of local DOF `j` on element `e`.
  int local_to_global(int e, int j) const { return l2g_[static_cast<std::size_t>(e) * topo_.num_faces + j]; }
  /// Orientation of the global DOF relative to the local one (+1 or -1).
  int orientation(int e, int j) const { return orient_[static_cast<std::size_t>(e) * topo_.num_faces + j]; }
  std::span<const int> element_dofs(int e) const {
    return {l2g_.data() + static_cast<std::size_t>(e) * topo_.num_faces, static_cast<std::size_t>(topo_.num_faces)};
  }
  std::span<const int> element_orientation(int e) const {
    return {orient_.data() + static_cast<std::size_t>(e) * topo_.num_faces, static_cast<std::size_t>(topo_.num_faces)};
  }

  const LatticeSite& site(int g) const { return sites_[g]; }
  /// Boundary attribute (1..2d) of the DOF's face, or 0 for interior DOFs.
  int boundary_attribute(int g) const { return bdr_attr_[g]; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  int p_;
  SubelementTopology topo_;
  int ndofs_ = 0;
  std::vector<int> l2g_;
  std::vector<int> orient_;
  std::vector<LatticeSite> sites_;
  std::vector<int> bdr_attr_;
};

/// Degree-(p-1) discontinuous L2 space in the histopolation basis; each DOF
/// is the integral over one subelement volume. DOFs of an element are
/// contiguous.
class L2Space {
 public:
  L2Space(std::shared_ptr<const Mesh> mesh, int p);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return p_; }  // RT degree p; polynomial degree is p-1
  int dim() const { return mesh_->dim(); }
  int num_dofs() const { return mesh_->num_elements() * block_; }
  int dofs_per_element() const { return block_; }
  int element_of(int g) const { return g / block_; }
  int local_index(int g) const { return g % block_; }
  LatticeSite site(int g) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int p_;
  int block_;
};

RtSpace build_rt_space(std::shared_ptr<const Mesh> mesh, int p);
L2Space build_l2_space(std::shared_ptr<const Mesh> mesh, int p);

/// Global RT DOFs whose subelement face lies on a boundary side with one of
/// the given attributes. Throws config error on an attribute outside 1..2d.
std::vector<int> boundary_dofs(const RtSpace& space, const std::set<int>& attributes);

/// All boundary attributes of the space's mesh (1..2d).
std::set<int> all_boundary_attributes(int dim);

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/common.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <span>

namespace hdiv {

using Point = std::array<double, 3>;

/// d x d Jacobian (stored 3x3, unused rows/cols zero) and its determinant.
struct Jacobian {
  std::array<std::array<double, 3>, 3> J{};
  double det = 0.0;
};

/// Multilinear map from [0,1]^d onto one element, defined by its 2^d
/// vertices in lexicographic order (x fastest).
class ElementTransform {
 public:
  ElementTransform(int dim, std::span<const Point> vertices);

  int dim() const { return dim_; }
  Point map(const Point& ref) const;
  Jacobian jacobian(const Point& ref) const;

 private:
  int dim_;
  std::array<Point, 8> v_{};
};

/// Boundary side of a structured box: 1 = x-min, 2 = x-max, 3 = y-min,
/// 4 = y-max, 5 = z-min, 6 = z-max.
struct BoundaryFace {
  int element;
  int side;  // 0..2d-1 : (axis, min/max) = (side/2, side%2)
  int attribute;
};

/// Structured quadrilateral (d=2) or hexahedral (d=3) mesh. Vertices and
/// elements are numbered lexicographically with x fastest.
class Mesh {
 public:
  Mesh(int dim, std::array<int, 3> cells, std::vector<Point> vertices);

  int dim() const { return dim_; }
  const std::array<int, 3>& cells() const { return cells_; }
  int num_elements() const { return cells_[0] * cells_[1] * cells_[2]; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<Point>& vertices() const { return vertices_; }

  std::array<int, 3> element_coords(int e) const;
  int element_index(const std::array<int, 3>& c) const;
  /// 2^d vertex ids of element e in lexicographic local order.
  std::vector<int> element_vertices(int e) const;
  ElementTransform transform(int e) const;

  int attribute(int e) const { return attributes_[e]; }
  const std::vector<int>& attributes() const { return attributes_; }
  void set_attributes(std::vector<int> attr);

  const std::vector<BoundaryFace>& boundary() const { return boundary_; }

  /// Samples det J on an n^d grid of every element; throws invalid-mesh if
  /// any sample is non-positive.
  void validate(int samples_per_axis = 5) const;

 private:
  int dim_;
  std::array<int, 3> cells_;
  std::vector<Point> vertices_;
  std::vector<int> attributes_;
  std::vector<BoundaryFace> boundary_;
};

/// Axis-aligned mesh of [lo, hi] with the given cells per axis.
Mesh cartesian_mesh(int dim, std::array<int, 3> cells, Point lo = {0, 0, 0}, Point hi = {1, 1, 1});

/// Moves every vertex x to x + displacement(x, vertex id).
Mesh skew_mesh(const Mesh& mesh, const std::function<Point(const Point&, int)>& displacement);

/// Single unit element with its far corner displaced by (+0.5, -0.2[, +0.3]);
/// the reference skewed element used by the conditioning studies.
Mesh canonical_skewed_element(int dim);

/// Level-p Gauss-Lobatto refinement: every element is split into p^d
/// subelements whose vertices are the images of the GLL lattice.
Mesh gll_refined_mesh(const Mesh& mesh, int p);

/// Text serialization ("hdivmesh 1" header, then dim, cells, vertices,
/// attributes).
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

/// Lexicographic cell grid of the p^d subelements of the reference element,
/// with the face/volume incidence used by the divergence and Schur kernels.
struct SubelementTopology {
  int p = 1;
  int dim = 2;
  int num_volumes = 0;
  int num_faces = 0;
  /// Faces are grouped by normal axis; offset of each axis block.
  std::array<int, 4> face_offset{};
  /// volume_to_face[i * 2d + k]: k = 2*axis + (0: negative side, 1: positive side)
  std::vector<int> volume_to_face;
  /// +1 on the positive axis side of a volume, -1 on the negative side.
  std::vector<int> volume_face_sign;

  int faces_per_volume() const { return 2 * dim; }
};

SubelementTopology subelement_topology(int p, int dim);

}  // namespace hdiv

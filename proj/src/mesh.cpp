// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/mesh.hpp"

#include "hdiv/tensor1d.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace hdiv {

ElementTransform::ElementTransform(int dim, std::span<const Point> vertices) : dim_(dim) {
  const std::size_t nv = std::size_t{1} << dim;
  if (vertices.size() != nv) throw Error(ErrorCode::Shape, "element transform needs 2^d vertices");
  for (std::size_t v = 0; v < nv; ++v) v_[v] = vertices[v];
}

Point ElementTransform::map(const Point& r) const {
  Point x{0, 0, 0};
  const int nv = 1 << dim_;
  for (int v = 0; v < nv; ++v) {
    double N = 1.0;
    for (int a = 0; a < dim_; ++a) N *= ((v >> a) & 1) ? r[a] : 1.0 - r[a];
    for (int i = 0; i < dim_; ++i) x[i] += N * v_[v][i];
  }
  return x;
}

Jacobian ElementTransform::jacobian(const Point& r) const {
  Jacobian jac;
  const int nv = 1 << dim_;
  for (int v = 0; v < nv; ++v) {
    for (int a = 0; a < dim_; ++a) {
      double dN = 1.0;
      for (int b = 0; b < dim_; ++b) {
        const bool hi = (v >> b) & 1;
        if (b == a)
          dN *= hi ? 1.0 : -1.0;
        else
          dN *= hi ? r[b] : 1.0 - r[b];
      }
      for (int i = 0; i < dim_; ++i) jac.J[i][a] += dN * v_[v][i];
    }
  }
  const auto& J = jac.J;
  if (dim_ == 2) {
    jac.det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  } else {
    jac.det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
              J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
              J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
  }
  return jac;
}

Mesh::Mesh(int dim, std::array<int, 3> cells, std::vector<Point> vertices)
    : dim_(dim), cells_(cells), vertices_(std::move(vertices)) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::InvalidMesh, "dimension must be 2 or 3");
  if (dim == 2) cells_[2] = 1;
  for (int a = 0; a < dim; ++a)
    if (cells_[a] < 1) throw Error(ErrorCode::InvalidMesh, "cell counts must be >= 1");
  std::size_t nv = 1;
  for (int a = 0; a < dim; ++a) nv *= static_cast<std::size_t>(cells_[a] + 1);
  if (vertices_.size() != nv) throw Error(ErrorCode::InvalidMesh, "vertex count does not match cell counts");
  attributes_.assign(num_elements(), 1);
  for (int e = 0; e < num_elements(); ++e) {
    const auto c = element_coords(e);
    for (int a = 0; a < dim; ++a) {
      if (c[a] == 0) boundary_.push_back({e, 2 * a, 2 * a + 1});
      if (c[a] == cells_[a] - 1) boundary_.push_back({e, 2 * a + 1, 2 * a + 2});
    }
  }
}

std::array<int, 3> Mesh::element_coords(int e) const {
  return {e % cells_[0], (e / cells_[0]) % cells_[1], e / (cells_[0] * cells_[1])};
}

int Mesh::element_index(const std::array<int, 3>& c) const {
  return c[0] + cells_[0] * (c[1] + cells_[1] * c[2]);
}

std::vector<int> Mesh::element_vertices(int e) const {
  const auto c = element_coords(e);
  const int nx = cells_[0] + 1, ny = cells_[1] + 1;
  std::vector<int> ids(std::size_t{1} << dim_);
  for (std::size_t v = 0; v < ids.size(); ++v) {
    const int i = c[0] + (v & 1), j = c[1] + ((v >> 1) & 1), k = c[2] + ((v >> 2) & 1);
    ids[v] = i + nx * (j + ny * k);
  }
  return ids;
}

ElementTransform Mesh::transform(int e) const {
  const auto ids = element_vertices(e);
  std::array<Point, 8> pts{};
  for (std::size_t v = 0; v < ids.size(); ++v) pts[v] = vertices_[ids[v]];
  return ElementTransform(dim_, std::span<const Point>(pts.data(), ids.size()));
}

void Mesh::set_attributes(std::vector<int> attr) {
  if (static_cast<int>(attr.size()) != num_elements()) throw Error(ErrorCode::Shape, "attribute count mismatch");
  attributes_ = std::move(attr);
}

void Mesh::validate(int n) const {
  for (int e = 0; e < num_elements(); ++e) {
    const ElementTransform T = transform(e);
    const int nz = dim_ == 3 ? n : 1;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const Point r{double(i) / (n - 1), double(j) / (n - 1), dim_ == 3 ? double(k) / (n - 1) : 0.0};
          const double det = T.jacobian(r).det;
          if (!(det > 0.0))
            throw Error(ErrorCode::InvalidMesh, "element " + std::to_string(e) + " has det J = " +
                                                    std::to_string(det) + " (inverted or degenerate)");
        }
  }
}

Mesh cartesian_mesh(int dim, std::array<int, 3> cells, Point lo, Point hi) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::InvalidMesh, "dimension must be 2 or 3");
  if (dim == 2) cells[2] = 1;
  for (int a = 0; a < dim; ++a) {
    if (cells[a] < 1) throw Error(ErrorCode::InvalidMesh, "cell counts must be >= 1");
    if (!(hi[a] > lo[a])) throw Error(ErrorCode::InvalidMesh, "degenerate bounding box");
  }
  const int nx = cells[0] + 1, ny = cells[1] + 1, nz = dim == 3 ? cells[2] + 1 : 1;
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>(nx) * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        v.push_back({lo[0] + (hi[0] - lo[0]) * i / cells[0], lo[1] + (hi[1] - lo[1]) * j / cells[1],
                     dim == 3 ? lo[2] + (hi[2] - lo[2]) * k / cells[2] : 0.0});
  return Mesh(dim, cells, std::move(v));
}

Mesh skew_mesh(const Mesh& mesh, const std::function<Point(const Point&, int)>& displacement) {
  std::vector<Point> v = mesh.vertices();
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    const Point d = displacement(v[i], i);
    for (int a = 0; a < mesh.dim(); ++a) v[i][a] += d[a];
  }
  Mesh out(mesh.dim(), mesh.cells(), std::move(v));
  out.set_attributes(mesh.attributes());
  out.validate();
  return out;
}

Mesh canonical_skewed_element(int dim) {
  const Mesh unit = cartesian_mesh(dim, {1, 1, 1});
  const int far = unit.num_vertices() - 1;
  return skew_mesh(unit, [far](const Point&, int id) {
    return id == far ? Point{0.5, -0.2, 0.3} : Point{0, 0, 0};
  });
}

Mesh gll_refined_mesh(const Mesh& mesh, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidOrder, "refinement level must be >= 1");
  const int d = mesh.dim();
  const Vec gll = p == 1 ? Vec{0.0, 1.0} : gauss_lobatto(p + 1).nodes;
  std::array<int, 3> rc = mesh.cells();
  for (int a = 0; a < d; ++a) rc[a] *= p;
  const int nx = rc[0] + 1, ny = rc[1] + 1, nz = d == 3 ? rc[2] + 1 : 1;
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>(nx) * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::array<int, 3> I{i, j, k};
        std::array<int, 3> ec{0, 0, 0};
        Point r{0, 0, 0};
        for (int a = 0; a < d; ++a) {
          ec[a] = std::min(I[a] / p, mesh.cells()[a] - 1);
          r[a] = gll[I[a] - ec[a] * p];
        }
        v.push_back(mesh.transform(mesh.element_index(ec)).map(r));
      }
  Mesh out(d, rc, std::move(v));
  std::vector<int> attr(out.num_elements());
  for (int e = 0; e < out.num_elements(); ++e) {
    auto c = out.element_coords(e);
    for (int a = 0; a < d; ++a) c[a] /= p;
    attr[e] = mesh.attribute(mesh.element_index(c));
  }
  out.set_attributes(std::move(attr));
  return out;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "hdivmesh 1\n";
  os << "dim " << mesh.dim() << "\n";
  os << "cells";
  for (int a = 0; a < mesh.dim(); ++a) os << ' ' << mesh.cells()[a];
  os << "\nvertices " << mesh.num_vertices() << "\n";
  os.precision(17);
  for (const auto& x : mesh.vertices()) {
    os << x[0] << ' ' << x[1];
    if (mesh.dim() == 3) os << ' ' << x[2];
    os << '\n';
  }
  os << "attributes " << mesh.num_elements() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e) os << mesh.attribute(e) << '\n';
}

Mesh read_mesh(std::istream& is) {
  auto expect = [&](const std::string& key) {
    std::string tok;
    if (!(is >> tok) || tok != key) throw Error(ErrorCode::Config, "mesh file: expected '" + key + "'");
  };
  expect("hdivmesh");
  int version = 0;
  is >> version;
  if (version != 1) throw Error(ErrorCode::Config, "mesh file: unsupported version " + std::to_string(version));
  expect("dim");
  int dim = 0;
  is >> dim;
  if (dim != 2 && dim != 3) throw Error(ErrorCode::Config, "mesh file: bad dimension");
  expect("cells");
  std::array<int, 3> cells{1, 1, 1};
  for (int a = 0; a < dim; ++a) is >> cells[a];
  expect("vertices");
  std::size_t nv = 0;
  is >> nv;
  std::vector<Point> v(nv, Point{0, 0, 0});
  for (auto& x : v)
    for (int a = 0; a < dim; ++a) is >> x[a];
  expect("attributes");
  std::size_t ne = 0;
  is >> ne;
  std::vector<int> attr(ne);
  for (auto& a : attr) is >> a;
  if (!is) throw Error(ErrorCode::Config, "mesh file: truncated");
  Mesh mesh(dim, cells, std::move(v));
  mesh.set_attributes(std::move(attr));
  mesh.validate();
  return mesh;
}

SubelementTopology subelement_topology(int p, int dim) {
  if (p < 1) throw Error(ErrorCode::InvalidOrder, "p must be >= 1");
  if (dim != 2 && dim != 3) throw Error(ErrorCode::Shape, "dimension must be 2 or 3");
  SubelementTopology t;
  t.p = p;
  t.dim = dim;
  const int p2 = p, pz = dim == 3 ? p : 1;
  t.num_volumes = p2 * p2 * pz;
  const int per_axis = (p + 1) * p * (dim == 3 ? p : 1);
  for (int a = 0; a <= dim; ++a) t.face_offset[a] = a * per_axis;
  t.num_faces = dim * per_axis;
  t.volume_to_face.resize(static_cast<std::size_t>(t.num_volumes) * 2 * dim);
  t.volume_face_sign.resize(t.volume_to_face.size());
  for (int i = 0; i < t.num_volumes; ++i) {
    const std::array<int, 3> v{i % p, (i / p) % p, dim == 3 ? i / (p * p) : 0};
    for (int a = 0; a < dim; ++a) {
      // Face block of axis a has extent p+1 along a and p along the others.
      std::array<int, 3> ext{p, p, dim == 3 ? p : 1};
      ext[a] = p + 1;
      for (int side = 0; side < 2; ++side) {
        std::array<int, 3> f = v;
        f[a] += side;
        const int local = f[0] + ext[0] * (f[1] + ext[1] * f[2]);
        const int k = 2 * a + side;
        t.volume_to_face[i * 2 * dim + k] = t.face_offset[a] + local;
        t.volume_face_sign[i * 2 * dim + k] = side == 0 ? -1 : +1;
      }
    }
  }
  return t;
}

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/operators.hpp"

#include <algorithm>
#include <cmath>

namespace hdiv {

// ---------------------------------------------------------------------------
// Coefficient

Coefficient Coefficient::per_element(Vec values) {
  Coefficient c;
  c.kind_ = Kind::PerElement;
  c.values_ = std::move(values);
  return c;
}

Coefficient Coefficient::function(Fn f) {
  Coefficient c;
  c.kind_ = Kind::Function;
  c.fn_ = std::move(f);
  return c;
}

double Coefficient::operator()(int element, const Point& x) const {
  switch (kind_) {
    case Kind::Constant: return constant_;
    case Kind::PerElement: return values_.at(element);
    case Kind::Function: return fn_(x);
  }
  return 0.0;
}

double Coefficient::element_value(int element) const {
  if (kind_ == Kind::Function) throw Error(ErrorCode::Coefficient, "function coefficient has no element value");
  return kind_ == Kind::Constant ? constant_ : values_.at(element);
}

Coefficient Coefficient::reciprocal() const {
  switch (kind_) {
    case Kind::Constant: return Coefficient(1.0 / constant_);
    case Kind::PerElement: {
      Vec r(values_.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = 1.0 / values_[i];
      return per_element(std::move(r));
    }
    case Kind::Function: {
      auto f = fn_;
      return function([f](const Point& x) { return 1.0 / f(x); });
    }
  }
  return *this;
}

Coefficient Coefficient::scaled(double s) const {
  switch (kind_) {
    case Kind::Constant: return Coefficient(s * constant_);
    case Kind::PerElement: {
      Vec r(values_);
      for (double& v : r) v *= s;
      return per_element(std::move(r));
    }
    case Kind::Function: {
      auto f = fn_;
      return function([f, s](const Point& x) { return s * f(x); });
    }
  }
  return *this;
}

bool Coefficient::is_zero() const {
  if (kind_ == Kind::Constant) return constant_ == 0.0;
  if (kind_ == Kind::PerElement) return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  return false;
}

void Coefficient::check_positive(const std::string& name, int element, double value, bool allow_zero) const {
  const bool ok = allow_zero ? value >= 0.0 : value > 0.0;
  if (!ok || !std::isfinite(value))
    throw Error(ErrorCode::Coefficient, name + " = " + std::to_string(value) + " on element " + std::to_string(element));
}

// ---------------------------------------------------------------------------
// Quadrature, coloring

Point ElementQuadrature::point(int q) const {
  const int n = n1d;
  Point x{rule.nodes[q % n], rule.nodes[(q / n) % n], 0.0};
  if (dim == 3) x[2] = rule.nodes[q / (n * n)];
  return x;
}

double ElementQuadrature::weight(int q) const {
  const int n = n1d;
  double w = rule.weights[q % n] * rule.weights[(q / n) % n];
  if (dim == 3) w *= rule.weights[q / (n * n)];
  return w;
}

ElementQuadrature make_quadrature(int dim, int n1d) {
  ElementQuadrature q;
  q.dim = dim;
  q.n1d = n1d;
  q.rule = gauss_legendre(n1d);
  return q;
}

std::vector<std::vector<int>> element_colors(const Mesh& mesh) {
  std::vector<std::vector<int>> colors(mesh.dim() == 3 ? 8 : 4);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto c = mesh.element_coords(e);
    colors[(c[0] & 1) | ((c[1] & 1) << 1) | ((c[2] & 1) << 2)].push_back(e);
  }
  std::erase_if(colors, [](const std::vector<int>& c) { return c.empty(); });
  return colors;
}

namespace {

int sym_index(int a, int b, int d) {
  if (a > b) std::swap(a, b);
  return d == 2 ? a + b : (a == 0 ? b : a + b + 1);
}

// Inverse of the leading d x d block of J.
std::array<std::array<double, 3>, 3> inverse(const Jacobian& jac, int d) {
  std::array<std::array<double, 3>, 3> r{};
  const auto& J = jac.J;
  if (d == 2) {
    r[0][0] = J[1][1] / jac.det;
    r[0][1] = -J[0][1] / jac.det;
    r[1][0] = -J[1][0] / jac.det;
    r[1][1] = J[0][0] / jac.det;
  } else {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const int i1 = (j + 1) % 3, i2 = (j + 2) % 3, j1 = (i + 1) % 3, j2 = (i + 2) % 3;
        r[i][j] = (J[i1][j1] * J[i2][j2] - J[i1][j2] * J[i2][j1]) / jac.det;
      }
  }
  return r;
}

Jacobian checked_jacobian(const ElementTransform& T, const Point& x, int e) {
  Jacobian jac = T.jacobian(x);
  if (!(jac.det > 0.0))
    throw Error(ErrorCode::InvalidMesh, "non-positive Jacobian determinant on element " + std::to_string(e));
  return jac;
}

// 1D factors of RT component c: GLL-Lagrange along c, histopolation across.
std::array<const Dense1D*, 3> rt_factors(int c, const Dense1D& bl, const Dense1D& bh) {
  return {c == 0 ? &bl : &bh, c == 1 ? &bl : &bh, c == 2 ? &bl : &bh};
}

int pow_d(int n, int d) { return d == 3 ? n * n * n : n * n; }

Vec& tensor_scratch() {
  thread_local Vec w;
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// RT mass

RtMassOperator::RtMassOperator(const RtSpace& space, Coefficient beta, Exec exec, int nq1d)
    : space_(space), beta_(std::move(beta)), exec_(exec) {
  const int d = space.dim(), p = space.degree();
  quad_ = make_quadrature(d, nq1d > 0 ? nq1d : p + 2);
  ncomp_ = d * (d + 1) / 2;
  bl_ = Dense1D(eval_basis(Basis1D::GllNodal, p + 1, quad_.rule.nodes));
  bh_ = Dense1D(eval_basis(Basis1D::Histopolation, p, quad_.rule.nodes));
  bl2_ = bl_.squared();
  bh2_ = bh_.squared();
  colors_ = element_colors(space.mesh());

  const int ne = space.mesh().num_elements(), nq = quad_.num_points();
  geo_.assign(static_cast<std::size_t>(ne) * nq * ncomp_, 0.0);
  for (int e = 0; e < ne; ++e) {
    const ElementTransform T = space.mesh().transform(e);
    double* g = geo_.data() + static_cast<std::size_t>(e) * nq * ncomp_;
    for (int q = 0; q < nq; ++q) {
      const Point xh = quad_.point(q);
      const Jacobian jac = checked_jacobian(T, xh, e);
      const double b = beta_.kind() == Coefficient::Kind::Function ? beta_(e, T.map(xh)) : beta_.element_value(e);
      beta_.check_positive("beta", e, b);
      const double s = quad_.weight(q) * b / jac.det;
      for (int a = 0; a < d; ++a)
        for (int c = a; c < d; ++c) {
          double jtj = 0.0;
          for (int r = 0; r < d; ++r) jtj += jac.J[r][a] * jac.J[r][c];
          g[q * ncomp_ + sym_index(a, c, d)] = s * jtj;
        }
    }
  }
}

void RtMassOperator::local_apply(int e, const double* x, double* y, Vec& work) const {
  const int d = space_.dim(), nq = quad_.num_points();
  const auto& off = space_.topology().face_offset;
  work.resize(static_cast<std::size_t>(2 * d) * nq);
  double* uq = work.data();
  double* vq = work.data() + static_cast<std::size_t>(d) * nq;
  Vec& tw = tensor_scratch();
  for (int c = 0; c < d; ++c) tensor_apply(d, rt_factors(c, bl_, bh_), false, x + off[c], uq + c * nq, tw);
  const double* g = geo(e);
  for (int q = 0; q < nq; ++q) {
    const double* gq = g + q * ncomp_;
    for (int a = 0; a < d; ++a) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += gq[sym_index(a, c, d)] * uq[c * nq + q];
      vq[a * nq + q] = s;
    }
  }
  for (int c = 0; c < d; ++c) tensor_apply(d, rt_factors(c, bl_, bh_), true, vq + c * nq, y + off[c], tw);
}

void RtMassOperator::apply(std::span<const double> x, std::span<double> y) const { apply(x, y, exec_); }

void RtMassOperator::apply(std::span<const double> x, std::span<double> y, Exec exec) const {
  const int nloc = space_.dofs_per_element();
  std::fill(y.begin(), y.begin() + size(), 0.0);
  auto element = [&](int e, Vec& xl, Vec& yl, Vec& work) {
    const auto dofs = space_.element_dofs(e);
    const auto sg = space_.element_orientation(e);
    for (int j = 0; j < nloc; ++j) xl[j] = sg[j] * x[dofs[j]];
    local_apply(e, xl.data(), yl.data(), work);
    for (int j = 0; j < nloc; ++j) y[dofs[j]] += sg[j] * yl[j];
  };
  for (const auto& color : colors_) {
    const int n = static_cast<int>(color.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel
      {
        Vec xl(nloc), yl(nloc), work;
#pragma omp for schedule(static)
        for (int k = 0; k < n; ++k) element(color[k], xl, yl, work);
      }
    } else {
      Vec xl(nloc), yl(nloc), work;
      for (int k = 0; k < n; ++k) element(color[k], xl, yl, work);
    }
  }
}

DiagonalMatrix RtMassOperator::diagonal() const {
  const int d = space_.dim(), nq = quad_.num_points(), nloc = space_.dofs_per_element();
  const auto& off = space_.topology().face_offset;
  Vec diag(size(), 0.0), gq(nq), dl(nloc), tw;
  for (int e = 0; e < space_.mesh().num_elements(); ++e) {
    const double* g = geo(e);
    for (int c = 0; c < d; ++c) {
      for (int q = 0; q < nq; ++q) gq[q] = g[q * ncomp_ + sym_index(c, c, d)];
      tensor_apply(d, rt_factors(c, bl2_, bh2_), true, gq.data(), dl.data() + off[c], tw);
    }
    const auto dofs = space_.element_dofs(e);
    for (int j = 0; j < nloc; ++j) diag[dofs[j]] += dl[j];
  }
  return DiagonalMatrix(std::move(diag));
}

Matrix RtMassOperator::local_matrix(int e) const {
  // Full evaluation of every basis function at every point; geometry is
  // recomputed from the transform rather than read from geo_.
  const int d = space_.dim(), p = space_.degree(), nq = quad_.num_points(), nloc = space_.dofs_per_element();
  const ElementTransform T = space_.mesh().transform(e);
  Matrix m = Matrix::Zero(nloc, nloc);
  for (int q = 0; q < nq; ++q) {
    const Point xh = quad_.point(q);
    const Jacobian jac = checked_jacobian(T, xh, e);
    const double b = beta_(e, T.map(xh));
    const Matrix phi = rt_reference_values(p, d, xh);  // nloc x d
    Eigen::Matrix3d jm = Eigen::Matrix3d::Zero();
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) jm(r, c) = jac.J[r][c];
    const Matrix G = (jm.topLeftCorner(d, d).transpose() * jm.topLeftCorner(d, d)) * (quad_.weight(q) * b / jac.det);
    m += phi * G * phi.transpose();
  }
  return m;
}

Matrix RtMassOperator::assemble_dense() const {
  const int n = size(), nloc = space_.dofs_per_element();
  if (n > 20000) throw Error(ErrorCode::Scale, "dense RT mass too large");
  Matrix a = Matrix::Zero(n, n);
  for (int e = 0; e < space_.mesh().num_elements(); ++e) {
    const Matrix m = local_matrix(e);
    const auto dofs = space_.element_dofs(e);
    const auto sg = space_.element_orientation(e);
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) a(dofs[i], dofs[j]) += sg[i] * sg[j] * m(i, j);
  }
  return a;
}

// ---------------------------------------------------------------------------
// L2 mass

L2MassOperator::L2MassOperator(const L2Space& space, Coefficient alpha, Basis1D basis, Exec exec, int nq1d,
                               bool allow_zero)
    : space_(space), alpha_(std::move(alpha)), basis_(basis), exec_(exec) {
  const int d = space.dim(), p = space.degree();
  quad_ = make_quadrature(d, nq1d > 0 ? nq1d : p + 2);
  b_ = Dense1D(eval_basis(basis, p, quad_.rule.nodes));
  b2_ = b_.squared();
  const int ne = space.mesh().num_elements(), nq = quad_.num_points();
  geo_.assign(static_cast<std::size_t>(ne) * nq, 0.0);
  for (int e = 0; e < ne; ++e) {
    const ElementTransform T = space.mesh().transform(e);
    for (int q = 0; q < nq; ++q) {
      const Point xh = quad_.point(q);
      const Jacobian jac = checked_jacobian(T, xh, e);
      const double a = alpha_.kind() == Coefficient::Kind::Function ? alpha_(e, T.map(xh)) : alpha_.element_value(e);
      alpha_.check_positive("alpha", e, a, allow_zero);
      geo_[static_cast<std::size_t>(e) * nq + q] = quad_.weight(q) * a / jac.det;
    }
  }
}

void L2MassOperator::local_apply(int e, const double* x, double* y, Vec& work) const {
  const int d = space_.dim(), nq = quad_.num_points();
  work.resize(nq);
  Vec& tw = tensor_scratch();
  const std::array<const Dense1D*, 3> B{&b_, &b_, &b_};
  tensor_apply(d, B, false, x, work.data(), tw);
  const double* g = geo_.data() + static_cast<std::size_t>(e) * nq;
  for (int q = 0; q < nq; ++q) work[q] *= g[q];
  tensor_apply(d, B, true, work.data(), y, tw);
}

void L2MassOperator::local_diagonal(int e, double* dl, Vec& work) const {
  const int nq = quad_.num_points();
  work.assign(geo_.begin() + static_cast<std::ptrdiff_t>(e) * nq, geo_.begin() + static_cast<std::ptrdiff_t>(e + 1) * nq);
  const std::array<const Dense1D*, 3> B2{&b2_, &b2_, &b2_};
  tensor_apply(space_.dim(), B2, true, work.data(), dl, tensor_scratch());
}

void L2MassOperator::apply(std::span<const double> x, std::span<double> y) const { apply(x, y, exec_); }

void L2MassOperator::apply(std::span<const double> x, std::span<double> y, Exec exec) const {
  const int ne = num_blocks(), nb = block_size();
  if (exec == Exec::Parallel) {
#pragma omp parallel
    {
      Vec work;
#pragma omp for schedule(static)
      for (int e = 0; e < ne; ++e)
        local_apply(e, x.data() + static_cast<std::size_t>(e) * nb, y.data() + static_cast<std::size_t>(e) * nb, work);
    }
  } else {
    Vec work;
    for (int e = 0; e < ne; ++e)
      local_apply(e, x.data() + static_cast<std::size_t>(e) * nb, y.data() + static_cast<std::size_t>(e) * nb, work);
  }
  ++applies_;
}

DiagonalMatrix L2MassOperator::diagonal() const {
  Vec d(size());
  Vec work;
  for (int e = 0; e < num_blocks(); ++e) local_diagonal(e, d.data() + static_cast<std::size_t>(e) * block_size(), work);
  return DiagonalMatrix(std::move(d));
}

Matrix L2MassOperator::local_matrix(int e) const {
  const int d = space_.dim(), p = space_.degree(), nq = quad_.num_points(), nb = block_size();
  const ElementTransform T = space_.mesh().transform(e);
  const Matrix b1 = eval_basis(basis_, p, quad_.rule.nodes);
  Matrix m = Matrix::Zero(nb, nb);
  Eigen::VectorXd phi(nb);
  for (int q = 0; q < nq; ++q) {
    const Point xh = quad_.point(q);
    const Jacobian jac = checked_jacobian(T, xh, e);
    const int n = quad_.n1d;
    const std::array<int, 3> qi{q % n, (q / n) % n, q / (n * n)};
    for (int i = 0; i < nb; ++i) {
      const std::array<int, 3> ii{i % p, (i / p) % p, i / (p * p)};
      double v = 1.0;
      for (int a = 0; a < d; ++a) v *= b1(qi[a], ii[a]);
      phi[i] = v;
    }
    m += (quad_.weight(q) * alpha_(e, T.map(xh)) / jac.det) * phi * phi.transpose();
  }
  return m;
}

Matrix L2MassOperator::assemble_dense() const {
  const int n = size(), nb = block_size();
  if (n > 20000) throw Error(ErrorCode::Scale, "dense L2 mass too large");
  Matrix a = Matrix::Zero(n, n);
  for (int e = 0; e < num_blocks(); ++e) a.block(e * nb, e * nb, nb, nb) = local_matrix(e);
  return a;
}

// ---------------------------------------------------------------------------
// B_alpha and the primal operator

void BAlphaOperator::apply(std::span<const double> x, std::span<double> y) const {
  Vec t(D_.rows);
  D_.multiply(x, t);
  w_.apply(t, y);
}

void BAlphaOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  Vec t(D_.rows);
  w_.apply(x, t);
  D_.multiply_transpose(t, y);
}

Matrix rt_reference_values(int p, int dim, const Point& xh) {
  const SubelementTopology topo = subelement_topology(p, dim);
  std::array<Matrix, 3> vl, vh;
  for (int a = 0; a < dim; ++a) {
    const double x[1] = {xh[a]};
    vl[a] = eval_basis(Basis1D::GllNodal, p + 1, x);
    vh[a] = eval_basis(Basis1D::Histopolation, p, x);
  }
  Matrix phi = Matrix::Zero(topo.num_faces, dim);
  for (int c = 0; c < dim; ++c) {
    std::array<int, 3> ext{p, p, dim == 3 ? p : 1};
    ext[c] = p + 1;
    for (int f = 0; f < topo.face_offset[c + 1] - topo.face_offset[c]; ++f) {
      const std::array<int, 3> fi{f % ext[0], (f / ext[0]) % ext[1], f / (ext[0] * ext[1])};
      double v = 1.0;
      for (int a = 0; a < dim; ++a) v *= (a == c ? vl[a](0, fi[a]) : vh[a](0, fi[a]));
      phi(topo.face_offset[c] + f, c) = v;
    }
  }
  return phi;
}

Vec rt_reference_divergence(int p, int dim, const Point& xh) {
  const SubelementTopology topo = subelement_topology(p, dim);
  std::array<Matrix, 3> dl, vh;
  for (int a = 0; a < dim; ++a) {
    const double x[1] = {xh[a]};
    dl[a] = eval_basis_derivative(Basis1D::GllNodal, p + 1, x);
    vh[a] = eval_basis(Basis1D::Histopolation, p, x);
  }
  Vec div(topo.num_faces, 0.0);
  for (int c = 0; c < dim; ++c) {
    std::array<int, 3> ext{p, p, dim == 3 ? p : 1};
    ext[c] = p + 1;
    for (int f = 0; f < topo.face_offset[c + 1] - topo.face_offset[c]; ++f) {
      const std::array<int, 3> fi{f % ext[0], (f / ext[0]) % ext[1], f / (ext[0] * ext[1])};
      double v = 1.0;
      for (int a = 0; a < dim; ++a) v *= (a == c ? dl[a](0, fi[a]) : vh[a](0, fi[a]));
      div[topo.face_offset[c] + f] = v;
    }
  }
  return div;
}

namespace {

// Values of the p^d histopolation tensor basis at one reference point.
Eigen::VectorXd l2_reference_values(int p, int dim, const Point& xh) {
  std::array<Matrix, 3> vh;
  for (int a = 0; a < dim; ++a) {
    const double x[1] = {xh[a]};
    vh[a] = eval_basis(Basis1D::Histopolation, p, x);
  }
  const int nb = pow_d(p, dim);
  Eigen::VectorXd v(nb);
  for (int i = 0; i < nb; ++i) {
    const std::array<int, 3> ii{i % p, (i / p) % p, i / (p * p)};
    double s = 1.0;
    for (int a = 0; a < dim; ++a) s *= vh[a](0, ii[a]);
    v[i] = s;
  }
  return v;
}

}  // namespace

Matrix dense_b_alpha_direct(const RtSpace& rt, const L2Space& l2, const Coefficient& alpha) {
  const int d = rt.dim(), p = rt.degree(), nloc = rt.dofs_per_element(), nb = l2.dofs_per_element();
  const ElementQuadrature quad = make_quadrature(d, p + 2);
  Matrix B = Matrix::Zero(l2.num_dofs(), rt.num_dofs());
  for (int e = 0; e < rt.mesh().num_elements(); ++e) {
    const ElementTransform T = rt.mesh().transform(e);
    Matrix loc = Matrix::Zero(nb, nloc);
    for (int q = 0; q < quad.num_points(); ++q) {
      const Point xh = quad.point(q);
      const Jacobian jac = checked_jacobian(T, xh, e);
      const Vec div = rt_reference_divergence(p, d, xh);
      const Eigen::VectorXd h = l2_reference_values(p, d, xh);
      const double s = quad.weight(q) * alpha(e, T.map(xh)) / jac.det;
      for (int j = 0; j < nloc; ++j) loc.col(j) += (s * div[j]) * h;
    }
    const auto dofs = rt.element_dofs(e);
    const auto sg = rt.element_orientation(e);
    for (int j = 0; j < nloc; ++j) B.block(e * nb, dofs[j], nb, 1) += sg[j] * loc.col(j);
  }
  return B;
}

Matrix dense_grad_div_direct(const RtSpace& rt, const Coefficient& alpha, const Coefficient& beta) {
  const int d = rt.dim(), p = rt.degree(), nloc = rt.dofs_per_element(), n = rt.num_dofs();
  if (n > 20000) throw Error(ErrorCode::Scale, "dense grad-div too large");
  const ElementQuadrature quad = make_quadrature(d, p + 2);
  Matrix A = Matrix::Zero(n, n);
  for (int e = 0; e < rt.mesh().num_elements(); ++e) {
    const ElementTransform T = rt.mesh().transform(e);
    Matrix loc = Matrix::Zero(nloc, nloc);
    for (int q = 0; q < quad.num_points(); ++q) {
      const Point xh = quad.point(q);
      const Point x = T.map(xh);
      const Jacobian jac = checked_jacobian(T, xh, e);
      // Physical values J u_hat / det J and divergences div_hat u_hat / det J.
      const Matrix phi = rt_reference_values(p, d, xh);
      Matrix jm = Matrix::Zero(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) jm(r, c) = jac.J[r][c];
      const Matrix u = phi * jm.transpose() / jac.det;  // nloc x d
      const Vec dv = rt_reference_divergence(p, d, xh);
      Eigen::VectorXd div(nloc);
      for (int j = 0; j < nloc; ++j) div[j] = dv[j] / jac.det;
      const double w = quad.weight(q) * jac.det;
      loc += w * (alpha(e, x) * div * div.transpose() + beta(e, x) * u * u.transpose());
    }
    const auto dofs = rt.element_dofs(e);
    const auto sg = rt.element_orientation(e);
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) A(dofs[i], dofs[j]) += sg[i] * sg[j] * loc(i, j);
  }
  return A;
}

GradDivPrimalOperator::GradDivPrimalOperator(const RtMassOperator& m, const L2MassOperator& w,
                                             const SparseMatrixCsr& D)
    : m_(m), w_(w), D_(D), Dt_(D.transpose()), t1_(D.rows), t2_(D.rows), t3_(D.cols) {}

void GradDivPrimalOperator::apply(std::span<const double> x, std::span<double> y) const {
  m_.apply(x, y);
  D_.multiply(x, t1_);
  w_.apply(t1_, t2_);
  Dt_.multiply(t2_, t3_);
  for (int i = 0; i < size(); ++i) y[i] += t3_[i];
}

DiagonalMatrix GradDivPrimalOperator::diagonal() const {
  Vec diag = m_.diagonal().entries();
  const L2Space& l2 = w_.space();
  const int nb = l2.dofs_per_element();
  std::vector<Matrix> blocks(l2.mesh().num_elements());
  for (int k = 0; k < Dt_.rows; ++k) {
    double s = 0.0;
    for (int a = Dt_.row_ptr[k]; a < Dt_.row_ptr[k + 1]; ++a)
      for (int b = Dt_.row_ptr[k]; b < Dt_.row_ptr[k + 1]; ++b) {
        const int i = Dt_.col[a], j = Dt_.col[b];
        const int e = l2.element_of(i);
        if (l2.element_of(j) != e) continue;
        if (blocks[e].size() == 0) blocks[e] = w_.local_matrix(e);
        s += Dt_.val[a] * Dt_.val[b] * blocks[e](i - e * nb, j - e * nb);
      }
    diag[k] += s;
  }
  return DiagonalMatrix(std::move(diag));
}

// ---------------------------------------------------------------------------
// Loads, interpolants, errors

Vec assemble_rt_load(const RtSpace& space, const VectorField& f, const Coefficient& w) {
  const int d = space.dim(), p = space.degree(), nloc = space.dofs_per_element();
  const ElementQuadrature quad = make_quadrature(d, p + 3);
  const Dense1D bl(eval_basis(Basis1D::GllNodal, p + 1, quad.rule.nodes));
  const Dense1D bh(eval_basis(Basis1D::Histopolation, p, quad.rule.nodes));
  const auto& off = space.topology().face_offset;
  const int nq = quad.num_points();
  Vec b(space.num_dofs(), 0.0), fq(static_cast<std::size_t>(d) * nq), bl_loc(nloc), tw;
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    const ElementTransform T = space.mesh().transform(e);
    for (int q = 0; q < nq; ++q) {
      const Point xh = quad.point(q);
      const Jacobian jac = checked_jacobian(T, xh, e);
      const Point x = T.map(xh);
      const Point fv = f(x);
      const double wq = quad.weight(q) * w(e, x);
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int r = 0; r < d; ++r) s += jac.J[r][c] * fv[r];
        fq[c * nq + q] = wq * s;
      }
    }
    for (int c = 0; c < d; ++c) tensor_apply(d, rt_factors(c, bl, bh), true, fq.data() + c * nq, bl_loc.data() + off[c], tw);
    const auto dofs = space.element_dofs(e);
    const auto sg = space.element_orientation(e);
    for (int j = 0; j < nloc; ++j) b[dofs[j]] += sg[j] * bl_loc[j];
  }
  return b;
}

Vec assemble_l2_load(const L2Space& space, const ScalarField& g) {
  const int d = space.dim(), p = space.degree(), nb = space.dofs_per_element();
  const ElementQuadrature quad = make_quadrature(d, p + 3);
  const Dense1D bh(eval_basis(Basis1D::Histopolation, p, quad.rule.nodes));
  const std::array<const Dense1D*, 3> B{&bh, &bh, &bh};
  const int nq = quad.num_points();
  Vec b(space.num_dofs(), 0.0), gq(nq), tw;
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    const ElementTransform T = space.mesh().transform(e);
    for (int q = 0; q < nq; ++q) gq[q] = quad.weight(q) * g(T.map(quad.point(q)));
    tensor_apply(d, B, true, gq.data(), b.data() + static_cast<std::size_t>(e) * nb, tw);
  }
  return b;
}

Vec rt_interpolate(const RtSpace& space, const VectorField& u) {
  const int d = space.dim(), p = space.degree(), nloc = space.dofs_per_element();
  const NodeSet1D gll = gauss_lobatto(p + 1);
  const NodeSet1D sub = gauss_legendre(p + 3);
  const auto& off = space.topology().face_offset;
  Vec x(space.num_dofs(), 0.0);
  std::vector<char> done(space.num_dofs(), 0);
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    const ElementTransform T = space.mesh().transform(e);
    for (int j = 0; j < nloc; ++j) {
      const int g = space.local_to_global(e, j);
      if (done[g]) continue;
      done[g] = 1;
      int c = 0;
      while (j >= off[c + 1]) ++c;
      std::array<int, 3> ext{p, p, d == 3 ? p : 1};
      ext[c] = p + 1;
      const int f = j - off[c];
      const std::array<int, 3> fi{f % ext[0], (f / ext[0]) % ext[1], f / (ext[0] * ext[1])};
      // Tensor quadrature over the subface (other axes' subintervals).
      const int ns = sub.size();
      const int npts = d == 3 ? ns * ns : ns;
      double flux = 0.0;
      for (int k = 0; k < npts; ++k) {
        Point xh{0, 0, 0};
        double w = 1.0;
        int kk = k;
        for (int a = 0; a < d; ++a) {
          if (a == c) {
            xh[a] = gll.nodes[fi[a]];
            continue;
          }
          const double lo = gll.nodes[fi[a]], hi = gll.nodes[fi[a] + 1];
          const int s = kk % ns;
          kk /= ns;
          xh[a] = lo + (hi - lo) * sub.nodes[s];
          w *= (hi - lo) * sub.weights[s];
        }
        const Jacobian jac = checked_jacobian(T, xh, e);
        const auto Ji = inverse(jac, d);
        const Point uv = u(T.map(xh));
        double s = 0.0;
        for (int r = 0; r < d; ++r) s += Ji[c][r] * uv[r];
        flux += w * jac.det * s;
      }
      x[g] = space.orientation(e, j) * flux;
    }
  }
  return x;
}

Vec l2_interpolate(const L2Space& space, const ScalarField& g) {
  const int d = space.dim(), p = space.degree(), nb = space.dofs_per_element();
  const NodeSet1D gll = gauss_lobatto(p + 1);
  const NodeSet1D sub = gauss_legendre(p + 3);
  const int ns = sub.size(), npts = pow_d(ns, d);
  Vec x(space.num_dofs(), 0.0);
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    const ElementTransform T = space.mesh().transform(e);
    for (int i = 0; i < nb; ++i) {
      const std::array<int, 3> ii{i % p, (i / p) % p, i / (p * p)};
      double s = 0.0;
      for (int k = 0; k < npts; ++k) {
        Point xh{0, 0, 0};
        double w = 1.0;
        int kk = k;
        for (int a = 0; a < d; ++a) {
          const double lo = gll.nodes[ii[a]], hi = gll.nodes[ii[a] + 1];
          const int q = kk % ns;
          kk /= ns;
          xh[a] = lo + (hi - lo) * sub.nodes[q];
          w *= (hi - lo) * sub.weights[q];
        }
        s += w * checked_jacobian(T, xh, e).det * g(T.map(xh));
      }
      x[static_cast<std::size_t>(e) * nb + i] = s;
    }
  }
  return x;
}

Vec l2_constant_coefficients(const L2Space& space) {
  return l2_interpolate(space, [](const Point&) { return 1.0; });
}

double rt_l2_error(const RtSpace& space, std::span<const double> uh, const VectorField& u) {
  const int d = space.dim(), p = space.degree(), nloc = space.dofs_per_element();
  const ElementQuadrature quad = make_quadrature(d, p + 3);
  const Dense1D bl(eval_basis(Basis1D::GllNodal, p + 1, quad.rule.nodes));
  const Dense1D bh(eval_basis(Basis1D::Histopolation, p, quad.rule.nodes));
  const auto& off = space.topology().face_offset;
  const int nq = quad.num_points();
  Vec xl(nloc), uq(static_cast<std::size_t>(d) * nq), tw;
  double err = 0.0;
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    const ElementTransform T = space.mesh().transform(e);
    const auto dofs = space.element_dofs(e);
    const auto sg = space.element_orientation(e);
    for (int j = 0; j < nloc; ++j) xl[j] = sg[j] * uh[dofs[j]];
    for (int c = 0; c < d; ++c) tensor_apply(d, rt_factors(c, bl, bh), false, xl.data() + off[c], uq.data() + c * nq, tw);
    for (int q = 0; q < nq; ++q) {
      const Point xh = quad.point(q);
      const Jacobian jac = checked_jacobian(T, xh, e);
      const Point ue = u(T.map(xh));
      double s = 0.0;
      for (int r = 0; r < d; ++r) {
        double v = 0.0;
        for (int c = 0; c < d; ++c) v += jac.J[r][c] * uq[c * nq + q];
        const double diff = ue[r] - v / jac.det;
        s += diff * diff;
      }
      err += quad.weight(q) * jac.det * s;
    }
  }
  return std::sqrt(err);
}

double l2_l2_error(const L2Space& space, std::span<const double> qh, const ScalarField& qex) {
  const int d = space.dim(), p = space.degree(), nb = space.dofs_per_element();
  const ElementQuadrature quad = make_quadrature(d, p + 3);
  const Dense1D bh(eval_basis(Basis1D::Histopolation, p, quad.rule.nodes));
  const std::array<const Dense1D*, 3> B{&bh, &bh, &bh};
  const int nq = quad.num_points();
  Vec vq(nq), tw;
  double err = 0.0;
  for (int e = 0; e < space.mesh().num_elements(); ++e) {
    const ElementTransform T = space.mesh().transform(e);
    tensor_apply(d, B, false, qh.data() + static_cast<std::size_t>(e) * nb, vq.data(), tw);
    for (int q = 0; q < nq; ++q) {
      const Point xh = quad.point(q);
      const Jacobian jac = checked_jacobian(T, xh, e);
      const double diff = qex(T.map(xh)) - vq[q] / jac.det;
      err += quad.weight(q) * jac.det * diff * diff;
    }
  }
  return std::sqrt(err);
}

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/solvers.hpp"

#include "hdiv/analysis.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace hdiv {

namespace {


double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool is_darcy(ProblemKind k) { return k != ProblemKind::GradDiv; }

// Dense pseudo-inverse of a symmetric positive semidefinite matrix.
class DensePinv : public SpdOperator {
 public:
  explicit DensePinv(const Matrix& a) : n_(static_cast<int>(a.rows())) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    const Vec ev(es.eigenvalues().data(), es.eigenvalues().data() + n_);
    const double cut = 1e-12 * std::max(std::abs(ev.front()), std::abs(ev.back()));
    Eigen::VectorXd inv(n_);
    for (int i = 0; i < n_; ++i) inv[i] = std::abs(ev[i]) > cut ? 1.0 / ev[i] : 0.0;
    pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }
  int size() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override {
    Eigen::Map<const Eigen::VectorXd> xm(x.data(), n_);
    Eigen::Map<Eigen::VectorXd> ym(y.data(), n_);
    ym = pinv_ * xm;
  }

 private:
  int n_;
  Matrix pinv_;
};

MassInverseOptions mass_inverse_options(const SolveOptions& o, int p) {
  MassInverseOptions mo;
  mo.kind = o.mass_inverse ? *o.mass_inverse : default_mass_inverse(p);
  mo.tol = o.local_tol > 0.0 ? o.local_tol : o.tol * 1e-2;
  mo.exec = o.exec;
  return mo;
}

}  // namespace

const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::GradDiv: return "graddiv";
    case ProblemKind::DarcyNonzero: return "darcy";
    case ProblemKind::DarcyZero: return "darcy-zero";
  }
  return "?";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "graddiv" || s == "grad-div") return ProblemKind::GradDiv;
  if (s == "darcy") return ProblemKind::DarcyNonzero;
  if (s == "darcy-zero" || s == "darcy0") return ProblemKind::DarcyZero;
  throw Error(ErrorCode::Config, "unknown problem kind '" + s + "'");
}

SaddleSystem::SaddleSystem(const SaddleProblem& problem) : problem_(problem) {
  const SolveOptions& o = problem_.options;
  if (!problem_.mesh) throw Error(ErrorCode::Config, "problem has no mesh");
  if (problem_.p < 1) throw Error(ErrorCode::InvalidOrder, "RT degree must be >= 1");
  if (!(o.tau > 0.0)) throw Error(ErrorCode::Config, "tau must be positive");
  if (!(o.tol > 0.0)) throw Error(ErrorCode::Config, "tol must be positive");
  if (problem_.kind == ProblemKind::DarcyZero && !problem_.gamma.is_zero())
    throw Error(ErrorCode::Config, "darcy-zero requires gamma = 0");
  if (problem_.kind == ProblemKind::DarcyNonzero && problem_.gamma.is_zero())
    throw Error(ErrorCode::Config, "gamma = 0 needs the darcy-zero problem kind");

  rt_ = std::make_unique<RtSpace>(problem_.mesh, problem_.p);
  l2_ = std::make_unique<L2Space>(problem_.mesh, problem_.p);
  D_ = build_divergence_csr(*rt_, *l2_, o.exec);

  essential_.assign(nu(), 0);
  for (int g : boundary_dofs(*rt_, problem_.essential)) essential_[g] = 1;
  for (int i = 0; i < nu(); ++i)
    if (!essential_[i]) free_.push_back(i);

  Dt_free_ = D_.transpose();
  for (int i = 0; i < nu(); ++i)
    if (essential_[i])
      for (int k = Dt_free_.row_ptr[i]; k < Dt_free_.row_ptr[i + 1]; ++k) Dt_free_.val[k] = 0.0;

  const MassInverseOptions mo = mass_inverse_options(o, problem_.p);
  if (is_darcy(problem_.kind)) {
    M_ = std::make_unique<RtMassOperator>(*rt_, problem_.eps.reciprocal(), o.exec);
    W_ = std::make_unique<L2MassOperator>(*l2_, Coefficient(1.0), Basis1D::Histopolation, o.exec);
    if (problem_.kind == ProblemKind::DarcyNonzero) {
      W_gamma_ = std::make_unique<L2MassOperator>(*l2_, problem_.gamma, Basis1D::Histopolation, o.exec);
      if (problem_.gamma.elementwise_constant()) {
        W_inv_gamma_ =
            std::make_unique<L2MassOperator>(*l2_, problem_.gamma.reciprocal(), Basis1D::Histopolation, o.exec);
        Winv_gamma_ = std::make_unique<MassInverse>(*W_inv_gamma_, mo);
      }
    }
  } else {
    M_ = std::make_unique<RtMassOperator>(*rt_, problem_.beta, o.exec);
    W_ = std::make_unique<L2MassOperator>(*l2_, problem_.alpha, Basis1D::Histopolation, o.exec);
  }
  Winv_ = std::make_unique<MassInverse>(*W_, mo);

  Vec md = M_->diagonal().entries();
  for (int i = 0; i < nu(); ++i)
    if (essential_[i]) md[i] = 1.0;
  m_diag_ = DiagonalMatrix(std::move(md));

  u_bc_.assign(nu(), 0.0);
  if (problem_.u_boundary) {
    const Vec ub = rt_interpolate(*rt_, problem_.u_boundary);
    for (int i = 0; i < nu(); ++i)
      if (essential_[i]) u_bc_[i] = ub[i];
  }
  tu_.resize(nu());
  tu2_.resize(nu());
  tq_.resize(nq());
  tq2_.resize(nq());
}

SaddleSystem::~SaddleSystem() = default;

void SaddleSystem::apply(std::span<const double> x, std::span<double> y) const {
  const int n = nu(), m = nq();
  const auto xu = x.subspan(0, n), xq = x.subspan(n, m);
  auto yu = y.subspan(0, n), yq = y.subspan(n, m);
  for (int i = 0; i < n; ++i) tu_[i] = essential_[i] ? 0.0 : xu[i];
  M_->apply(tu_, yu);
  Dt_free_.multiply(xq, tu2_, problem_.options.exec);
  for (int i = 0; i < n; ++i) yu[i] = essential_[i] ? xu[i] : yu[i] + tu2_[i];
  D_.multiply(tu_, yq, problem_.options.exec);
  if (problem_.kind == ProblemKind::DarcyZero) return;
  apply_c(xq, tq2_);
  for (int i = 0; i < m; ++i) yq[i] -= tq2_[i];
}

void SaddleSystem::apply_c(std::span<const double> x, std::span<double> y) const {
  switch (problem_.kind) {
    case ProblemKind::GradDiv: Winv_->apply(x, y); return;
    case ProblemKind::DarcyZero: std::fill(y.begin(), y.end(), 0.0); return;
    case ProblemKind::DarcyNonzero:
      if (Winv_gamma_ && problem_.options.simplify_darcy)
        apply_darcy_simplified(x, y);
      else
        apply_darcy_general(x, y);
      return;
  }
}

void SaddleSystem::apply_darcy_general(std::span<const double> x, std::span<double> y) const {
  if (!W_gamma_) throw Error(ErrorCode::Config, "general Darcy form needs gamma != 0");
  Vec a(nq()), b(nq());
  Winv_->apply(x, a);
  W_gamma_->apply(a, b);
  Winv_->apply(b, y);
}

void SaddleSystem::apply_darcy_simplified(std::span<const double> x, std::span<double> y) const {
  if (!Winv_gamma_) throw Error(ErrorCode::Config, "simplified Darcy form needs element-wise constant gamma != 0");
  Winv_gamma_->apply(x, y);
}

long SaddleSystem::mass_inverse_applies() const {
  return Winv_->applies() + (Winv_gamma_ ? Winv_gamma_->applies() : 0);
}

Vec SaddleSystem::rhs() const {
  const int n = nu(), m = nq();
  Vec b(n + m, 0.0);
  Vec mu(n), du(m);
  M_->apply(u_bc_, mu);
  D_.multiply(u_bc_, du);
  if (problem_.f) {
    const Vec fu = is_darcy(problem_.kind) ? assemble_rt_load(*rt_, problem_.f, problem_.eps.reciprocal())
                                           : assemble_rt_load(*rt_, problem_.f);
    for (int i = 0; i < n; ++i) b[i] = fu[i];
  }
  for (int i = 0; i < n; ++i) b[i] = essential_[i] ? 0.0 : b[i] - mu[i];
  if (is_darcy(problem_.kind) && problem_.g) {
    const Vec gq = assemble_l2_load(*l2_, problem_.g);
    Winv_->apply(gq, std::span<double>(b).subspan(n, m));
  }
  for (int i = 0; i < m; ++i) b[n + i] -= du[i];
  return b;
}

Vec SaddleSystem::schur_shift() const {
  const Vec wd = W_->diagonal().entries();
  Vec s(nq(), 0.0);
  switch (problem_.kind) {
    case ProblemKind::GradDiv:
      for (int i = 0; i < nq(); ++i) s[i] = 1.0 / wd[i];
      break;
    case ProblemKind::DarcyNonzero: {
      const Vec gd = W_gamma_->diagonal().entries();
      for (int i = 0; i < nq(); ++i) s[i] = gd[i] / (wd[i] * wd[i]);
      break;
    }
    case ProblemKind::DarcyZero: break;
  }
  return s;
}

SparseMatrixCsr SaddleSystem::schur_approx() const {
  return build_schur_approx_shift(*rt_, *l2_, schur_shift(), M_->diagonal().entries(), essential_);
}

void SaddleSystem::recover(std::span<const double> x, Vec& u, Vec& q) const {
  u.assign(nu(), 0.0);
  for (int i = 0; i < nu(); ++i) u[i] = u_bc_[i] + (essential_[i] ? 0.0 : x[i]);
  q.assign(nq(), 0.0);
  Winv_->apply(x.subspan(nu(), nq()), q);
}

double SaddleSystem::untransformed_residual(const Vec& u, const Vec& q) const {
  const int n = nu(), m = nq();
  // Untransformed blocks: [M, D^T W; W D, -C'] with W the transformation
  // mass and C' = W_alpha (grad-div), W_gamma (Darcy) or 0.
  Vec f(n, 0.0), g(m, 0.0);
  if (problem_.f)
    f = is_darcy(problem_.kind) ? assemble_rt_load(*rt_, problem_.f, problem_.eps.reciprocal())
                                : assemble_rt_load(*rt_, problem_.f);
  if (is_darcy(problem_.kind) && problem_.g) g = assemble_l2_load(*l2_, problem_.g);

  Vec mu(n), wq(m), dtwq(n), du(m), wdu(m), cq(m, 0.0);
  M_->apply(u, mu);
  W_->apply(q, wq);
  Dt_free_.multiply(wq, dtwq);
  D_.multiply(u, du);
  W_->apply(du, wdu);
  if (problem_.kind == ProblemKind::GradDiv) cq = wq;
  if (problem_.kind == ProblemKind::DarcyNonzero) W_gamma_->apply(q, cq);

  // Right-hand side norm after moving the lifting to the right.
  Vec mb(n), db(m), wdb(m);
  M_->apply(u_bc_, mb);
  D_.multiply(u_bc_, db);
  W_->apply(db, wdb);
  double r2 = 0.0, b2 = 0.0;
  for (int i = 0; i < n; ++i) {
    if (essential_[i]) continue;
    const double r = mu[i] + dtwq[i] - f[i];
    const double b = f[i] - mb[i];
    r2 += r * r;
    b2 += b * b;
  }
  for (int i = 0; i < m; ++i) {
    const double r = wdu[i] - cq[i] - g[i];
    const double b = g[i] - wdb[i];
    r2 += r * r;
    b2 += b * b;
  }
  return b2 > 0.0 ? std::sqrt(r2 / b2) : std::sqrt(r2);
}

SaddleSolution solve(const SaddleSystem& sys) {
  const auto t0 = std::chrono::steady_clock::now();
  const SolveOptions& o = sys.problem().options;
  const int n = sys.nu(), m = sys.nq();
  // Darcy with gamma = 0 and flux given everywhere fixes p only up to a constant.
  const bool neumann = o.pure_neumann || (sys.problem().kind == ProblemKind::DarcyZero &&
                                          sys.problem().essential == all_boundary_attributes(sys.rt().dim()));

  SaddleSolution sol;
  const SparseMatrixCsr S = sys.schur_approx();
  std::unique_ptr<SpdOperator> schur_inv;
  if (o.schur == SchurSolverKind::Amg) {
    auto amg = std::make_unique<AmgHierarchy>(S, o.amg);
    sol.amg = amg->stats();
    schur_inv = std::move(amg);
  } else {
    schur_inv = std::make_unique<DensePinv>(S.to_dense());
  }

  Vec b = sys.rhs();
  const Vec ones(m, 1.0);
  if (neumann) project_constants(std::span<double>(b).subspan(n, m), ones);
  Vec x(n + m, 0.0);
  for (int i = 0; i < n; ++i)
    if (sys.essential_mask()[i]) x[i] = b[i];
  sol.setup_seconds = seconds_since(t0);

  KrylovOptions ko;
  ko.tol = o.tol;
  ko.max_iterations = o.max_iterations;
  ko.restart = o.restart;
  std::unique_ptr<LinearOperator> P;
  const DiagonalMatrix& md = sys.m_diag();
  FunctionOperator m_inv(n, [&md](std::span<const double> in, std::span<double> out) { md.apply_inverse(in, out); });
  if (o.precond == PrecondKind::BlockDiagonal) {
    auto bd = std::make_unique<BlockDiagonalPreconditioner>(sys.m_diag(), *schur_inv, o.tau);
    if (neumann) bd->set_projection(ones);
    P = std::move(bd);
  } else {
    auto bt = std::make_unique<BlockTriangularPreconditioner>(m_inv, sys.Dt_free(), *schur_inv);
    if (neumann) bt->set_projection(ones);
    P = std::move(bt);
  }
  // Only applications inside the Krylov iterations are counted.
  auto run = [&](const KrylovOptions& k) {
    const long before = sys.mass_inverse_applies();
    SolverReport r = o.precond == PrecondKind::BlockDiagonal
                         ? minres(sys, static_cast<const SpdOperator&>(*P), b, x, k)
                         : gmres(sys, *P, b, x, k);
    sol.mass_inverse_applies += sys.mass_inverse_applies() - before;
    return r;
  };
  // Coefficients of the constant 1 and its W-weighted measure, for the
  // zero-mean pressure normalization.
  Vec one_h, w_one;
  double area = 0.0;
  if (neumann) {
    one_h = l2_constant_coefficients(sys.l2());
    w_one = sys.W() * one_h;
    for (int i = 0; i < m; ++i) area += one_h[i] * w_one[i];
  }
  auto finish = [&] {
    if (neumann) project_constants(std::span<double>(x).subspan(n, m), ones);
    sys.recover(x, sol.u, sol.q);
    if (neumann) {
      double mean = 0.0;
      for (int i = 0; i < m; ++i) mean += w_one[i] * sol.q[i];
      mean /= area;
      for (int i = 0; i < m; ++i) sol.q[i] -= mean * one_h[i];
    }
    sol.untransformed_residual = sys.untransformed_residual(sol.u, sol.q);
  };

  sol.report = run(ko);
  finish();
  // The stopping test sees the preconditioned transformed residual; mapping
  // back scales the q-rows by W, so keep iterating until the untransformed
  // residual also meets the tolerance.
  const double target = 10.0 * o.tol;
  for (int pass = 0; pass < 4 && sol.report.converged && sol.untransformed_residual > target; ++pass) {
    KrylovOptions kp = ko;
    kp.tol = std::max(0.2 * target / sol.untransformed_residual, 1e-6);
    kp.max_iterations = std::max(1, o.max_iterations - sol.report.iterations - sol.polish_iterations);
    const SolverReport r = run(kp);
    sol.polish_iterations += r.iterations;
    sol.report.seconds += r.seconds;
    finish();
  }
  return sol;
}

SaddleSolution solve(const SaddleProblem& problem) {
  const auto t0 = std::chrono::steady_clock::now();
  SaddleSystem sys(problem);
  const double build = seconds_since(t0);
  SaddleSolution s = solve(sys);
  s.setup_seconds += build;
  return s;
}

PrimalSolution solve_primal(const SaddleProblem& problem, double tol, int max_iterations) {
  Coefficient alpha = problem.alpha, beta = problem.beta;
  if (problem.kind == ProblemKind::DarcyZero) throw Error(ErrorCode::Config, "no primal form for gamma = 0");
  if (problem.kind == ProblemKind::DarcyNonzero) {
    if (!problem.gamma.elementwise_constant())
      throw Error(ErrorCode::Config, "primal Darcy form needs element-wise constant gamma");
    alpha = problem.gamma.reciprocal();
    beta = problem.eps.reciprocal();
  }
  const Exec exec = problem.options.exec;
  const RtSpace rt(problem.mesh, problem.p);
  const L2Space l2(problem.mesh, problem.p);
  const SparseMatrixCsr D = build_divergence_csr(rt, l2, exec);
  const RtMassOperator M(rt, beta, exec);
  const L2MassOperator W(l2, alpha, Basis1D::Histopolation, exec);
  const GradDivPrimalOperator A(M, W, D);
  const int n = rt.num_dofs();

  std::vector<char> ess(n, 0);
  for (int g : boundary_dofs(rt, problem.essential)) ess[g] = 1;
  Vec ub(n, 0.0);
  if (problem.u_boundary) {
    const Vec all = rt_interpolate(rt, problem.u_boundary);
    for (int i = 0; i < n; ++i)
      if (ess[i]) ub[i] = all[i];
  }

  Vec f(n, 0.0);
  if (problem.f) f = assemble_rt_load(rt, problem.f, problem.kind == ProblemKind::GradDiv ? Coefficient(1.0) : beta);
  if (problem.kind == ProblemKind::DarcyNonzero && problem.g) {
    // Eliminating p adds D^T (G / gamma) with G the L2 load.
    Vec gq = assemble_l2_load(l2, problem.g);
    for (int i = 0; i < l2.num_dofs(); ++i) gq[i] /= problem.gamma.element_value(l2.element_of(i));
    Vec t(n);
    D.multiply_transpose(gq, t);
    for (int i = 0; i < n; ++i) f[i] += t[i];
  }
  Vec au(n);
  A.apply(ub, au);
  Vec b(n);
  for (int i = 0; i < n; ++i) b[i] = ess[i] ? 0.0 : f[i] - au[i];

  Vec tmp(n);
  FunctionOperator Ac(n, [&](std::span<const double> x, std::span<double> y) {
    for (int i = 0; i < n; ++i) tmp[i] = ess[i] ? 0.0 : x[i];
    A.apply(tmp, y);
    for (int i = 0; i < n; ++i)
      if (ess[i]) y[i] = x[i];
  });
  Vec dg = A.diagonal().entries();
  for (int i = 0; i < n; ++i)
    if (ess[i]) dg[i] = 1.0;
  const DiagonalMatrix dm(std::move(dg));
  const SpdFunctionOperator jacobi(n, [&dm](std::span<const double> x, std::span<double> y) { dm.apply_inverse(x, y); });

  KrylovOptions ko;
  ko.tol = tol;
  ko.max_iterations = max_iterations > 0 ? max_iterations : 20 * n + 100;
  PrimalSolution sol;
  sol.u.assign(n, 0.0);
  sol.report = cg(Ac, jacobi, b, sol.u, ko);
  for (int i = 0; i < n; ++i) sol.u[i] = ess[i] ? ub[i] : sol.u[i] + ub[i];
  return sol;
}

double m_norm_difference(const RtMassOperator& M, std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  Vec d(n), md(n), mb(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  M.apply(d, md);
  M.apply(b, mb);
  double dd = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dd += d[i] * md[i];
    bb += b[i] * mb[i];
  }
  return bb > 0.0 ? std::sqrt(dd / bb) : std::sqrt(dd);
}

DenseSaddleBlocks dense_transformed_blocks(const SaddleSystem& sys) {
  const std::vector<int>& fr = sys.free_dofs();
  const int nf = static_cast<int>(fr.size()), m = sys.nq();
  const Matrix Mfull = sys.M().assemble_dense();
  const Matrix Dfull = sys.D().to_dense();
  DenseSaddleBlocks b;
  b.M.resize(nf, nf);
  b.D.resize(m, nf);
  for (int j = 0; j < nf; ++j) {
    for (int i = 0; i < nf; ++i) b.M(i, j) = Mfull(fr[i], fr[j]);
    for (int i = 0; i < m; ++i) b.D(i, j) = Dfull(i, fr[j]);
  }
  const FunctionOperator c(m, [&sys](std::span<const double> x, std::span<double> y) { sys.apply_c(x, y); });
  b.C = densify(c);
  b.C = 0.5 * (b.C + b.C.transpose());
  return b;
}

Matrix assemble_saddle(const DenseSaddleBlocks& b) {
  const auto n = b.M.rows(), m = b.D.rows();
  Matrix a = Matrix::Zero(n + m, n + m);
  a.topLeftCorner(n, n) = b.M;
  a.topRightCorner(n, m) = b.D.transpose();
  a.bottomLeftCorner(m, n) = b.D;
  a.bottomRightCorner(m, m) = -b.C;
  return a;
}

Matrix exact_block_preconditioner(const DenseSaddleBlocks& b, double tau) {
  const auto n = b.M.rows(), m = b.D.rows();
  Matrix p = Matrix::Zero(n + m, n + m);
  p.topLeftCorner(n, n) = tau * b.M;
  const Matrix minv_dt = b.M.llt().solve(b.D.transpose());
  p.bottomRightCorner(m, m) = b.C + b.D * minv_dt;
  return p;
}

SchurStudyRow untransformed_schur_study(std::shared_ptr<const Mesh> mesh, int p) {
  const RtSpace rt(mesh, p);
  const L2Space l2(mesh, p);
  const SparseMatrixCsr Ds = build_divergence_csr(rt, l2, Exec::Serial);
  const RtMassOperator Mo(rt, Coefficient(1.0), Exec::Serial);
  const L2MassOperator Wo(l2, Coefficient(1.0), Basis1D::Histopolation, Exec::Serial);
  const Matrix M = Mo.assemble_dense(), W = Wo.assemble_dense(), D = Ds.to_dense();
  const Eigen::VectorXd md = M.diagonal(), wd = W.diagonal();

  const Matrix dmd = D * M.llt().solve(D.transpose());
  const Matrix dmd_diag = D * md.cwiseInverse().asDiagonal() * D.transpose();
  const Matrix S = W.inverse() + dmd;
  const Matrix St = Matrix(wd.cwiseInverse().asDiagonal()) + dmd_diag;
  const Matrix Sp = W + W * dmd * W;
  const Matrix Stp = Matrix(wd.asDiagonal()) + wd.asDiagonal() * dmd_diag * wd.asDiagonal();

  SchurStudyRow row;
  row.p = p;
  row.kappa_transformed = generalized_condition(0.5 * (S + S.transpose()), St);
  row.kappa_untransformed = generalized_condition(0.5 * (Sp + Sp.transpose()), Stp);
  return row;
}

std::pair<Coefficient, Coefficient> two_material_coefficients(const Mesh& mesh) {
  const int ne = mesh.num_elements();
  Vec a(ne), b(ne);
  for (int e = 0; e < ne; ++e) {
    const Point c = mesh.transform(e).map({0.5, 0.5, 0.5});
    const bool first = c[0] < 0.5;
    a[e] = first ? 1.88e-3 : 1.641;
    b[e] = first ? 2000.0 : 0.2;
  }
  return {Coefficient::per_element(std::move(a)), Coefficient::per_element(std::move(b))};
}

Coefficient log_uniform_field(const Mesh& mesh, double contrast, unsigned long seed) {
  if (!(contrast >= 1.0)) throw Error(ErrorCode::Config, "contrast must be >= 1");
  const int ne = mesh.num_elements();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Vec u(ne);
  for (double& x : u) x = dist(rng);
  // Stretch so the extremes hit the requested contrast exactly.
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  const double a = *lo, w = *hi - *lo, half = 0.5 * std::log10(contrast);
  Vec v(ne);
  for (int e = 0; e < ne; ++e) {
    const double t = (ne > 1 && w > 0.0) ? (u[e] - a) / w : 0.5;
    v[e] = std::pow(10.0, -half + 2.0 * half * t);
  }
  return Coefficient::per_element(std::move(v));
}

ManufacturedSolution graddiv_manufactured(int dim) {
  using std::cos, std::sin;
  constexpr double pi = std::numbers::pi;
  ManufacturedSolution m;
  if (dim == 2) {
    // Gradient part plus half a divergence-free part.
    m.u = [](const Point& x) {
      const double sx = sin(pi * x[0]), cx = cos(pi * x[0]), sy = sin(pi * x[1]), cy = cos(pi * x[1]);
      return Point{sx * cy + 0.5 * sx * cy, cx * sy - 0.5 * cx * sy, 0.0};
    };
    m.f = [](const Point& x) {
      const double sx = sin(pi * x[0]), cx = cos(pi * x[0]), sy = sin(pi * x[1]), cy = cos(pi * x[1]);
      const double k = 2.0 * pi * pi + 1.0;
      return Point{k * sx * cy + 0.5 * sx * cy, k * cx * sy - 0.5 * cx * sy, 0.0};
    };
    m.div_u = [](const Point& x) { return 2.0 * pi * cos(pi * x[0]) * cos(pi * x[1]); };
  } else if (dim == 3) {
    m.u = [](const Point& x) {
      const double sx = sin(pi * x[0]), cx = cos(pi * x[0]), sy = sin(pi * x[1]), cy = cos(pi * x[1]);
      const double sz = sin(pi * x[2]), cz = cos(pi * x[2]);
      return Point{sx * cy * cz, cx * sy * cz, cx * cy * sz};
    };
    m.f = [u = m.u](const Point& x) {
      Point v = u(x);
      for (double& c : v) c *= 3.0 * pi * pi + 1.0;
      return v;
    };
    m.div_u = [](const Point& x) { return 3.0 * pi * cos(pi * x[0]) * cos(pi * x[1]) * cos(pi * x[2]); };
  } else {
    throw Error(ErrorCode::Config, "dimension must be 2 or 3");
  }
  return m;
}

std::vector<MmsRow> mms_study(int dim, int p, const std::vector<int>& ns, const SolveOptions& opts) {
  const ManufacturedSolution ms = graddiv_manufactured(dim);
  std::vector<MmsRow> rows;
  for (int n : ns) {
    auto mesh = std::make_shared<const Mesh>(cartesian_mesh(dim, {n, n, dim == 3 ? n : 1}));
    SaddleProblem pr;
    pr.kind = ProblemKind::GradDiv;
    pr.mesh = mesh;
    pr.p = p;
    pr.f = ms.f;
    pr.u_boundary = ms.u;
    pr.essential = all_boundary_attributes(dim);
    pr.options = opts;
    SaddleSystem sys(pr);
    const SaddleSolution s = solve(sys);
    if (!s.report.converged)
      throw Error(ErrorCode::IterationLimit, "MMS solve did not converge on n = " + std::to_string(n));
    MmsRow r;
    r.n = n;
    r.h = 1.0 / n;
    r.error = rt_l2_error(sys.rt(), s.u, ms.u);
    r.iterations = s.report.iterations;
    if (!rows.empty()) r.rate = std::log(rows.back().error / r.error) / std::log(rows.back().h / r.h);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hdiv

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include "hdiv/analysis.hpp"
#include "hdiv/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

namespace hdiv {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "] ";
    }
  }
};

std::shared_ptr<const Mesh> box(int dim, int n) { return std::make_shared<const Mesh>(cartesian_mesh(dim, {n, n, n})); }

std::shared_ptr<const Mesh> jitter(const Mesh& m, unsigned seed, double amp = 0.15) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  const double h = 1.0 / m.cells()[0];
  return std::make_shared<const Mesh>(skew_mesh(m, [&](const Point& x, int) {
    Point d{0, 0, 0};
    for (int a = 0; a < m.dim(); ++a)
      if (x[a] > 1e-12 && x[a] < 1 - 1e-12) d[a] = u(gen) * h;
    return d;
  }));
}

SaddleProblem graddiv(std::shared_ptr<const Mesh> mesh, int p, bool essential = true) {
  SaddleProblem pr;
  pr.mesh = std::move(mesh);
  pr.p = p;
  if (essential) pr.essential = all_boundary_attributes(pr.mesh->dim());
  const ManufacturedSolution ms = graddiv_manufactured(pr.mesh->dim());
  pr.f = ms.f;
  pr.u_boundary = ms.u;
  return pr;
}

// Desk-scale systems for the exact-block spectral criteria: natural boundary
// conditions keep every RT DOF, exact W^{-1}.
std::vector<DenseSaddleBlocks> spectral_instances() {
  std::vector<DenseSaddleBlocks> v;
  for (int n : {1, 2})
    for (int p : {1, 2, 3}) {
      SaddleProblem pr = graddiv(n == 1 ? box(2, 1) : jitter(cartesian_mesh(2, {2, 2, 1}), 3), p, false);
      pr.alpha = n == 1 ? Coefficient(1.0) : Coefficient::per_element(Vec{0.3, 2, 5, 1});
      pr.options.mass_inverse = MassInverseKind::Factorize;
      v.push_back(dense_transformed_blocks(SaddleSystem(pr)));
    }
  return v;
}

void criterion_intervals(Outcome& o, double tau, double kappa_max) {
  double worst = 0.0;
  int count = 0;
  for (const DenseSaddleBlocks& b : spectral_instances()) {
    const SpectrumReport s = generalized_spectrum(assemble_saddle(b), exact_block_preconditioner(b, tau));
    const IntervalReport ir = interval_check(s.eigenvalues, exact_block_intervals(tau), 1e-8);
    o.require(ir.ok, "eigenvalue outside interval");
    worst = std::max(worst, s.kappa);
    ++count;
  }
  o.require(worst <= kappa_max, "kappa too large");
  o.detail << "instances=" << count << " max_kappa=" << worst;
}

void c1(Outcome& o) { criterion_intervals(o, 1.0, (1.0 + std::sqrt(5.0)) / 2.0 / ((std::sqrt(5.0) - 1.0) / 2.0) + 1e-6); }

void c2(Outcome& o) {
  criterion_intervals(o, 2.0, 2.0 + 1e-6);
  double k1 = 0, k4 = 0;
  for (const DenseSaddleBlocks& b : spectral_instances()) {
    const Matrix A = assemble_saddle(b);
    k1 = std::max(k1, generalized_condition(A, exact_block_preconditioner(b, 1.0)));
    k4 = std::max(k4, generalized_condition(A, exact_block_preconditioner(b, 4.0)));
  }
  o.require(k1 > 2.0 && k4 > 2.0, "tau in {1,4} not worse than 2");
  o.detail << " kappa(tau=1)=" << k1 << " kappa(tau=4)=" << k4;
}

class DenseOp : public SpdOperator {
 public:
  explicit DenseOp(Matrix a) : a_(std::move(a)) {}
  int size() const override { return static_cast<int>(a_.rows()); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) = a_ * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  }

 private:
  Matrix a_;
};

void c3(Outcome& o) {
  SaddleProblem pr = graddiv(jitter(cartesian_mesh(2, {3, 3, 1}), 1), 2, false);
  pr.options.mass_inverse = MassInverseKind::Factorize;
  const DenseSaddleBlocks b = dense_transformed_blocks(SaddleSystem(pr));
  const Matrix A = assemble_saddle(b);
  const Matrix Minv = b.M.inverse();
  const Matrix S = b.C + b.D * Minv * b.D.transpose();
  const DenseOp Aop(A), Mop(Minv), Sop(S.inverse());
  const SparseMatrixCsr Dt = SparseMatrixCsr::from_dense(b.D.transpose());
  const BlockTriangularPreconditioner P(Mop, Dt, Sop);
  const int n = static_cast<int>(A.rows());
  Vec rhs(n), x(n, 0.0);
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : rhs) v = u(gen);
  const SolverReport r = gmres(Aop, P, rhs, x, {1e-12, 50, 50});
  const Eigen::VectorXd res = A * Eigen::Map<const Eigen::VectorXd>(x.data(), n) - Eigen::Map<const Eigen::VectorXd>(rhs.data(), n);
  const double rel = res.norm() / Eigen::Map<const Eigen::VectorXd>(rhs.data(), n).norm();
  o.require(r.converged && r.iterations <= 2 && rel <= 1e-12, "GMRES did not converge in two iterations");
  o.detail << "size=" << n << " iterations=" << r.iterations << " residual=" << rel;
}

void c4(Outcome& o) {
  int cases = 0;
  for (int dim : {2, 3})
    for (int n = 1; n <= 4; ++n)
      for (int p = 1; p <= 4; ++p) {
        auto mesh = box(dim, n);
        const RtSpace rt(mesh, p);
        const L2Space l2(mesh, p);
        const SparseMatrixCsr D = build_divergence_csr(rt, l2);
        try {
          divergence_column_check(D, dim, &rt);
        } catch (const Error& e) {
          o.require(false, e.what());
        }
        auto sk = jitter(*mesh, 17 + n + p);
        const SparseMatrixCsr Ds = build_divergence_csr(RtSpace(sk, p), L2Space(sk, p));
        o.require(Ds.row_ptr == D.row_ptr && Ds.col == D.col && Ds.val == D.val, "D changed under skewing");
        o.require(refined_mesh_equivalence(D, rt, l2), "refined-mesh equivalence");
        ++cases;
      }
  o.detail << "cases=" << cases;
}

// Benchmark instances: (mesh, degree, coefficient regime).
struct SchurInstance {
  std::string name;
  SaddleProblem problem;
};

std::vector<SchurInstance> benchmark_instances() {
  std::vector<SchurInstance> v;
  for (int n : {2, 4, 8})
    for (int p = 1; p <= 4; ++p) {
      auto mesh = box(2, n);
      SaddleProblem c = graddiv(mesh, p);
      v.push_back({"constant", c});
      SaddleProblem t = c;
      std::tie(t.alpha, t.beta) = two_material_coefficients(*mesh);
      v.push_back({"two-material", t});
      SaddleProblem d;
      d.kind = ProblemKind::DarcyNonzero;
      d.mesh = mesh;
      d.p = p;
      d.eps = log_uniform_field(*mesh, 1e7, 7);
      d.essential = all_boundary_attributes(2);
      v.push_back({"darcy-log-uniform", d});
      SaddleProblem z = d;
      z.kind = ProblemKind::DarcyZero;
      z.gamma = 0.0;
      v.push_back({"darcy-zero", z});
    }
  for (int p = 1; p <= 3; ++p) v.push_back({"constant-3d", graddiv(box(3, 2), p)});
  return v;
}

void c5(Outcome& o) {
  int count = 0;
  double worst = 0.0;
  for (const SchurInstance& in : benchmark_instances()) {
    const SaddleSystem sys(in.problem);
    const SparseMatrixCsr S = sys.schur_approx();
    Vec minv(sys.nu());
    for (int i = 0; i < sys.nu(); ++i) minv[i] = sys.essential_mask()[i] ? 0.0 : 1.0 / sys.m_diag()[i];
    const Vec shift = sys.schur_shift();
    const SparseMatrixCsr T = add_diagonal(triple_product(sys.D(), minv), shift);
    const Matrix diff = S.to_dense() - T.to_dense();
    const double scale = T.to_dense().cwiseAbs().maxCoeff();
    const double d = diff.cwiseAbs().maxCoeff() / scale;
    worst = std::max(worst, d);
    o.require(d <= 1e-13, in.name + " stencil differs from triple product");
    o.require(m_matrix_check(S, shift), in.name + " M-matrix check");
    ++count;
  }
  o.detail << "instances=" << count << " max_rel_diff=" << worst;
}

void c6(Outcome& o) {
  for (bool skewed : {false, true}) {
    auto mesh = skewed ? std::make_shared<const Mesh>(canonical_skewed_element(2)) : box(2, 1);
    double t3 = 0, u3 = 0;
    SchurStudyRow r6;
    for (int p = 1; p <= 6; ++p) {
      const SchurStudyRow r = untransformed_schur_study(mesh, p);
      o.require(r.kappa_transformed <= r.kappa_untransformed, "transformed worse at p=" + std::to_string(p));
      if (p <= 3) {
        t3 = std::max(t3, r.kappa_transformed);
        u3 = std::max(u3, r.kappa_untransformed);
      }
      r6 = r;
    }
    o.require(r6.kappa_transformed <= 2 * t3 && r6.kappa_untransformed <= 2 * u3, "growth in p");
    o.detail << (skewed ? " skewed" : "unit") << ": p6 transformed=" << r6.kappa_transformed << " (<= " << 2 * t3
             << ") untransformed=" << r6.kappa_untransformed << " (<= " << 2 * u3 << ")";
  }
}

void c7(Outcome& o) {
  auto mesh = std::make_shared<const Mesh>(canonical_skewed_element(2));
  double rt4 = 0, w4 = 0, rt8 = 0, w8 = 0, gl = 0;
  for (int p = 1; p <= 8; ++p) {
    const Matrix m = RtMassOperator(RtSpace(mesh, p), 1.0).assemble_dense();
    const Matrix w = L2MassOperator(L2Space(mesh, p), 1.0).assemble_dense();
    const Matrix g = L2MassOperator(L2Space(mesh, p), 1.0, Basis1D::GlNodal).assemble_dense();
    const double km = generalized_condition(m, Matrix(m.diagonal().asDiagonal()));
    const double kw = generalized_condition(w, Matrix(w.diagonal().asDiagonal()));
    gl = std::max(gl, generalized_condition(g, Matrix(g.diagonal().asDiagonal())));
    if (p <= 4) {
      rt4 = std::max(rt4, km);
      w4 = std::max(w4, kw);
    }
    if (p == 8) {
      rt8 = km;
      w8 = kw;
    }
  }
  o.require(rt8 <= 2 * rt4, "RT mass diagonal equivalence");
  o.require(w8 <= 2 * w4, "L2 mass diagonal equivalence");
  o.require(gl <= 1.5, "GL-nodal block conditioning");
  o.detail << "rt p8=" << rt8 << " (<= " << 2 * rt4 << ") l2 p8=" << w8 << " (<= " << 2 * w4 << ") gl max=" << gl;
}

void c8(Outcome& o) {
  std::vector<std::pair<std::string, SaddleProblem>> cases;
  auto mesh = box(2, 4);
  cases.emplace_back("constant", graddiv(mesh, 3));
  SaddleProblem t = graddiv(mesh, 3);
  std::tie(t.alpha, t.beta) = two_material_coefficients(*mesh);
  cases.emplace_back("two-material", t);
  SaddleProblem d;
  d.kind = ProblemKind::DarcyNonzero;
  d.mesh = mesh;
  d.p = 2;
  d.eps = log_uniform_field(*mesh, 1e7, 2024);
  d.gamma = 1.0;
  d.essential = all_boundary_attributes(2);
  d.f = [](const Point& x) { return Point{std::sin(std::numbers::pi * x[1]), x[0] * x[0], 0}; };
  d.g = [](const Point& x) { return std::cos(std::numbers::pi * x[0]); };
  cases.emplace_back("darcy-1e7", d);
  for (const auto& [name, pr] : cases) {
    const SaddleSolution s = solve(pr);
    const PrimalSolution ps = solve_primal(pr);
    const RtMassOperator M(RtSpace(pr.mesh, pr.p), 1.0);
    const double diff = m_norm_difference(M, s.u, ps.u);
    o.require(s.report.converged && ps.report.converged, name + " did not converge");
    o.require(diff <= 1e-9, name + " M-norm difference");
    o.detail << name << "=" << diff << " ";
  }
}

int minres_iterations(SaddleProblem pr) { return solve(pr).report.iterations; }

void c9(Outcome& o) {
  auto mesh = box(2, 4);
  std::vector<int> by_p;
  for (int p = 2; p <= 6; ++p) {
    SaddleProblem pr = graddiv(mesh, p);
    std::tie(pr.alpha, pr.beta) = two_material_coefficients(*mesh);
    by_p.push_back(minres_iterations(pr));
  }
  std::vector<int> by_h;
  for (int n : {2, 4, 8}) {
    auto m = box(2, n);
    SaddleProblem pr = graddiv(m, 2);
    std::tie(pr.alpha, pr.beta) = two_material_coefficients(*m);
    by_h.push_back(minres_iterations(pr));
  }
  const double growth = double(by_p.back()) / by_p.front();
  const auto [lo, hi] = std::minmax_element(by_h.begin(), by_h.end());
  const double spread = double(*hi - *lo) / *lo;
  o.require(growth <= 2.5, "p-growth");
  o.require(spread <= 0.25, "h-variation");
  o.detail << "p=2..6:";
  for (int i : by_p) o.detail << ' ' << i;
  o.detail << " growth=" << growth << " n=2,4,8:";
  for (int i : by_h) o.detail << ' ' << i;
  o.detail << " variation=" << spread;
}

void c10(Outcome& o) {
  auto mesh = jitter(cartesian_mesh(2, {4, 4, 1}), 5);
  SaddleProblem d;
  d.kind = ProblemKind::DarcyNonzero;
  d.mesh = mesh;
  d.p = 3;
  d.gamma = log_uniform_field(*mesh, 1e4, 9);
  d.options.local_tol = 1e-15;
  const SaddleSystem sys(d);
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    Vec x(sys.nq()), a(sys.nq()), b(sys.nq());
    for (double& v : x) v = u(gen);
    sys.apply_darcy_general(x, a);
    sys.apply_darcy_simplified(x, b);
    double num = 0, den = 0;
    for (int i = 0; i < sys.nq(); ++i) {
      num += (a[i] - b[i]) * (a[i] - b[i]);
      den += b[i] * b[i];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  o.require(worst <= 1e-10, "general and simplified forms differ");

  SaddleProblem z;
  z.kind = ProblemKind::DarcyZero;
  z.mesh = mesh;
  z.p = 3;
  z.gamma = 0.0;
  z.eps = log_uniform_field(*mesh, 1e3, 1);
  z.essential = all_boundary_attributes(2);
  z.g = [](const Point& x) { return std::cos(std::numbers::pi * x[0]) * std::cos(std::numbers::pi * x[1]); };
  z.f = [](const Point& x) { return Point{x[1], -x[0], 0}; };
  const SaddleSystem zs(z);
  const SaddleSolution s = solve(zs);
  o.require(s.report.converged, "pure-Neumann solve did not converge");
  o.require(s.mass_inverse_applies == 0, "gamma = 0 applied W^{-1}");
  const Vec c = l2_constant_coefficients(zs.l2());
  const Vec Wq = zs.W() * s.q;
  double mean = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) mean += c[i] * Wq[i];
  o.require(std::abs(mean) <= 1e-10, "pressure mean");
  o.detail << "identity=" << worst << " massinv_applies=" << s.mass_inverse_applies << " iterations="
           << s.report.iterations << " pressure_mean=" << mean;
}

void c11(Outcome& o) {
  auto mesh = jitter(cartesian_mesh(2, {3, 3, 1}), 8);
  double worst = 0.0;
  for (int p = 1; p <= 4; ++p) {
    const L2MassOperator W(L2Space(mesh, p), Coefficient::function([](const Point& x) { return 1 + x[0] * x[1]; }));
    std::mt19937 gen(p);
    std::uniform_real_distribution<double> u(-1, 1);
    Vec b(W.size());
    for (double& v : b) v = u(gen);
    std::vector<Vec> xs;
    for (auto k : {MassInverseKind::Factorize, MassInverseKind::ExplicitInverse, MassInverseKind::LocalCg}) {
      MassInverseOptions mo;
      mo.kind = k;
      xs.push_back(MassInverse(W, mo) * b);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        double num = 0, den = 0;
        for (std::size_t k = 0; k < b.size(); ++k) {
          num += (xs[i][k] - xs[j][k]) * (xs[i][k] - xs[j][k]);
          den += xs[j][k] * xs[j][k];
        }
        worst = std::max(worst, std::sqrt(num / den));
      }
  }
  o.require(worst <= 1e-9, "strategies disagree");

  auto skew = std::make_shared<const Mesh>(canonical_skewed_element(2));
  auto rect = std::make_shared<const Mesh>(cartesian_mesh(2, {2, 2, 1}, {0, 0, 0}, {2, 1, 0}));
  int lo = 1 << 30, hi = 0, axis_max = 0;
  for (int p = 2; p <= 8; ++p) {
    MassInverseOptions mo;
    mo.kind = MassInverseKind::LocalCg;
    const L2MassOperator Ws(L2Space(skew, p), 1.0);
    const MassInverse is(Ws, mo);
    (void)(is * Vec(Ws.size(), 1.0));
    lo = std::min(lo, is.iteration_census()[0]);
    hi = std::max(hi, is.iteration_census()[0]);
    const L2MassOperator Wr(L2Space(rect, p), 1.0);
    const MassInverse ir(Wr, mo);
    Vec b(Wr.size());
    for (int i = 0; i < Wr.size(); ++i) b[i] = std::sin(1.0 + i);
    (void)(ir * b);
    for (int it : ir.iteration_census()) axis_max = std::max(axis_max, it);
  }
  o.require(hi - lo <= 5, "LocalCg iterations depend on p");
  o.require(axis_max == 1, "axis-aligned LocalCg needs more than one iteration");
  o.detail << "max_rel_diff=" << worst << " skewed_iterations=[" << lo << "," << hi << "] axis_aligned_max=" << axis_max;
}

void c12(Outcome& o) {
  for (int p = 1; p <= 3; ++p) {
    const auto rows = mms_study(2, p, {4, 8, 16});
    const double rate = rows.back().rate;
    o.require(std::abs(rate - p) <= 0.25, "rate for p=" + std::to_string(p));
    o.detail << "p=" << p << " rates=" << rows[1].rate << "," << rows[2].rate << " ";
  }
}

}  // namespace
}  // namespace hdiv

int main() {
  using namespace hdiv;
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no runtime bound
    std::function<void(Outcome&)> fn;
  };
  const std::vector<Criterion> all{
      {1, "exact-block intervals, tau=1", 10, c1},
      {2, "exact-block intervals, tau=2 and optimality", 0, c2},
      {3, "block-triangular GMRES exactness", 0, c3},
      {4, "divergence structure", 0, c4},
      {5, "Schur stencil equivalence and M-matrix", 0, c5},
      {6, "transformed vs untransformed Schur conditioning", 60, c6},
      {7, "diagonal spectral equivalence", 0, c7},
      {8, "saddle vs primal cross-validation", 0, c8},
      {9, "iteration robustness in p and h", 0, c9},
      {10, "Darcy identities", 0, c10},
      {11, "mass-inverse strategies", 0, c11},
      {12, "MMS convergence rates", 120, c12},
  };
  int failed = 0;
  for (const Criterion& c : all) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.limit_s > 0) o.require(secs < c.limit_s, "runtime");
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s: %s (%.2fs) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}

// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hdiv/verify.hpp"

#include "hdiv/analysis.hpp"
#include "hdiv/solvers.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace hdiv {

namespace {

std::shared_ptr<const Mesh> square(int n) { return std::make_shared<const Mesh>(cartesian_mesh(2, {n, n, 1})); }

std::shared_ptr<const Mesh> skewed_square(int n) {
  return std::make_shared<const Mesh>(skew_mesh(cartesian_mesh(2, {n, n, 1}), [](const Point& x, int) {
    return Point{0.1 * x[1] * (1 - x[1]) * x[0] * (1 - x[0]) * 4, 0.05 * std::sin(3.0 * x[0]) * x[1] * (1 - x[1]), 0};
  }));
}

SparseMatrixCsr divergence(const RtSpace& rt, const L2Space& l2, const VerifyOptions& o) {
  SparseMatrixCsr D = build_divergence_csr(rt, l2, o.exec);
  if (o.flip_d_sign && D.nnz() > 0) D.val[0] = -D.val[0];
  return D;
}

template <class F>
CheckResult run(const std::string& name, F&& body) {
  CheckResult r;
  r.name = name;
  try {
    std::ostringstream os;
    r.passed = body(os);
    r.detail = os.str();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = e.what();
  }
  return r;
}

double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& o) {
  std::vector<CheckResult> out;

  out.push_back(run("eigenvalue_intervals", [&](std::ostream& os) {
    const SpectralIntervals iv = exact_block_intervals(o.tau == 1.0 ? 1.0 : 2.0);
    bool ok = true;
    for (int n : {1, 2})
      for (int p = 1; p <= o.p_max; ++p) {
        SaddleProblem pr;
        pr.mesh = square(n);
        pr.p = p;
        pr.essential = all_boundary_attributes(2);
        pr.options.mass_inverse = MassInverseKind::Factorize;
        SaddleSystem sys(pr);
        const DenseSaddleBlocks b = dense_transformed_blocks(sys);
        const SpectrumReport s = generalized_spectrum(assemble_saddle(b), exact_block_preconditioner(b, o.tau));
        const IntervalReport r = interval_check(s.eigenvalues, iv);
        if (!r.ok) {
          ok = false;
          os << "n=" << n << " p=" << p << " tau=" << o.tau << ": " << r.offending.size()
             << " eigenvalues outside, first " << r.offending.front() << "; ";
        }
      }
    return ok;
  }));

  out.push_back(run("divergence_structure", [&](std::ostream& os) {
    for (int dim : {2, 3})
      for (int p = 1; p <= o.p_max; ++p) {
        auto mesh = std::make_shared<const Mesh>(cartesian_mesh(dim, {2, 2, 2}));
        const RtSpace rt(mesh, p);
        const L2Space l2(mesh, p);
        const SparseMatrixCsr D = divergence(rt, l2, o);
        divergence_column_check(D, dim, &rt);
        if (!refined_mesh_equivalence(D, rt, l2)) {
          os << "refined-mesh mismatch dim=" << dim << " p=" << p;
          return false;
        }
      }
    return true;
  }));

  out.push_back(run("divergence_skew_invariance", [&](std::ostream& os) {
    for (int p = 1; p <= o.p_max; ++p) {
      auto ma = square(3), mb = skewed_square(3);
      const RtSpace a(ma, p), b(mb, p);
      const L2Space la(ma, p), lb(mb, p);
      const SparseMatrixCsr Da = divergence(a, la, o), Db = build_divergence_csr(b, lb, o.exec);
      if (Da.col != Db.col || Da.val != Db.val || Da.row_ptr != Db.row_ptr) {
        os << "D changed under skewing at p=" << p;
        return false;
      }
    }
    return true;
  }));

  out.push_back(run("schur_stencil", [&](std::ostream& os) {
    bool ok = true;
    for (int p = 1; p <= o.p_max; ++p) {
      auto mesh = skewed_square(3);
      const RtSpace rt(mesh, p);
      const L2Space l2(mesh, p);
      const SparseMatrixCsr D = divergence(rt, l2, o);
      const Vec md = RtMassOperator(rt, 1.0, o.exec).diagonal().entries();
      const Vec wd = L2MassOperator(l2, 1.0, Basis1D::Histopolation, o.exec).diagonal().entries();
      Vec shift(wd.size()), minv(md.size());
      for (std::size_t i = 0; i < wd.size(); ++i) shift[i] = 1.0 / wd[i];
      for (std::size_t i = 0; i < md.size(); ++i) minv[i] = 1.0 / md[i];
      const SparseMatrixCsr S1 = build_schur_approx(rt, l2, wd, md);
      const SparseMatrixCsr S2 = add_diagonal(triple_product(D, minv), shift);
      const double diff = max_abs(S1.to_dense() - S2.to_dense());
      if (diff > 1e-13 * std::max(1.0, max_abs(S1.to_dense()))) {
        ok = false;
        os << "p=" << p << " stencil vs triple product " << diff << "; ";
      }
      if (!m_matrix_check(S1, shift)) {
        ok = false;
        os << "p=" << p << " not an M-matrix; ";
      }
    }
    return ok;
  }));

  out.push_back(run("b_alpha_identity", [&](std::ostream& os) {
    auto mesh = skewed_square(2);
    const Coefficient alpha = Coefficient::function([](const Point& x) { return 1.0 + x[0] * x[1]; });
    for (int p = 1; p <= o.p_max; ++p) {
      const RtSpace rt(mesh, p);
      const L2Space l2(mesh, p);
      const SparseMatrixCsr D = divergence(rt, l2, o);
      const L2MassOperator W(l2, alpha, Basis1D::Histopolation, o.exec);
      const Matrix lhs = W.assemble_dense() * D.to_dense();
      const Matrix rhs = dense_b_alpha_direct(rt, l2, alpha);
      const double diff = max_abs(lhs - rhs);
      if (diff > 1e-11 * std::max(1.0, max_abs(rhs))) {
        os << "p=" << p << " |W D - B| = " << diff;
        return false;
      }
    }
    return true;
  }));

  out.push_back(run("mass_inverse_agreement", [&](std::ostream& os) {
    auto mesh = skewed_square(2);
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    for (int p = 1; p <= std::max(o.p_max, 4); ++p) {
      const L2Space l2(mesh, p);
      const L2MassOperator W(l2, 1.0, Basis1D::Histopolation, o.exec);
      Vec b(l2.num_dofs());
      for (double& v : b) v = nd(rng);
      std::vector<Vec> xs;
      for (auto k : {MassInverseKind::Factorize, MassInverseKind::ExplicitInverse, MassInverseKind::LocalCg}) {
        MassInverseOptions mo;
        mo.kind = k;
        mo.tol = 1e-14;
        mo.exec = o.exec;
        xs.push_back(MassInverse(W, mo) * b);
      }
      for (std::size_t a = 1; a < xs.size(); ++a) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
          num += (xs[a][i] - xs[0][i]) * (xs[a][i] - xs[0][i]);
          den += xs[0][i] * xs[0][i];
        }
        if (std::sqrt(num / den) > 1e-9) {
          os << "p=" << p << " strategy " << a << " differs by " << std::sqrt(num / den);
          return false;
        }
      }
    }
    return true;
  }));

  out.push_back(run("vcycle_spd", [&](std::ostream& os) {
    auto mesh = square(6);
    const RtSpace rt(mesh, 2);
    const L2Space l2(mesh, 2);
    const Vec md = RtMassOperator(rt, 1.0, o.exec).diagonal().entries();
    const Vec wd = L2MassOperator(l2, 1.0, Basis1D::Histopolation, o.exec).diagonal().entries();
    const AmgHierarchy h(build_schur_approx(rt, l2, wd, md));
    const VcycleCheck c = vcycle_spd_check(h);
    os << "levels=" << h.num_levels() << " asym=" << c.asymmetry << " lmin=" << c.min_eigenvalue;
    return c.symmetric && c.positive;
  }));

  out.push_back(run("saddle_vs_primal", [&](std::ostream& os) {
    SaddleProblem pr;
    pr.mesh = skewed_square(3);
    pr.p = 2;
    pr.essential = all_boundary_attributes(2);
    pr.f = [](const Point& x) { return Point{std::sin(3 * x[1]), x[0] * x[0], 0}; };
    pr.options.tol = 1e-13;
    pr.options.exec = o.exec;
    SaddleSystem sys(pr);
    const SaddleSolution s = solve(sys);
    const PrimalSolution ps = solve_primal(pr);
    const double d = m_norm_difference(sys.M(), s.u, ps.u);
    os << "M-norm difference " << d << ", minres its " << s.report.iterations;
    return s.report.converged && ps.report.converged && d <= 1e-9;
  }));

  return out;
}

}  // namespace hdiv

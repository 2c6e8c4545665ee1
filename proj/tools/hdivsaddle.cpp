// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line harness: solve, cond, massinv-bench, verify, mms.

#include "hdiv/analysis.hpp"
#include "hdiv/mmio.hpp"
#include "hdiv/solvers.hpp"
#include "hdiv/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace {

using namespace hdiv;

constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitVerify = 4;

struct RunConfig {
  // mesh
  int dim = 2;
  int n = 4;
  double skew = 0.0;
  // discretization and problem
  std::vector<int> p{2};
  std::string problem = "graddiv";
  std::string coefficients = "constant";
  double alpha = 1.0, beta = 1.0, eps = 1.0, gamma = 1.0;
  double contrast = 1e7;
  unsigned long seed = 1;
  std::string rhs = "smooth";
  std::string essential = "all";
  bool pure_neumann = false;
  // solver
  double tau = 2.0;
  double tol = 1e-12;
  int max_it = 5000;
  int restart = 200;
  std::string massinv = "auto";
  double local_tol = -1.0;
  std::string precond = "block-diagonal";
  std::string schur = "amg";
  double amg_theta = 0.25;
  // study ranges
  int p_min = 1, p_max = 6;
  int applies = 100;
  double memory_limit_mb = 2048.0;
  std::vector<int> levels{4, 8, 16};
  bool flip_d_sign = false;
  // output
  std::string out;
  std::string history;
  std::string dump_matrices;
  int threads = 0;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// CSV sink: a config-hash comment line, then the header and rows.
class Csv {
 public:
  Csv(const std::string& path, std::uint64_t hash, const std::string& header) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::Config, "cannot open output file '" + path + "'");
    }
    os() << "# config-hash " << std::hex << std::setw(16) << std::setfill('0') << hash << std::dec
         << std::setfill(' ') << "\n"
         << header << "\n";
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string ms(double seconds) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << seconds;
  return os.str();
}

std::shared_ptr<const Mesh> make_mesh(const RunConfig& c) {
  if (c.n < 1) throw Error(ErrorCode::Config, "mesh n must be >= 1");
  Mesh m = cartesian_mesh(c.dim, {c.n, c.n, c.n});
  if (c.skew != 0.0) {
    const double a = c.skew / c.n;
    const int dim = c.dim;
    m = skew_mesh(m, [a, dim](const Point& x, int) {
      constexpr double pi = std::numbers::pi;
      double b = std::sin(pi * x[0]) * std::sin(pi * x[1]);
      if (dim == 3) b *= std::sin(pi * x[2]);
      return Point{a * b, 0.5 * a * b, dim == 3 ? 0.25 * a * b : 0.0};
    });
    m.validate();
  }
  return std::make_shared<const Mesh>(std::move(m));
}

std::set<int> essential_attributes(const RunConfig& c) {
  if (c.essential == "all") return all_boundary_attributes(c.dim);
  if (c.essential == "none") return {};
  std::set<int> s;
  std::stringstream ss(c.essential);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      s.insert(std::stoi(tok));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "bad essential attribute list '" + c.essential + "'");
    }
  }
  return s;
}

SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.tau = c.tau;
  o.tol = c.tol;
  o.max_iterations = c.max_it;
  o.restart = c.restart;
  if (c.massinv != "auto") o.mass_inverse = mass_inverse_kind_from_string(c.massinv);
  o.local_tol = c.local_tol;
  if (c.precond == "block-diagonal")
    o.precond = PrecondKind::BlockDiagonal;
  else if (c.precond == "block-triangular")
    o.precond = PrecondKind::BlockTriangular;
  else
    throw Error(ErrorCode::Config, "unknown preconditioner '" + c.precond + "'");
  if (c.schur == "amg")
    o.schur = SchurSolverKind::Amg;
  else if (c.schur == "direct")
    o.schur = SchurSolverKind::Direct;
  else
    throw Error(ErrorCode::Config, "unknown Schur solver '" + c.schur + "'");
  o.amg.theta = c.amg_theta;
  o.pure_neumann = c.pure_neumann;
  return o;
}

void check_positive(const char* name, double v, bool allow_zero = false) {
  if (!(v > 0.0) && !(allow_zero && v == 0.0))
    throw Error(ErrorCode::Coefficient, std::string(name) + " must be " + (allow_zero ? ">= 0" : "> 0"));
}

SaddleProblem make_problem(const RunConfig& c, std::shared_ptr<const Mesh> mesh, int p) {
  SaddleProblem pr;
  pr.kind = problem_kind_from_string(c.problem);
  pr.mesh = mesh;
  pr.p = p;
  pr.essential = essential_attributes(c);
  pr.options = solve_options(c);

  if (c.coefficients == "constant") {
    check_positive("alpha", c.alpha);
    check_positive("beta", c.beta);
    check_positive("eps", c.eps);
    check_positive("gamma", c.gamma, true);
    pr.alpha = c.alpha;
    pr.beta = c.beta;
    pr.eps = c.eps;
    pr.gamma = pr.kind == ProblemKind::DarcyZero ? 0.0 : c.gamma;
  } else if (c.coefficients == "two-material") {
    std::tie(pr.alpha, pr.beta) = two_material_coefficients(*mesh);
  } else if (c.coefficients == "log-uniform") {
    pr.eps = log_uniform_field(*mesh, c.contrast, c.seed);
    pr.gamma = pr.kind == ProblemKind::DarcyZero ? 0.0 : c.gamma;
    check_positive("gamma", c.gamma, true);
  } else {
    throw Error(ErrorCode::Config, "unknown coefficients '" + c.coefficients + "'");
  }

  constexpr double pi = std::numbers::pi;
  if (c.rhs == "zero") {
    // nothing
  } else if (c.rhs == "smooth") {
    if (pr.kind == ProblemKind::GradDiv) {
      pr.f = [](const Point& x) { return Point{std::sin(pi * x[1]), std::cos(pi * x[0]) * x[2], x[0] * x[1]}; };
    } else {
      // Zero-mean source so the pure-flux Darcy problem is compatible.
      pr.g = [](const Point& x) { return std::cos(pi * x[0]) * std::cos(pi * x[1]); };
    }
  } else if (c.rhs == "mms") {
    if (pr.kind != ProblemKind::GradDiv) throw Error(ErrorCode::Config, "rhs = mms needs the grad-div problem");
    const ManufacturedSolution m = graddiv_manufactured(c.dim);
    pr.f = m.f;
    pr.u_boundary = m.u;
  } else {
    throw Error(ErrorCode::Config, "unknown rhs '" + c.rhs + "'");
  }
  return pr;
}

void dump(const RunConfig& c, const SaddleSystem& sys, int p) {
  namespace fs = std::filesystem;
  fs::create_directories(c.dump_matrices);
  const std::string base = c.dump_matrices + "/p" + std::to_string(p) + "_";
  write_matrix_market(base + "D.mtx", sys.D());
  write_matrix_market(base + "S_approx.mtx", sys.schur_approx());
  if (sys.nu() <= 5000) {
    write_matrix_market(base + "M.mtx", sys.M().assemble_dense(), 1e-300);
    write_matrix_market(base + "W.mtx", sys.W().assemble_dense(), 1e-300);
  }
}

int cmd_solve(const RunConfig& c, std::uint64_t hash) {
  auto mesh = make_mesh(c);
  for (int p : c.p) make_problem(c, mesh, p);  // report config errors before any output
  Csv csv(c.out, hash,
          "problem,dim,n,p,dofs_u,dofs_q,dofs,precond,massinv,iterations,polish_iterations,converged,final_residual,"
          "untransformed_residual,amg_levels,operator_complexity,massinv_applies,setup_s,solve_s,total_s");
  bool all_converged = true;
  for (int p : c.p) {
    const auto t0 = std::chrono::steady_clock::now();
    const SaddleProblem pr = make_problem(c, mesh, p);
    const SaddleSystem sys(pr);
    if (!c.dump_matrices.empty()) dump(c, sys, p);
    const SaddleSolution s = solve(sys);
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const MassInverseKind mk = pr.options.mass_inverse.value_or(default_mass_inverse(p));
    csv.os() << c.problem << ',' << c.dim << ',' << c.n << ',' << p << ',' << sys.nu() << ',' << sys.nq() << ','
             << sys.size() << ',' << c.precond << ',' << to_string(mk) << ',' << s.report.iterations << ',' << s.polish_iterations << ','
             << (s.report.converged ? 1 : 0) << ',' << fmt(s.report.final_residual, 4) << ','
             << fmt(s.untransformed_residual, 4) << ',' << s.amg.levels << ',' << fmt(s.amg.operator_complexity, 4)
             << ',' << s.mass_inverse_applies << ',' << ms(s.setup_seconds) << ',' << ms(s.report.seconds) << ','
             << ms(total) << '\n';
    if (!c.history.empty()) {
      std::ofstream h(c.history + (c.p.size() > 1 ? ".p" + std::to_string(p) : std::string()));
      s.report.write_history_csv(h);
    }
    all_converged = all_converged && s.report.converged;
  }
  return all_converged ? 0 : kExitNoConvergence;
}

int cmd_cond(const RunConfig& c, std::uint64_t hash) {
  if (c.p_min < 1 || c.p_max < c.p_min) throw Error(ErrorCode::Config, "need 1 <= p-min <= p-max");
  Csv csv(c.out, hash, "study,element,dim,p,form,basis,kappa");
  for (bool skewed : {false, true}) {
    const char* el = skewed ? "skewed" : "unit";
    for (const MassConditioningRow& r : mass_basis_conditioning(
             c.dim, skewed, c.p_min, c.p_max, {Basis1D::Histopolation, Basis1D::GlNodal, Basis1D::GllNodal})) {
      const char* basis = r.form == "rt" ? "rt" : r.basis == Basis1D::GlNodal ? "gl" : r.basis == Basis1D::GllNodal ? "gll" : "histopolation";
      csv.os() << "mass," << el << ',' << r.dim << ',' << r.p << ',' << r.form << ',' << basis << ',' << fmt(r.kappa)
               << '\n';
    }
  }
  for (bool skewed : {false, true}) {
    auto mesh = std::make_shared<const Mesh>(skewed ? canonical_skewed_element(c.dim)
                                                    : cartesian_mesh(c.dim, {1, 1, 1}));
    const char* el = skewed ? "skewed" : "unit";
    for (int p = c.p_min; p <= c.p_max; ++p) {
      const SchurStudyRow r = untransformed_schur_study(mesh, p);
      csv.os() << "schur," << el << ',' << c.dim << ',' << p << ",transformed,," << fmt(r.kappa_transformed) << '\n';
      csv.os() << "schur," << el << ',' << c.dim << ',' << p << ",untransformed,," << fmt(r.kappa_untransformed)
               << '\n';
    }
  }
  return 0;
}

int cmd_massinv_bench(const RunConfig& c, std::uint64_t hash) {
  if (c.p_min < 1 || c.p_max < c.p_min) throw Error(ErrorCode::Config, "need 1 <= p-min <= p-max");
  auto mesh = make_mesh(c);
  Csv csv(c.out, hash, "p,dofs,strategy,setup_s,apply_s,total_s,max_local_iterations,rel_diff_vs_factorize");
  std::mt19937 rng(static_cast<unsigned>(c.seed));
  std::normal_distribution<double> nd;
  for (int p = c.p_min; p <= c.p_max; ++p) {
    const L2Space l2(mesh, p);
    const L2MassOperator W(l2, 1.0);
    Vec b(l2.num_dofs());
    for (double& v : b) v = nd(rng);
    Vec ref;
    for (auto k : {MassInverseKind::Factorize, MassInverseKind::ExplicitInverse, MassInverseKind::LocalCg}) {
      MassInverseOptions mo;
      mo.kind = k;
      mo.tol = c.local_tol > 0.0 ? c.local_tol : 1e-12;
      mo.memory_limit = static_cast<std::size_t>(c.memory_limit_mb * 1024.0 * 1024.0);
      csv.os() << p << ',' << l2.num_dofs() << ',' << to_string(k) << ',';
      std::unique_ptr<MassInverse> inv;
      try {
        inv = std::make_unique<MassInverse>(W, mo);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Scale) throw;
        csv.os() << "---,---,---,---,---\n";
        continue;
      }
      Vec x(b.size());
      const auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < c.applies; ++i) inv->apply(b, x);
      const double apply_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      int max_it = 0;
      for (int it : inv->iteration_census()) max_it = std::max(max_it, it);
      double diff = 0.0;
      if (ref.empty()) {
        ref = x;
      } else {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          num += (x[i] - ref[i]) * (x[i] - ref[i]);
          den += ref[i] * ref[i];
        }
        diff = std::sqrt(num / den);
      }
      csv.os() << ms(inv->setup_seconds()) << ',' << ms(apply_s) << ',' << ms(inv->setup_seconds() + apply_s) << ','
               << (k == MassInverseKind::LocalCg ? std::to_string(max_it) : std::string()) << ',' << fmt(diff, 3)
               << '\n';
    }
  }
  return 0;
}

int cmd_verify(const RunConfig& c) {
  VerifyOptions vo;
  vo.tau = c.tau;
  vo.p_max = std::max(1, std::min(c.p_max, 4));
  vo.flip_d_sign = c.flip_d_sign;
  bool ok = true;
  for (const CheckResult& r : run_verify(vo)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << '\n';
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitVerify;
}

int cmd_mms(const RunConfig& c, std::uint64_t hash) {
  Csv csv(c.out, hash, "dim,p,n,h,l2_error,rate,iterations");
  for (int p : c.p) {
    for (const MmsRow& r : mms_study(c.dim, p, c.levels, solve_options(c))) {
      csv.os() << c.dim << ',' << p << ',' << r.n << ',' << fmt(r.h) << ',' << fmt(r.error, 8) << ','
               << fmt(r.rate, 4) << ',' << r.iterations << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"High-order H(div) grad-div and Darcy saddle-point solvers"};
  app.set_config("--config", "", "Read key = value settings from a file (flags override it)");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--dim", c.dim, "Spatial dimension (2 or 3)")->check(CLI::IsMember({2, 3}))->capture_default_str();
  app.add_option("--n", c.n, "Elements per axis")->capture_default_str();
  app.add_option("--skew", c.skew, "Interior vertex displacement amplitude (in element widths)")->capture_default_str();
  app.add_option("--p", c.p, "RT degree(s), comma separated")->delimiter(',')->capture_default_str();
  app.add_option("--problem", c.problem, "graddiv | darcy | darcy-zero")->capture_default_str();
  app.add_option("--coefficients", c.coefficients, "constant | two-material | log-uniform")->capture_default_str();
  app.add_option("--alpha", c.alpha, "Grad-div alpha")->capture_default_str();
  app.add_option("--beta", c.beta, "Grad-div beta")->capture_default_str();
  app.add_option("--eps", c.eps, "Darcy epsilon")->capture_default_str();
  app.add_option("--gamma", c.gamma, "Darcy gamma")->capture_default_str();
  app.add_option("--contrast", c.contrast, "log-uniform coefficient contrast")->capture_default_str();
  app.add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  app.add_option("--rhs", c.rhs, "smooth | zero | mms")->capture_default_str();
  app.add_option("--essential", c.essential, "Essential boundary attributes: all | none | list")->capture_default_str();
  app.add_flag("--pure-neumann", c.pure_neumann, "Project out constants in the pressure");
  app.add_option("--tau", c.tau, "Scaling of the M block in the preconditioner")->capture_default_str();
  app.add_option("--tol", c.tol, "Relative residual tolerance")->capture_default_str();
  app.add_option("--max-it", c.max_it, "Maximum Krylov iterations")->capture_default_str();
  app.add_option("--restart", c.restart, "GMRES restart length")->capture_default_str();
  app.add_option("--massinv", c.massinv, "auto | factorize | explicit | localcg")->capture_default_str();
  app.add_option("--local-tol", c.local_tol, "LocalCg tolerance (<0: tol/100)")->capture_default_str();
  app.add_option("--precond", c.precond, "block-diagonal | block-triangular")->capture_default_str();
  app.add_option("--schur", c.schur, "amg | direct")->capture_default_str();
  app.add_option("--amg-theta", c.amg_theta, "AMG strength threshold")->capture_default_str();
  app.add_option("--p-min", c.p_min, "Smallest degree for studies")->capture_default_str();
  app.add_option("--p-max", c.p_max, "Largest degree for studies")->capture_default_str();
  app.add_option("--applies", c.applies, "Applications timed by massinv-bench")->capture_default_str();
  app.add_option("--memory-limit-mb", c.memory_limit_mb, "Dense mass-inverse memory guard")->capture_default_str();
  app.add_option("--levels", c.levels, "Mesh sizes for mms, comma separated")->delimiter(',')->capture_default_str();
  app.add_flag("--flip-d-sign", c.flip_d_sign, "Test hook: corrupt one entry of D in verify")->group("");
  app.add_option("--out", c.out, "CSV output path (default stdout)");
  app.add_option("--history", c.history, "Residual history CSV path (solve)");
  app.add_option("--dump-matrices", c.dump_matrices, "Write Matrix Market files to this directory (solve)");
  app.add_option("--threads", c.threads, "OpenMP threads (0: runtime default, 1: deterministic)")->capture_default_str();

  auto* solve_cmd = app.add_subcommand("solve", "Solve the configured problem for each degree");
  auto* cond_cmd = app.add_subcommand("cond", "Mass-basis and Schur-complement conditioning tables");
  auto* bench_cmd = app.add_subcommand("massinv-bench", "Time the L2 mass-inverse strategies");
  auto* verify_cmd = app.add_subcommand("verify", "Run the invariant suite");
  auto* mms_cmd = app.add_subcommand("mms", "Manufactured-solution convergence study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (c.threads > 0) set_threads(c.threads);
  // Hash every setting except output locations and thread count.
  RunConfig h = c;
  h.out.clear();
  h.history.clear();
  h.dump_matrices.clear();
  h.threads = 0;
  std::ostringstream key;
  key << app.get_subcommands().front()->get_name() << '|' << h.dim << '|' << h.n << '|' << h.skew << '|';
  for (int p : h.p) key << p << ',';
  key << '|' << h.problem << '|' << h.coefficients << '|' << h.alpha << '|' << h.beta << '|' << h.eps << '|'
      << h.gamma << '|' << h.contrast << '|' << h.seed << '|' << h.rhs << '|' << h.essential << '|' << h.pure_neumann
      << '|' << h.tau << '|' << h.tol << '|' << h.max_it << '|' << h.restart << '|' << h.massinv << '|'
      << h.local_tol << '|' << h.precond << '|' << h.schur << '|' << h.amg_theta << '|' << h.p_min << '|'
      << h.p_max << '|' << h.applies << '|' << h.memory_limit_mb << '|';
  for (int l : h.levels) key << l << ',';
  const std::uint64_t hash = fnv1a(key.str());

  try {
    if (*solve_cmd) return cmd_solve(c, hash);
    if (*cond_cmd) return cmd_cond(c, hash);
    if (*bench_cmd) return cmd_massinv_bench(c, hash);
    if (*verify_cmd) return cmd_verify(c);
    if (*mms_cmd) return cmd_mms(c, hash);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::Config:
      case ErrorCode::Coefficient:
      case ErrorCode::InvalidMesh:
      case ErrorCode::InvalidOrder:
      case ErrorCode::Scale: return kExitConfig;
      case ErrorCode::IterationLimit: return kExitNoConvergence;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

// Acceptance checks: one PASS/FAIL line per criterion on stdout, details on stderr.
#include "cgfem/analysis.hpp"
#include "cgfem/condensation.hpp"
#include "cgfem/errors.hpp"
#include "cgfem/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cgfem;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  std::printf("criterion %2d %s: %s (%s)\n", id, ok ? "PASS" : "FAIL", title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

using Curve = std::vector<ExperimentRecord>;
using CurveKey = std::tuple<std::string, int, std::string>;

std::map<CurveKey, Curve> by_curve(const std::vector<ExperimentRecord>& rs) {
  std::map<CurveKey, Curve> out;
  for (const auto& r : rs) out[{r.method, r.k, r.mesh}].push_back(r);
  return out;
}

bool all_ok(const Curve& c) {
  return std::all_of(c.begin(), c.end(), [](const ExperimentRecord& r) { return r.error.empty(); });
}

std::string key_name(const CurveKey& k) {
  return std::get<0>(k) + " k=" + std::to_string(std::get<1>(k)) + " " + std::get<2>(k);
}

std::vector<ExperimentRecord> run(const ExperimentConfig& c) {
  return run_suite(c, [](const ExperimentRecord& r) {
    std::fprintf(stderr, "  %s k=%d %s N=%d dof=%d EE=%.4e SCN=%.4e %s\n", r.method.c_str(), r.k, r.mesh.c_str(), r.n,
                 r.dof, r.ee, r.scn, r.error.c_str());
  });
}

struct Pending {
  bool ok = true;
  std::string detail;
};

// Criteria 1 and 3 share the uniform runs; 3 is reported after 2.
Pending smooth_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = default_smooth_config();
  c.meshes = {MeshKind::Uniform};
  c.sizes = {8, 16, 32};
  const auto coarse = run(c);
  c.sizes = {64};
  c.compute_scn = false;
  c.methods = {Method::FlatTopGfem, Method::Sgfem, Method::Cgfem};
  const auto fine = run(c);

  std::vector<ExperimentRecord> all = coarse;
  all.insert(all.end(), fine.begin(), fine.end());
  const auto curves = by_curve(all);

  bool ok1 = true;
  std::ostringstream d1;
  for (const auto& [key, curve] : curves) {
    if (std::get<0>(key) == "fem") continue;
    const int k = std::get<1>(key);
    const bool good = all_ok(curve) && curve.size() == 4;
    const double s = good ? record_slope(curve, false, 4) : 0.0;
    const bool pass = good && s >= k - 0.15;
    ok1 &= pass;
    d1 << key_name(key) << " " << fmt("%.3f", s) << (pass ? "" : "!") << "; ";
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok1 &= seconds <= 600;
  d1 << "runtime " << fmt("%.0f s", seconds);
  report(1, "smooth EE slopes >= k - 0.15 on uniform meshes", ok1, d1.str());

  bool ok3 = true;
  std::ostringstream d3;
  for (const auto& [key, curve] : by_curve(coarse)) {
    const bool good = all_ok(curve) && curve.size() == 3;
    const double s = good ? record_slope(curve, true, 3) : 0.0;
    const bool pass = good && s >= -2.4 && s <= -1.6;
    ok3 &= pass;
    d3 << key_name(key) << " " << fmt("%.3f", s) << (pass ? "" : "!") << "; ";
  }
  return {ok3, d3.str()};
}

void perturbed_robustness() {
  ExperimentConfig c = default_smooth_config();
  c.meshes = {MeshKind::Perturbed};
  c.compute_scn = false;
  c.methods = {Method::Fem};
  c.degrees = {2, 3};
  auto rs = run(c);
  c.methods = {Method::Cgfem};
  c.degrees = {1, 2, 3};
  const auto cg = run(c);
  rs.insert(rs.end(), cg.begin(), cg.end());
  bool ok = true;
  std::ostringstream d;
  for (const auto& [key, curve] : by_curve(rs)) {
    const int k = std::get<1>(key);
    const bool good = all_ok(curve);
    const double s = good ? record_slope(curve, false, 4) : 0.0;
    const bool pass = good && (std::get<0>(key) == "fem" ? s <= 1.3 : s >= k - 0.2);
    ok &= pass;
    d << key_name(key) << " " << fmt("%.3f", s) << (pass ? "" : "!") << "; ";
  }
  report(2, "perturbed meshes (seed 2017): FEM k=2,3 <= 1.3, CGFEM >= k - 0.2", ok, d.str());
}

void crack_suite() {
  const auto rs = run(default_crack_config());
  const auto curves = by_curve(rs);
  bool ok4 = true, ok5 = true;
  std::ostringstream d4, d5;
  for (const auto& [key, curve] : curves) {
    const std::string& m = std::get<0>(key);
    if (!all_ok(curve) || curve.size() != 5) {
      ok4 = ok5 = false;
      d4 << m << " failed; ";
      continue;
    }
    const double ee = record_slope(curve, false, 5);
    const bool pass4 = m == "fem" ? ee <= 0.3 : (ee >= 0.8 && ee <= 1.2);
    ok4 &= pass4;
    d4 << m << " " << fmt("%.3f", ee) << (pass4 ? "" : "!") << "; ";
    if (m == "cgfem") {
      const double s = record_slope(curve, true, 5);
      const bool pass = s >= -2.4 && s <= -1.6;
      ok5 &= pass;
      d5 << "cgfem " << fmt("%.3f", s) << (pass ? "" : "!") << "; ";
    } else if (m == "crack_gfem") {
      // The two finest pairs share the middle point: a fit over the 3 finest levels.
      const double s = record_slope(curve, true, 3);
      const bool pass = s <= -3.0;
      ok5 &= pass;
      d5 << "crack_gfem finest pairs " << fmt("%.3f", s) << (pass ? "" : "!") << "; ";
    }
  }
  report(4, "crack EE slopes: CGFEM, crack-GFEM in [0.8, 1.2], FEM <= 0.3", ok4, d4.str());
  report(5, "crack SCN slopes: CGFEM in [-2.4, -1.6], crack-GFEM finest <= -3", ok5, d5.str());
}

// Largest |sum_l eta(x_l) ls(i, l)(x) - eta(x)| over random eta in V_i and points of omega_i.
double reproduction_error(const Mesh& mesh, const CondensedBasis& b, std::mt19937& rng, int trials, int samples,
                          bool avoid_crack) {
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int i = 0; i < b.node_count(); ++i) {
    const NodeFit& f = b.fit(i);
    const int n = f.space.dimension();
    std::vector<double> q(n);
    std::vector<std::vector<double>> at_nodes;
    for (int l : f.support) {
      f.space.evaluate(mesh.node(l), q);
      at_nodes.push_back(q);
    }
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd c(n);
      for (int a = 0; a < n; ++a) c[a] = u(rng);
      auto eta = [&](const Vec2& x) {
        f.space.evaluate(x, q);
        return Eigen::Map<const Eigen::VectorXd>(q.data(), n).dot(c);
      };
      int taken = 0;
      while (taken < samples) {
        const auto patch = mesh.patch(i);
        const int s = patch[rng() % patch.size()];
        const Vec2 x = mesh.point(s, Vec2(u(rng), u(rng))).x;
        if (avoid_crack && (x.norm() < 1e-8 || std::abs(x.y()) < 1e-12)) continue;
        ++taken;
        double sum = 0;
        for (std::size_t j = 0; j < f.support.size(); ++j) {
          const double eta_l = Eigen::Map<const Eigen::VectorXd>(at_nodes[j].data(), n).dot(c);
          sum += eta_l * b.ls_basis_eval(i, f.support[j], x).value;
        }
        worst = std::max(worst, std::abs(sum - eta(x)));
      }
    }
  }
  return worst;
}

void reproducing_suite() {
  std::mt19937 rng(606);
  std::ostringstream d;
  bool ok = true;
  const Mesh m = build_uniform_mesh(8);
  for (int k = 1; k <= 3; ++k) {
    const CondensedBasis b = build_smooth_condensed_basis(m, k);
    const double e = reproduction_error(m, b, rng, 10, 20, false);
    ok &= e <= 1e-9;
    d << "k=" << k << " " << fmt("%.1e", e) << "; ";
  }
  // At n = 9 the tip square holds only tip element nodes, so the 4-function
  // case first appears at n = 17.
  std::map<int, int> cases;
  for (int n : {9, 17}) {
    const CrackMesh c = build_crack_mesh(n, 0.25);
    const CondensedBasis cb = build_crack_condensed_basis(c);
    for (int i = 0; i < cb.node_count(); ++i) ++cases[cb.fit(i).space.dimension()];
    const double e = reproduction_error(c.base, cb, rng, 10, 20, true);
    ok &= e <= 1e-9;
    d << "crack n=" << n << " " << fmt("%.1e", e) << "; ";
  }
  ok &= cases.size() == 3;
  d << "local dimensions";
  for (const auto& [dim, count] : cases) d << " " << dim << "x" << count;
  report(6, "reproducing property <= 1e-9", ok, d.str());
}

double pu_error(const Mesh& mesh, const CondensedBasis& b, std::mt19937& rng, int points) {
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int t = 0; t < points; ++t) {
    const int s = static_cast<int>(rng() % mesh.element_count());
    const ElementPoint p = mesh.point(s, Vec2(u(rng), u(rng)));
    double sum = 0;
    for (int l = 0; l < b.node_count(); ++l) sum += b.condensed_shape_eval(l, p).value;
    worst = std::max(worst, std::abs(sum - 1));
  }
  return worst;
}

void pu_identity() {
  std::mt19937 rng(707);
  std::ostringstream d;
  double worst = 0;
  const Mesh m = build_perturbed_mesh(8, 0.1, 2017);
  for (int k = 1; k <= 3; ++k) {
    const double e = pu_error(m, build_smooth_condensed_basis(m, k), rng, 200);
    worst = std::max(worst, e);
    d << "smooth k=" << k << " " << fmt("%.1e", e) << "; ";
  }
  for (int n : {9, 17}) {
    const CrackMesh c = build_crack_mesh(n, 0.25);
    const double e = pu_error(c.base, build_crack_condensed_basis(c), rng, 200);
    worst = std::max(worst, e);
    d << "crack n=" << n << " " << fmt("%.1e", e) << "; ";
  }
  report(7, "condensed PU identity <= 1e-10 at 200 points", worst <= 1e-10, d.str());
}

struct Regularity {
  double value = 0, scaled_grad = 0;
};

Regularity regularity(const Mesh& mesh, const CondensedBasis& b) {
  Regularity r;
  const double h = mesh.h();
  const double pts[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (int i = 0; i < b.node_count(); ++i)
    for (int s : mesh.patch(i))
      for (double a : pts)
        for (double c : pts) {
          const Vec2 x = mesh.point(s, Vec2(a, c)).x;
          for (int l : b.support(i)) {
            const ValueGrad v = b.ls_basis_eval(i, l, x);
            r.value = std::max(r.value, std::abs(v.value));
            r.scaled_grad = std::max(r.scaled_grad, h * v.grad.norm());
          }
        }
  return r;
}

void regularity_stability() {
  bool ok = true;
  std::ostringstream d;
  for (MeshKind kind : {MeshKind::Uniform, MeshKind::Perturbed})
    for (int k = 1; k <= 3; ++k) {
      double vmin = 1e300, vmax = 0, gmin = 1e300, gmax = 0;
      for (int n : {8, 16, 32, 64}) {
        const Mesh m = kind == MeshKind::Uniform ? build_uniform_mesh(n) : build_perturbed_mesh(n, 0.1, 2017);
        const Regularity r = regularity(m, build_smooth_condensed_basis(m, k));
        vmin = std::min(vmin, r.value);
        vmax = std::max(vmax, r.value);
        gmin = std::min(gmin, r.scaled_grad);
        gmax = std::max(gmax, r.scaled_grad);
      }
      const double spread = std::max(vmax / vmin, gmax / gmin) - 1;
      ok &= spread <= 0.25;
      d << mesh_kind_name(kind) << " k=" << k << " " << fmt("%.1f%%", 100 * spread) << "; ";
    }
  report(8, "LS regularity varies <= 25% over N = 8..64", ok, d.str());
}

ProblemData linear_data(const Vec2& g) {
  ProblemData p;
  p.source = [](const Vec2&) { return 0.0; };
  p.flux = [g](const Vec2&, const Vec2& n) { return g.dot(n); };
  p.exact_u = [g](const Vec2& x) { return 0.25 + g.dot(x); };
  p.exact_grad = [g](const Vec2&) { return g; };
  p.zero_source = true;
  return p;
}

void oracles() {
  std::ostringstream d;
  bool ok = true;

  Eigen::MatrixXd q(3, 2);
  q << 1, -1, 1, 0, 1, 1;
  Eigen::Matrix2d g;
  g << 3, 0, 0, 2;
  const bool gram = LeastSquaresFit(q).gram() == g;
  ok &= gram;
  d << "1D Gram " << (gram ? "exact" : "wrong!") << "; ";

  auto smooth_spaces = [](const Mesh& m, int k) {
    std::vector<SpacePtr> v;
    v.push_back(build_fem_space(m, k));
    v.push_back(build_ftgfem_space(m, k));
    v.push_back(build_sgfem_space(m, k));
    v.push_back(build_cgfem_space(std::make_shared<CondensedBasis>(build_smooth_condensed_basis(m, k)), k));
    return v;
  };

  double scn_gap = 0;
  const Mesh m8 = build_uniform_mesh(8);
  const CrackMesh c17 = build_crack_mesh(17, 0.25);
  std::vector<SpacePtr> scn_spaces;
  for (int k = 1; k <= 3; ++k)
    for (auto& s : smooth_spaces(m8, k)) scn_spaces.push_back(std::move(s));
  scn_spaces.push_back(build_crack_gfem_space(c17));
  scn_spaces.push_back(build_crack_cgfem_space(c17, std::make_shared<CondensedBasis>(build_crack_condensed_basis(c17))));
  for (const auto& sp : scn_spaces) {
    const SparseMatrix A = assemble_stiffness(*sp, quadrature_options(*sp, Purpose::Assembly));
    const double l = scaled_condition_number(A, sp->constant_vector()).scn();
    const double e = scaled_condition_number_dense(A, sp->constant_vector()).scn();
    scn_gap = std::max(scn_gap, std::abs(l - e) / e);
  }
  ok &= scn_gap <= 1e-4;
  d << "SCN Lanczos vs dense " << fmt("%.1e", scn_gap) << " over " << scn_spaces.size() << " spaces; ";

  // Cubic CGFEM on N = 4 has a second null mode, so k stops at 2 there.
  double cg_gap = 0;
  const Mesh m4 = build_uniform_mesh(4);
  const ProblemData smooth = smooth_problem();
  for (int k = 1; k <= 2; ++k)
    for (const auto& sp : smooth_spaces(m4, k)) {
      const SparseMatrix A = assemble_stiffness(*sp, quadrature_options(*sp, Purpose::Assembly));
      const Eigen::VectorXd b = assemble_load(*sp, smooth, quadrature_options(*sp, Purpose::Assembly));
      const Eigen::VectorXd x = solve_neumann(A, b, sp->constant_vector()).coefficients;
      const Eigen::VectorXd y = dense_neumann_solve(A, b, sp->constant_vector());
      const Eigen::VectorXd diff = x - y;
      cg_gap = std::max(cg_gap, std::sqrt(std::max(0.0, diff.dot(A * diff)) / y.dot(A * y)));
    }
  ok &= cg_gap <= 1e-9;
  d << "CG vs dense at N=4 " << fmt("%.1e", cg_gap) << "; ";

  double patch = 0;
  const ProblemData lin = linear_data(Vec2(0.8, -1.1));
  auto patch_ee = [&patch](const ApproximationSpace& sp, const ProblemData& p) {
    const SparseMatrix A = assemble_stiffness(sp, quadrature_options(sp, Purpose::Assembly));
    const Eigen::VectorXd b = assemble_load(sp, p, quadrature_options(sp, Purpose::Assembly));
    const Eigen::VectorXd x = solve_neumann(A, b, sp.constant_vector()).coefficients;
    patch = std::max(patch, energy_error(sp, x, p, quadrature_options(sp, Purpose::Error)));
  };
  for (const Mesh& m : {build_uniform_mesh(8), build_perturbed_mesh(8, 0.1, 2017)})
    for (int k = 1; k <= 3; ++k)
      for (const auto& sp : smooth_spaces(m, k)) patch_ee(*sp, lin);
  // Flux-free crack faces admit only fields along the crack.
  const ProblemData along = linear_data(Vec2(0.8, 0.0));
  const CrackMesh c9 = build_crack_mesh(9, 0.25);
  patch_ee(*build_crack_fem_space(c9), along);
  patch_ee(*build_crack_gfem_space(c9), along);
  patch_ee(*build_crack_cgfem_space(c9, std::make_shared<CondensedBasis>(build_crack_condensed_basis(c9))), along);
  ok &= patch <= 1e-8;
  d << "patch test EE " << fmt("%.1e", patch);
  report(9, "oracles", ok, d.str());
}

void crack_harmonicity() {
  const ProblemData p = crack_problem();
  std::mt19937 rng(1010);
  std::uniform_real_distribution<double> u(-1, 1);
  double source = 0, laplacian = 0;
  for (int t = 0; t < 200; ++t) {
    const Vec2 x(u(rng), u(rng));
    source = std::max(source, std::abs(p.source(x)));
    if (std::abs(x.y()) < 0.1 || x.norm() < 0.3) continue;
    const double e = 1e-3;
    const double lap = (p.exact_u(x + Vec2(e, 0)) + p.exact_u(x - Vec2(e, 0)) + p.exact_u(x + Vec2(0, e)) +
                        p.exact_u(x - Vec2(0, e)) - 4 * p.exact_u(x)) / (e * e);
    laplacian = std::max(laplacian, std::abs(lap));
  }

  // Weak residual of the exact solution: int grad u . grad phi_m - boundary int g phi_m.
  const CrackMesh c = build_crack_mesh(17, 0.25);
  std::vector<SpacePtr> spaces;
  spaces.push_back(build_crack_fem_space(c));
  spaces.push_back(build_crack_gfem_space(c));
  spaces.push_back(build_crack_cgfem_space(c, std::make_shared<CondensedBasis>(build_crack_condensed_basis(c))));
  double residual = 0;
  for (const auto& sp : spaces) {
    const QuadratureOptions o = quadrature_options(*sp, Purpose::Error);
    Eigen::VectorXd r = -assemble_load(*sp, p, o);
    std::vector<double> v(sp->max_element_dofs());
    std::vector<Vec2> g(sp->max_element_dofs());
    for (int s = 0; s < c.base.element_count(); ++s) {
      const auto dofs = sp->element_dofs(s);
      for (const QuadraturePoint& qp : element_quadrature(c.base, s, o).points) {
        const ElementPoint pt = sp->point(s, qp.ref);
        sp->evaluate(pt, v, g);
        const Vec2 grad_u = p.exact_grad(pt.x);
        for (std::size_t j = 0; j < dofs.size(); ++j) r[dofs[j]] += qp.weight * grad_u.dot(g[j]);
      }
    }
    residual = std::max(residual, r.cwiseAbs().maxCoeff());
  }
  const bool ok = source == 0.0 && laplacian <= 1e-4 && residual <= 1e-6;
  std::ostringstream d;
  d << "f identically " << fmt("%g", source) << "; FD Laplacian " << fmt("%.1e", laplacian)
    << "; weak residual at n=17, depth 12 " << fmt("%.1e", residual);
  report(10, "crack data harmonic", ok, d.str());
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Pending scn = smooth_convergence();
    perturbed_robustness();
    report(3, "smooth SCN slopes in [-2.4, -1.6], N = 8, 16, 32", scn.ok, scn.detail);
    crack_suite();
    reproducing_suite();
    pu_identity();
    regularity_stability();
    oracles();
    crack_harmonicity();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("runtime %.1f s; %d criterion line(s) failed\n", seconds, failures);
  return failures == 0 ? 0 : 1;
}

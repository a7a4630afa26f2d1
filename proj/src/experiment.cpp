#include "cgfem/experiment.hpp"

#include "cgfem/condensation.hpp"
#include "cgfem/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace cgfem {

std::string mesh_kind_name(MeshKind kind) { return kind == MeshKind::Uniform ? "uniform" : "perturbed"; }

MeshKind parse_mesh_kind(const std::string& name) {
  if (name == "uniform") return MeshKind::Uniform;
  if (name == "perturbed") return MeshKind::Perturbed;
  throw InvalidParameter("unknown mesh kind '" + name + "'");
}

ExperimentConfig default_smooth_config() {
  ExperimentConfig c;
  c.suite = Suite::Smooth;
  c.methods = {Method::Fem, Method::FlatTopGfem, Method::Sgfem, Method::Cgfem};
  c.degrees = {1, 2, 3};
  c.meshes = {MeshKind::Uniform, MeshKind::Perturbed};
  c.sizes = {8, 16, 32, 64};
  return c;
}

ExperimentConfig default_crack_config() {
  ExperimentConfig c;
  c.suite = Suite::Crack;
  c.methods = {Method::Fem, Method::CrackGfem, Method::Cgfem};
  c.degrees = {1};
  c.meshes = {MeshKind::Uniform};
  c.sizes = {1, 2, 3, 4, 5};
  return c;
}

void validate(const ExperimentConfig& config) {
  validate(config.flat_top);
  for (int k : config.degrees)
    if (k < 1 || k > 3) throw InvalidParameter("degrees must lie in {1, 2, 3}");
  if (config.suite == Suite::Crack) {
    for (int k : config.degrees)
      if (k != 1) throw InvalidParameter("the crack suite is degree 1 only");
    for (MeshKind m : config.meshes)
      if (m != MeshKind::Uniform) throw InvalidParameter("the crack suite uses uniform meshes only");
    for (Method m : config.methods)
      if (m == Method::FlatTopGfem || m == Method::Sgfem)
        throw InvalidParameter("method " + method_name(m) + " is not part of the crack suite");
    for (int j : config.sizes)
      if (j < 1 || j > 9) throw InvalidParameter("crack levels j must lie in [1, 9]");
    if (!(config.radius > 0.0 && config.radius < 1.0)) throw InvalidParameter("radius must lie in (0, 1)");
  } else {
    for (Method m : config.methods)
      if (m == Method::CrackGfem) throw InvalidParameter("crack_gfem belongs to the crack suite");
    for (int n : config.sizes)
      if (n < 2) throw InvalidParameter("mesh sizes must be >= 2");
  }
  if (config.tip_depth_assembly < 0 || config.tip_depth_error < 0)
    throw InvalidParameter("tip depths must be nonnegative");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Solved {
  int dof;
  double ee, scn, assembly_s, solve_s;
};

Solved solve_and_measure(const ApproximationSpace& space, const ProblemData& problem, const ExperimentConfig& config,
                         Clock::time_point t0) {
  const QuadratureOptions qa =
      quadrature_options(space, Purpose::Assembly, config.tip_depth_assembly, config.tip_depth_error);
  const QuadratureOptions qe = quadrature_options(space, Purpose::Error, config.tip_depth_assembly, config.tip_depth_error);
  const SparseMatrix A = assemble_stiffness(space, qa);
  const Eigen::VectorXd b = assemble_load(space, problem, qa);
  const double assembly_s = seconds_since(t0);
  const auto t1 = Clock::now();
  const SolveResult sol = solve_neumann(A, b, space.constant_vector());
  const double solve_s = seconds_since(t1);
  Solved out{space.dof_count(), energy_error(space, sol.coefficients, problem, qe), std::nan(""), assembly_s, solve_s};
  if (config.compute_scn) out.scn = scaled_condition_number(A, space.constant_vector()).scn();
  return out;
}

}  // namespace

ExperimentRecord run_record(const ExperimentConfig& config, Method method, int k, MeshKind mesh_kind, int size) {
  ExperimentRecord rec;
  rec.method = method_name(method);
  rec.k = k;
  rec.ee = rec.scn = std::nan("");
  const auto t0 = Clock::now();
  try {
    Solved s{};
    if (config.suite == Suite::Smooth) {
      rec.mesh = mesh_kind_name(mesh_kind);
      rec.n = size;
      const Mesh mesh = mesh_kind == MeshKind::Uniform ? build_uniform_mesh(size)
                                                       : build_perturbed_mesh(size, config.perturbation, config.seed);
      rec.h = mesh.h();
      const ProblemData problem = smooth_problem();
      SpacePtr space;
      switch (method) {
        case Method::Fem: space = build_fem_space(mesh, k); break;
        case Method::FlatTopGfem: space = build_ftgfem_space(mesh, k, config.flat_top); break;
        case Method::Sgfem: space = build_sgfem_space(mesh, k, config.flat_top); break;
        case Method::Cgfem:
          space = build_cgfem_space(std::make_shared<CondensedBasis>(build_smooth_condensed_basis(mesh, k)), k);
          break;
        case Method::CrackGfem: throw InvalidParameter("crack_gfem belongs to the crack suite");
      }
      s = solve_and_measure(*space, problem, config, t0);
    } else {
      rec.mesh = "crack";
      rec.n = crack_cells(size);
      const CrackMesh cm = build_crack_mesh(rec.n, config.radius);
      rec.h = cm.base.h();
      const ProblemData problem = crack_problem();
      SpacePtr space;
      switch (method) {
        case Method::Fem: space = build_crack_fem_space(cm); break;
        case Method::CrackGfem: space = build_crack_gfem_space(cm); break;
        case Method::Cgfem:
          space = build_crack_cgfem_space(cm, std::make_shared<CondensedBasis>(build_crack_condensed_basis(cm)));
          break;
        default: throw InvalidParameter("method " + method_name(method) + " is not part of the crack suite");
      }
      s = solve_and_measure(*space, problem, config, t0);
    }
    rec.dof = s.dof;
    rec.ee = s.ee;
    rec.scn = s.scn;
    if (config.timings) {
      rec.assembly_seconds = s.assembly_s;
      rec.solve_seconds = s.solve_s;
    }
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

std::vector<ExperimentRecord> run_suite(const ExperimentConfig& config,
                                        const std::function<void(const ExperimentRecord&)>& progress) {
  validate(config);
  std::vector<ExperimentRecord> records;
  for (Method m : config.methods)
    for (int k : config.degrees)
      for (MeshKind mk : config.meshes)
        for (int size : config.sizes) {
          records.push_back(run_record(config, m, k, mk, size));
          if (progress) progress(records.back());
        }
  return records;
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

std::string fmt_seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records)
    out << r.method << ',' << r.k << ',' << r.mesh << ',' << r.n << ',' << fmt(r.h) << ',' << r.dof << ','
        << fmt(r.ee) << ',' << fmt(r.scn) << ',' << fmt_seconds(r.assembly_seconds) << ','
        << fmt_seconds(r.solve_seconds) << '\n';
  for (const auto& r : records)
    if (!r.error.empty()) out << "#error," << r.method << ',' << r.k << ',' << r.mesh << ',' << r.n << ',' << r.error << '\n';

  // Curves in first-appearance order.
  std::vector<std::tuple<std::string, int, std::string>> keys;
  std::map<std::tuple<std::string, int, std::string>, std::vector<ExperimentRecord>> curves;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.method, r.k, r.mesh);
    if (!curves.count(key)) keys.push_back(key);
    curves[key].push_back(r);
  }
  for (const auto& key : keys) {
    const auto& c = curves[key];
    auto slope = [&](bool scn) -> std::string {
      try {
        return fmt(record_slope(c, scn));
      } catch (const DegenerateData&) {
        return "exact";
      } catch (const Error&) {
        return "n/a";
      }
    };
    const std::string ee = slope(false);
    out << "#slope," << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ",EE," << ee
        << ",SCN," << slope(true);
    // An energy-error rate this flat counts as no convergence at all.
    char* end = nullptr;
    const double rate = std::strtod(ee.c_str(), &end);
    if (end != ee.c_str() && rate <= 0.3) out << ",no convergence";
    out << '\n';
  }
}

std::vector<ExperimentRecord> read_csv(std::istream& in, std::vector<std::string>& warnings) {
  std::vector<ExperimentRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line == kCsvHeader) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    try {
      if (f.size() != 10) throw std::invalid_argument("expected 10 fields");
      ExperimentRecord r;
      r.method = f[0];
      r.k = std::stoi(f[1]);
      r.mesh = f[2];
      r.n = std::stoi(f[3]);
      r.h = std::stod(f[4]);
      r.dof = std::stoi(f[5]);
      r.ee = std::stod(f[6]);
      r.scn = std::stod(f[7]);
      r.assembly_seconds = std::stod(f[8]);
      r.solve_seconds = std::stod(f[9]);
      out.push_back(r);
    } catch (const std::exception& e) {
      warnings.push_back("line " + std::to_string(lineno) + ": malformed row skipped (" + e.what() + ")");
    }
  }
  return out;
}

}  // namespace cgfem

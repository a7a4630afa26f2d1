// Driver for the smooth and crack convergence suites.
//
//   cgfem_cli smooth [--methods fem,cgfem] [--degrees 1,2] [--mesh uniform] [--sizes 8,16] ...
//   cgfem_cli crack  [--sizes 1,2,3] [--radius 0.25] [--tip-depth 8,12] ...
//   cgfem_cli plot   results/smooth.csv
//
// Output goes to --out, else $CGFEM_OUTPUT_DIR, else ./results.

#include "cgfem/errors.hpp"
#include "cgfem/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cgfem;

namespace {

constexpr int kExitRecordError = 2;

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidParameter("not an integer: '" + item + "'");
    }
  }
  return out;
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CGFEM_OUTPUT_DIR"); env && *env) return env;
  return "results";
}

struct SuiteFlags {
  std::string methods, degrees, mesh, sizes, tip_depth, out;
  double sigma = 0.2;
  int ft_l = 1;
  double radius = 0.25;
  std::uint64_t seed = 2017;
  bool no_scn = false, timings = false, no_plots = false;
};

void add_suite_flags(CLI::App* cmd, SuiteFlags& f) {
  cmd->add_option("--methods", f.methods, "comma-separated subset of fem,ftgfem,sgfem,cgfem,crack_gfem");
  cmd->add_option("--degrees", f.degrees, "comma-separated subset of 1,2,3");
  cmd->add_option("--mesh", f.mesh, "comma-separated subset of uniform,perturbed");
  cmd->add_option("--sizes", f.sizes, "N values (smooth) or levels j (crack), comma-separated");
  cmd->add_option("--sigma", f.sigma, "flat-top width parameter")->capture_default_str();
  cmd->add_option("--ft-l", f.ft_l, "flat-top smoothness exponent")->capture_default_str();
  cmd->add_option("--radius", f.radius, "tip enrichment radius (crack)")->capture_default_str();
  cmd->add_option("--seed", f.seed, "perturbed-mesh seed")->capture_default_str();
  cmd->add_option("--tip-depth", f.tip_depth, "grading depth toward the tip: ASSEMBLY[,ERROR]");
  cmd->add_option("--out", f.out, "output directory (default $CGFEM_OUTPUT_DIR or ./results)");
  cmd->add_flag("--no-scn", f.no_scn, "skip the condition number estimate");
  cmd->add_flag("--timings", f.timings, "record wall-clock timings (CSV no longer reproducible)");
  cmd->add_flag("--no-plots", f.no_plots, "write the CSV only");
}

ExperimentConfig make_config(Suite suite, const SuiteFlags& f) {
  ExperimentConfig c = suite == Suite::Smooth ? default_smooth_config() : default_crack_config();
  if (!f.methods.empty()) {
    c.methods.clear();
    for (const auto& m : split(f.methods)) c.methods.push_back(parse_method(m));
  }
  if (!f.degrees.empty()) c.degrees = split_ints(f.degrees);
  if (!f.mesh.empty()) {
    c.meshes.clear();
    for (const auto& m : split(f.mesh)) c.meshes.push_back(parse_mesh_kind(m));
  }
  if (!f.sizes.empty()) c.sizes = split_ints(f.sizes);
  if (!f.tip_depth.empty()) {
    const auto d = split_ints(f.tip_depth);
    if (d.empty() || d.size() > 2) throw InvalidParameter("--tip-depth takes one or two integers");
    c.tip_depth_assembly = d[0];
    c.tip_depth_error = d.size() == 2 ? d[1] : std::max(d[0], kErrorTipDepth);
  }
  c.flat_top = FlatTopParams{f.sigma, f.ft_l};
  c.radius = f.radius;
  c.seed = f.seed;
  c.compute_scn = !f.no_scn;
  c.timings = f.timings;
  validate(c);
  return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int run_suite_command(Suite suite, const SuiteFlags& f) {
  const ExperimentConfig config = make_config(suite, f);
  const fs::path dir = output_dir(f.out);
  fs::create_directories(dir);
  const fs::path csv = dir / (suite == Suite::Smooth ? "smooth.csv" : "crack.csv");

  int failures = 0;
  const auto records = run_suite(config, [&](const ExperimentRecord& r) {
    if (!r.error.empty()) {
      ++failures;
      std::fprintf(stderr, "%-10s k=%d %-9s N=%-4d ERROR %s\n", r.method.c_str(), r.k, r.mesh.c_str(), r.n,
                   r.error.c_str());
    } else {
      std::fprintf(stderr, "%-10s k=%d %-9s N=%-4d dof=%-7d EE=%.4e SCN=%.4e\n", r.method.c_str(), r.k,
                   r.mesh.c_str(), r.n, r.dof, r.ee, r.scn);
    }
  });
  {
    std::ofstream out(csv);
    if (!out) throw InvalidParameter("cannot write " + csv.string());
    write_csv(out, records);
  }
  std::cout << csv.string() << '\n';
  if (!f.no_plots) {
    std::vector<std::string> warnings;
    for (const auto& p : emit_plots(csv, dir, warnings)) std::cout << p.string() << '\n';
    print_warnings(warnings);
  }
  return failures > 0 ? kExitRecordError : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Condensed GFEM convergence and conditioning experiments"};
  app.require_subcommand(1);

  SuiteFlags smooth_flags, crack_flags;
  auto* smooth = app.add_subcommand("smooth", "smooth-solution suite on uniform and perturbed meshes");
  add_suite_flags(smooth, smooth_flags);
  auto* crack = app.add_subcommand("crack", "cracked-domain suite");
  add_suite_flags(crack, crack_flags);

  std::string csv_in, plot_out;
  auto* plot = app.add_subcommand("plot", "regenerate SVG and .dat files from a CSV");
  plot->add_option("csv", csv_in, "CSV written by smooth or crack")->required();
  plot->add_option("--out", plot_out, "output directory (default $CGFEM_OUTPUT_DIR or ./results)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*smooth) return run_suite_command(Suite::Smooth, smooth_flags);
    if (*crack) return run_suite_command(Suite::Crack, crack_flags);
    std::vector<std::string> warnings;
    for (const auto& p : emit_plots(csv_in, output_dir(plot_out), warnings)) std::cout << p.string() << '\n';
    print_warnings(warnings);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

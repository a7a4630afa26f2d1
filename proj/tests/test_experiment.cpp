#include "cgfem/errors.hpp"
#include "cgfem/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cgfem;

namespace {

ExperimentConfig small_smooth() {
  ExperimentConfig c = default_smooth_config();
  c.methods = {Method::Fem, Method::Cgfem};
  c.degrees = {1};
  c.meshes = {MeshKind::Uniform, MeshKind::Perturbed};
  c.sizes = {4, 8, 16};
  return c;
}

std::string csv_of(const std::vector<ExperimentRecord>& rs) {
  std::ostringstream out;
  write_csv(out, rs);
  return out.str();
}

}  // namespace

TEST_CASE("defaults and names") {
  const ExperimentConfig s = default_smooth_config();
  CHECK(s.methods.size() == 4);
  CHECK(s.sizes == std::vector<int>{8, 16, 32, 64});
  CHECK(s.seed == 2017);
  const ExperimentConfig c = default_crack_config();
  CHECK(c.sizes == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(crack_cells(1) == 5);
  CHECK(crack_cells(3) == 17);
  CHECK(parse_mesh_kind(mesh_kind_name(MeshKind::Perturbed)) == MeshKind::Perturbed);
  CHECK_THROWS_AS(parse_mesh_kind("graded"), InvalidParameter);
  CHECK_NOTHROW(validate(s));
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("validation rejects out-of-scope combinations") {
  ExperimentConfig c = default_crack_config();
  c.degrees = {2};
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_crack_config();
  c.methods = {Method::FlatTopGfem};
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_crack_config();
  c.meshes = {MeshKind::Perturbed};
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_crack_config();
  c.radius = 1.0;
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_crack_config();
  c.sizes = {0};
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_smooth_config();
  c.methods = {Method::CrackGfem};
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_smooth_config();
  c.flat_top.sigma = 0.5;
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_smooth_config();
  c.degrees = {4};
  CHECK_THROWS_AS(validate(c), InvalidParameter);
  c = default_smooth_config();
  c.tip_depth_error = -1;
  CHECK_THROWS_AS(validate(c), InvalidParameter);
}

TEST_CASE("records capture library errors") {
  ExperimentConfig c = default_smooth_config();
  const ExperimentRecord r = run_record(c, Method::Cgfem, 3, MeshKind::Uniform, 2);
  CHECK_FALSE(r.error.empty());
  CHECK(r.error.find("node") != std::string::npos);
  const std::string csv = csv_of({r});
  CHECK(csv.find("#error,cgfem,3,uniform,2,") != std::string::npos);
}

TEST_CASE("suite output is a pure function of the configuration") {
  const ExperimentConfig c = small_smooth();
  int calls = 0;
  const auto a = run_suite(c, [&](const ExperimentRecord&) { ++calls; });
  CHECK(calls == 12);
  const auto b = run_suite(c);
  CHECK(csv_of(a) == csv_of(b));
  for (const auto& r : a) {
    CHECK(r.error.empty());
    CHECK(r.assembly_seconds == 0.0);
    CHECK(r.ee > 0);
    CHECK(r.scn > 1);
  }
  ExperimentConfig other = c;
  other.seed = 1;
  CHECK(csv_of(run_suite(other)) != csv_of(a));

  // Round trip through the reader.
  std::istringstream in(csv_of(a));
  std::vector<std::string> warnings;
  const auto back = read_csv(in, warnings);
  CHECK(warnings.empty());
  REQUIRE(back.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(back[i].method == a[i].method);
    CHECK(back[i].n == a[i].n);
    CHECK(back[i].dof == a[i].dof);
    CHECK(back[i].ee == doctest::Approx(a[i].ee).epsilon(1e-9));
  }
  const std::string text = csv_of(a);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(text.find("#slope,fem,1,uniform,EE,") != std::string::npos);
}

TEST_CASE("crack records") {
  ExperimentConfig c = default_crack_config();
  c.compute_scn = false;
  const ExperimentRecord r = run_record(c, Method::CrackGfem, 1, MeshKind::Uniform, 2);
  CHECK(r.error.empty());
  CHECK(r.mesh == "crack");
  CHECK(r.n == 9);
  CHECK(r.dof == 112);
  CHECK(r.h == doctest::Approx(2.0 / 9));
}

TEST_CASE("reader reports malformed lines") {
  std::istringstream in(std::string(kCsvHeader) + "\nfem,1,uniform,8\n#comment\nfem,1,uniform,8,0.125,81,0.1,10,0,0\n");
  std::vector<std::string> warnings;
  const auto rs = read_csv(in, warnings);
  CHECK(rs.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("2") != std::string::npos);
}

TEST_CASE("plots") {
  const auto dir = std::filesystem::temp_directory_path() / "cgfem_plot_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const ExperimentConfig c = small_smooth();
  {
    std::ofstream out(dir / "smooth.csv");
    write_csv(out, run_suite(c));
  }
  std::vector<std::string> warnings;
  const auto files = emit_plots(dir / "smooth.csv", dir, warnings);
  CHECK(warnings.empty());
  CHECK(std::filesystem::exists(dir / "smooth_EE.svg"));
  CHECK(std::filesystem::exists(dir / "smooth_SCN.svg"));
  CHECK(std::filesystem::exists(dir / "smooth_cgfem_k1_perturbed.dat"));
  CHECK(files.size() == 6);
  std::ifstream svg(dir / "smooth_EE.svg");
  const std::string s((std::istreambuf_iterator<char>(svg)), std::istreambuf_iterator<char>());
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("cgfem") != std::string::npos);

  {
    std::ofstream out(dir / "empty.csv");
    out << kCsvHeader << '\n';
  }
  CHECK(emit_plots(dir / "empty.csv", dir, warnings).size() == 2);
  std::ifstream e(dir / "empty_EE.svg");
  const std::string es((std::istreambuf_iterator<char>(e)), std::istreambuf_iterator<char>());
  CHECK(es.find("no methods selected") != std::string::npos);
  std::filesystem::remove_all(dir);
}

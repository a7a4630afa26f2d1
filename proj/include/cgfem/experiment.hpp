#pragma once

#include "cgfem/analysis.hpp"
#include "cgfem/spaces.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace cgfem {

enum class Suite { Smooth, Crack };
enum class MeshKind { Uniform, Perturbed };

std::string mesh_kind_name(MeshKind kind);
MeshKind parse_mesh_kind(const std::string& name);

struct ExperimentConfig {
  Suite suite = Suite::Smooth;
  std::vector<Method> methods;
  std::vector<int> degrees;
  std::vector<MeshKind> meshes;
  /// N values (smooth) or j values with n = 2^{j+1} + 1 (crack).
  std::vector<int> sizes;
  FlatTopParams flat_top;
  double radius = 0.25;
  std::uint64_t seed = 2017;
  double perturbation = 0.1;
  int tip_depth_assembly = kAssemblyTipDepth;
  int tip_depth_error = kErrorTipDepth;
  bool compute_scn = true;
  /// Write measured wall-clock timings; otherwise the timing columns are 0 so
  /// the CSV is a pure function of the configuration.
  bool timings = false;
};

ExperimentConfig default_smooth_config();
ExperimentConfig default_crack_config();

/// Throws InvalidParameter for combinations outside the suite's scope.
void validate(const ExperimentConfig& config);

/// Crack mesh size for level j.
inline int crack_cells(int j) { return (1 << (j + 1)) + 1; }

/// One (method, k, mesh, size) run. Library errors are caught and recorded.
ExperimentRecord run_record(const ExperimentConfig& config, Method method, int k, MeshKind mesh, int size);

/// All records of a suite in configuration order. `progress` is called after
/// each record when set.
std::vector<ExperimentRecord> run_suite(const ExperimentConfig& config,
                                        const std::function<void(const ExperimentRecord&)>& progress = {});

inline constexpr const char* kCsvHeader = "method,k,mesh,N,h,dof,EE,SCN,assembly_s,solve_s";

/// Rows, then "#error,..." lines for failed records and "#slope,..." summaries per curve.
void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);

/// Parse rows of a CSV written by write_csv; malformed lines are reported in `warnings`.
std::vector<ExperimentRecord> read_csv(std::istream& in, std::vector<std::string>& warnings);

/// Log-log SVG charts of EE and SCN against sqrt(DOF), one per quantity,
/// plus one gnuplot .dat file per curve. Returns the files written.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv_path,
                                              const std::filesystem::path& out_dir,
                                              std::vector<std::string>& warnings);

}  // namespace cgfem

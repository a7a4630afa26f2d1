#pragma once

#include "cgfem/assembly.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgfem {

/// u = exp(2 x1 + x2) on the unit square.
ProblemData smooth_problem();

/// u = r^{1/2} sin(theta/2) + r^{3/2} sin(3 theta/2) on the slit square,
/// theta in (-pi, pi] measured from the crack-ahead direction.
ProblemData crack_problem();

/// Exact gradient of r^a sin(a theta) around the origin: a r^{a-1} (sin((a-1)theta), cos((a-1)theta)).
Vec2 polar_power_gradient(double a, const Vec2& x);

struct EnergyNorms {
  double error = 0.0;  // |u - u_h|_1
  double exact = 0.0;  // |u|_1
  double relative() const { return exact > 0 ? error / exact : error; }
};

EnergyNorms energy_norms(const ApproximationSpace& space, const Eigen::VectorXd& coefficients,
                         const ProblemData& problem, const QuadratureOptions& options);

/// Relative energy error |u - u_h|_1 / |u|_1.
double energy_error(const ApproximationSpace& space, const Eigen::VectorXd& coefficients,
                    const ProblemData& problem, const QuadratureOptions& options);

/// |v_h|_1^2 = v^T A v computed by quadrature.
double energy_seminorm_squared(const ApproximationSpace& space, const Eigen::VectorXd& coefficients,
                               const QuadratureOptions& options);

struct ConditionEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double scn() const { return lambda_max / lambda_min; }
  int iterations_max = 0;
  int iterations_min = 0;
  bool converged = false;
  bool dense = false;
};

struct ScnOptions {
  double tolerance = 1e-6;
  int max_iterations = 400;
  /// Use the dense eigensolver when the dimension is at most this.
  int dense_threshold = 0;
};

/// Extreme eigenvalues of D^{-1/2} A D^{-1/2} on the complement of the scaled
/// null vector (pass an empty vector when A is nonsingular). The largest comes
/// from Lanczos on the operator, the smallest from Lanczos on its pseudo-inverse
/// applied through a sparse factorization.
ConditionEstimate scaled_condition_number(const SparseMatrix& A, const Eigen::VectorXd& null_vector,
                                          const ScnOptions& options = {});

/// Same quantity from a dense symmetric eigensolve (dimension <= 3000).
ConditionEstimate scaled_condition_number_dense(const SparseMatrix& A, const Eigen::VectorXd& null_vector);

/// Least-squares slope of log(y) against log(x). Throws DegenerateData if any
/// y <= 0 and InvalidParameter for fewer than 3 points or repeated x.
double convergence_slope(std::span<const double> x, std::span<const double> y);

struct ExperimentRecord {
  std::string method;
  int k = 1;
  std::string mesh;
  int n = 0;
  double h = 0.0;
  int dof = 0;
  double ee = 0.0;
  double scn = 0.0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  std::string error;  // empty on success
};

/// Slope fitted over the finest `finest` records (by h) of one curve.
double record_slope(std::span<const ExperimentRecord> records, bool use_scn, int finest = 4);

}  // namespace cgfem

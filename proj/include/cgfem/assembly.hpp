#pragma once

#include "cgfem/quadrature.hpp"
#include "cgfem/spaces.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <vector>
#include <iosfwd>

namespace cgfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// -Laplace(u) = f in the domain, du/dn = g on the outer boundary; crack
/// faces are flux free.
struct ProblemData {
  std::function<double(const Vec2&)> source;
  /// Outward flux for a boundary point and its unit outward normal.
  std::function<double(const Vec2&, const Vec2&)> flux;
  std::function<double(const Vec2&)> exact_u;
  std::function<Vec2(const Vec2&)> exact_grad;
  bool zero_source = false;
};

enum class Purpose { Assembly, Error };

/// Gauss order k+2 per direction, plus k-1 on curved elements whose Jacobian
/// has higher degree, plus 2 on crack meshes; flat-top breakpoints for flat-top spaces;
/// crack splitting and tip grading on crack meshes.
QuadratureOptions quadrature_options(const ApproximationSpace& space, Purpose purpose,
                                     int tip_depth_assembly = kAssemblyTipDepth,
                                     int tip_depth_error = kErrorTipDepth);

/// Physical volume weight of qp under the space's geometry.
inline double volume_weight(const ApproximationSpace& space, const QuadraturePoint& qp, const ElementPoint& p) {
  return space.curved_geometry() ? qp.ref_weight * std::abs(p.det) : qp.weight;
}

/// A[m][n] = integral of grad(phi_m) . grad(phi_n); exactly symmetric.
SparseMatrix assemble_stiffness(const ApproximationSpace& space, const QuadratureOptions& options);

/// b[m] = integral of f phi_m + boundary integral of g phi_m.
Eigen::VectorXd assemble_load(const ApproximationSpace& space, const ProblemData& problem,
                              const QuadratureOptions& options);

struct SolveOptions {
  double relative_tolerance = 1e-12;
  /// Iteration cap as a multiple of the dimension.
  int max_iteration_factor = 20;
};

struct SolveResult {
  Eigen::VectorXd coefficients;
  int iterations = 0;
  /// Recursively updated residual at exit, relative to |b|.
  double relative_residual = 0.0;
  /// |b - A x| / |b| recomputed at exit.
  double true_relative_residual = 0.0;
};

/// DOFs whose shape function vanishes identically, detected as a stiffness
/// diagonal below `relative` times the largest one. On uniform meshes the
/// corrected bilinear enrichment xy - I_h(xy) is such a function; its rows
/// hold roundoff only.
std::vector<int> vanishing_dofs(const SparseMatrix& A, double relative = 1e-20);

/// Complement of `vanishing` in [0, n), ascending.
std::vector<int> active_dofs(Eigen::Index n, const std::vector<int>& vanishing);

/// A restricted to rows and columns in `keep`.
SparseMatrix restrict_matrix(const SparseMatrix& A, const std::vector<int>& keep);
Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v, const std::vector<int>& keep);

/// Jacobi-preconditioned CG for A x = b with A positive semidefinite and
/// null(A) spanned by `null_vector`. The right-hand side is projected onto the
/// range first; the returned x satisfies <x, null_vector> = 0. Vanishing DOFs
/// are excluded and get coefficient 0. Throws
/// SolverFailure when the iteration cap is reached.
SolveResult solve_neumann(const SparseMatrix& A, const Eigen::VectorXd& b, const Eigen::VectorXd& null_vector,
                          const SolveOptions& options = {});

/// Dense reference solve: pin the DOF with the largest null-vector entry,
/// factorize, then remove the null-vector component.
Eigen::VectorXd dense_neumann_solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& null_vector);

/// Removes the component along `direction` (Euclidean projection).
void project_out(Eigen::VectorXd& v, const Eigen::VectorXd& direction);

/// "dim nnz" header then "row col value" per stored entry.
void write_matrix(std::ostream& out, const SparseMatrix& A);

}  // namespace cgfem

#include "cgfem/assembly.hpp"

#include "cgfem/errors.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace cgfem {

QuadratureOptions quadrature_options(const ApproximationSpace& space, Purpose purpose, int tip_depth_assembly,
                                     int tip_depth_error) {
  QuadratureOptions o;
  o.order = space.degree() + 2 + (space.curved_geometry() ? space.degree() - 1 : 0);
  // sqrt(r) enrichments reach every cut row; at k+2 points the volume and
  // boundary integrals disagree at the 1e-8 level.
  if (space.crack()) o.order += kCrackOrderBoost;
  if (space.flat_top()) o.flat_top_sigma = space.flat_top()->sigma;
  o.crack = space.crack();
  o.tip_depth = purpose == Purpose::Assembly ? tip_depth_assembly : tip_depth_error;
  return o;
}

SparseMatrix assemble_stiffness(const ApproximationSpace& space, const QuadratureOptions& options) {
  const Mesh& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::MatrixXd local, grads;
  std::vector<double> values(space.max_element_dofs());
  std::vector<Vec2> g(space.max_element_dofs());
  for (int s = 0; s < mesh.element_count(); ++s) {
    const auto dofs = space.element_dofs(s);
    const auto nd = static_cast<Eigen::Index>(dofs.size());
    local.setZero(nd, nd);
    grads.resize(2, nd);
    const QuadratureRule rule = element_quadrature(mesh, s, options);
    for (const QuadraturePoint& qp : rule.points) {
      const ElementPoint p = space.point(s, qp.ref);
      const double w = volume_weight(space, qp, p);
      space.evaluate(p, values, g);
      for (Eigen::Index a = 0; a < nd; ++a) {
        if (!std::isfinite(g[a].x()) || !std::isfinite(g[a].y()))
          throw SingularPoint("non-finite shape gradient in element " + std::to_string(s));
        grads.col(a) = g[a];
      }
      local.selfadjointView<Eigen::Upper>().rankUpdate(grads.transpose(), w);
    }
    // Mirror the upper triangle so A is bitwise symmetric.
    for (Eigen::Index a = 0; a < nd; ++a)
      for (Eigen::Index b = a; b < nd; ++b) {
        triplets.emplace_back(dofs[a], dofs[b], local(a, b));
        if (b != a) triplets.emplace_back(dofs[b], dofs[a], local(a, b));
      }
  }
  SparseMatrix A(space.dof_count(), space.dof_count());
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

Eigen::VectorXd assemble_load(const ApproximationSpace& space, const ProblemData& problem,
                              const QuadratureOptions& options) {
  const Mesh& mesh = space.mesh();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count());
  std::vector<double> values(space.max_element_dofs());
  std::vector<Vec2> g(space.max_element_dofs());
  if (!problem.zero_source) {
    for (int s = 0; s < mesh.element_count(); ++s) {
      const auto dofs = space.element_dofs(s);
      const QuadratureRule rule = element_quadrature(mesh, s, options);
      for (const QuadraturePoint& qp : rule.points) {
        const ElementPoint p = space.point(s, qp.ref);
      const double w = volume_weight(space, qp, p);
        space.evaluate(p, values, g);
        const double f = problem.source(p.x) * w;
        for (std::size_t a = 0; a < dofs.size(); ++a) b[dofs[a]] += f * values[a];
      }
    }
  }
  for (const BoundaryEdge& edge : mesh.boundary_edges()) {
    const auto dofs = space.element_dofs(edge.element);
    const QuadratureRule rule = edge_quadrature(mesh, edge, options);
    for (const QuadraturePoint& qp : rule.points) {
      const ElementPoint p = space.point(edge.element, qp.ref);
      space.evaluate(p, values, g);
      const double flux = problem.flux(p.x, edge.normal) * qp.weight;
      for (std::size_t a = 0; a < dofs.size(); ++a) b[dofs[a]] += flux * values[a];
    }
  }
  return b;
}

void project_out(Eigen::VectorXd& v, const Eigen::VectorXd& direction) {
  const double nn = direction.squaredNorm();
  if (nn > 0) v -= (direction.dot(v) / nn) * direction;
}

std::vector<int> vanishing_dofs(const SparseMatrix& A, double relative) {
  const Eigen::VectorXd d = A.diagonal();
  const double cut = relative * (d.size() ? d.cwiseAbs().maxCoeff() : 0.0);
  std::vector<int> out;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::abs(d[i]) <= cut) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> active_dofs(Eigen::Index n, const std::vector<int>& vanishing) {
  std::vector<int> keep;
  auto it = vanishing.begin();
  for (int i = 0; i < n; ++i) {
    if (it != vanishing.end() && *it == i) {
      ++it;
      continue;
    }
    keep.push_back(i);
  }
  return keep;
}

SparseMatrix restrict_matrix(const SparseMatrix& A, const std::vector<int>& keep) {
  std::vector<int> pos(A.rows(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.nonZeros());
  for (int r : keep)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      if (pos[it.col()] >= 0) t.emplace_back(pos[r], pos[it.col()], it.value());
  SparseMatrix R(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v, const std::vector<int>& keep) {
  if (v.size() == 0) return v;
  Eigen::VectorXd out(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[keep[i]];
  return out;
}

namespace {

Eigen::VectorXd scatter(const Eigen::VectorXd& y, const std::vector<int>& keep, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < keep.size(); ++i) x[keep[i]] = y[static_cast<Eigen::Index>(i)];
  return x;
}

SolveResult pcg_neumann(const SparseMatrix& A, const Eigen::VectorXd& b_in, const Eigen::VectorXd& null_vector,
                        const SolveOptions& options) {
  const Eigen::Index n = A.rows();
  SolveResult result;
  result.coefficients = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd b = b_in;
  project_out(b, null_vector);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return result;

  const Eigen::VectorXd dinv = A.diagonal().cwiseInverse();
  Eigen::VectorXd& x = result.coefficients;
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd q(n);
  double rz = r.dot(z);
  const long max_iter = static_cast<long>(options.max_iteration_factor) * n;
  double rel = 1.0;
  long it = 0;
  for (; it < max_iter; ++it) {
    q.noalias() = A * p;
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    project_out(r, null_vector);
    rel = r.norm() / bnorm;
    if (rel <= options.relative_tolerance) {
      ++it;
      break;
    }
    z = dinv.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  project_out(x, null_vector);
  result.iterations = static_cast<int>(it);
  result.relative_residual = rel;
  result.true_relative_residual = (b - A * x).norm() / bnorm;
  if (!(rel <= options.relative_tolerance))
    throw SolverFailure("deflated CG did not converge after " + std::to_string(it) + " iterations", rel);
  return result;
}

Eigen::VectorXd dense_pinned_solve(const SparseMatrix& A, const Eigen::VectorXd& b_in,
                                   const Eigen::VectorXd& null_vector) {
  const Eigen::Index n = A.rows();
  if (n > 3000) throw InvalidParameter("dense reference solve is limited to 3000 unknowns");
  Eigen::VectorXd b = b_in;
  project_out(b, null_vector);
  Eigen::Index pin = 0;
  null_vector.cwiseAbs().maxCoeff(&pin);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A);
  Eigen::MatrixXd reduced(n - 1, n - 1);
  Eigen::VectorXd rhs(n - 1);
  auto map = [pin](Eigen::Index i) { return i < pin ? i : i + 1; };
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    rhs[i] = b[map(i)];
    for (Eigen::Index j = 0; j < n - 1; ++j) reduced(i, j) = dense(map(i), map(j));
  }
  const Eigen::VectorXd y = reduced.ldlt().solve(rhs);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n - 1; ++i) x[map(i)] = y[i];
  project_out(x, null_vector);
  return x;
}

}  // namespace

SolveResult solve_neumann(const SparseMatrix& A, const Eigen::VectorXd& b, const Eigen::VectorXd& null_vector,
                          const SolveOptions& options) {
  const auto vanishing = vanishing_dofs(A);
  if (vanishing.empty()) return pcg_neumann(A, b, null_vector, options);
  const auto keep = active_dofs(A.rows(), vanishing);
  SolveResult r = pcg_neumann(restrict_matrix(A, keep), restrict_vector(b, keep), restrict_vector(null_vector, keep),
                              options);
  r.coefficients = scatter(r.coefficients, keep, A.rows());
  return r;
}

Eigen::VectorXd dense_neumann_solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& null_vector) {
  const auto vanishing = vanishing_dofs(A);
  if (vanishing.empty()) return dense_pinned_solve(A, b, null_vector);
  const auto keep = active_dofs(A.rows(), vanishing);
  return scatter(
      dense_pinned_solve(restrict_matrix(A, keep), restrict_vector(b, keep), restrict_vector(null_vector, keep)),
      keep, A.rows());
}

void write_matrix(std::ostream& out, const SparseMatrix& A) {
  out << A.rows() << ' ' << A.nonZeros() << '\n' << std::setprecision(17);
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace cgfem

#include "cgfem/analysis.hpp"

#include "cgfem/enrichment.hpp"
#include "cgfem/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>

namespace cgfem {

ProblemData smooth_problem() {
  ProblemData p;
  p.exact_u = [](const Vec2& x) { return std::exp(2 * x.x() + x.y()); };
  p.exact_grad = [](const Vec2& x) {
    const double u = std::exp(2 * x.x() + x.y());
    return Vec2(2 * u, u);
  };
  p.source = [](const Vec2& x) { return -5.0 * std::exp(2 * x.x() + x.y()); };
  p.flux = [grad = p.exact_grad](const Vec2& x, const Vec2& n) { return grad(x).dot(n); };
  return p;
}

Vec2 polar_power_gradient(double a, const Vec2& x) {
  const double r = x.norm();
  if (r == 0.0 && a < 1.0) throw SingularPoint("exact crack gradient requested at the tip");
  const double theta = crack_angle(x);
  const double scale = a * std::pow(r, a - 1);
  return scale * Vec2(std::sin((a - 1) * theta), std::cos((a - 1) * theta));
}

ProblemData crack_problem() {
  ProblemData p;
  p.exact_u = [](const Vec2& x) {
    const double r = x.norm(), theta = crack_angle(x);
    return std::sqrt(r) * std::sin(0.5 * theta) + r * std::sqrt(r) * std::sin(1.5 * theta);
  };
  p.exact_grad = [](const Vec2& x) { return Vec2(polar_power_gradient(0.5, x) + polar_power_gradient(1.5, x)); };
  p.source = [](const Vec2&) { return 0.0; };
  p.zero_source = true;
  p.flux = [grad = p.exact_grad](const Vec2& x, const Vec2& n) { return grad(x).dot(n); };
  return p;
}

EnergyNorms energy_norms(const ApproximationSpace& space, const Eigen::VectorXd& coefficients,
                         const ProblemData& problem, const QuadratureOptions& options) {
  const Mesh& mesh = space.mesh();
  std::vector<double> values(space.max_element_dofs());
  std::vector<Vec2> grads(space.max_element_dofs());
  double err = 0.0, exact = 0.0;
  for (int s = 0; s < mesh.element_count(); ++s) {
    const auto dofs = space.element_dofs(s);
    const QuadratureRule rule = element_quadrature(mesh, s, options);
    for (const QuadraturePoint& qp : rule.points) {
      const ElementPoint p = space.point(s, qp.ref);
      const double w = volume_weight(space, qp, p);
      space.evaluate(p, values, grads);
      Vec2 gh = Vec2::Zero();
      for (std::size_t a = 0; a < dofs.size(); ++a) gh += coefficients[dofs[a]] * grads[a];
      const Vec2 gu = problem.exact_grad(p.x);
      err += w * (gu - gh).squaredNorm();
      exact += w * gu.squaredNorm();
    }
  }
  return {std::sqrt(err), std::sqrt(exact)};
}

double energy_error(const ApproximationSpace& space, const Eigen::VectorXd& coefficients,
                    const ProblemData& problem, const QuadratureOptions& options) {
  return energy_norms(space, coefficients, problem, options).relative();
}

double energy_seminorm_squared(const ApproximationSpace& space, const Eigen::VectorXd& coefficients,
                               const QuadratureOptions& options) {
  ProblemData zero;
  zero.exact_grad = [](const Vec2&) { return Vec2::Zero(); };
  const double e = energy_norms(space, coefficients, zero, options).error;
  return e * e;
}

namespace {

struct LanczosResult {
  double theta = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Largest eigenvalue of a symmetric operator restricted to the complement of
// `deflate`, with full reorthogonalization.
template <class Apply>
LanczosResult lanczos_largest(Apply&& apply, Eigen::Index n, const Eigen::VectorXd& deflate, double tol,
                              int max_iterations) {
  std::mt19937_64 gen(0x5eedULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  if (deflate.size()) project_out(v, deflate);
  v.normalize();

  const Eigen::Index limit = std::min<Eigen::Index>(max_iterations, n - (deflate.size() ? 1 : 0));
  std::vector<Eigen::VectorXd> basis{v};
  std::vector<double> alpha, beta;
  LanczosResult result;
  for (Eigen::Index j = 0; j < limit; ++j) {
    Eigen::VectorXd w = apply(basis[j]);
    if (deflate.size()) project_out(w, deflate);
    alpha.push_back(basis[j].dot(w));
    w -= alpha.back() * basis[j];
    if (j > 0) w -= beta.back() * basis[j - 1];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    const double b = w.norm();

    const Eigen::Index m = j + 1;
    const bool last = m == limit;
    const bool check = m % 5 == 0 || last || b == 0.0;
    if (check) {
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd e = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      result.theta = tri.eigenvalues()(m - 1);
      const double residual = std::abs(b * tri.eigenvectors()(m - 1, m - 1));
      result.iterations = static_cast<int>(m);
      if (residual <= tol * std::abs(result.theta) || b <= 1e-14 * std::abs(result.theta) || m == n - (deflate.size() ? 1 : 0)) {
        result.converged = true;
        return result;
      }
    }
    if (last) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return result;
}

struct Scaled {
  Eigen::SparseMatrix<double> matrix;  // column-major for the factorization
  Eigen::VectorXd null;                // unit scaled null vector, or empty
};

Scaled jacobi_scale(const SparseMatrix& A, const Eigen::VectorXd& null_vector) {
  const Eigen::VectorXd d = A.diagonal();
  if ((d.array() <= 0.0).any()) throw InvalidParameter("scaled condition number needs a positive diagonal");
  const Eigen::VectorXd inv_sqrt = d.cwiseSqrt().cwiseInverse();
  Scaled out;
  out.matrix = Eigen::SparseMatrix<double>(A);
  for (int c = 0; c < out.matrix.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(out.matrix, c); it; ++it)
      it.valueRef() *= inv_sqrt[it.row()] * inv_sqrt[it.col()];
  if (null_vector.size()) out.null = d.cwiseSqrt().cwiseProduct(null_vector).normalized();
  return out;
}

}  // namespace

ConditionEstimate scaled_condition_number(const SparseMatrix& A, const Eigen::VectorXd& null_vector,
                                          const ScnOptions& options) {
  if (const auto vanishing = vanishing_dofs(A); !vanishing.empty()) {
    const auto keep = active_dofs(A.rows(), vanishing);
    return scaled_condition_number(restrict_matrix(A, keep), restrict_vector(null_vector, keep), options);
  }
  if (A.rows() <= options.dense_threshold) return scaled_condition_number_dense(A, null_vector);
  const Scaled sc = jacobi_scale(A, null_vector);
  const Eigen::Index n = A.rows();
  ConditionEstimate est;

  const LanczosResult top = lanczos_largest([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(sc.matrix * v); },
                                            n, sc.null, options.tolerance, options.max_iterations);

  // Pseudo-inverse action: factor the matrix with the largest null entry pinned.
  Eigen::Index pin = -1;
  if (sc.null.size()) sc.null.cwiseAbs().maxCoeff(&pin);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(sc.matrix.nonZeros()));
  auto reduce = [pin](Eigen::Index i) { return pin < 0 || i < pin ? i : i - 1; };
  for (int c = 0; c < sc.matrix.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sc.matrix, c); it; ++it)
      if (it.row() != pin && it.col() != pin) trip.emplace_back(reduce(it.row()), reduce(it.col()), it.value());
  const Eigen::Index m = pin < 0 ? n : n - 1;
  Eigen::SparseMatrix<double> reduced(m, m);
  reduced.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(reduced);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("sparse factorization for the smallest eigenvalue failed", 0.0);

  auto apply_inverse = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != pin) rhs[reduce(i)] = v[i];
    const Eigen::VectorXd y = ldlt.solve(rhs);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != pin) x[i] = y[reduce(i)];
    if (sc.null.size()) project_out(x, sc.null);
    return x;
  };
  const LanczosResult bottom = lanczos_largest(apply_inverse, n, sc.null, options.tolerance, options.max_iterations);

  est.lambda_max = top.theta;
  est.lambda_min = 1.0 / bottom.theta;
  est.iterations_max = top.iterations;
  est.iterations_min = bottom.iterations;
  est.converged = top.converged && bottom.converged;
  return est;
}

ConditionEstimate scaled_condition_number_dense(const SparseMatrix& A, const Eigen::VectorXd& null_vector) {
  if (const auto vanishing = vanishing_dofs(A); !vanishing.empty()) {
    const auto keep = active_dofs(A.rows(), vanishing);
    return scaled_condition_number_dense(restrict_matrix(A, keep), restrict_vector(null_vector, keep));
  }
  if (A.rows() > 3000) throw InvalidParameter("dense eigensolve is limited to dimension 3000");
  const Scaled sc = jacobi_scale(A, null_vector);
  Eigen::MatrixXd S = Eigen::MatrixXd(sc.matrix);
  if (sc.null.size()) {
    // Householder reflection taking the null direction onto e_0, then drop it.
    Eigen::VectorXd v = sc.null;
    v[0] += (v[0] >= 0 ? 1.0 : -1.0);
    v.normalize();
    const Eigen::VectorXd Sv = S * v;
    const double vSv = v.dot(Sv);
    S -= 2.0 * (v * Sv.transpose() + Sv * v.transpose());
    S += 4.0 * vSv * (v * v.transpose());
    S = Eigen::MatrixXd(S.bottomRightCorner(S.rows() - 1, S.cols() - 1));
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  ConditionEstimate est;
  est.lambda_min = eig.eigenvalues()(0);
  est.lambda_max = eig.eigenvalues()(S.rows() - 1);
  est.converged = true;
  est.dense = true;
  return est;
}

double convergence_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw InvalidParameter("slope fit needs at least 3 points");
  for (double v : y)
    if (!(v > 0.0)) throw DegenerateData("nonpositive value in slope fit (exact reproduction)");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidParameter("slope fit needs distinct abscissae");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double record_slope(std::span<const ExperimentRecord> records, bool use_scn, int finest) {
  std::vector<ExperimentRecord> ok;
  for (const auto& r : records)
    if (r.error.empty()) ok.push_back(r);
  std::sort(ok.begin(), ok.end(), [](const auto& a, const auto& b) { return a.h < b.h; });
  if (static_cast<int>(ok.size()) > finest) ok.resize(finest);
  std::vector<double> hs, ys;
  for (const auto& r : ok) {
    hs.push_back(r.h);
    ys.push_back(use_scn ? r.scn : r.ee);
  }
  return convergence_slope(hs, ys);
}

}  // namespace cgfem

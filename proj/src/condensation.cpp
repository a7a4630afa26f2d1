#include "cgfem/condensation.hpp"

#include "cgfem/errors.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

namespace cgfem {

LeastSquaresFit::LeastSquaresFit(const Eigen::MatrixXd& node_values) {
  const Eigen::Index m = node_values.rows(), n = node_values.cols();
  gram_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index l = 0; l < m; ++l)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) gram_(a, b) += node_values(l, a) * node_values(l, b);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
  lambda_min_ = eig.eigenvalues()(0);
  const double lambda_max = eig.eigenvalues()(n - 1);
  cond_ = lambda_min_ > 0 ? lambda_max / lambda_min_ : std::numeric_limits<double>::infinity();

  const Eigen::LLT<Eigen::MatrixXd> llt(gram_);
  ok_ = m >= n && llt.info() == Eigen::Success && cond_ <= kGramConditionGate;
  // G^{-1} Q^T equals the pseudo-inverse of the node-value matrix; solving
  // through its QR factors loses sqrt(cond G) digits instead of cond G.
  if (ok_) coeffs_ = node_values.householderQr().solve(Eigen::MatrixXd::Identity(m, m));
}

LeastSquaresFit gram_matrix(const LocalEnrichmentSpace& space, const Mesh& mesh,
                            std::span<const int> nodes) {
  Eigen::MatrixXd values(static_cast<Eigen::Index>(nodes.size()), space.dimension());
  std::vector<double> row(space.dimension());
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    space.evaluate(mesh.node(nodes[l]), row);
    for (int j = 0; j < space.dimension(); ++j) values(static_cast<Eigen::Index>(l), j) = row[j];
  }
  return LeastSquaresFit(values);
}

std::vector<int> side_neighbour_set(const Mesh& mesh, int i) {
  const auto [ix, iy] = mesh.node_lattice(i);
  const int n = mesh.cells_per_side();
  std::vector<int> out{i};
  if (ix > 0) out.push_back(mesh.node_at(ix - 1, iy));
  if (ix < n) out.push_back(mesh.node_at(ix + 1, iy));
  if (iy > 0) out.push_back(mesh.node_at(ix, iy - 1));
  if (iy < n) out.push_back(mesh.node_at(ix, iy + 1));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> patch_nodes(const Mesh& mesh, int i) {
  std::set<int> out;
  for (int s : mesh.patch(i))
    for (int j : mesh.element(s)) out.insert(j);
  return {out.begin(), out.end()};
}

std::vector<int> expand_node_set(const Mesh& mesh, std::span<const int> nodes) {
  std::set<int> out;
  for (int j : nodes)
    for (int s : mesh.patch(j))
      for (int c : mesh.element(s)) out.insert(c);
  return {out.begin(), out.end()};
}

std::vector<int> polynomial_node_set(const Mesh& mesh, int i, int k) {
  if (k < 1) throw InvalidParameter("polynomial degree must be >= 1");
  if (k == 1) return side_neighbour_set(mesh, i);
  std::vector<int> set = patch_nodes(mesh, i);
  for (int d = 3; d <= k; ++d) set = expand_node_set(mesh, set);
  return set;
}

std::vector<int> polynomial_node_set_1d(int node_count, int i, int k) {
  if (k < 1) throw InvalidParameter("polynomial degree must be >= 1");
  // k = 1 and k = 2 both give the patch; each further degree adds one element ring.
  const int reach = std::max(1, k - 1);
  std::vector<int> out;
  for (int j = std::max(0, i - reach); j <= std::min(node_count - 1, i + reach); ++j) out.push_back(j);
  return out;
}

namespace {

// Gate check of the same set at the unperturbed lattice positions. A set of
// two node rows fits y^2 only through the jitter, with constants that blow
// up as the jitter shrinks; judging it on the lattice expands it exactly as
// on a uniform mesh.
bool lattice_unisolvent(const Mesh& mesh, int i, const LocalEnrichmentSpace& space, std::span<const int> nodes) {
  const Square& d = mesh.domain();
  const double h = mesh.h();
  auto lattice = [&](int l) {
    const auto [ix, iy] = mesh.node_lattice(l);
    return Vec2(d.lo + ix * h, d.lo + iy * h);
  };
  const LocalEnrichmentSpace ref(i, lattice(i), h, {space.basis().begin(), space.basis().end()});
  Eigen::MatrixXd values(static_cast<Eigen::Index>(nodes.size()), space.dimension());
  std::vector<double> row(space.dimension());
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    ref.evaluate(lattice(nodes[l]), row);
    for (int j = 0; j < space.dimension(); ++j) values(static_cast<Eigen::Index>(l), j) = row[j];
  }
  return LeastSquaresFit(values).acceptable();
}

}  // namespace

UnisolventSet unisolvent_set(const Mesh& mesh, int i, const LocalEnrichmentSpace& space, SetRule rule) {
  const bool perturbed = mesh.perturbation() && mesh.perturbation()->magnitude > 0.0;
  UnisolventSet result;
  result.nodes = rule == SetRule::Polynomial ? polynomial_node_set(mesh, i, space.max_degree())
                                             : patch_nodes(mesh, i);
  for (;;) {
    if (static_cast<int>(result.nodes.size()) >= space.dimension() &&
        gram_matrix(space, mesh, result.nodes).acceptable() &&
        (!perturbed || lattice_unisolvent(mesh, i, space, result.nodes)))
      return result;
    if (static_cast<int>(result.nodes.size()) == mesh.node_count())
      throw UnisolvenceFailure(i, "node set expansion exhausted the mesh without a unisolvent set");
    result.nodes = expand_node_set(mesh, result.nodes);
    ++result.expansion_depth;
  }
}

std::vector<std::vector<int>> invert_adjacency(std::span<const std::vector<int>> supports, int node_count) {
  std::vector<std::vector<int>> adjacency(node_count);
  for (std::size_t i = 0; i < supports.size(); ++i)
    for (int l : supports[i]) adjacency[l].push_back(static_cast<int>(i));
  return adjacency;  // ascending in i by construction
}

CondensedBasis::CondensedBasis(const Mesh& mesh, std::vector<LocalEnrichmentSpace> spaces, SetRule rule)
    : mesh_(&mesh) {
  if (static_cast<int>(spaces.size()) != mesh.node_count())
    throw InvalidParameter("one local space per mesh node is required");
  fits_.reserve(spaces.size());
  std::vector<std::vector<int>> supports;
  supports.reserve(spaces.size());
  for (int i = 0; i < mesh.node_count(); ++i) {
    UnisolventSet set = unisolvent_set(mesh, i, spaces[i], rule);
    LeastSquaresFit ls = gram_matrix(spaces[i], mesh, set.nodes);
    supports.push_back(set.nodes);
    fits_.push_back(NodeFit{std::move(spaces[i]), std::move(set.nodes), set.expansion_depth,
                            ls.condition_number(), ls.smallest_eigenvalue(), ls.gram(), ls.coefficients()});
  }
  adjacency_ = invert_adjacency(supports, mesh.node_count());
}

int CondensedBasis::max_support_size() const {
  std::size_t m = 0;
  for (const auto& f : fits_) m = std::max(m, f.support.size());
  return static_cast<int>(m);
}

int CondensedBasis::max_adjacency_size() const {
  std::size_t m = 0;
  for (const auto& a : adjacency_) m = std::max(m, a.size());
  return static_cast<int>(m);
}

int CondensedBasis::support_position(int i, int l) const {
  const auto& s = fits_[i].support;
  const auto it = std::lower_bound(s.begin(), s.end(), l);
  return it != s.end() && *it == l ? static_cast<int>(it - s.begin()) : -1;
}

ValueGrad CondensedBasis::ls_basis_eval(int i, int l, const Vec2& x) const {
  const int pos = support_position(i, l);
  if (pos < 0)
    throw DomainError("node " + std::to_string(l) + " is not in the unisolvent set of node " + std::to_string(i));
  const NodeFit& f = fits_[i];
  const int n = f.space.dimension();
  std::vector<double> q(n);
  std::vector<Vec2> dq(n);
  f.space.evaluate(x, q, dq);
  ValueGrad out;
  for (int j = 0; j < n; ++j) {
    out.value += q[j] * f.coeffs(j, pos);
    out.grad += dq[j] * f.coeffs(j, pos);
  }
  return out;
}

ValueGrad CondensedBasis::condensed_shape_eval(int l, const ElementPoint& p) const {
  ValueGrad out;
  const auto& corners = mesh_->element(p.element);
  for (int a = 0; a < 4; ++a) {
    const int i = corners[a];
    if (support_position(i, l) < 0) continue;
    const ValueGrad hat = hat_corner(a, p);
    const ValueGrad ls = ls_basis_eval(i, l, p.x);
    out.value += hat.value * ls.value;
    out.grad += hat.grad * ls.value + hat.value * ls.grad;
  }
  return out;
}

void CondensedBasis::write_diagnostics(std::ostream& out) const {
  out << "i,support_size,expansion_depth,cond\n" << std::setprecision(10);
  for (std::size_t i = 0; i < fits_.size(); ++i)
    out << i << ',' << fits_[i].support.size() << ',' << fits_[i].expansion_depth << ','
        << fits_[i].condition_number << '\n';
}

CondensedBasis build_smooth_condensed_basis(const Mesh& mesh, int k) {
  std::vector<LocalEnrichmentSpace> spaces;
  spaces.reserve(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) spaces.push_back(local_space_smooth(mesh, i, k));
  return CondensedBasis(mesh, std::move(spaces), SetRule::Polynomial);
}

CondensedBasis build_crack_condensed_basis(const CrackMesh& mesh) {
  std::vector<LocalEnrichmentSpace> spaces;
  spaces.reserve(mesh.base.node_count());
  for (int i = 0; i < mesh.base.node_count(); ++i) spaces.push_back(local_space_crack(mesh, i));
  return CondensedBasis(mesh.base, std::move(spaces), SetRule::Patch);
}

}  // namespace cgfem

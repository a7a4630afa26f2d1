#pragma once

#include "cgfem/enrichment.hpp"
#include "cgfem/mesh.hpp"
#include "cgfem/partition_of_unity.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

namespace cgfem {

/// Acceptance threshold on cond_2(G_i).
inline constexpr double kGramConditionGate = 1e12;

/// Least-squares fit of nodal data by a local space. Rows of `node_values`
/// are Q_i(x_l)^T for the nodes of X_i.
class LeastSquaresFit {
 public:
  explicit LeastSquaresFit(const Eigen::MatrixXd& node_values);

  /// G = sum_l Q(x_l) Q(x_l)^T, exactly symmetric.
  const Eigen::MatrixXd& gram() const { return gram_; }
  double condition_number() const { return cond_; }
  double smallest_eigenvalue() const { return lambda_min_; }
  /// Factorization succeeded and cond(G) passes the gate.
  bool acceptable() const { return ok_; }
  /// Column l is G^{-1} Q(x_l).
  const Eigen::MatrixXd& coefficients() const { return coeffs_; }

 private:
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd coeffs_;
  double cond_ = 0.0;
  double lambda_min_ = 0.0;
  bool ok_ = false;
};

/// Gram matrix of a local space on a node set, with its fit.
LeastSquaresFit gram_matrix(const LocalEnrichmentSpace& space, const Mesh& mesh,
                            std::span<const int> nodes);

/// How the initial X_i is chosen before the conditioning gate.
enum class SetRule {
  /// P_k rule: k=1 side neighbours, k=2 patch nodes, k>=3 recursive growth.
  Polynomial,
  /// All nodes of the patch omega_i.
  Patch,
};

std::vector<int> side_neighbour_set(const Mesh& mesh, int i);
std::vector<int> patch_nodes(const Mesh& mesh, int i);
/// Nodes of every element having a corner in `nodes`.
std::vector<int> expand_node_set(const Mesh& mesh, std::span<const int> nodes);
std::vector<int> polynomial_node_set(const Mesh& mesh, int i, int k);
/// The same recursion on a 1D lattice of `node_count` nodes.
std::vector<int> polynomial_node_set_1d(int node_count, int i, int k);

struct UnisolventSet {
  std::vector<int> nodes;
  /// Growth steps applied after the initial rule to pass the gate.
  int expansion_depth = 0;
};

/// X_i: initial rule, then grown one ring at a time until |X_i| >= n_i and
/// G_i passes the gate. On perturbed meshes the set must also pass it at the
/// unperturbed lattice positions. Throws UnisolvenceFailure when the mesh runs out.
UnisolventSet unisolvent_set(const Mesh& mesh, int i, const LocalEnrichmentSpace& space, SetRule rule);

/// Per-node LS data for the condensed space.
struct NodeFit {
  LocalEnrichmentSpace space;
  std::vector<int> support;  // I_i, ascending
  int expansion_depth = 0;
  double condition_number = 0.0;
  double smallest_eigenvalue = 0.0;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd coeffs;  // n_i x |I_i|, column j = G^{-1} Q(x_{I_i[j]})
};

/// X_i, G_i and LS basis for every node, plus the inverted adjacency
/// L_l = {i : l in I_i}.
class CondensedBasis {
 public:
  CondensedBasis(const Mesh& mesh, std::vector<LocalEnrichmentSpace> spaces, SetRule rule);

  const Mesh& mesh() const { return *mesh_; }
  int node_count() const { return static_cast<int>(fits_.size()); }
  const NodeFit& fit(int i) const { return fits_[i]; }
  std::span<const int> support(int i) const { return fits_[i].support; }
  std::span<const int> adjacency(int l) const { return adjacency_[l]; }
  int max_support_size() const;
  int max_adjacency_size() const;

  /// Position of l inside I_i, or -1.
  int support_position(int i, int l) const;

  /// LS basis function of node l on patch i; DomainError if l is not in I_i.
  ValueGrad ls_basis_eval(int i, int l, const Vec2& x) const;

  /// psi_l = sum_{i in L_l} N_i * ls(i, l).
  ValueGrad condensed_shape_eval(int l, const ElementPoint& p) const;

  /// "i,support_size,expansion_depth,cond" rows.
  void write_diagnostics(std::ostream& out) const;

 private:
  const Mesh* mesh_;
  std::vector<NodeFit> fits_;
  std::vector<std::vector<int>> adjacency_;
};

/// L_l from the sets I_i.
std::vector<std::vector<int>> invert_adjacency(std::span<const std::vector<int>> supports, int node_count);

CondensedBasis build_smooth_condensed_basis(const Mesh& mesh, int k);
CondensedBasis build_crack_condensed_basis(const CrackMesh& mesh);

}  // namespace cgfem

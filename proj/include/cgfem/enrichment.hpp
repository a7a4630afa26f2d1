#pragma once

#include "cgfem/mesh.hpp"
#include "cgfem/partition_of_unity.hpp"

#include <array>
#include <span>
#include <vector>

namespace cgfem {

enum class CrackFunction {
  /// sqrt(r) sin(theta/2)
  SqrtSingular,
  /// sqrt(r) sin(theta/2) <x - x_i, t>/h, t the crack-ahead tangent
  SqrtSingularTangential,
  /// +1 for x2 >= 0, -1 below
  Heaviside,
};

/// Polar angle around the tip in (-pi, pi]; the branch cut runs along the crack.
double crack_angle(const Vec2& x, const Vec2& tip = Vec2::Zero());

/// Crack enrichment value and gradient. The singular kinds throw SingularPoint
/// at the tip, where their gradient does not exist.
ValueGrad crack_enrichment_eval(CrackFunction kind, const Vec2& x, const Vec2& center, double h,
                                const Vec2& tip = Vec2::Zero());

/// One enrichment function attached to a node.
struct Enrichment {
  enum class Kind { Monomial, Crack } kind = Kind::Monomial;
  /// Multi-index for monomials ((x - x_i)/h)^alpha.
  std::array<int, 2> alpha{0, 0};
  CrackFunction crack = CrackFunction::SqrtSingular;
};

/// Local approximation space V_i: scaled monomials around x_i, optionally
/// followed by crack functions.
class LocalEnrichmentSpace {
 public:
  LocalEnrichmentSpace(int node, Vec2 center, double h, std::vector<Enrichment> basis,
                       Vec2 tip = Vec2::Zero());

  int node() const { return node_; }
  const Vec2& center() const { return center_; }
  double h() const { return h_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  std::span<const Enrichment> basis() const { return basis_; }
  int max_degree() const { return max_degree_; }
  bool has_crack_functions() const { return has_crack_; }

  /// Values into `values`; gradients into `grads` unless it is empty.
  void evaluate(const Vec2& x, std::span<double> values, std::span<Vec2> grads = {}) const;

 private:
  int node_;
  Vec2 center_;
  double h_;
  std::vector<Enrichment> basis_;
  Vec2 tip_;
  int max_degree_ = 0;
  bool has_crack_ = false;
};

/// Number of monomials of total degree <= k in 2D, binomial(k+2, 2).
int polynomial_dimension(int k);

/// Multi-indices of total degree <= k: by degree, then alpha_1 descending.
std::vector<std::array<int, 2>> monomial_exponents(int k);

/// P_k around x_i with scaling h.
LocalEnrichmentSpace monomial_basis(int k, int node, const Vec2& center, double h);

LocalEnrichmentSpace local_space_smooth(const Mesh& mesh, int i, int k);

/// Crack local spaces: linears away from the tip; plus sqrt(r) sin(theta/2)
/// inside the tip square; plus its tangential product on crack nodes.
LocalEnrichmentSpace local_space_crack(const CrackMesh& mesh, int i);

}  // namespace cgfem

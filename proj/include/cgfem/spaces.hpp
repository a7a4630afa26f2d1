#pragma once

#include "cgfem/condensation.hpp"
#include "cgfem/mesh.hpp"
#include "cgfem/partition_of_unity.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgfem {

enum class Method { Fem, FlatTopGfem, Sgfem, Cgfem, CrackGfem };

std::string method_name(Method m);
Method parse_method(const std::string& name);

/// Galerkin trial space over a mesh: DOF numbering, per-element active DOFs
/// and element-scoped evaluation of the shape functions.
class ApproximationSpace {
 public:
  virtual ~ApproximationSpace() = default;

  Method method() const { return method_; }
  int degree() const { return degree_; }
  const Mesh& mesh() const { return *mesh_; }
  int dof_count() const { return dof_count_; }
  /// DOFs whose shape functions are nonzero on element s, in evaluation order.
  std::span<const int> element_dofs(int s) const {
    return {element_dofs_.data() + offsets_[s], element_dofs_.data() + offsets_[s + 1]};
  }
  int max_element_dofs() const;
  /// Coefficients of the function 1; the stiffness matrix annihilates it.
  const Eigen::VectorXd& constant_vector() const { return constant_; }
  const std::optional<FlatTopParams>& flat_top() const { return flat_top_; }
  const CrackMesh* crack() const { return crack_; }

  /// Geometry used for integration. Every space uses the bilinear mesh map
  /// except isoparametric FEM of degree >= 2 on perturbed meshes.
  virtual ElementPoint point(int s, const Vec2& ref) const { return mesh_->point(s, ref); }
  virtual bool curved_geometry() const { return false; }

  /// Values and gradients of the element's shape functions at p, aligned with
  /// element_dofs(p.element).
  virtual void evaluate(const ElementPoint& p, std::span<double> values, std::span<Vec2> grads) const = 0;

  /// Value and gradient of sum_m coeffs[m] phi_m at p.
  ValueGrad evaluate_function(const ElementPoint& p, const Eigen::VectorXd& coeffs) const;

  /// "method,k,dof_count,max_element_dofs"
  void write_summary(std::ostream& out) const;

 protected:
  ApproximationSpace(Method method, int degree, const Mesh& mesh) : method_(method), degree_(degree), mesh_(&mesh) {}
  void set_element_dofs(const std::vector<std::vector<int>>& per_element);

  Method method_;
  int degree_;
  const Mesh* mesh_;
  int dof_count_ = 0;
  std::vector<int> offsets_;
  std::vector<int> element_dofs_;
  Eigen::VectorXd constant_;
  std::optional<FlatTopParams> flat_top_;
  const CrackMesh* crack_ = nullptr;
};

using SpacePtr = std::unique_ptr<ApproximationSpace>;

/// Tensor-product Lagrange elements of degree k with equispaced reference nodes.
/// With `isoparametric` set, k >= 2 and a perturbed mesh, the element geometry
/// is the degree-k map through the Lagrange nodes, whose non-vertex nodes are
/// jittered like the mesh vertices (same magnitude and seed, boundary nodes
/// fixed). Otherwise the bilinear mesh map is used.
SpacePtr build_fem_space(const Mesh& mesh, int k, bool isoparametric = true);
/// Bilinear FEM on the crack mesh (continuous across the crack).
SpacePtr build_crack_fem_space(const CrackMesh& mesh);
/// span{Q_i P_i^alpha : |alpha| <= k}
SpacePtr build_ftgfem_space(const Mesh& mesh, int k, FlatTopParams params = {});
/// span{N_i} + span{Q_i (P_i^alpha - I_h P_i^alpha) : 2 <= |alpha| <= k}
SpacePtr build_sgfem_space(const Mesh& mesh, int k, FlatTopParams params = {});
/// One condensed shape function per mesh node.
SpacePtr build_cgfem_space(std::shared_ptr<const CondensedBasis> basis, int degree);
/// span{N_i} + span{N_i H : crack nodes outside the tip element} + span{N_i S : tip square}
SpacePtr build_crack_gfem_space(const CrackMesh& mesh);
SpacePtr build_crack_cgfem_space(const CrackMesh& mesh, std::shared_ptr<const CondensedBasis> basis);

/// The stored constant-function coefficients.
const Eigen::VectorXd& constant_null_vector(const ApproximationSpace& space);

/// 1D Lagrange basis of degree k on equispaced nodes of [-1, 1].
void lagrange_1d(int k, double t, std::span<double> values, std::span<double> derivs);

}  // namespace cgfem

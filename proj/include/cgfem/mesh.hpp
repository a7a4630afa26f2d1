#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace cgfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Axis-aligned square [lo, hi]^2.
struct Square {
  double lo = 0.0;
  double hi = 1.0;
  double side() const { return hi - lo; }
};

/// A point inside a specific element, carrying its reference coordinates and
/// the element map's derivative there. Every evaluator in the library is
/// element-scoped and takes one of these.
struct ElementPoint {
  int element = -1;
  Vec2 ref = Vec2::Zero();
  Vec2 x = Vec2::Zero();
  Mat2 jacobian = Mat2::Identity();
  /// J^{-T}; maps reference gradients to physical gradients.
  Mat2 grad_map = Mat2::Identity();
  double det = 1.0;
};

struct MappedPoint {
  Vec2 x;
  Mat2 jacobian;
};

/// Boundary edge of the domain: element, local edge (0 bottom, 1 right, 2 top,
/// 3 left) and unit outward normal.
struct BoundaryEdge {
  int element;
  int local_edge;
  Vec2 normal;
};

/// Structured quadrilateral mesh of a square. Nodes are numbered
/// lexicographically (x fastest), elements likewise; element corners are
/// listed counterclockwise starting at the lower-left lattice corner.
class Mesh {
 public:
  Mesh(int cells_per_side, Square domain, std::vector<Vec2> nodes);

  int cells_per_side() const { return n_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int element_count() const { return static_cast<int>(elements_.size()); }
  double h() const { return domain_.side() / n_; }
  const Square& domain() const { return domain_; }

  const Vec2& node(int i) const { return nodes_[i]; }
  std::span<const Vec2> nodes() const { return nodes_; }
  const std::array<int, 4>& element(int s) const { return elements_[s]; }
  /// Elements incident to node i (the patch omega_i), ascending.
  std::span<const int> patch(int i) const { return patches_[i]; }

  int node_at(int ix, int iy) const { return iy * (n_ + 1) + ix; }
  int element_at(int ex, int ey) const { return ey * n_ + ex; }
  std::array<int, 2> node_lattice(int i) const { return {i % (n_ + 1), i / (n_ + 1)}; }
  std::array<int, 2> element_lattice(int s) const { return {s % n_, s / n_}; }
  bool is_boundary_node(int i) const;
  /// Local corner index (0..3) of node i in element s, or -1.
  int local_corner(int s, int i) const;

  /// Bilinear map from [-1,1]^2 onto element s and its Jacobian.
  MappedPoint reference_map(int s, const Vec2& ref) const;
  ElementPoint point(int s, const Vec2& ref) const;
  /// Newton inversion of the bilinear map (tolerance 1e-12, at most 20 steps).
  Vec2 inverse_map(int s, const Vec2& x) const;
  /// Element containing x (ties resolved towards the lower-left), or -1.
  int locate(const Vec2& x) const;

  double element_area(int s) const;
  std::vector<BoundaryEdge> boundary_edges() const;

  /// "i x y" per node, then "s i0 i1 i2 i3" per element.
  void write_text(std::ostream& out) const;

  /// Set by build_perturbed_mesh.
  struct Perturbation {
    double magnitude;
    std::uint64_t seed;
  };
  const std::optional<Perturbation>& perturbation() const { return perturbation_; }
  void set_perturbation(Perturbation p) { perturbation_ = p; }

 private:
  int n_;
  Square domain_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 4>> elements_;
  std::vector<std::vector<int>> patches_;
  std::optional<Perturbation> perturbation_;
};

/// Reference coordinates of the four corners, counterclockwise.
inline const std::array<Vec2, 4>& reference_corners() {
  static const std::array<Vec2, 4> corners{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
  return corners;
}

Mesh build_uniform_mesh(int cells_per_side, Square domain = {});

/// Uniform mesh with interior nodes moved by magnitude*h*eps, eps uniform on
/// [-0.5,0.5]^2. Each node draws from its own substream, keyed by (seed, ix, iy)
/// through SplitMix64, so the result does not depend on iteration order.
/// The eps of lattice point (ix, iy) in stream `salt`; salt 0 is used for mesh vertices.
Vec2 lattice_jitter(std::uint64_t seed, int ix, int iy, std::uint64_t salt = 0);

Mesh build_perturbed_mesh(int cells_per_side, double magnitude, std::uint64_t seed,
                          Square domain = {});

/// Uniform n x n mesh of [-1,1]^2 with an unfitted straight crack
/// {x2 = 0, -1 <= x1 <= 0} ending at the origin.
struct CrackMesh {
  Mesh base;
  double radius = 0.25;
  Vec2 tip = Vec2::Zero();
  Vec2 normal = Vec2(0, 1);
  Vec2 tangent = Vec2(1, 0);
  /// Nodes of elements meeting the crack (includes the tip element), ascending.
  std::vector<int> crack_nodes{};
  /// Nodes inside the closed square of half-side `radius` around the tip.
  std::vector<int> tip_square_nodes{};
  /// Corners of the element containing the tip.
  std::vector<int> tip_element_nodes{};
  /// Elements meeting the crack line, including the tip element.
  std::vector<int> cut_elements{};
  int tip_element = -1;

  bool in_crack_nodes(int i) const { return in_crack_[i] != 0; }
  bool in_tip_square(int i) const { return in_square_[i] != 0; }
  bool in_tip_element_nodes(int i) const { return in_delta_[i] != 0; }
  bool is_cut(int s) const { return cut_flag_[s] != 0; }
  /// Tip element or one of its 8 lattice neighbours.
  bool near_tip(int s) const;

  std::vector<char> in_crack_{}, in_square_{}, in_delta_{}, cut_flag_{};
};

CrackMesh build_crack_mesh(int n, double radius);

/// +1 above the crack line, -1 below; the crack side of a point.
inline int crack_side(const Vec2& x) { return x.y() >= 0.0 ? 1 : -1; }

}  // namespace cgfem

#pragma once

#include "cgfem/mesh.hpp"

#include <optional>
#include <vector>

namespace cgfem {

struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// q-point Gauss-Legendre rule on [-1, 1].
const GaussRule1D& gauss_legendre(int q);

struct QuadraturePoint {
  Vec2 ref;
  /// Physical weight (reference weight times |det J| of the bilinear map).
  double weight;
  /// Weight on the reference element (reference edge for edge rules).
  double ref_weight = 0.0;
};

struct QuadratureRule {
  int element = -1;
  std::vector<QuadraturePoint> points;
  /// Deepest dyadic refinement level used near the tip.
  int depth = 0;
  bool cut = false;
  /// Sub-cells dropped for having (numerically) zero area.
  int dropped_cells = 0;
};

struct QuadratureOptions {
  /// Gauss points per direction and per cell.
  int order = 3;
  /// Flat-top PU parameter; adds breakpoints at +-(1 - 2 sigma).
  std::optional<double> flat_top_sigma;
  /// Crack geometry: split cut elements at x2 = 0 and grade towards the tip.
  const CrackMesh* crack = nullptr;
  int tip_depth = 8;
};

inline constexpr int kAssemblyTipDepth = 8;
inline constexpr int kErrorTipDepth = 12;
/// Extra Gauss points per direction on crack meshes.
inline constexpr int kCrackOrderBoost = 2;

QuadratureRule element_quadrature(const Mesh& mesh, int s, const QuadratureOptions& options);

/// Rule along a boundary edge: reference points on the edge and weights in
/// arc length. Edges of cut elements are split where the crack line meets them.
QuadratureRule edge_quadrature(const Mesh& mesh, const BoundaryEdge& edge, const QuadratureOptions& options);

}  // namespace cgfem

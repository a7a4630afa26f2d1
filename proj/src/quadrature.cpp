#include "cgfem/quadrature.hpp"

#include "cgfem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace cgfem {
namespace {

GaussRule1D compute_gauss(int q) {
  GaussRule1D rule;
  rule.points.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[q - 1 - i] = x;
    rule.weights[q - 1 - i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  return rule;
}

struct Cell {
  Vec2 lo, hi;
  double area() const { return (hi.x() - lo.x()) * (hi.y() - lo.y()); }
  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
};

void split(std::vector<Cell>& cells, int axis, double at) {
  std::vector<Cell> out;
  for (const Cell& c : cells) {
    if (at > c.lo[axis] && at < c.hi[axis]) {
      Cell a = c, b = c;
      a.hi[axis] = at;
      b.lo[axis] = at;
      out.push_back(a);
      out.push_back(b);
    } else {
      out.push_back(c);
    }
  }
  cells = std::move(out);
}

class RuleBuilder {
 public:
  RuleBuilder(const Mesh& mesh, int s, int order, QuadratureRule& rule)
      : mesh_(mesh), s_(s), gauss_(gauss_legendre(order)), rule_(rule) {}

  void emit(const Cell& c) {
    if (c.area() < 1e-16) {
      ++rule_.dropped_cells;
      return;
    }
    const Vec2 half = 0.5 * (c.hi - c.lo), mid = 0.5 * (c.hi + c.lo);
    const std::size_t q = gauss_.points.size();
    for (std::size_t b = 0; b < q; ++b)
      for (std::size_t a = 0; a < q; ++a) {
        const Vec2 ref(mid.x() + half.x() * gauss_.points[a], mid.y() + half.y() * gauss_.points[b]);
        const double det = mesh_.reference_map(s_, ref).jacobian.determinant();
        const double w = gauss_.weights[a] * gauss_.weights[b] * half.x() * half.y();
        rule_.points.push_back({ref, w * std::abs(det), w});
      }
  }

  // Dyadic refinement towards `target`, which lies in the closure of c.
  void grade(const Cell& c, const Vec2& target, int depth, int level) {
    rule_.depth = std::max(rule_.depth, level);
    if (depth == 0) {
      emit(c);
      return;
    }
    const Vec2 mid = 0.5 * (c.lo + c.hi);
    const Cell children[4] = {{c.lo, mid},
                              {Vec2(mid.x(), c.lo.y()), Vec2(c.hi.x(), mid.y())},
                              {mid, c.hi},
                              {Vec2(c.lo.x(), mid.y()), Vec2(mid.x(), c.hi.y())}};
    for (const Cell& child : children) {
      if (child.contains(target))
        grade(child, target, depth - 1, level + 1);
      else
        emit(child);
    }
  }

 private:
  const Mesh& mesh_;
  int s_;
  const GaussRule1D& gauss_;
  QuadratureRule& rule_;
};

}  // namespace

const GaussRule1D& gauss_legendre(int q) {
  if (q < 1 || q > 64) throw InvalidParameter("Gauss rule order must lie in [1, 64]");
  static std::mutex mutex;
  static std::map<int, GaussRule1D> cache;
  const std::lock_guard lock(mutex);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, compute_gauss(q)).first;
  return it->second;
}

QuadratureRule element_quadrature(const Mesh& mesh, int s, const QuadratureOptions& options) {
  QuadratureRule rule;
  rule.element = s;
  std::vector<Cell> cells{{Vec2(-1, -1), Vec2(1, 1)}};
  if (options.flat_top_sigma && *options.flat_top_sigma > 0.0) {
    const double b = 1 - 2 * *options.flat_top_sigma;
    for (int axis = 0; axis < 2; ++axis) {
      split(cells, axis, -b);
      split(cells, axis, b);
    }
  }

  std::optional<Vec2> tip_ref;
  if (const CrackMesh* crack = options.crack) {
    // Crack meshes are affine, so the crack line maps to a reference line.
    const Vec2 tip = mesh.inverse_map(s, crack->tip);
    if (crack->is_cut(s)) {
      rule.cut = true;
      split(cells, 1, tip.y());
      if (s == crack->tip_element) split(cells, 0, tip.x());
    }
    if (crack->near_tip(s)) tip_ref = tip;
  }

  RuleBuilder builder(mesh, s, options.order, rule);
  for (const Cell& c : cells) {
    if (tip_ref) {
      const Vec2 target(std::clamp(tip_ref->x(), c.lo.x(), c.hi.x()),
                        std::clamp(tip_ref->y(), c.lo.y(), c.hi.y()));
      builder.grade(c, target, options.tip_depth, 0);
    } else {
      builder.emit(c);
    }
  }
  return rule;
}

QuadratureRule edge_quadrature(const Mesh& mesh, const BoundaryEdge& edge, const QuadratureOptions& options) {
  QuadratureRule rule;
  rule.element = edge.element;
  // Edge parametrized by t in [-1,1]; local edges 0/2 run along xi, 1/3 along eta.
  const bool along_xi = edge.local_edge == 0 || edge.local_edge == 2;
  const double fixed = (edge.local_edge == 0 || edge.local_edge == 3) ? -1.0 : 1.0;
  auto ref_of = [&](double t) { return along_xi ? Vec2(t, fixed) : Vec2(fixed, t); };

  std::vector<std::pair<double, double>> pieces{{-1.0, 1.0}};
  // Flat-top kinks lie at the same breakpoints along the edge as inside the element.
  if (options.flat_top_sigma && *options.flat_top_sigma > 0.0) {
    const double b = 1 - 2 * *options.flat_top_sigma;
    pieces = {{-1.0, -b}, {-b, b}, {b, 1.0}};
  }
  // Only vertical edges can meet the horizontal crack line.
  if (options.crack && !along_xi && options.crack->is_cut(edge.element)) {
    const double cut = mesh.inverse_map(edge.element, options.crack->tip).y();
    if (cut > -1.0 && cut < 1.0) {
      std::vector<std::pair<double, double>> split_pieces;
      for (const auto& [a, b] : pieces) {
        if (cut > a && cut < b) {
          split_pieces.emplace_back(a, cut);
          split_pieces.emplace_back(cut, b);
        } else {
          split_pieces.emplace_back(a, b);
        }
      }
      pieces = std::move(split_pieces);
      rule.cut = true;
    }
  }
  const GaussRule1D& g = gauss_legendre(options.order);
  for (const auto& [a, b] : pieces) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < g.points.size(); ++k) {
      const double t = mid + half * g.points[k];
      const Mat2 J = mesh.reference_map(edge.element, ref_of(t)).jacobian;
      const double ds = (along_xi ? J.col(0) : J.col(1)).norm();
      rule.points.push_back({ref_of(t), g.weights[k] * half * ds, g.weights[k] * half});
    }
  }
  return rule;
}

}  // namespace cgfem

#include "cgfem/partition_of_unity.hpp"

#include "cgfem/errors.hpp"

#include <cmath>

namespace cgfem {
namespace {

constexpr double kCornerSign[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};

}  // namespace

ValueGrad hat_corner(int corner, const ElementPoint& p) {
  const double sx = kCornerSign[corner][0], sy = kCornerSign[corner][1];
  const double fx = 0.5 * (1 + sx * p.ref.x()), fy = 0.5 * (1 + sy * p.ref.y());
  const Vec2 dref(0.5 * sx * fy, 0.5 * sy * fx);
  return {fx * fy, p.grad_map * dref};
}

ValueGrad hat_eval(const Mesh& mesh, int i, const ElementPoint& p) {
  const int a = mesh.local_corner(p.element, i);
  if (a < 0) return {};
  return hat_corner(a, p);
}

void validate(const FlatTopParams& params) {
  if (!(params.sigma >= 0.0 && params.sigma < 0.5))
    throw InvalidParameter("flat-top sigma must lie in [0, 0.5)");
  if (params.l < 1) throw InvalidParameter("flat-top exponent must be a positive integer");
}

FlatTop1D flat_top_1d_eval(double xi, const FlatTopParams& params) {
  validate(params);
  const double s = params.sigma;
  const int l = params.l;
  double q = 0.0, dq = 0.0;
  if (xi <= -1 + 2 * s) {
    q = 1.0;
  } else if (xi < -1 + 2 * (1 - s)) {
    const double width = 2 * (1 - 2 * s);
    const double t = (xi + 1 - 2 * s) / width;
    const double tl = std::pow(t, l);
    const double inner = 1 - tl;
    q = std::pow(inner, l);
    // d/dxi (1 - t^l)^l = -l^2 (1 - t^l)^(l-1) t^(l-1) / width
    dq = -l * l * std::pow(inner, l - 1) * std::pow(t, l - 1) / width;
  }
  return {q, 1 - q, dq, -dq};
}

ValueGrad flat_top_corner(int corner, const ElementPoint& p, const FlatTopParams& params) {
  const FlatTop1D fx = flat_top_1d_eval(p.ref.x(), params);
  const FlatTop1D fy = flat_top_1d_eval(p.ref.y(), params);
  const bool right = kCornerSign[corner][0] > 0, top = kCornerSign[corner][1] > 0;
  const double vx = right ? fx.right : fx.left, dx = right ? fx.d_right : fx.d_left;
  const double vy = top ? fy.right : fy.left, dy = top ? fy.d_right : fy.d_left;
  return {vx * vy, p.grad_map * Vec2(dx * vy, vx * dy)};
}

ValueGrad flat_top_eval(const Mesh& mesh, int i, const ElementPoint& p, const FlatTopParams& params) {
  const int a = mesh.local_corner(p.element, i);
  if (a < 0) return {};
  return flat_top_corner(a, p, params);
}

}  // namespace cgfem

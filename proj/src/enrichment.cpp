#include "cgfem/enrichment.hpp"

#include "cgfem/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace cgfem {
namespace {

struct Singular {
  double value;
  Vec2 grad;
};

Singular sqrt_singular(const Vec2& x, const Vec2& tip, bool need_grad) {
  const Vec2 d = x - tip;
  const double r = d.norm();
  if (r == 0.0) {
    if (need_grad) throw SingularPoint("gradient of sqrt(r) sin(theta/2) requested at the crack tip");
    return {0.0, Vec2::Zero()};
  }
  const double theta = crack_angle(x, tip);
  const double sr = std::sqrt(r);
  const double s = std::sin(0.5 * theta), c = std::cos(0.5 * theta);
  return {sr * s, Vec2(-s, c) / (2 * sr)};
}

}  // namespace

double crack_angle(const Vec2& x, const Vec2& tip) {
  const Vec2 d = x - tip;
  double theta = std::atan2(d.y(), d.x());
  if (theta == -std::numbers::pi && d.y() == 0.0) theta = std::numbers::pi;
  return theta;
}

ValueGrad crack_enrichment_eval(CrackFunction kind, const Vec2& x, const Vec2& center, double h,
                                const Vec2& tip) {
  switch (kind) {
    case CrackFunction::Heaviside:
      return {static_cast<double>(crack_side(x - tip)), Vec2::Zero()};
    case CrackFunction::SqrtSingular: {
      const Singular s = sqrt_singular(x, tip, true);
      return {s.value, s.grad};
    }
    case CrackFunction::SqrtSingularTangential: {
      const Singular s = sqrt_singular(x, tip, true);
      const double t = (x.x() - center.x()) / h;
      return {s.value * t, s.grad * t + Vec2(s.value / h, 0.0)};
    }
  }
  throw InternalInvariant("unknown crack function");
}

int polynomial_dimension(int k) { return (k + 1) * (k + 2) / 2; }

std::vector<std::array<int, 2>> monomial_exponents(int k) {
  std::vector<std::array<int, 2>> out;
  for (int d = 0; d <= k; ++d)
    for (int a = d; a >= 0; --a) out.push_back({a, d - a});
  return out;
}

LocalEnrichmentSpace::LocalEnrichmentSpace(int node, Vec2 center, double h,
                                           std::vector<Enrichment> basis, Vec2 tip)
    : node_(node), center_(center), h_(h), basis_(std::move(basis)), tip_(tip) {
  for (const auto& e : basis_) {
    if (e.kind == Enrichment::Kind::Monomial)
      max_degree_ = std::max(max_degree_, e.alpha[0] + e.alpha[1]);
    else
      has_crack_ = true;
  }
}

void LocalEnrichmentSpace::evaluate(const Vec2& x, std::span<double> values,
                                    std::span<Vec2> grads) const {
  const bool need_grad = !grads.empty();
  const double u = (x.x() - center_.x()) / h_, v = (x.y() - center_.y()) / h_;
  double pu[8], pv[8];
  pu[0] = pv[0] = 1.0;
  for (int d = 1; d <= max_degree_; ++d) {
    pu[d] = pu[d - 1] * u;
    pv[d] = pv[d - 1] * v;
  }
  Singular sing{0.0, Vec2::Zero()};
  if (has_crack_) sing = sqrt_singular(x, tip_, need_grad);

  for (std::size_t j = 0; j < basis_.size(); ++j) {
    const Enrichment& e = basis_[j];
    if (e.kind == Enrichment::Kind::Monomial) {
      const int a = e.alpha[0], b = e.alpha[1];
      values[j] = pu[a] * pv[b];
      if (need_grad)
        grads[j] = Vec2(a > 0 ? a * pu[a - 1] * pv[b] / h_ : 0.0, b > 0 ? b * pu[a] * pv[b - 1] / h_ : 0.0);
      continue;
    }
    switch (e.crack) {
      case CrackFunction::SqrtSingular:
        values[j] = sing.value;
        if (need_grad) grads[j] = sing.grad;
        break;
      case CrackFunction::SqrtSingularTangential:
        values[j] = sing.value * u;
        if (need_grad) grads[j] = sing.grad * u + Vec2(sing.value / h_, 0.0);
        break;
      case CrackFunction::Heaviside:
        values[j] = crack_side(x - tip_);
        if (need_grad) grads[j] = Vec2::Zero();
        break;
    }
  }
}

LocalEnrichmentSpace monomial_basis(int k, int node, const Vec2& center, double h) {
  if (k < 1) throw InvalidParameter("polynomial degree must be >= 1");
  if (k > 7) throw InvalidParameter("polynomial degree above 7 is not supported");
  std::vector<Enrichment> basis;
  for (const auto& a : monomial_exponents(k)) basis.push_back({Enrichment::Kind::Monomial, a, {}});
  return LocalEnrichmentSpace(node, center, h, std::move(basis));
}

LocalEnrichmentSpace local_space_smooth(const Mesh& mesh, int i, int k) {
  return monomial_basis(k, i, mesh.node(i), mesh.h());
}

LocalEnrichmentSpace local_space_crack(const CrackMesh& mesh, int i) {
  if (mesh.in_tip_element_nodes(i) && !mesh.in_crack_nodes(i))
    throw InternalInvariant("node " + std::to_string(i) + " belongs to the tip element but not to the crack nodes");
  std::vector<Enrichment> basis;
  for (const auto& a : monomial_exponents(1)) basis.push_back({Enrichment::Kind::Monomial, a, {}});
  const bool crack = mesh.in_crack_nodes(i);
  if (crack || mesh.in_tip_square(i))
    basis.push_back({Enrichment::Kind::Crack, {0, 0}, CrackFunction::SqrtSingular});
  if (crack) basis.push_back({Enrichment::Kind::Crack, {0, 0}, CrackFunction::SqrtSingularTangential});
  return LocalEnrichmentSpace(i, mesh.base.node(i), mesh.base.h(), std::move(basis), mesh.tip);
}

}  // namespace cgfem

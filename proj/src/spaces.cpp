#include "cgfem/spaces.hpp"

#include "cgfem/enrichment.hpp"
#include "cgfem/errors.hpp"
#include "cgfem/quadrature.hpp"

#include <algorithm>
#include <ostream>

namespace cgfem {

std::string method_name(Method m) {
  switch (m) {
    case Method::Fem: return "fem";
    case Method::FlatTopGfem: return "ftgfem";
    case Method::Sgfem: return "sgfem";
    case Method::Cgfem: return "cgfem";
    case Method::CrackGfem: return "crack_gfem";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Fem, Method::FlatTopGfem, Method::Sgfem, Method::Cgfem, Method::CrackGfem})
    if (method_name(m) == name) return m;
  throw InvalidParameter("unknown method '" + name + "'");
}

int ApproximationSpace::max_element_dofs() const {
  int m = 0;
  for (std::size_t s = 0; s + 1 < offsets_.size(); ++s) m = std::max(m, offsets_[s + 1] - offsets_[s]);
  return m;
}

void ApproximationSpace::set_element_dofs(const std::vector<std::vector<int>>& per_element) {
  offsets_.assign(1, 0);
  element_dofs_.clear();
  for (const auto& d : per_element) {
    element_dofs_.insert(element_dofs_.end(), d.begin(), d.end());
    offsets_.push_back(static_cast<int>(element_dofs_.size()));
  }
}

ValueGrad ApproximationSpace::evaluate_function(const ElementPoint& p, const Eigen::VectorXd& coeffs) const {
  const auto dofs = element_dofs(p.element);
  std::vector<double> v(dofs.size());
  std::vector<Vec2> g(dofs.size());
  evaluate(p, v, g);
  ValueGrad out;
  for (std::size_t a = 0; a < dofs.size(); ++a) {
    out.value += coeffs[dofs[a]] * v[a];
    out.grad += coeffs[dofs[a]] * g[a];
  }
  return out;
}

void ApproximationSpace::write_summary(std::ostream& out) const {
  out << method_name(method_) << ',' << degree_ << ',' << dof_count_ << ',' << max_element_dofs() << '\n';
}

const Eigen::VectorXd& constant_null_vector(const ApproximationSpace& space) { return space.constant_vector(); }

void lagrange_1d(int k, double t, std::span<double> values, std::span<double> derivs) {
  for (int a = 0; a <= k; ++a) {
    const double ta = -1.0 + 2.0 * a / k;
    double v = 1.0, d = 0.0;
    for (int b = 0; b <= k; ++b) {
      if (b == a) continue;
      const double tb = -1.0 + 2.0 * b / k;
      const double f = (t - tb) / (ta - tb);
      d = d * f + v / (ta - tb);
      v *= f;
    }
    values[a] = v;
    derivs[a] = d;
  }
}

namespace {

class FemSpace final : public ApproximationSpace {
 public:
  FemSpace(const Mesh& mesh, int k, const CrackMesh* crack) : ApproximationSpace(Method::Fem, k, mesh) {
    if (k < 1 || k > 6) throw InvalidParameter("FEM degree must lie in [1, 6]");
    crack_ = crack;
    const int n = mesh.cells_per_side(), stride = k * n + 1;
    dof_count_ = stride * stride;
    std::vector<std::vector<int>> dofs(mesh.element_count());
    for (int s = 0; s < mesh.element_count(); ++s) {
      const auto [ex, ey] = mesh.element_lattice(s);
      for (int b = 0; b <= k; ++b)
        for (int a = 0; a <= k; ++a) dofs[s].push_back((k * ey + b) * stride + k * ex + a);
    }
    set_element_dofs(dofs);
    constant_ = Eigen::VectorXd::Ones(dof_count_);
  }

  // Degree-k geometry through perturbed Lagrange nodes.
  void make_curved(const Mesh::Perturbation& jitter) {
    const Mesh& mesh = *mesh_;
    const int k = degree_, n = mesh.cells_per_side(), stride = k * n + 1;
    geometry_.resize(static_cast<std::size_t>(dof_count_));
    for (int J = 0; J < stride; ++J)
      for (int I = 0; I < stride; ++I) {
        const int ex = std::min(I / k, n - 1), ey = std::min(J / k, n - 1);
        const Vec2 ref(-1.0 + 2.0 * (I - k * ex) / k, -1.0 + 2.0 * (J - k * ey) / k);
        Vec2 x = mesh.reference_map(mesh.element_at(ex, ey), ref).x;
        const bool vertex = I % k == 0 && J % k == 0;
        const bool interior = I > 0 && I < stride - 1 && J > 0 && J < stride - 1;
        if (!vertex && interior)
          x += jitter.magnitude * mesh.h() * lattice_jitter(jitter.seed, I, J, static_cast<std::uint64_t>(k));
        geometry_[static_cast<std::size_t>(J) * stride + I] = x;
      }
    // The jittered map must stay orientation preserving.
    const GaussRule1D& g = gauss_legendre(k + 2);
    for (int s = 0; s < mesh.element_count(); ++s)
      for (double a : g.points)
        for (double b : g.points)
          if (!(point(s, Vec2(a, b)).det > 0.0))
            throw DegenerateMesh("isoparametric element " + std::to_string(s) + " has a nonpositive Jacobian");
  }

  bool curved_geometry() const override { return !geometry_.empty(); }

  ElementPoint point(int s, const Vec2& ref) const override {
    if (geometry_.empty()) return mesh_->point(s, ref);
    const int k = degree_;
    double lx[8], dx[8], ly[8], dy[8];
    lagrange_1d(k, ref.x(), {lx, 8}, {dx, 8});
    lagrange_1d(k, ref.y(), {ly, 8}, {dy, 8});
    ElementPoint p;
    p.element = s;
    p.ref = ref;
    p.jacobian.setZero();
    const auto dofs = element_dofs(s);
    int m = 0;
    for (int b = 0; b <= k; ++b)
      for (int a = 0; a <= k; ++a, ++m) {
        const Vec2& X = geometry_[static_cast<std::size_t>(dofs[m])];
        p.x += lx[a] * ly[b] * X;
        p.jacobian.col(0) += dx[a] * ly[b] * X;
        p.jacobian.col(1) += lx[a] * dy[b] * X;
      }
    p.det = p.jacobian.determinant();
    p.grad_map = p.jacobian.inverse().transpose();
    return p;
  }

  void evaluate(const ElementPoint& p, std::span<double> values, std::span<Vec2> grads) const override {
    const int k = degree_;
    double lx[8], dx[8], ly[8], dy[8];
    lagrange_1d(k, p.ref.x(), {lx, 8}, {dx, 8});
    lagrange_1d(k, p.ref.y(), {ly, 8}, {dy, 8});
    int m = 0;
    for (int b = 0; b <= k; ++b)
      for (int a = 0; a <= k; ++a, ++m) {
        values[m] = lx[a] * ly[b];
        grads[m] = p.grad_map * Vec2(dx[a] * ly[b], lx[a] * dy[b]);
      }
  }

 private:
  std::vector<Vec2> geometry_;
};

class FlatTopGfemSpace final : public ApproximationSpace {
 public:
  FlatTopGfemSpace(const Mesh& mesh, int k, FlatTopParams params)
      : ApproximationSpace(Method::FlatTopGfem, k, mesh), chi_(polynomial_dimension(k)) {
    validate(params);
    flat_top_ = params;
    for (int i = 0; i < mesh.node_count(); ++i) spaces_.push_back(local_space_smooth(mesh, i, k));
    dof_count_ = mesh.node_count() * chi_;
    std::vector<std::vector<int>> dofs(mesh.element_count());
    for (int s = 0; s < mesh.element_count(); ++s)
      for (int i : mesh.element(s))
        for (int j = 0; j < chi_; ++j) dofs[s].push_back(i * chi_ + j);
    set_element_dofs(dofs);
    constant_ = Eigen::VectorXd::Zero(dof_count_);
    for (int i = 0; i < mesh.node_count(); ++i) constant_[i * chi_] = 1.0;
  }

  void evaluate(const ElementPoint& p, std::span<double> values, std::span<Vec2> grads) const override {
    double q[64];
    Vec2 dq[64];
    const auto& corners = mesh_->element(p.element);
    for (int a = 0; a < 4; ++a) {
      const ValueGrad pu = flat_top_corner(a, p, *flat_top_);
      spaces_[corners[a]].evaluate(p.x, {q, 64}, {dq, 64});
      for (int j = 0; j < chi_; ++j) {
        values[a * chi_ + j] = pu.value * q[j];
        grads[a * chi_ + j] = pu.grad * q[j] + pu.value * dq[j];
      }
    }
  }

 private:
  int chi_;
  std::vector<LocalEnrichmentSpace> spaces_;
};

class SgfemSpace final : public ApproximationSpace {
 public:
  SgfemSpace(const Mesh& mesh, int k, FlatTopParams params) : ApproximationSpace(Method::Sgfem, k, mesh) {
    validate(params);
    flat_top_ = params;
    const int chi = polynomial_dimension(k);
    m_ = chi - 3;  // |alpha| <= 1 corrections vanish identically
    const int nn = mesh.node_count();
    for (int i = 0; i < nn; ++i) spaces_.push_back(local_space_smooth(mesh, i, k));
    dof_count_ = nn * (1 + m_);
    std::vector<std::vector<int>> dofs(mesh.element_count());
    for (int s = 0; s < mesh.element_count(); ++s) {
      const auto& c = mesh.element(s);
      for (int i : c) dofs[s].push_back(i);
      for (int i : c)
        for (int j = 0; j < m_; ++j) dofs[s].push_back(nn + i * m_ + j);
    }
    set_element_dofs(dofs);
    constant_ = Eigen::VectorXd::Zero(dof_count_);
    constant_.head(nn).setOnes();

    // Nodal values P_i^alpha(x_b) at the corners b of each element, for the interpolant.
    nodal_.resize(static_cast<std::size_t>(mesh.element_count()) * 16 * m_);
    std::vector<double> q(chi);
    for (int s = 0; s < mesh.element_count(); ++s) {
      const auto& c = mesh.element(s);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          spaces_[c[a]].evaluate(mesh.node(c[b]), q);
          for (int j = 0; j < m_; ++j) nodal_[index(s, a, b, j)] = q[3 + j];
        }
    }
  }

  void evaluate(const ElementPoint& p, std::span<double> values, std::span<Vec2> grads) const override {
    const auto& corners = mesh_->element(p.element);
    ValueGrad hats[4];
    for (int b = 0; b < 4; ++b) {
      hats[b] = hat_corner(b, p);
      values[b] = hats[b].value;
      grads[b] = hats[b].grad;
    }
    double q[64];
    Vec2 dq[64];
    for (int a = 0; a < 4; ++a) {
      const ValueGrad pu = flat_top_corner(a, p, *flat_top_);
      spaces_[corners[a]].evaluate(p.x, {q, 64}, {dq, 64});
      for (int j = 0; j < m_; ++j) {
        double v = q[3 + j];
        Vec2 g = dq[3 + j];
        for (int b = 0; b < 4; ++b) {
          const double nodal = nodal_[index(p.element, a, b, j)];
          v -= nodal * hats[b].value;
          g -= nodal * hats[b].grad;
        }
        const int m = 4 + a * m_ + j;
        values[m] = pu.value * v;
        grads[m] = pu.grad * v + pu.value * g;
      }
    }
  }

 private:
  std::size_t index(int s, int a, int b, int j) const {
    return ((static_cast<std::size_t>(s) * 4 + a) * 4 + b) * m_ + j;
  }
  int m_;
  std::vector<LocalEnrichmentSpace> spaces_;
  std::vector<double> nodal_;
};

class CondensedSpace final : public ApproximationSpace {
 public:
  CondensedSpace(std::shared_ptr<const CondensedBasis> basis, int degree, const CrackMesh* crack)
      : ApproximationSpace(Method::Cgfem, degree, basis->mesh()), basis_(std::move(basis)) {
    crack_ = crack;
    const Mesh& mesh = *mesh_;
    dof_count_ = mesh.node_count();
    std::vector<std::vector<int>> dofs(mesh.element_count());
    local_.resize(static_cast<std::size_t>(mesh.element_count()) * 4);
    for (int s = 0; s < mesh.element_count(); ++s) {
      auto& d = dofs[s];
      for (int i : mesh.element(s)) d.insert(d.end(), basis_->support(i).begin(), basis_->support(i).end());
      std::sort(d.begin(), d.end());
      d.erase(std::unique(d.begin(), d.end()), d.end());
      for (int a = 0; a < 4; ++a) {
        auto& pos = local_[static_cast<std::size_t>(s) * 4 + a];
        for (int l : basis_->support(mesh.element(s)[a]))
          pos.push_back(static_cast<int>(std::lower_bound(d.begin(), d.end(), l) - d.begin()));
      }
    }
    set_element_dofs(dofs);
    constant_ = Eigen::VectorXd::Ones(dof_count_);
  }

  void evaluate(const ElementPoint& p, std::span<double> values, std::span<Vec2> grads) const override {
    const std::size_t nd = element_dofs(p.element).size();
    std::fill_n(values.begin(), nd, 0.0);
    std::fill_n(grads.begin(), nd, Vec2::Zero());
    const auto& corners = mesh_->element(p.element);
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1> q;
    Eigen::Matrix<double, Eigen::Dynamic, 2, 0, 16, 2> dq;
    Vec2 dqv[16];
    for (int a = 0; a < 4; ++a) {
      const NodeFit& fit = basis_->fit(corners[a]);
      const int n = fit.space.dimension();
      q.resize(n);
      dq.resize(n, 2);
      fit.space.evaluate(p.x, {q.data(), static_cast<std::size_t>(n)}, {dqv, static_cast<std::size_t>(n)});
      for (int j = 0; j < n; ++j) dq.row(j) = dqv[j].transpose();
      const ValueGrad hat = hat_corner(a, p);
      const Eigen::VectorXd ls = fit.coeffs.transpose() * q;
      const Eigen::MatrixXd dls = fit.coeffs.transpose() * dq;
      const auto& pos = local_[static_cast<std::size_t>(p.element) * 4 + a];
      for (std::size_t j = 0; j < pos.size(); ++j) {
        values[pos[j]] += hat.value * ls[j];
        grads[pos[j]] += hat.grad * ls[j] + hat.value * dls.row(j).transpose();
      }
    }
  }

 private:
  std::shared_ptr<const CondensedBasis> basis_;
  std::vector<std::vector<int>> local_;
};

class CrackGfemSpace final : public ApproximationSpace {
 public:
  explicit CrackGfemSpace(const CrackMesh& cm) : ApproximationSpace(Method::CrackGfem, 1, cm.base) {
    crack_ = &cm;
    const Mesh& mesh = cm.base;
    const int nn = mesh.node_count();
    heaviside_dof_.assign(nn, -1);
    singular_dof_.assign(nn, -1);
    int next = nn;
    for (int i : cm.crack_nodes)
      if (!cm.in_tip_element_nodes(i)) heaviside_dof_[i] = next++;
    for (int i : cm.tip_square_nodes) singular_dof_[i] = next++;
    dof_count_ = next;
    std::vector<std::vector<int>> dofs(mesh.element_count());
    for (int s = 0; s < mesh.element_count(); ++s) {
      const auto& c = mesh.element(s);
      for (int i : c) dofs[s].push_back(i);
      for (int i : c)
        if (heaviside_dof_[i] >= 0) dofs[s].push_back(heaviside_dof_[i]);
      for (int i : c)
        if (singular_dof_[i] >= 0) dofs[s].push_back(singular_dof_[i]);
    }
    set_element_dofs(dofs);
    constant_ = Eigen::VectorXd::Zero(dof_count_);
    constant_.head(nn).setOnes();
  }

  int heaviside_dof(int i) const { return heaviside_dof_[i]; }
  int singular_dof(int i) const { return singular_dof_[i]; }

  void evaluate(const ElementPoint& p, std::span<double> values, std::span<Vec2> grads) const override {
    const auto& c = mesh_->element(p.element);
    ValueGrad hats[4];
    for (int a = 0; a < 4; ++a) {
      hats[a] = hat_corner(a, p);
      values[a] = hats[a].value;
      grads[a] = hats[a].grad;
    }
    int m = 4;
    bool any_h = false, any_s = false;
    for (int i : c) {
      any_h |= heaviside_dof_[i] >= 0;
      any_s |= singular_dof_[i] >= 0;
    }
    if (any_h) {
      const double hv = crack_side(p.x - crack_->tip);
      for (int a = 0; a < 4; ++a)
        if (heaviside_dof_[c[a]] >= 0) {
          values[m] = hats[a].value * hv;
          grads[m++] = hats[a].grad * hv;
        }
    }
    if (any_s) {
      const ValueGrad sv = crack_enrichment_eval(CrackFunction::SqrtSingular, p.x, p.x, 1.0, crack_->tip);
      for (int a = 0; a < 4; ++a)
        if (singular_dof_[c[a]] >= 0) {
          values[m] = hats[a].value * sv.value;
          grads[m++] = hats[a].grad * sv.value + hats[a].value * sv.grad;
        }
    }
  }

 private:
  std::vector<int> heaviside_dof_, singular_dof_;
};

}  // namespace

SpacePtr build_fem_space(const Mesh& mesh, int k, bool isoparametric) {
  auto space = std::make_unique<FemSpace>(mesh, k, nullptr);
  const auto& jitter = mesh.perturbation();
  if (isoparametric && k >= 2 && jitter && jitter->magnitude > 0.0) space->make_curved(*jitter);
  return space;
}

SpacePtr build_crack_fem_space(const CrackMesh& mesh) { return std::make_unique<FemSpace>(mesh.base, 1, &mesh); }

SpacePtr build_ftgfem_space(const Mesh& mesh, int k, FlatTopParams params) {
  if (k < 1) throw InvalidParameter("polynomial degree must be >= 1");
  return std::make_unique<FlatTopGfemSpace>(mesh, k, params);
}

SpacePtr build_sgfem_space(const Mesh& mesh, int k, FlatTopParams params) {
  if (k < 1) throw InvalidParameter("polynomial degree must be >= 1");
  return std::make_unique<SgfemSpace>(mesh, k, params);
}

SpacePtr build_cgfem_space(std::shared_ptr<const CondensedBasis> basis, int degree) {
  return std::make_unique<CondensedSpace>(std::move(basis), degree, nullptr);
}

SpacePtr build_crack_gfem_space(const CrackMesh& mesh) { return std::make_unique<CrackGfemSpace>(mesh); }

SpacePtr build_crack_cgfem_space(const CrackMesh& mesh, std::shared_ptr<const CondensedBasis> basis) {
  if (&basis->mesh() != &mesh.base) throw InvalidParameter("condensed basis was built on a different mesh");
  return std::make_unique<CondensedSpace>(std::move(basis), 1, &mesh);
}

}  // namespace cgfem

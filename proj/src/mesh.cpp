#include "cgfem/mesh.hpp"

#include "cgfem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace cgfem {
namespace {

// Bilinear shape functions and their reference derivatives at ref.
void bilinear(const Vec2& ref, double (&n)[4], double (&dn)[4][2]) {
  const double xi = ref.x(), eta = ref.y();
  const double sx[4] = {-1, 1, 1, -1};
  const double sy[4] = {-1, -1, 1, 1};
  for (int a = 0; a < 4; ++a) {
    n[a] = 0.25 * (1 + sx[a] * xi) * (1 + sy[a] * eta);
    dn[a][0] = 0.25 * sx[a] * (1 + sy[a] * eta);
    dn[a][1] = 0.25 * sy[a] * (1 + sx[a] * xi);
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<Vec2> lattice_nodes(int n, Square domain) {
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  const double h = domain.side() / n;
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix) {
      // Exact endpoints so boundary nodes coincide bit-for-bit with the domain.
      const double x = ix == n ? domain.hi : domain.lo + ix * h;
      const double y = iy == n ? domain.hi : domain.lo + iy * h;
      nodes.emplace_back(x, y);
    }
  return nodes;
}

void check_jacobians(const Mesh& mesh) {
  for (int s = 0; s < mesh.element_count(); ++s)
    for (const Vec2& c : reference_corners())
      if (!(mesh.reference_map(s, c).jacobian.determinant() > 0.0))
        throw DegenerateMesh("element " + std::to_string(s) + " has a nonpositive Jacobian");
}

}  // namespace

Mesh::Mesh(int cells_per_side, Square domain, std::vector<Vec2> nodes)
    : n_(cells_per_side), domain_(domain), nodes_(std::move(nodes)) {
  if (n_ < 1 || nodes_.size() != static_cast<std::size_t>(n_ + 1) * (n_ + 1))
    throw InvalidParameter("mesh node count does not match the lattice");
  elements_.reserve(static_cast<std::size_t>(n_) * n_);
  patches_.resize(nodes_.size());
  for (int ey = 0; ey < n_; ++ey)
    for (int ex = 0; ex < n_; ++ex) {
      const int s = element_at(ex, ey);
      const std::array<int, 4> c{node_at(ex, ey), node_at(ex + 1, ey), node_at(ex + 1, ey + 1),
                                 node_at(ex, ey + 1)};
      elements_.push_back(c);
      for (int i : c) patches_[i].push_back(s);
    }
  for (auto& p : patches_) std::sort(p.begin(), p.end());
}

bool Mesh::is_boundary_node(int i) const {
  const auto [ix, iy] = node_lattice(i);
  return ix == 0 || iy == 0 || ix == n_ || iy == n_;
}

int Mesh::local_corner(int s, int i) const {
  const auto& c = elements_[s];
  for (int a = 0; a < 4; ++a)
    if (c[a] == i) return a;
  return -1;
}

MappedPoint Mesh::reference_map(int s, const Vec2& ref) const {
  double n[4], dn[4][2];
  bilinear(ref, n, dn);
  MappedPoint m{Vec2::Zero(), Mat2::Zero()};
  for (int a = 0; a < 4; ++a) {
    const Vec2& p = nodes_[elements_[s][a]];
    m.x += n[a] * p;
    m.jacobian.col(0) += dn[a][0] * p;
    m.jacobian.col(1) += dn[a][1] * p;
  }
  return m;
}

ElementPoint Mesh::point(int s, const Vec2& ref) const {
  const MappedPoint m = reference_map(s, ref);
  ElementPoint p;
  p.element = s;
  p.ref = ref;
  p.x = m.x;
  p.jacobian = m.jacobian;
  p.det = m.jacobian.determinant();
  p.grad_map = m.jacobian.inverse().transpose();
  return p;
}

Vec2 Mesh::inverse_map(int s, const Vec2& x) const {
  Vec2 ref = Vec2::Zero();
  for (int it = 0; it < 20; ++it) {
    const MappedPoint m = reference_map(s, ref);
    const Vec2 step = m.jacobian.lu().solve(x - m.x);
    ref += step;
    if (step.lpNorm<Eigen::Infinity>() <= 1e-12) break;
  }
  return ref;
}

int Mesh::locate(const Vec2& x) const {
  const double h = this->h();
  const int ex0 = std::clamp(static_cast<int>(std::floor((x.x() - domain_.lo) / h)), 0, n_ - 1);
  const int ey0 = std::clamp(static_cast<int>(std::floor((x.y() - domain_.lo) / h)), 0, n_ - 1);
  // Perturbed meshes move nodes by less than h/4, so the owner is a lattice neighbour.
  for (int dy = 0; dy <= 2; ++dy)
    for (int dx = 0; dx <= 2; ++dx) {
      const int ex = ex0 + (dx == 2 ? -1 : dx), ey = ey0 + (dy == 2 ? -1 : dy);
      if (ex < 0 || ey < 0 || ex >= n_ || ey >= n_) continue;
      const int s = element_at(ex, ey);
      const Vec2 r = inverse_map(s, x);
      if (std::abs(r.x()) <= 1 + 1e-10 && std::abs(r.y()) <= 1 + 1e-10) return s;
    }
  return -1;
}

double Mesh::element_area(int s) const {
  const auto& c = elements_[s];
  double a = 0;
  for (int k = 0; k < 4; ++k) {
    const Vec2& p = nodes_[c[k]];
    const Vec2& q = nodes_[c[(k + 1) % 4]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

std::vector<BoundaryEdge> Mesh::boundary_edges() const {
  std::vector<BoundaryEdge> edges;
  for (int ex = 0; ex < n_; ++ex) edges.push_back({element_at(ex, 0), 0, Vec2(0, -1)});
  for (int ey = 0; ey < n_; ++ey) edges.push_back({element_at(n_ - 1, ey), 1, Vec2(1, 0)});
  for (int ex = 0; ex < n_; ++ex) edges.push_back({element_at(ex, n_ - 1), 2, Vec2(0, 1)});
  for (int ey = 0; ey < n_; ++ey) edges.push_back({element_at(0, ey), 3, Vec2(-1, 0)});
  return edges;
}

void Mesh::write_text(std::ostream& out) const {
  out << std::setprecision(17);
  for (int i = 0; i < node_count(); ++i) out << i << ' ' << nodes_[i].x() << ' ' << nodes_[i].y() << '\n';
  for (int s = 0; s < element_count(); ++s) {
    const auto& c = elements_[s];
    out << s << ' ' << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << '\n';
  }
}

Mesh build_uniform_mesh(int cells_per_side, Square domain) {
  if (cells_per_side < 2) throw InvalidParameter("uniform mesh needs N >= 2");
  if (!(domain.hi > domain.lo)) throw InvalidParameter("empty domain");
  return Mesh(cells_per_side, domain, lattice_nodes(cells_per_side, domain));
}

Vec2 lattice_jitter(std::uint64_t seed, int ix, int iy, std::uint64_t salt) {
  std::uint64_t state = seed ^ (salt * 0xD1B54A32D192ED03ULL);
  state = splitmix64(state) ^ static_cast<std::uint64_t>(ix);
  state = splitmix64(state) ^ (static_cast<std::uint64_t>(iy) << 32);
  const double ex = unit_double(splitmix64(state)) - 0.5;
  const double ey = unit_double(splitmix64(state)) - 0.5;
  return {ex, ey};
}

Mesh build_perturbed_mesh(int cells_per_side, double magnitude, std::uint64_t seed, Square domain) {
  if (cells_per_side < 2) throw InvalidParameter("perturbed mesh needs N >= 2");
  if (!(magnitude >= 0.0 && magnitude <= 0.25))
    throw InvalidParameter("perturbation magnitude must lie in [0, 0.25]");
  auto nodes = lattice_nodes(cells_per_side, domain);
  const double h = domain.side() / cells_per_side;
  for (int iy = 1; iy < cells_per_side; ++iy)
    for (int ix = 1; ix < cells_per_side; ++ix)
      nodes[static_cast<std::size_t>(iy) * (cells_per_side + 1) + ix] += magnitude * h * lattice_jitter(seed, ix, iy);
  Mesh mesh(cells_per_side, domain, std::move(nodes));
  mesh.set_perturbation({magnitude, seed});
  check_jacobians(mesh);
  return mesh;
}

bool CrackMesh::near_tip(int s) const {
  const auto [ex, ey] = base.element_lattice(s);
  const auto [tx, ty] = base.element_lattice(tip_element);
  return std::abs(ex - tx) <= 1 && std::abs(ey - ty) <= 1;
}

CrackMesh build_crack_mesh(int n, double radius) {
  if (n < 5) throw InvalidParameter("crack mesh needs n >= 5");
  if (n % 2 == 0) throw InvalidParameter("crack mesh needs odd n so the crack cuts element interiors");
  if (!(radius > 0.0 && radius < 1.0)) throw InvalidParameter("enrichment radius must lie in (0, 1)");

  CrackMesh cm{.base = build_uniform_mesh(n, Square{-1.0, 1.0}), .radius = radius};
  const Mesh& m = cm.base;
  cm.radius = radius;
  const int mid = (n - 1) / 2;
  cm.tip_element = m.element_at(mid, mid);
  cm.in_crack_.assign(m.node_count(), 0);
  cm.in_square_.assign(m.node_count(), 0);
  cm.in_delta_.assign(m.node_count(), 0);
  cm.cut_flag_.assign(m.element_count(), 0);

  // The middle element row straddles x2 = 0; its elements reaching x1 <= 0 meet the crack.
  for (int ex = 0; ex <= mid; ++ex) {
    const int s = m.element_at(ex, mid);
    cm.cut_elements.push_back(s);
    cm.cut_flag_[s] = 1;
    for (int i : m.element(s)) cm.in_crack_[i] = 1;
  }
  for (int i : m.element(cm.tip_element)) cm.in_delta_[i] = 1;
  for (int i = 0; i < m.node_count(); ++i) {
    const Vec2& x = m.node(i);
    if (std::abs(x.x()) <= radius && std::abs(x.y()) <= radius) cm.in_square_[i] = 1;
    if (cm.in_crack_[i]) cm.crack_nodes.push_back(i);
    if (cm.in_square_[i]) cm.tip_square_nodes.push_back(i);
    if (cm.in_delta_[i]) cm.tip_element_nodes.push_back(i);
  }
  return cm;
}

}  // namespace cgfem

#include "cgfem/errors.hpp"
#include "cgfem/mesh.hpp"
#include "cgfem/quadrature.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace cgfem;

TEST_CASE("uniform mesh lattice and patches") {
  const Mesh m = build_uniform_mesh(4);
  CHECK(m.node_count() == 25);
  CHECK(m.element_count() == 16);
  CHECK(m.h() == doctest::Approx(0.25));
  CHECK(m.node(m.node_at(2, 3)).isApprox(Vec2(0.5, 0.75)));
  CHECK(m.patch(m.node_at(0, 0)).size() == 1);
  CHECK(m.patch(m.node_at(2, 0)).size() == 2);
  CHECK(m.patch(m.node_at(2, 2)).size() == 4);
  CHECK(m.is_boundary_node(m.node_at(0, 3)));
  CHECK_FALSE(m.is_boundary_node(m.node_at(1, 3)));
  // Counterclockwise corners with positive area.
  for (int s = 0; s < m.element_count(); ++s) CHECK(m.element_area(s) == doctest::Approx(1.0 / 16));
  CHECK(m.boundary_edges().size() == 16);
  CHECK_THROWS_AS(build_uniform_mesh(1), InvalidParameter);
}

TEST_CASE("reference map and its inverse") {
  const Mesh m = build_perturbed_mesh(6, 0.1, 11);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 50; ++t) {
    const int s = static_cast<int>(rng() % m.element_count());
    const Vec2 ref(u(rng), u(rng));
    const MappedPoint mp = m.reference_map(s, ref);
    CHECK((m.inverse_map(s, mp.x) - ref).norm() < 1e-12);
    CHECK(m.locate(mp.x) == s);
  }
}

TEST_CASE("perturbed mesh contract") {
  SUBCASE("boundary node (0, 5/12) unchanged") {
    const Mesh m = build_perturbed_mesh(12, 0.1, 2017);
    const Mesh u = build_uniform_mesh(12);
    CHECK(m.node(m.node_at(0, 5)) == u.node(u.node_at(0, 5)));
    CHECK(m.node(m.node_at(0, 5)).y() == doctest::Approx(5.0 / 12));
    for (int i = 0; i < m.node_count(); ++i)
      if (m.is_boundary_node(i)) CHECK(m.node(i) == u.node(i));
  }
  SUBCASE("interior displacement bounded by magnitude * h / 2") {
    const Mesh m = build_perturbed_mesh(8, 0.1, 5);
    const Mesh u = build_uniform_mesh(8);
    double largest = 0;
    for (int i = 0; i < m.node_count(); ++i) {
      const Vec2 d = m.node(i) - u.node(i);
      CHECK(d.cwiseAbs().maxCoeff() <= 0.05 * m.h() + 1e-15);
      largest = std::max(largest, d.norm());
    }
    CHECK(largest > 0.0);
  }
  SUBCASE("magnitude 0 is the uniform mesh") {
    const Mesh m = build_perturbed_mesh(8, 0.0, 9);
    const Mesh u = build_uniform_mesh(8);
    for (int i = 0; i < m.node_count(); ++i) CHECK(m.node(i) == u.node(i));
  }
  SUBCASE("equal seeds give bitwise equal nodes, different seeds differ") {
    const Mesh a = build_perturbed_mesh(8, 0.1, 77), b = build_perturbed_mesh(8, 0.1, 77);
    const Mesh c = build_perturbed_mesh(8, 0.1, 78);
    bool differs = false;
    for (int i = 0; i < a.node_count(); ++i) {
      CHECK(a.node(i) == b.node(i));
      differs |= a.node(i) != c.node(i);
    }
    CHECK(differs);
  }
  SUBCASE("positive Jacobians at the 2x2 Gauss points") {
    const Mesh m = build_perturbed_mesh(16, 0.1, 2017);
    const auto& g = gauss_legendre(2);
    for (int s = 0; s < m.element_count(); ++s)
      for (double a : g.points)
        for (double b : g.points) CHECK(m.reference_map(s, Vec2(a, b)).jacobian.determinant() > 0);
  }
  CHECK_THROWS_AS(build_perturbed_mesh(8, 0.3, 1), InvalidParameter);
  CHECK(build_perturbed_mesh(8, 0.1, 1).perturbation().has_value());
  CHECK_FALSE(build_uniform_mesh(8).perturbation().has_value());
}

TEST_CASE("crack mesh index sets, n = 9 and 17") {
  const CrackMesh c9 = build_crack_mesh(9, 0.25);
  CHECK(c9.base.node_count() == 100);
  CHECK(c9.base.h() == doctest::Approx(2.0 / 9));
  CHECK(c9.tip_element == c9.base.element_at(4, 4));
  CHECK(c9.tip_element_nodes.size() == 4);
  // Cut elements: middle row, from the left boundary up to the tip element.
  CHECK(c9.cut_elements.size() == 5);
  CHECK(c9.crack_nodes.size() == 12);
  // Only the lattice points at +-1/9 fall inside the half-side 1/4 square.
  CHECK(c9.tip_square_nodes.size() == 4);
  for (int i : c9.tip_element_nodes) CHECK(c9.in_crack_nodes(i));

  const CrackMesh c17 = build_crack_mesh(17, 0.25);
  CHECK(c17.crack_nodes.size() == 20);
  CHECK(c17.tip_square_nodes.size() == 16);
  for (int s : c17.cut_elements) {
    const auto [ex, ey] = c17.base.element_lattice(s);
    CHECK(ey == 8);
    CHECK(ex <= 8);
  }
  // No node lies on the crack line.
  for (int i = 0; i < c17.base.node_count(); ++i) CHECK(c17.base.node(i).y() != 0.0);

  CHECK_THROWS_AS(build_crack_mesh(8, 0.25), InvalidParameter);
  CHECK_THROWS_AS(build_crack_mesh(9, 1.5), InvalidParameter);
}

TEST_CASE("mesh text dump") {
  std::ostringstream out;
  build_uniform_mesh(2).write_text(out);
  const std::string s = out.str();
  CHECK(s.rfind("0 0 0\n", 0) == 0);
  CHECK(s.find("\n0 0 1 4 3\n") != std::string::npos);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "isoshell/mesh.hpp"

using namespace isoshell;

namespace {

const std::vector<Segment> kLeft = {Segment{Vec2(0, 0), Vec2(0, 1)}};

double total_area(const Mesh& m) {
  double a = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) a += m.signed_area(t);
  return a;
}

}  // namespace

TEST_CASE("unit square refinement counts and sizes") {
  Mesh m = build_initial_mesh(Domain::unit_square, kLeft);
  for (int l = 0; l <= 3; ++l) {
    const int n = 1 << l;
    CAPTURE(l);
    CHECK(m.level == l);
    CHECK(m.num_vertices() == (n + 1) * (n + 1));
    CHECK(m.num_triangles() == 2 * n * n);
    // Euler formula for a triangulated disc
    CHECK(static_cast<int>(m.edges.size()) == m.num_vertices() + m.num_triangles() - 1);
    CHECK(m.h == doctest::Approx(std::sqrt(2.0) / n).epsilon(1e-14));
    CHECK(mesh_diameter(m) == doctest::Approx(m.h).epsilon(1e-14));
    CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-14));
    // exactly the nodes on the clamped edge are flagged
    int flagged = 0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      const bool on = point_on_segment(m.vertices[v], kLeft[0]);
      CHECK(static_cast<bool>(m.is_dirichlet[v]) == on);
      flagged += m.is_dirichlet[v];
    }
    CHECK(flagged == n + 1);
    CHECK(static_cast<int>(m.dirichlet_nodes.size()) == flagged);
    if (l < 3) m = red_refine(m).first;
  }
}

TEST_CASE("l-shape refinement counts and area") {
  Mesh m = build_initial_mesh(Domain::l_shape, {Segment{Vec2(1, 0.5), Vec2(1, 1)}});
  CHECK(m.num_triangles() == 6);
  CHECK(total_area(m) == doctest::Approx(0.75).epsilon(1e-14));
  auto [fine, map] = red_refine(m);
  CHECK(fine.num_triangles() == 24);
  CHECK(total_area(fine) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(map.n_coarse_vertices == m.num_vertices());
  // no fine vertex may fall outside the L-shaped domain
  for (const Vec2& v : fine.vertices) {
    CHECK(!(v[0] > 0.5 + 1e-12 && v[1] < 0.5 - 1e-12));
  }
}

TEST_CASE("triangles are counterclockwise with positive area") {
  Mesh m = build_initial_mesh(Domain::unit_square, kLeft);
  m = red_refine(m).first;
  for (int t = 0; t < m.num_triangles(); ++t) {
    CHECK(m.signed_area(t) > 0.0);
    CHECK(m.longest_edge(t) == doctest::Approx(m.h).epsilon(1e-14));
  }
}

TEST_CASE("prolongation map classifies every fine vertex") {
  Mesh coarse = red_refine(build_initial_mesh(Domain::unit_square, kLeft)).first;
  auto [fine, map] = red_refine(coarse);
  CHECK(static_cast<int>(map.from_vertex.size()) == fine.num_vertices());
  for (int v = 0; v < fine.num_vertices(); ++v) {
    const bool inherited = map.from_vertex[v] >= 0;
    const bool midpoint = map.from_edge[v] >= 0;
    CHECK(inherited != midpoint);  // exactly one source
    if (inherited) {
      CHECK((fine.vertices[v] - coarse.vertices[map.from_vertex[v]]).norm() == 0.0);
    } else {
      CHECK((fine.vertices[v] - coarse.edges[map.from_edge[v]].midpoint).norm() == 0.0);
    }
  }
}

TEST_CASE("edges carry consistent geometry") {
  Mesh m = red_refine(build_initial_mesh(Domain::unit_square, kLeft)).first;
  for (const Edge& e : m.edges) {
    CHECK(e.a < e.b);
    CHECK((e.midpoint - 0.5 * (m.vertices[e.a] + m.vertices[e.b])).norm() <= 1e-15);
    const Vec2 t = (m.vertices[e.b] - m.vertices[e.a]).normalized();
    CHECK((e.tangent - t).norm() <= 1e-15);
    CHECK(e.tri[0] >= 0);  // every edge belongs to at least one triangle
  }
}

TEST_CASE("point_on_segment endpoints and interior") {
  const Segment s{Vec2(0, 0), Vec2(0, 1)};
  CHECK(point_on_segment(Vec2(0, 0), s));
  CHECK(point_on_segment(Vec2(0, 1), s));
  CHECK(point_on_segment(Vec2(0, 0.625), s));
  CHECK(!point_on_segment(Vec2(1e-6, 0.5), s));
  CHECK(!point_on_segment(Vec2(0, 1.5), s));
}

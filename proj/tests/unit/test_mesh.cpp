#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "vkfem/errors.hpp"
#include "vkfem/mesh.hpp"

using namespace vkfem;

TEST_SUITE("mesh") {
  TEST_CASE("criss-cross square counts") {
    const Triangulation m0 = make_square_crisscross();
    CHECK(m0.num_triangles() == 4);
    CHECK(m0.num_vertices() == 5);
    CHECK(m0.num_edges() == 8);
    const MeshStatistics s0 = mesh_statistics(m0);
    CHECK(s0.interior_vertices == 1);
    CHECK(s0.interior_edges == 4);
    CHECK(s0.total_area == doctest::Approx(1.0));

    const Triangulation m1 = red_refine(m0);
    CHECK(m1.num_triangles() == 16);
    CHECK(m1.num_vertices() == 13);
    CHECK(m1.num_edges() == 28);
    const MeshStatistics s1 = mesh_statistics(m1);
    CHECK(s1.interior_vertices == 5);
    CHECK(s1.interior_edges == 20);
    CHECK(s1.h_max == doctest::Approx(0.5));
    CHECK(m1.level() == 1);
  }

  TEST_CASE("L-shape counts for every diagonal pattern") {
    for (auto d : {LShapeDiagonal::parallel, LShapeDiagonal::toward_corner, LShapeDiagonal::away_from_corner}) {
      const Triangulation m = make_lshape(d);
      CHECK(m.num_triangles() == 6);
      CHECK(m.num_vertices() == 8);
      CHECK(m.num_edges() == 13);
      const MeshStatistics s = mesh_statistics(m);
      CHECK(s.h_max == doctest::Approx(std::sqrt(2.0) / 2));
      CHECK(s.total_area == doctest::Approx(0.75));
      CHECK(s.interior_vertices == 0);
      CHECK(s.interior_edges == 5);
    }
  }

  TEST_CASE("L-shape diagonal patterns") {
    auto has_edge = [](const Triangulation& m, Point a, Point b) {
      for (const auto& e : m.edges()) {
        const Point p = m.vertices()[e[0]], q = m.vertices()[e[1]];
        if ((p.x == a.x && p.y == a.y && q.x == b.x && q.y == b.y) ||
            (p.x == b.x && p.y == b.y && q.x == a.x && q.y == a.y))
          return true;
      }
      return false;
    };
    const Triangulation p = make_lshape(LShapeDiagonal::parallel);
    CHECK(has_edge(p, {-0.5, 0.0}, {0.0, -0.5}));
    CHECK(has_edge(p, {0.0, 0.0}, {0.5, -0.5}));
    CHECK(has_edge(p, {-0.5, 0.5}, {0.0, 0.0}));
    const Triangulation t = make_lshape(LShapeDiagonal::toward_corner);
    CHECK(has_edge(t, {-0.5, -0.5}, {0.0, 0.0}));
    CHECK(has_edge(t, {0.5, -0.5}, {0.0, 0.0}));
    CHECK(has_edge(t, {-0.5, 0.5}, {0.0, 0.0}));
    for (auto d : {LShapeDiagonal::parallel, LShapeDiagonal::toward_corner, LShapeDiagonal::away_from_corner})
      CHECK(parse_lshape_diagonal(to_string(d)) == d);
    CHECK_THROWS_AS(parse_lshape_diagonal("diagonal"), ParseError);
  }

  TEST_CASE("Euler characteristic and area survive refinement") {
    Triangulation m = make_lshape(LShapeDiagonal::away_from_corner);
    for (int k = 0; k < 4; ++k) {
      const long v = static_cast<long>(m.num_vertices());
      const long e = static_cast<long>(m.num_edges());
      const long t = static_cast<long>(m.num_triangles());
      CHECK(v - e + t == 1);
      double area = 0.0;
      for (std::size_t i = 0; i < m.num_triangles(); ++i) {
        CHECK(m.area(static_cast<int>(i)) > 0.0);
        area += m.area(static_cast<int>(i));
      }
      CHECK(area == doctest::Approx(0.75).epsilon(1e-13));
      m = red_refine(m);
    }
  }

  TEST_CASE("red refinement halves h and keeps the minimum angle") {
    Triangulation m = make_square_crisscross();
    const MeshStatistics s0 = mesh_statistics(m);
    for (int k = 1; k <= 3; ++k) {
      m = red_refine(m);
      const MeshStatistics s = mesh_statistics(m);
      CHECK(s.h_max == doctest::Approx(s0.h_max / std::pow(2.0, k)));
      CHECK(s.min_angle == doctest::Approx(s0.min_angle));
    }
  }

  TEST_CASE("refinement keeps coarse vertices and numbers midpoints after them") {
    const Triangulation m0 = make_square_crisscross();
    const Triangulation m1 = red_refine(m0);
    for (std::size_t v = 0; v < m0.num_vertices(); ++v) {
      CHECK(m1.vertices()[v].x == m0.vertices()[v].x);
      CHECK(m1.vertices()[v].y == m0.vertices()[v].y);
    }
    for (std::size_t e = 0; e < m0.num_edges(); ++e) {
      const Point mid = m0.edge_midpoint(static_cast<int>(e));
      const Point& p = m1.vertices()[m0.num_vertices() + e];
      CHECK(p.x == doctest::Approx(mid.x));
      CHECK(p.y == doctest::Approx(mid.y));
    }
  }

  TEST_CASE("hierarchy ancestors contain their descendants") {
    const MeshHierarchy h(make_square_crisscross(), 3);
    const Triangulation& fine = *h.level(3);
    for (std::size_t t = 0; t < fine.num_triangles(); t += 7) {
      const auto c = fine.corners(static_cast<int>(t));
      const Point centroid{(c[0].x + c[1].x + c[2].x) / 3, (c[0].y + c[1].y + c[2].y) / 3};
      for (int l = 0; l < 3; ++l) {
        const int a = h.ancestor(3, static_cast<int>(t), l);
        const auto p = h.level(l)->corners(a);
        auto side = [&](const Point& u, const Point& w) {
          return (w.x - u.x) * (centroid.y - u.y) - (centroid.x - u.x) * (w.y - u.y);
        };
        CHECK(side(p[0], p[1]) > 0);
        CHECK(side(p[1], p[2]) > 0);
        CHECK(side(p[2], p[0]) > 0);
      }
    }
    CHECK_THROWS(MeshHierarchy(red_refine(make_square_crisscross()), 2));
  }

  TEST_CASE("edge normals are unit and orthogonal to the edge") {
    const Triangulation m = red_refine(make_lshape(LShapeDiagonal::toward_corner));
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
      const auto& ed = m.edges()[e];
      CHECK(ed[0] < ed[1]);
      const Point& a = m.vertices()[ed[0]];
      const Point& b = m.vertices()[ed[1]];
      const Point n = m.edge_normal(static_cast<int>(e));
      CHECK(std::hypot(n.x, n.y) == doctest::Approx(1.0));
      CHECK(n.x * (b.x - a.x) + n.y * (b.y - a.y) == doctest::Approx(0.0));
    }
  }

  TEST_CASE("boundary flags on the square") {
    const Triangulation m = red_refine(red_refine(make_square_crisscross()));
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      const Point& p = m.vertices()[v];
      const bool on_boundary = std::abs(std::abs(p.x) - 0.5) < 1e-14 || std::abs(std::abs(p.y) - 0.5) < 1e-14;
      CHECK(m.is_boundary_vertex(static_cast<int>(v)) == on_boundary);
    }
  }

  TEST_CASE("mesh text round trip") {
    const Triangulation m = red_refine(make_lshape(LShapeDiagonal::away_from_corner));
    std::stringstream s;
    write_mesh(s, m);
    const Triangulation back = read_mesh(s);
    CHECK(back.triangles() == m.triangles());
    REQUIRE(back.num_vertices() == m.num_vertices());
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      CHECK(back.vertices()[v].x == m.vertices()[v].x);
      CHECK(back.vertices()[v].y == m.vertices()[v].y);
    }
    std::stringstream bad("vkfem-mesh 1\nvertices 2\n0 0\n");
    CHECK_THROWS_AS(read_mesh(bad), ParseError);
  }

  TEST_CASE("invalid triangulations are rejected") {
    const std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}};
    CHECK_NOTHROW(Triangulation(pts, {{0, 1, 2}}));
    CHECK_THROWS(Triangulation(pts, {{0, 2, 1}}));  // clockwise
    CHECK_THROWS(Triangulation(pts, {{0, 1, 3}}));  // index out of range
  }
}

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "doctest.h"
#include "vkfem/morley.hpp"

using namespace vkfem;

namespace {

TriangulationPtr share(Triangulation m) { return std::make_shared<const Triangulation>(std::move(m)); }

// q = 3 + x - 2y + 0.7x^2 - 1.3xy + 0.4y^2
SmoothFunction global_quadratic() {
  SmoothFunction q;
  q.value = [](double x, double y) { return 3 + x - 2 * y + 0.7 * x * x - 1.3 * x * y + 0.4 * y * y; };
  q.gradient = [](double x, double y) { return Gradient{1 + 1.4 * x - 1.3 * y, -2 - 1.3 * x + 0.8 * y}; };
  q.hessian = [](double, double) { return Hessian{1.4, -1.3, 0.8}; };
  return q;
}

// w = x^3 - 2 x^2 y + x y^2 + 0.5 y^3 + x^2
SmoothFunction global_cubic() {
  SmoothFunction w;
  w.value = [](double x, double y) {
    return x * x * x - 2 * x * x * y + x * y * y + 0.5 * y * y * y + x * x;
  };
  w.gradient = [](double x, double y) {
    return Gradient{3 * x * x - 4 * x * y + y * y + 2 * x, -2 * x * x + 2 * x * y + 1.5 * y * y};
  };
  w.hessian = [](double x, double y) {
    return Hessian{6 * x - 4 * y + 2, -4 * x + 2 * y, 2 * x + 3 * y};
  };
  return w;
}

}  // namespace

TEST_SUITE("morley") {
  TEST_CASE("DOF counts") {
    CHECK(build_dof_map(make_square_crisscross()).n_dofs() == 5);
    const DofMap d1 = build_dof_map(red_refine(make_square_crisscross()));
    CHECK(d1.n_dofs() == 25);
    CHECK(d1.n_vertex_dofs() == 5);
    CHECK(build_dof_map(make_lshape()).n_dofs() == 5);  // interior edges only
  }

  TEST_CASE("shape functions are dual to the DOF functionals") {
    const Triangulation mesh = red_refine(make_lshape(LShapeDiagonal::away_from_corner));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const auto shapes = local_basis(mesh, ti);
      const auto corners = mesh.corners(ti);
      for (int j = 0; j < 6; ++j) {
        for (int k = 0; k < 3; ++k) {
          CHECK(shapes[j].value(corners[k]) == doctest::Approx(j == k ? 1.0 : 0.0).scale(1.0));
          // gradients are affine: the edge mean equals the midpoint value
          const int e = mesh.triangle_edges()[t][k];
          const Gradient g = shapes[j].gradient(mesh.edge_midpoint(e));
          const Point n = mesh.edge_normal(e);
          CHECK(g.x * n.x + g.y * n.y == doctest::Approx(j == 3 + k ? 1.0 : 0.0).scale(1.0));
        }
      }
    }
  }

  TEST_CASE("local basis agrees with an independent dense solve") {
    const Triangulation mesh = make_square_crisscross();
    const int t = 2;
    const auto corners = mesh.corners(t);
    // DOF functionals applied to the monomials 1, x, y, x^2, xy, y^2 in absolute coordinates
    Eigen::Matrix<double, 6, 6> D;
    for (int k = 0; k < 3; ++k) {
      const double x = corners[k].x, y = corners[k].y;
      D.row(k) << 1, x, y, x * x, x * y, y * y;
      const int e = mesh.triangle_edges()[t][k];
      const Point m = mesh.edge_midpoint(e), n = mesh.edge_normal(e);
      D.row(3 + k) << 0, n.x, n.y, 2 * m.x * n.x, m.y * n.x + m.x * n.y, 2 * m.y * n.y;
    }
    const Eigen::Matrix<double, 6, 6> C = D.householderQr().solve(Eigen::Matrix<double, 6, 6>::Identity());
    const auto shapes = local_basis(mesh, t);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 10; ++s) {
      double a = u(rng), b = u(rng);
      if (a + b > 1) a = 1 - a, b = 1 - b;
      const double x = corners[0].x + a * (corners[1].x - corners[0].x) + b * (corners[2].x - corners[0].x);
      const double y = corners[0].y + a * (corners[1].y - corners[0].y) + b * (corners[2].y - corners[0].y);
      Eigen::Matrix<double, 6, 1> mono;
      mono << 1, x, y, x * x, x * y, y * y;
      for (int j = 0; j < 6; ++j)
        CHECK(shapes[j].value({x, y}) == doctest::Approx(mono.dot(C.col(j))).epsilon(1e-12));
    }
  }

  TEST_CASE("interpolation reproduces global quadratics") {
    // boundary DOFs are zero, so only elements without boundary DOFs see the full quadratic
    auto space = MorleySpace::create(share(red_refine(red_refine(make_square_crisscross()))));
    const SmoothFunction q = global_quadratic();
    const MorleyCoeffs field = interpolate(space, q);
    const auto& mesh = space->mesh();
    bool checked_interior = false;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const auto& dofs = space->element(ti).dofs;
      if (std::find(dofs.begin(), dofs.end(), -1) != dofs.end()) continue;
      checked_interior = true;
      const auto c = mesh.corners(ti);
      const Point g{(c[0].x + c[1].x + c[2].x) / 3, (c[0].y + c[1].y + c[2].y) / 3};
      CHECK(evaluate_value(field, ti, g) == doctest::Approx(q.value(g.x, g.y)));
      const Hessian h = field.hessian(ti);
      CHECK(h.xx == doctest::Approx(1.4));
      CHECK(h.xy == doctest::Approx(-1.3));
      CHECK(h.yy == doctest::Approx(0.8));
    }
    CHECK(checked_interior);
  }

  TEST_CASE("local interpolant reproduces quadratics on every element") {
    const Triangulation mesh = red_refine(make_lshape());
    const SmoothFunction q = global_quadratic();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const auto shapes = local_basis(mesh, ti);
      const auto c = mesh.corners(ti);
      double dofs[6];
      for (int k = 0; k < 3; ++k) {
        dofs[k] = q.value(c[k].x, c[k].y);
        const int e = mesh.triangle_edges()[t][k];
        const Point m = mesh.edge_midpoint(e), n = mesh.edge_normal(e);
        const Gradient g = q.gradient(m.x, m.y);
        dofs[3 + k] = g.x * n.x + g.y * n.y;
      }
      const Point p{0.2 * c[0].x + 0.5 * c[1].x + 0.3 * c[2].x, 0.2 * c[0].y + 0.5 * c[1].y + 0.3 * c[2].y};
      double value = 0.0;
      for (int j = 0; j < 6; ++j) value += dofs[j] * shapes[j].value(p);
      CHECK(value == doctest::Approx(q.value(p.x, p.y)).epsilon(1e-12));
    }
  }

  TEST_CASE("interpolant Hessian is the element mean of the cubic Hessian") {
    // D^2 w is affine, so its mean over T is its value at the centroid
    const Triangulation mesh = red_refine(red_refine(make_square_crisscross()));
    const SmoothFunction w = global_cubic();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const auto shapes = local_basis(mesh, ti);
      const auto c = mesh.corners(ti);
      Hessian h{};
      for (int k = 0; k < 3; ++k) {
        h += w.value(c[k].x, c[k].y) * shapes[k].hessian();
        const int e = mesh.triangle_edges()[t][k];
        const Point a = mesh.vertices()[mesh.edges()[e][0]], b = mesh.vertices()[mesh.edges()[e][1]];
        const Point n = mesh.edge_normal(e);
        // the normal derivative of a cubic is quadratic: Simpson's rule is exact
        auto dn = [&](const Point& p) {
          const Gradient g = w.gradient(p.x, p.y);
          return g.x * n.x + g.y * n.y;
        };
        const double mean = (dn(a) + 4 * dn(midpoint(a, b)) + dn(b)) / 6;
        h += mean * shapes[3 + k].hessian();
      }
      const Hessian ref = w.hessian((c[0].x + c[1].x + c[2].x) / 3, (c[0].y + c[1].y + c[2].y) / 3);
      CHECK(h.xx == doctest::Approx(ref.xx).epsilon(1e-10));
      CHECK(h.xy == doctest::Approx(ref.xy).epsilon(1e-10));
      CHECK(h.yy == doctest::Approx(ref.yy).epsilon(1e-10));
    }
  }

  TEST_CASE("shape integrals match an interior Gauss rule") {
    const Triangulation mesh = make_lshape();
    auto space = MorleySpace::create(share(mesh));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const int ti = static_cast<int>(t);
      const auto& el = space->element(ti);
      const auto c = mesh.corners(ti);
      for (int j = 0; j < 6; ++j) {
        // 3-point Gauss rule at (1/6,1/6,2/3) permutations, exact for quadratics
        double sum = 0.0;
        const double bary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
        for (const auto& b : bary) {
          const Point p{b[0] * c[0].x + b[1] * c[1].x + b[2] * c[2].x, b[0] * c[0].y + b[1] * c[1].y + b[2] * c[2].y};
          sum += el.shapes[j].value(p) / 3;
        }
        CHECK(el.integrals[j] == doctest::Approx(sum * mesh.area(ti)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("energy norm of random coefficients") {
    auto space = MorleySpace::create(share(make_square_crisscross()));
    MorleyCoeffs f = MorleyCoeffs::zero(space);
    f.values.setRandom();
    double expected = 0.0;
    for (std::size_t t = 0; t < space->num_elements(); ++t) {
      const Hessian h = f.hessian(static_cast<int>(t));
      expected += space->mesh().area(static_cast<int>(t)) * frobenius(h, h);
    }
    CHECK(energy_norm_pw(f) == doctest::Approx(std::sqrt(expected)));
  }

  TEST_CASE("boundary vertices evaluate to zero") {
    auto space = MorleySpace::create(share(red_refine(make_square_crisscross())));
    MorleyCoeffs f = MorleyCoeffs::zero(space);
    f.values.setConstant(1.0);
    for (std::size_t v = 0; v < space->mesh().num_vertices(); ++v) {
      const int vi = static_cast<int>(v);
      CHECK(f.vertex_value(vi) == (space->mesh().is_boundary_vertex(vi) ? 0.0 : 1.0));
    }
  }

  TEST_CASE("field text round trip is exact") {
    auto space = MorleySpace::create(share(make_lshape()));
    MorleyCoeffs f = MorleyCoeffs::zero(space);
    f.values.setRandom();
    f.values *= 1.0 / 3.0;
    std::stringstream s;
    write_field(s, f);
    const Eigen::VectorXd back = read_field(s);
    CHECK(back == f.values);
  }

  TEST_CASE("fields on different spaces are rejected") {
    auto a = MorleySpace::create(share(make_lshape()));
    auto b = MorleySpace::create(share(make_lshape()));
    CHECK_THROWS_AS(require_same_space(MorleyCoeffs::zero(a), MorleyCoeffs::zero(b)), std::invalid_argument);
  }
}

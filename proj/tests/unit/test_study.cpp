#include <cmath>
#include <sstream>

#include "doctest.h"
#include "vkfem/forms.hpp"
#include "vkfem/quadrature.hpp"
#include "vkfem/study.hpp"

using namespace vkfem;

namespace {

MorleyCoeffs random_field(const TriangulationPtr& mesh, unsigned seed) {
  std::srand(seed);
  MorleyCoeffs f = MorleyCoeffs::zero(MorleySpace::create(mesh));
  f.values.setRandom();
  return f;
}

bool contains(const std::array<Point, 3>& c, const Point& p) {
  auto side = [&](const Point& a, const Point& b) {
    return (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
  };
  return side(c[0], c[1]) > 0 && side(c[1], c[2]) > 0 && side(c[2], c[0]) > 0;
}

}  // namespace

TEST_SUITE("study") {
  TEST_CASE("EOC of geometric sequences") {
    CHECK(eoc({8, 4, 2, 1}) == std::vector<double>{1.0, 1.0, 1.0});
    const double r = 0.3;
    std::vector<double> errors;
    for (int l = 1; l <= 6; ++l) errors.push_back(std::pow(r, l));
    for (double rate : eoc(errors, EocMode::reference)) CHECK(rate == doctest::Approx(-std::log2(r)).epsilon(1e-14));
    for (double rate : eoc(errors, EocMode::successive)) CHECK(rate == doctest::Approx(-std::log2(r)).epsilon(1e-14));
    CHECK_THROWS_AS(eoc({1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(eoc({1.0, -2.0}), std::invalid_argument);
  }

  TEST_CASE("EOC of the published energy columns") {
    const auto square = eoc({16.496069, 12.963642, 8.621491, 4.927900, 2.541191, 1.157459});
    const double expected[] = {0.7666, 0.8714, 0.9657, 1.0450, 1.1345};
    REQUIRE(square.size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(std::abs(square[k] - expected[k]) <= 1e-4);
    const auto lshape = eoc({23.203954, 18.313668, 11.746209, 6.556709, 3.172522});
    CHECK(std::abs(lshape[3] - 1.0473) <= 1e-4);
  }

  TEST_CASE("cross-level errors vanish for identical fields") {
    const MeshHierarchy h(make_square_crisscross(), 3);
    const MorleyCoeffs u = random_field(h.level(3), 1);
    CHECK(energy_error_cross_level(u, u, h) == 0.0);
    CHECK(vertex_max_error(u, u, h) == 0.0);
  }

  TEST_CASE("cross-level energy error matches geometric point location") {
    const MeshHierarchy h(make_lshape(LShapeDiagonal::away_from_corner), 3);
    const MorleyCoeffs coarse = random_field(h.level(1), 2);
    const MorleyCoeffs fine = random_field(h.level(3), 3);
    const Triangulation& cm = *h.level(1);
    const Triangulation& fm = *h.level(3);
    double sum = 0.0;
    for (std::size_t t = 0; t < fm.num_triangles(); ++t) {
      const auto c = fm.corners(static_cast<int>(t));
      const Point g{(c[0].x + c[1].x + c[2].x) / 3, (c[0].y + c[1].y + c[2].y) / 3};
      int parent = -1;
      for (std::size_t s = 0; s < cm.num_triangles() && parent < 0; ++s)
        if (contains(cm.corners(static_cast<int>(s)), g)) parent = static_cast<int>(s);
      REQUIRE(parent >= 0);
      const Hessian d = fine.hessian(static_cast<int>(t)) - coarse.hessian(parent);
      sum += fm.area(static_cast<int>(t)) * frobenius(d, d);
    }
    CHECK(energy_error_cross_level(coarse, fine, h) == doctest::Approx(std::sqrt(sum)).epsilon(1e-13));
  }

  TEST_CASE("vertex error compares values at shared vertices") {
    const MeshHierarchy h(make_square_crisscross(), 2);
    const MorleyCoeffs coarse = random_field(h.level(1), 4);
    MorleyCoeffs fine = MorleyCoeffs::zero(MorleySpace::create(h.level(2)));
    double expected = 0.0;
    for (std::size_t v = 0; v < h.level(1)->num_vertices(); ++v)
      expected = std::max(expected, std::abs(coarse.vertex_value(static_cast<int>(v))));
    CHECK(vertex_max_error(coarse, fine, h) == expected);
  }

  TEST_CASE("fields off the hierarchy are rejected") {
    const MeshHierarchy h(make_square_crisscross(), 2);
    const MorleyCoeffs stray = random_field(std::make_shared<const Triangulation>(make_square_crisscross()), 5);
    const MorleyCoeffs fine = random_field(h.level(2), 6);
    CHECK_THROWS_AS(energy_error_cross_level(stray, fine, h), std::invalid_argument);
    CHECK_THROWS_AS(energy_error_cross_level(fine, random_field(h.level(1), 7), h), std::invalid_argument);
  }

  TEST_CASE("coincidence sets") {
    auto space = MorleySpace::create(std::make_shared<const Triangulation>(red_refine(red_refine(make_square_crisscross()))));
    const MorleyCoeffs zero = MorleyCoeffs::zero(space);
    CHECK(coincidence_set(zero, [](double, double) { return -1.0; }, 0.0).empty());
    const ScalarField chi = [](double x, double y) { return -0.5 * (x * x + y * y); };
    std::size_t prev = 0;
    for (double tol : {0.0, 0.01, 0.05, 0.1, 1.0}) {
      const auto set = coincidence_set(zero, chi, tol);
      CHECK(set.size() >= prev);
      prev = set.size();
    }
    CHECK(prev == 25);  // every interior vertex
    CHECK_THROWS(coincidence_set(zero, chi, -1.0));
  }

  TEST_CASE("Rayleigh quotients of the square bubble") {
    const Domain square;
    const RayleighBounds b = rayleigh_lower_bounds(square_bubble(), square);
    CHECK(std::abs(b.ratio_l2 - 0.0278) <= 5e-4);
    CHECK(std::abs(b.ratio_linf - 0.0683) <= 5e-4);
    // the bubble peaks at the centre with value (1/4)^4
    CHECK(b.linf == doctest::Approx(1.0 / 256));

    SmoothFunction scaled = square_bubble();
    const SmoothFunction w = square_bubble();
    scaled.value = [w](double x, double y) { return 10 * w.value(x, y); };
    scaled.hessian = [w](double x, double y) { return 10.0 * w.hessian(x, y); };
    const RayleighBounds s = rayleigh_lower_bounds(scaled, square);
    CHECK(s.ratio_l2 == doctest::Approx(b.ratio_l2).epsilon(1e-12));
    CHECK(s.ratio_linf == doctest::Approx(b.ratio_linf).epsilon(1e-12));

    SmoothFunction zero;
    zero.value = [](double, double) { return 0.0; };
    zero.hessian = [](double, double) { return Hessian{}; };
    CHECK_THROWS_AS(rayleigh_lower_bounds(zero, square), std::invalid_argument);
  }

  TEST_CASE("smallness bound for the large load") {
    const Triangulation mesh = make_square_crisscross();
    const Problem p = preset_problem("example3");
    // ||f||^2 = (int_{-1/2}^{1/2} (s^2 - 9)^4 ds)^2 by separation, with Gauss-Legendre
    const GaussLegendre g = gauss_legendre(8);
    double line = 0.0;
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const double s = 0.5 * g.points[i];
      line += 0.5 * g.weights[i] * std::pow(s * s - 9.0, 4);
    }
    const double norm_f = line;
    CHECK(l2_norm(p.load.as_field(), mesh, 16) == doctest::Approx(norm_f).epsilon(1e-12));
    const double bound = smallness_bound(p.load.as_field(), 0.0683, 0.0278, mesh, 16);
    CHECK(bound == doctest::Approx(std::sqrt(3.0) * 0.0683 * 0.0278 * norm_f));
    CHECK(std::abs(bound - 20.7972) <= 0.05);
    CHECK(smallness_bound([](double, double) { return 0.0; }, 0.0683, 0.0278, mesh, 16) == 0.0);

    const SmallnessReport r = check_smallness(p, 16, 401);
    CHECK(r.violated);
    CHECK(r.bound >= 20.79);
    CHECK_FALSE(check_smallness(preset_problem("example1"), 16, 401).violated);
  }

  TEST_CASE("small refinement study") {
    StudyOptions options;
    options.threads = 1;
    const StudyRun run = refinement_study(preset_problem("example1"), 4, options);
    const StudyReport& r = run.report;
    CHECK(r.complete);
    CHECK(r.reference_level == 4);
    REQUIRE(r.levels.size() == 4);
    for (const auto& l : r.levels) {
      CHECK(l.status == SolveStatus::converged);
      CHECK(l.has_errors == (l.level < 4));
      if (l.has_errors) {
        CHECK(l.e_u > 0.0);
        CHECK(l.einf_u >= 0.0);
      }
      CHECK(l.eoc_u.has_value() == (l.level <= 2));
      CHECK_FALSE(l.coincidence.empty());
    }
    CHECK(r.at(1).e_u > r.at(3).e_u);
    CHECK_THROWS(refinement_study(preset_problem("example1"), 2, options));

    std::ostringstream csv;
    write_study_csv(csv, r);
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    CHECK(header == "level,h,einf_u,eoc_inf_u,einf_v,eoc_inf_v,e_u,eoc_u,e_v,eoc_v,outer_iters,max_newton_iters,status");
    int rows = 0;
    while (std::getline(lines, row)) ++rows;
    CHECK(rows == 4);
    CHECK(csv.str().find("\n3,0.125000,") != std::string::npos);

    options.threads = 3;
    const StudyRun parallel = refinement_study(preset_problem("example1"), 4, options);
    std::ostringstream csv2;
    write_study_csv(csv2, parallel.report);
    CHECK(csv2.str() == csv.str());
  }

  TEST_CASE("zero obstacle sweep stays feasible") {
    const auto entries = obstacle_scaling_sweep(preset_problem("example1"), {0.0, 1.0}, {2, 3});
    REQUIRE(entries.size() == 4);
    for (const auto& e : entries) {
      CHECK(e.status == SolveStatus::converged);
      CHECK(e.min_gap >= -1e-12);
    }
  }
}

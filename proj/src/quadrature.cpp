#include "vkfem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace vkfem {

namespace {

/// Returns (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least one point");
  GaussLegendre rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  // roots are symmetric; Newton from the classical cosine guesses
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

QuadratureRule QuadratureRule::of_degree(int degree) {
  if (degree < 0) throw std::invalid_argument("negative quadrature degree");
  // Duffy map (s, t) in [0,1]^2 -> (x, y) = (s, t (1 - s)) with Jacobian 1 - s.
  // A degree-d polynomial becomes degree d+1 in s and degree d in t.
  const int ns = (degree + 3) / 2;
  const int nt = (degree + 2) / 2;
  const GaussLegendre gs = gauss_legendre(ns);
  const GaussLegendre gt = gauss_legendre(nt);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < ns; ++i) {
    const double s = 0.5 * (gs.points[i] + 1.0);
    const double ws = 0.5 * gs.weights[i];
    for (int j = 0; j < nt; ++j) {
      const double t = 0.5 * (gt.points[j] + 1.0);
      const double wt = 0.5 * gt.weights[j];
      const double x = s;
      const double y = t * (1.0 - s);
      rule.points.push_back({1.0 - x - y, x, y});
      // reference triangle area is 1/2; normalize weights to sum one
      rule.weights.push_back(2.0 * ws * wt * (1.0 - s));
    }
  }
  return rule;
}

QuadratureRule QuadratureRule::edge_midpoints() {
  QuadratureRule rule;
  rule.degree = 2;
  rule.points = {{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}};
  rule.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return rule;
}

}  // namespace vkfem

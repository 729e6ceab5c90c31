#pragma once

#include <array>
#include <vector>

#include "vkfem/mesh.hpp"

namespace vkfem {

/// Gauss-Legendre rule with n points on [-1, 1].
struct GaussLegendre {
  std::vector<double> points;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

/// Quadrature rule on a triangle in barycentric coordinates. Weights sum to
/// one; multiply by the triangle area on application.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }

  /// Collapsed (Duffy) Gauss product rule exact for total degree `degree`.
  static QuadratureRule of_degree(int degree);
  /// Three edge midpoints, weight 1/3 each; exact for quadratics.
  static QuadratureRule edge_midpoints();
};

inline Point map_barycentric(const std::array<Point, 3>& c, const std::array<double, 3>& b) {
  return {b[0] * c[0].x + b[1] * c[1].x + b[2] * c[2].x,
          b[0] * c[0].y + b[1] * c[1].y + b[2] * c[2].y};
}

}  // namespace vkfem

#include "vkfem/forms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "vkfem/quadrature.hpp"

namespace vkfem {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(int n, const std::vector<Triplet>& triplets) {
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SparseMatrix assemble_stiffness(const MorleySpace& space) {
  std::vector<Triplet> triplets;
  triplets.reserve(space.num_elements() * 36);
  for (std::size_t t = 0; t < space.num_elements(); ++t) {
    const MorleyElement& el = space.element(static_cast<int>(t));
    for (int i = 0; i < 6; ++i) {
      if (el.dofs[i] < 0) continue;
      for (int j = 0; j < 6; ++j) {
        if (el.dofs[j] < 0) continue;
        triplets.emplace_back(el.dofs[i], el.dofs[j],
                              el.area * frobenius(el.hessians[i], el.hessians[j]));
      }
    }
  }
  return from_triplets(space.n_dofs(), triplets);
}

Eigen::VectorXd assemble_load(const MorleySpace& space, const ScalarField& f, int quad_degree) {
  if (quad_degree < 2) throw std::invalid_argument("load quadrature degree must be at least 2");
  const QuadratureRule rule = QuadratureRule::of_degree(quad_degree);
  const Triangulation& mesh = space.mesh();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.n_dofs());
  std::vector<Point> points(rule.size());
  std::vector<double> fw(rule.size());
  for (std::size_t t = 0; t < space.num_elements(); ++t) {
    const MorleyElement& el = space.element(static_cast<int>(t));
    const auto corners = mesh.corners(static_cast<int>(t));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      points[q] = map_barycentric(corners, rule.points[q]);
      fw[q] = el.area * rule.weights[q] * f(points[q].x, points[q].y);
    }
    for (int k = 0; k < 6; ++k) {
      if (el.dofs[k] < 0) continue;
      double s = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) s += fw[q] * el.shapes[k].value(points[q]);
      load[el.dofs[k]] += s;
    }
  }
  return load;
}

double trilinear(const MorleyCoeffs& eta, const MorleyCoeffs& w, const MorleyCoeffs& phi) {
  require_same_space(eta, w);
  require_same_space(eta, phi);
  double sum = 0.0;
  for (std::size_t t = 0; t < eta.space->num_elements(); ++t) {
    const int ti = static_cast<int>(t);
    sum += vk_bracket(eta.hessian(ti), w.hessian(ti)) * phi.integral(ti);
  }
  return -0.5 * sum;
}

SparseMatrix trilinear_matrix(const MorleyCoeffs& frozen, FrozenSlot slot) {
  const MorleySpace& space = *frozen.space;
  std::vector<Triplet> triplets;
  triplets.reserve(space.num_elements() * 36);
  for (std::size_t t = 0; t < space.num_elements(); ++t) {
    const int ti = static_cast<int>(t);
    const MorleyElement& el = space.element(ti);
    if (slot == FrozenSlot::third) {
      const double weight = -0.5 * frozen.integral(ti);
      for (int i = 0; i < 6; ++i) {
        if (el.dofs[i] < 0) continue;
        for (int j = 0; j < 6; ++j) {
          if (el.dofs[j] < 0) continue;
          triplets.emplace_back(el.dofs[i], el.dofs[j],
                                weight * vk_bracket(el.hessians[i], el.hessians[j]));
        }
      }
    } else {
      const Hessian hz = frozen.hessian(ti);
      for (int i = 0; i < 6; ++i) {
        if (el.dofs[i] < 0) continue;
        for (int j = 0; j < 6; ++j) {
          if (el.dofs[j] < 0) continue;
          triplets.emplace_back(el.dofs[i], el.dofs[j],
                                -0.5 * vk_bracket(hz, el.hessians[j]) * el.integrals[i]);
        }
      }
    }
  }
  return from_triplets(space.n_dofs(), triplets);
}

Eigen::VectorXd trilinear_vector(const MorleyCoeffs& x, const MorleyCoeffs& y, FreeSlot slot) {
  require_same_space(x, y);
  const MorleySpace& space = *x.space;
  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.n_dofs());
  for (std::size_t t = 0; t < space.num_elements(); ++t) {
    const int ti = static_cast<int>(t);
    const MorleyElement& el = space.element(ti);
    const Hessian hx = x.hessian(ti);
    if (slot == FreeSlot::second) {
      const double weight = -0.5 * y.integral(ti);
      for (int k = 0; k < 6; ++k) {
        if (el.dofs[k] >= 0) r[el.dofs[k]] += weight * vk_bracket(hx, el.hessians[k]);
      }
    } else {
      const double bracket = -0.5 * vk_bracket(hx, y.hessian(ti));
      for (int k = 0; k < 6; ++k) {
        if (el.dofs[k] >= 0) r[el.dofs[k]] += bracket * el.integrals[k];
      }
    }
  }
  return r;
}

double integrate(const ScalarField& f, const Triangulation& mesh, int quad_degree) {
  const QuadratureRule rule = QuadratureRule::of_degree(quad_degree);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto corners = mesh.corners(static_cast<int>(t));
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point p = map_barycentric(corners, rule.points[q]);
      s += rule.weights[q] * f(p.x, p.y);
    }
    sum += mesh.area(static_cast<int>(t)) * s;
  }
  return sum;
}

double l2_norm(const ScalarField& f, const Triangulation& mesh, int quad_degree) {
  return std::sqrt(integrate(
      [&f](double x, double y) {
        const double v = f(x, y);
        return v * v;
      },
      mesh, quad_degree));
}

void write_matrix(std::ostream& out, const SparseMatrix& m) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  entries.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  }
  std::sort(entries.begin(), entries.end());
  char buf[80];
  for (const auto& [r, c, v] : entries) {
    std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(r), static_cast<long>(c), v);
    out << buf;
  }
}

}  // namespace vkfem

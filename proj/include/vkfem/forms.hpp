#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <iosfwd>

#include "vkfem/mesh.hpp"
#include "vkfem/morley.hpp"

namespace vkfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(double, double)>;

constexpr int kDefaultQuadDegree = 12;

/// a_pw(phi_j, phi_i) = sum_T |T| D^2 phi_j : D^2 phi_i.
SparseMatrix assemble_stiffness(const MorleySpace& space);

/// F_i = (f, phi_i) with a quadrature rule of the given degree.
Eigen::VectorXd assemble_load(const MorleySpace& space, const ScalarField& f, int quad_degree);

/// von Karman bracket of two constant Hessians.
inline double vk_bracket(const Hessian& a, const Hessian& b) {
  return a.xx * b.yy + a.yy * b.xx - 2.0 * a.xy * b.xy;
}

/// b_pw(eta, w, phi) = -1/2 sum_T [eta, w]_T * integral_T phi.
double trilinear(const MorleyCoeffs& eta, const MorleyCoeffs& w, const MorleyCoeffs& phi);

enum class FrozenSlot { first, third };

/// slot = first:  M_ij = b_pw(frozen, phi_j, phi_i)
/// slot = third:  M_ij = b_pw(phi_i, phi_j, frozen)   (symmetric)
SparseMatrix trilinear_matrix(const MorleyCoeffs& frozen, FrozenSlot slot);

enum class FreeSlot { second, third };

/// slot = second: r_i = b_pw(x, phi_i, y)
/// slot = third:  r_i = b_pw(x, y, phi_i)
Eigen::VectorXd trilinear_vector(const MorleyCoeffs& x, const MorleyCoeffs& y, FreeSlot slot);

double integrate(const ScalarField& f, const Triangulation& mesh, int quad_degree);
double l2_norm(const ScalarField& f, const Triangulation& mesh, int quad_degree);

/// Sorted `row col value` lines with 17 significant digits.
void write_matrix(std::ostream& out, const SparseMatrix& m);

}  // namespace vkfem

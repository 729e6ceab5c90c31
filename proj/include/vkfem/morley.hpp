#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vkfem/mesh.hpp"

namespace vkfem {

struct Gradient {
  double x = 0.0;
  double y = 0.0;
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Hessian {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Hessian& operator+=(const Hessian& o) {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
  friend Hessian operator-(const Hessian& a, const Hessian& b) {
    return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
  }
  friend Hessian operator*(double s, const Hessian& h) { return {s * h.xx, s * h.xy, s * h.yy}; }
};

/// Frobenius inner product H1 : H2.
inline double frobenius(const Hessian& a, const Hessian& b) {
  return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy;
}

/// Quadratic polynomial c0 + c1 dx + c2 dy + c3 dx^2 + c4 dx dy + c5 dy^2 with
/// (dx, dy) = (x, y) - origin. The origin is the triangle centroid, which keeps
/// the coefficients well scaled on small triangles.
struct LocalQuadratic {
  Point origin;
  std::array<double, 6> coeffs{};

  double value(const Point& p) const;
  Gradient gradient(const Point& p) const;
  Hessian hessian() const { return {2.0 * coeffs[3], coeffs[4], 2.0 * coeffs[5]}; }
};

/// Global numbering of Morley degrees of freedom: interior vertices first,
/// then interior edges. Boundary vertices and edges carry no DOF.
class DofMap {
 public:
  explicit DofMap(const Triangulation& mesh);

  int n_dofs() const { return n_dofs_; }
  int n_vertex_dofs() const { return n_vertex_dofs_; }
  /// -1 for boundary vertices.
  int vertex_dof(int v) const { return vertex_dof_[v]; }
  /// -1 for boundary edges.
  int edge_dof(int e) const { return edge_dof_[e]; }
  bool is_vertex_dof(int dof) const { return dof < n_vertex_dofs_; }
  /// Mesh vertex of a vertex DOF.
  int dof_vertex(int dof) const { return dof_vertex_[dof]; }
  /// Mesh edge of an edge DOF.
  int dof_edge(int dof) const { return dof_edge_[dof - n_vertex_dofs_]; }

 private:
  int n_dofs_ = 0;
  int n_vertex_dofs_ = 0;
  std::vector<int> vertex_dof_;
  std::vector<int> edge_dof_;
  std::vector<int> dof_vertex_;
  std::vector<int> dof_edge_;
};

DofMap build_dof_map(const Triangulation& mesh);

/// The six shape functions of triangle t: 0..2 are dual to the vertex values,
/// 3..5 to the edge-mean normal derivatives of local edges 0..2 taken along
/// the canonical (global) edge normal.
std::array<LocalQuadratic, 6> local_basis(const Triangulation& mesh, int t);

/// Precomputed per-triangle data of the Morley space.
struct MorleyElement {
  std::array<LocalQuadratic, 6> shapes;
  std::array<int, 6> dofs{};  // -1 where the local DOF is a boundary DOF
  std::array<Hessian, 6> hessians;
  std::array<double, 6> integrals{};  // integral of each shape over T
  double area = 0.0;
};

class MorleySpace {
 public:
  static std::shared_ptr<const MorleySpace> create(TriangulationPtr mesh);

  const Triangulation& mesh() const { return *mesh_; }
  const TriangulationPtr& mesh_ptr() const { return mesh_; }
  const DofMap& dof_map() const { return dof_map_; }
  int n_dofs() const { return dof_map_.n_dofs(); }
  const MorleyElement& element(int t) const { return elements_[t]; }
  std::size_t num_elements() const { return elements_.size(); }

 private:
  explicit MorleySpace(TriangulationPtr mesh);

  TriangulationPtr mesh_;
  DofMap dof_map_;
  std::vector<MorleyElement> elements_;
};

using MorleySpacePtr = std::shared_ptr<const MorleySpace>;

/// One discrete field in M(T).
struct MorleyCoeffs {
  MorleySpacePtr space;
  Eigen::VectorXd values;

  static MorleyCoeffs zero(MorleySpacePtr space);

  /// Constant Hessian of the restriction to triangle t.
  Hessian hessian(int t) const;
  /// Value at mesh vertex v (zero on the boundary).
  double vertex_value(int v) const;
  double integral(int t) const;
  LocalQuadratic restriction(int t) const;
};

/// Throws std::invalid_argument when the fields live on different spaces.
void require_same_space(const MorleyCoeffs& a, const MorleyCoeffs& b);

/// Point evaluation on triangle t; `p` must lie in the closed triangle up to a
/// barycentric tolerance of 1e-10.
double evaluate_value(const MorleyCoeffs& field, int t, const Point& p);
Gradient evaluate_gradient(const MorleyCoeffs& field, int t, const Point& p);
Hessian evaluate_hessian(const MorleyCoeffs& field, int t, const Point& p);

struct SmoothFunction {
  std::function<double(double, double)> value;
  std::function<Gradient(double, double)> gradient;
  std::function<Hessian(double, double)> hessian;  // optional
};

/// Morley interpolation: vertex values and edge means of the normal derivative
/// (3-point Gauss-Legendre). Boundary DOFs are dropped.
MorleyCoeffs interpolate(const MorleySpacePtr& space, const SmoothFunction& w);

/// Piecewise energy norm sqrt(sum_T |T| |H_T|_F^2).
double energy_norm_pw(const MorleyCoeffs& field);

/// `vkfem-field 1` text format, one `index value` line per DOF.
void write_field(std::ostream& out, const MorleyCoeffs& field);
Eigen::VectorXd read_field(std::istream& in);

}  // namespace vkfem

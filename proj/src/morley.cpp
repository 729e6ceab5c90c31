#include "vkfem/morley.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "vkfem/errors.hpp"
#include "vkfem/quadrature.hpp"

namespace vkfem {

double LocalQuadratic::value(const Point& p) const {
  const double dx = p.x - origin.x;
  const double dy = p.y - origin.y;
  const auto& c = coeffs;
  return c[0] + c[1] * dx + c[2] * dy + c[3] * dx * dx + c[4] * dx * dy + c[5] * dy * dy;
}

Gradient LocalQuadratic::gradient(const Point& p) const {
  const double dx = p.x - origin.x;
  const double dy = p.y - origin.y;
  const auto& c = coeffs;
  return {c[1] + 2.0 * c[3] * dx + c[4] * dy, c[2] + c[4] * dx + 2.0 * c[5] * dy};
}

DofMap::DofMap(const Triangulation& mesh)
    : vertex_dof_(mesh.num_vertices(), -1), edge_dof_(mesh.num_edges(), -1) {
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.is_boundary_vertex(static_cast<int>(v))) {
      vertex_dof_[v] = n_dofs_++;
      dof_vertex_.push_back(static_cast<int>(v));
    }
  }
  n_vertex_dofs_ = n_dofs_;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary_edge(static_cast<int>(e))) {
      edge_dof_[e] = n_dofs_++;
      dof_edge_.push_back(static_cast<int>(e));
    }
  }
}

DofMap build_dof_map(const Triangulation& mesh) { return DofMap(mesh); }

std::array<LocalQuadratic, 6> local_basis(const Triangulation& mesh, int t) {
  const auto c = mesh.corners(t);
  const double h = mesh.diameter(t);
  if (mesh.area(t) < 1e-14 * h * h) throw std::invalid_argument("degenerate triangle");

  const Point origin{(c[0].x + c[1].x + c[2].x) / 3.0, (c[0].y + c[1].y + c[2].y) / 3.0};
  // Work in scaled coordinates (xi, eta) = (x - origin) / h.
  Eigen::Matrix<double, 6, 6> dof_matrix;
  for (int i = 0; i < 3; ++i) {
    const double xi = (c[i].x - origin.x) / h;
    const double eta = (c[i].y - origin.y) / h;
    dof_matrix.row(i) << 1.0, xi, eta, xi * xi, xi * eta, eta * eta;
  }
  const auto& te = mesh.triangle_edges()[t];
  for (int e = 0; e < 3; ++e) {
    const Point m = midpoint(c[(e + 1) % 3], c[(e + 2) % 3]);
    const Point n = mesh.edge_normal(te[e]);
    const double xi = (m.x - origin.x) / h;
    const double eta = (m.y - origin.y) / h;
    // The gradient of a quadratic is affine, so its edge mean is the midpoint
    // value; the 1/h factor converts scaled derivatives to physical ones.
    dof_matrix.row(3 + e) << 0.0, n.x / h, n.y / h, 2.0 * xi * n.x / h,
        (eta * n.x + xi * n.y) / h, 2.0 * eta * n.y / h;
  }
  const Eigen::Matrix<double, 6, 6> coeffs = dof_matrix.fullPivLu().inverse();

  const double scale[6] = {1.0, 1.0 / h, 1.0 / h, 1.0 / (h * h), 1.0 / (h * h), 1.0 / (h * h)};
  std::array<LocalQuadratic, 6> basis;
  for (int k = 0; k < 6; ++k) {
    basis[k].origin = origin;
    for (int j = 0; j < 6; ++j) basis[k].coeffs[j] = coeffs(j, k) * scale[j];
  }
  return basis;
}

std::shared_ptr<const MorleySpace> MorleySpace::create(TriangulationPtr mesh) {
  if (!mesh) throw std::invalid_argument("null mesh");
  return std::shared_ptr<const MorleySpace>(new MorleySpace(std::move(mesh)));
}

MorleySpace::MorleySpace(TriangulationPtr mesh) : mesh_(std::move(mesh)), dof_map_(*mesh_) {
  const Triangulation& m = *mesh_;
  elements_.resize(m.num_triangles());
  for (std::size_t ti = 0; ti < m.num_triangles(); ++ti) {
    const int t = static_cast<int>(ti);
    MorleyElement& el = elements_[ti];
    el.shapes = local_basis(m, t);
    el.area = m.area(t);
    const auto& tri = m.triangles()[ti];
    const auto& te = m.triangle_edges()[ti];
    for (int k = 0; k < 3; ++k) {
      el.dofs[k] = dof_map_.vertex_dof(tri[k]);
      el.dofs[3 + k] = dof_map_.edge_dof(te[k]);
    }
    const auto c = m.corners(t);
    const std::array<Point, 3> mids{midpoint(c[1], c[2]), midpoint(c[2], c[0]),
                                    midpoint(c[0], c[1])};
    for (int k = 0; k < 6; ++k) {
      el.hessians[k] = el.shapes[k].hessian();
      el.integrals[k] = el.area / 3.0 *
                        (el.shapes[k].value(mids[0]) + el.shapes[k].value(mids[1]) +
                         el.shapes[k].value(mids[2]));
    }
  }
}

MorleyCoeffs MorleyCoeffs::zero(MorleySpacePtr space) {
  const int n = space->n_dofs();
  return {std::move(space), Eigen::VectorXd::Zero(n)};
}

Hessian MorleyCoeffs::hessian(int t) const {
  const MorleyElement& el = space->element(t);
  Hessian h;
  for (int k = 0; k < 6; ++k) {
    if (el.dofs[k] >= 0) h += values[el.dofs[k]] * el.hessians[k];
  }
  return h;
}

double MorleyCoeffs::vertex_value(int v) const {
  const int dof = space->dof_map().vertex_dof(v);
  return dof < 0 ? 0.0 : values[dof];
}

double MorleyCoeffs::integral(int t) const {
  const MorleyElement& el = space->element(t);
  double s = 0.0;
  for (int k = 0; k < 6; ++k) {
    if (el.dofs[k] >= 0) s += values[el.dofs[k]] * el.integrals[k];
  }
  return s;
}

LocalQuadratic MorleyCoeffs::restriction(int t) const {
  const MorleyElement& el = space->element(t);
  LocalQuadratic q;
  q.origin = el.shapes[0].origin;
  for (int k = 0; k < 6; ++k) {
    if (el.dofs[k] < 0) continue;
    const double a = values[el.dofs[k]];
    for (int j = 0; j < 6; ++j) q.coeffs[j] += a * el.shapes[k].coeffs[j];
  }
  return q;
}

void require_same_space(const MorleyCoeffs& a, const MorleyCoeffs& b) {
  if (!a.space || a.space != b.space)
    throw std::invalid_argument("fields are defined on different Morley spaces");
}

namespace {

void require_inside(const MorleyCoeffs& field, int t, const Point& p) {
  const auto c = field.space->mesh().corners(t);
  const double det = (c[1].x - c[0].x) * (c[2].y - c[0].y) - (c[2].x - c[0].x) * (c[1].y - c[0].y);
  const double l1 = ((p.x - c[0].x) * (c[2].y - c[0].y) - (c[2].x - c[0].x) * (p.y - c[0].y)) / det;
  const double l2 = ((c[1].x - c[0].x) * (p.y - c[0].y) - (p.x - c[0].x) * (c[1].y - c[0].y)) / det;
  const double l0 = 1.0 - l1 - l2;
  constexpr double tol = 1e-10;
  if (l0 < -tol || l1 < -tol || l2 < -tol)
    throw std::invalid_argument("evaluation point outside triangle " + std::to_string(t));
}

}  // namespace

double evaluate_value(const MorleyCoeffs& field, int t, const Point& p) {
  require_inside(field, t, p);
  return field.restriction(t).value(p);
}

Gradient evaluate_gradient(const MorleyCoeffs& field, int t, const Point& p) {
  require_inside(field, t, p);
  return field.restriction(t).gradient(p);
}

Hessian evaluate_hessian(const MorleyCoeffs& field, int t, const Point& p) {
  require_inside(field, t, p);
  return field.hessian(t);
}

MorleyCoeffs interpolate(const MorleySpacePtr& space, const SmoothFunction& w) {
  MorleyCoeffs out = MorleyCoeffs::zero(space);
  const Triangulation& mesh = space->mesh();
  const DofMap& dofs = space->dof_map();
  for (int d = 0; d < dofs.n_vertex_dofs(); ++d) {
    const Point& p = mesh.vertices()[dofs.dof_vertex(d)];
    out.values[d] = w.value(p.x, p.y);
  }
  if (dofs.n_dofs() > dofs.n_vertex_dofs() && !w.gradient)
    throw std::invalid_argument("interpolation needs the gradient of the function");
  const GaussLegendre gl = gauss_legendre(3);
  for (int d = dofs.n_vertex_dofs(); d < dofs.n_dofs(); ++d) {
    const int e = dofs.dof_edge(d);
    const Point& a = mesh.vertices()[mesh.edges()[e][0]];
    const Point& b = mesh.vertices()[mesh.edges()[e][1]];
    const Point n = mesh.edge_normal(e);
    double mean = 0.0;
    for (std::size_t q = 0; q < gl.points.size(); ++q) {
      const double s = 0.5 * (gl.points[q] + 1.0);
      const Gradient g = w.gradient(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
      mean += 0.5 * gl.weights[q] * (g.x * n.x + g.y * n.y);
    }
    out.values[d] = mean;
  }
  return out;
}

double energy_norm_pw(const MorleyCoeffs& field) {
  double sum = 0.0;
  for (std::size_t t = 0; t < field.space->num_elements(); ++t) {
    const Hessian h = field.hessian(static_cast<int>(t));
    sum += field.space->element(static_cast<int>(t)).area * frobenius(h, h);
  }
  return std::sqrt(sum);
}

void write_field(std::ostream& out, const MorleyCoeffs& field) {
  out << "vkfem-field 1\n";
  char buf[64];
  for (Eigen::Index i = 0; i < field.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%ld %.17g\n", static_cast<long>(i), field.values[i]);
    out << buf;
  }
}

Eigen::VectorXd read_field(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "vkfem-field" || version != 1)
    throw ParseError("field file: expected header 'vkfem-field 1'");
  std::vector<double> values;
  long index = 0;
  double v = 0.0;
  while (in >> index >> v) {
    if (index != static_cast<long>(values.size()))
      throw ParseError("field file: DOF indices must be consecutive from 0");
    values.push_back(v);
  }
  if (!in.eof()) throw ParseError("field file: malformed line");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace vkfem

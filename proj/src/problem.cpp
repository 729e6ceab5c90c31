#include "vkfem/problem.hpp"

#include <algorithm>
#include <memory>
#include <mutex>

#include "vkfem/errors.hpp"

namespace vkfem {

Triangulation Domain::initial_mesh() const {
  switch (kind) {
    case DomainKind::square:
      return make_square_crisscross(0.5);
    case DomainKind::lshape:
      return make_lshape(lshape_diagonal);
    case DomainKind::file:
      return read_mesh_file(mesh_file);
  }
  throw std::logic_error("unhandled domain kind");
}

bool Domain::contains(double x, double y) const {
  constexpr double eps = 1e-14;
  const bool in_square = x >= -0.5 - eps && x <= 0.5 + eps && y >= -0.5 - eps && y <= 0.5 + eps;
  switch (kind) {
    case DomainKind::square:
      return in_square;
    case DomainKind::lshape:
      return in_square && !(x > eps && y > eps);
    case DomainKind::file: {
      // loaded once per domain object
      static std::mutex mutex;
      static std::string cached_path;
      static std::shared_ptr<const Triangulation> cached;
      std::shared_ptr<const Triangulation> mesh;
      {
        std::lock_guard lock(mutex);
        if (!cached || cached_path != mesh_file) {
          cached = std::make_shared<const Triangulation>(read_mesh_file(mesh_file));
          cached_path = mesh_file;
        }
        mesh = cached;
      }
      for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
        const auto c = mesh->corners(static_cast<int>(t));
        auto side = [&](const Point& a, const Point& b) {
          return (b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y);
        };
        if (side(c[0], c[1]) >= -eps && side(c[1], c[2]) >= -eps && side(c[2], c[0]) >= -eps)
          return true;
      }
      return false;
    }
  }
  return false;
}

std::string Domain::name() const {
  switch (kind) {
    case DomainKind::square:
      return "square";
    case DomainKind::lshape:
      return "lshape";
    case DomainKind::file:
      return mesh_file;
  }
  return "?";
}

Domain parse_domain(const std::string& name) {
  Domain d;
  if (name == "square") {
    d.kind = DomainKind::square;
  } else if (name == "lshape") {
    d.kind = DomainKind::lshape;
  } else if (!name.empty()) {
    d.kind = DomainKind::file;
    d.mesh_file = name;
  } else {
    throw ParseError("empty domain name");
  }
  return d;
}

Problem preset_problem(const std::string& name, LShapeDiagonal diagonal) {
  // |x|^2 is the squared Euclidean norm x^2 + y^2.
  static const char* kExample1Obstacle = "1 - 5*(x^2 + y^2) + (x^2 + y^2)^2";
  static const char* kExample2Obstacle = "1 - 5*(x^2 + y^2) - (x^2 + y^2)^2";
  static const char* kExample3Load = "(x+3)^2*(x-3)^2*(y+3)^2*(y-3)^2";
  static const char* kLShapeObstacle = "1 - (x+0.25)^2/0.2^2 - y^2/0.35^2";

  Problem p;
  p.name = name;
  if (name == "example1") {
    p.obstacle = Expression::parse(kExample1Obstacle);
  } else if (name == "example2") {
    p.obstacle = Expression::parse(kExample2Obstacle);
  } else if (name == "example3") {
    p.obstacle = Expression::parse(kExample1Obstacle);
    p.load = Expression::parse(kExample3Load);
  } else if (name == "lshape") {
    p.domain.kind = DomainKind::lshape;
    p.domain.lshape_diagonal = diagonal;
    p.obstacle = Expression::parse(kLShapeObstacle);
  } else {
    throw ParseError("unknown problem preset '" + name + "'");
  }
  return p;
}

std::vector<std::string> preset_names() { return {"example1", "example2", "example3", "lshape"}; }

int default_load_quad_degree(const Expression& f) {
  const int d = f.polynomial_degree();
  return d < 0 ? kDefaultQuadDegree : std::max(kDefaultQuadDegree, d + 2);
}

int default_l2_quad_degree(const Expression& f) {
  const int d = f.polynomial_degree();
  return d < 0 ? kDefaultQuadDegree : std::max(kDefaultQuadDegree, 2 * d);
}

ProblemSpec make_spec(const Problem& problem, MorleySpacePtr space, const SolverOptions& options) {
  ProblemSpec spec;
  spec.space = std::move(space);
  const ScalarField chi = problem.obstacle.as_field();
  const double scale = options.obstacle_scale;
  spec.obstacle = scale == 1.0 ? chi : ScalarField([chi, scale](double x, double y) {
    return scale * chi(x, y);
  });
  if (!problem.load.is_zero()) spec.load = problem.load.as_field();
  spec.tol_newton = options.tol_newton;
  spec.tol_pdas = options.tol_pdas;
  spec.max_pdas = options.max_pdas;
  spec.max_newton = options.max_newton;
  spec.quad_degree = options.quad_degree.value_or(default_load_quad_degree(problem.load));
  spec.convention = options.convention;
  spec.warm_start_beta = options.warm_start_beta;
  spec.detect_cycles = options.detect_cycles;
  return spec;
}

}  // namespace vkfem

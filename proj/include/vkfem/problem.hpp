#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vkfem/expression.hpp"
#include "vkfem/mesh.hpp"
#include "vkfem/vi_solver.hpp"

namespace vkfem {

enum class DomainKind { square, lshape, file };

struct Domain {
  DomainKind kind = DomainKind::square;
  LShapeDiagonal lshape_diagonal = LShapeDiagonal::parallel;
  std::string mesh_file;  // DomainKind::file

  /// Level-0 triangulation.
  Triangulation initial_mesh() const;
  /// Closed-domain membership; for file domains, a point-in-mesh test.
  bool contains(double x, double y) const;
  std::string name() const;
};

Domain parse_domain(const std::string& name);

/// A von Karman obstacle problem: domain, obstacle chi and load f.
struct Problem {
  std::string name;
  Domain domain;
  Expression obstacle = Expression::parse("0");
  Expression load = Expression::parse("0");
};

/// example1 | example2 | example3 | lshape.
Problem preset_problem(const std::string& name,
                       LShapeDiagonal diagonal = LShapeDiagonal::parallel);
std::vector<std::string> preset_names();

/// Quadrature degree for loads: max(12, deg f + 2) for polynomial f.
int default_load_quad_degree(const Expression& f);
/// Quadrature degree for the L2 norm of f: max(12, 2 deg f).
int default_l2_quad_degree(const Expression& f);

struct SolverOptions {
  double tol_newton = 1e-7;
  double tol_pdas = 1e-7;
  int max_pdas = 100;
  int max_newton = 50;
  std::optional<int> quad_degree;
  ActiveSetConvention convention = ActiveSetConvention::complementary;
  bool warm_start_beta = false;
  bool detect_cycles = true;
  /// Multiplies the obstacle (scaling sweeps).
  double obstacle_scale = 1.0;
};

ProblemSpec make_spec(const Problem& problem, MorleySpacePtr space, const SolverOptions& options);

}  // namespace vkfem

#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "vkfem/forms.hpp"
#include "vkfem/morley.hpp"

namespace vkfem {

/// Membership rule for the primal-dual active set update.
///   paper:         Ac = { p : lambda(p) + chi(p) - u(p) <= 0 }
///   complementary: Ac = { p : lambda(p) + chi(p) - u(p) >  0 }
enum class ActiveSetConvention { paper, complementary };

ActiveSetConvention parse_active_set_convention(const std::string& name);
std::string to_string(ActiveSetConvention c);

enum class SolveStatus { converged, active_set_cycle, max_iterations };

std::string to_string(SolveStatus s);

struct ProblemSpec {
  MorleySpacePtr space;
  ScalarField obstacle;
  ScalarField load;  // empty means f = 0
  double tol_newton = 1e-7;
  double tol_pdas = 1e-7;
  int max_pdas = 100;
  int max_newton = 50;
  int quad_degree = kDefaultQuadDegree;
  ActiveSetConvention convention = ActiveSetConvention::complementary;
  /// Carry beta from the previous outer step into the next Newton start.
  bool warm_start_beta = false;
  /// Stop with active_set_cycle when an active set recurs without progress.
  bool detect_cycles = true;
};

/// Throws std::invalid_argument on missing data or non-positive tolerances.
/// Returns a warning message (empty if none) when max chi on the boundary
/// vertices is not negative.
std::string validate(const ProblemSpec& spec);

/// Assembled data shared by every linear and Newton solve of one problem.
struct DiscreteProblem {
  MorleySpacePtr space;
  SparseMatrix stiffness;
  Eigen::VectorXd load;
  Eigen::VectorXd obstacle;  // chi at the vertex DOFs

  static DiscreteProblem assemble(const ProblemSpec& spec);

  int n_dofs() const { return space->n_dofs(); }
  int n_vertex_dofs() const { return space->dof_map().n_vertex_dofs(); }
};

struct ActiveSets {
  std::vector<int> active;    // vertex DOF indices, ascending
  std::vector<int> inactive;  // vertex DOF indices, ascending
};

/// Active/inactive split of the interior vertices from the previous iterate.
ActiveSets pdas_active_sets(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& lambda_prev,
                            const Eigen::VectorXd& obstacle, ActiveSetConvention convention);
ActiveSets pdas_active_sets(const MorleyCoeffs& u_prev, const MorleyCoeffs& lambda_prev,
                            const ScalarField& obstacle, ActiveSetConvention convention);

/// The von Karman residual G(S) = 0 for a fixed active set.
///
/// Unknowns S = (alpha on free DOFs, lambda on active vertices, beta), with
/// free DOFs = inactive vertices plus all interior edges, and equations
///   R_u = A alpha + 2 N(alpha, beta) - F - P lambda,  N_i = b_pw(u, phi_i, v)
///   R_v = A beta - Q(alpha),                          Q_i = b_pw(u, u, phi_i)
/// where alpha equals chi on the active vertices.
class ReducedSystem {
 public:
  ReducedSystem(const DiscreteProblem& problem, std::vector<int> active_dofs);

  int size() const { return 2 * n_; }
  const std::vector<int>& active_dofs() const { return active_; }
  const std::vector<int>& free_dofs() const { return free_; }

  Eigen::VectorXd pack(const Eigen::VectorXd& alpha, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& beta) const;
  /// Full-length alpha (chi on active DOFs), lambda (zero off the active set), beta.
  void unpack(const Eigen::VectorXd& s, Eigen::VectorXd& alpha, Eigen::VectorXd& lambda,
              Eigen::VectorXd& beta) const;

  Eigen::VectorXd residual(const Eigen::VectorXd& s) const;
  SparseMatrix jacobian(const Eigen::VectorXd& s) const;

 private:
  const DiscreteProblem* problem_;
  int n_ = 0;
  std::vector<int> active_;
  std::vector<int> free_;
  std::vector<int> alpha_column_;   // DOF -> column of S, -1 when fixed
  std::vector<int> lambda_column_;  // DOF -> column of S, -1 when inactive
};

struct NewtonResult {
  Eigen::VectorXd alpha;
  Eigen::VectorXd lambda;
  Eigen::VectorXd beta;
  int iterations = 0;
  std::vector<double> step_norms;  // ||Delta S||_2 per iteration
  bool converged = false;
  /// Stopped on a singular Jacobian or a non-finite residual or step.
  bool breakdown = false;
};

/// Newton's method on G(S) = 0 with sparse LU solves, stopping once
/// ||Delta S||_2 <= tol. A breakdown returns the last finite iterate.
NewtonResult newton_solve(const DiscreteProblem& problem, const std::vector<int>& active_dofs,
                          const Eigen::VectorXd& alpha_start, const Eigen::VectorXd& lambda_start,
                          const Eigen::VectorXd& beta_start, double tol, int max_iterations);

enum class SolvePhase { biharmonic, von_karman };

struct OuterIteration {
  SolvePhase phase = SolvePhase::biharmonic;
  int m = 0;
  std::size_t active_size = 0;
  int newton_iterations = 0;
  std::vector<double> newton_steps;
  bool newton_converged = true;
  double err = 0.0;
};

struct SolveResult {
  MorleyCoeffs u;
  MorleyCoeffs v;
  MorleyCoeffs lambda;  // supported on active vertex DOFs
  std::vector<int> active_set;  // mesh vertex indices, ascending
  std::vector<OuterIteration> history;
  SolveStatus status = SolveStatus::max_iterations;
  SolveStatus warm_start_status = SolveStatus::max_iterations;
  std::string lambda_convention = "lambda = A*alpha + 2*N(alpha,beta) - F on active vertices";

  /// Outer iterations of the given phase.
  int outer_iterations(SolvePhase phase) const;
  int max_newton_iterations() const;
};

/// Biharmonic obstacle problem (no trilinear term) by primal-dual active sets
/// with linear solves.
SolveResult solve_biharmonic_obstacle(const ProblemSpec& spec);
SolveResult solve_biharmonic_obstacle(const ProblemSpec& spec, const DiscreteProblem& problem);

/// Biharmonic warm start followed by the outer active-set loop with inner
/// Newton solves.
SolveResult solve(const ProblemSpec& spec);

/// Plain Newton on the discrete von Karman equations without obstacle, from
/// zero initial data.
NewtonResult solve_unconstrained(const ProblemSpec& spec);

/// One line per outer iteration: `m |Ac| newton_iters err`.
void write_iteration_log(std::ostream& out, const SolveResult& result);
/// JSON-lines variant with the phase and the Newton step norms.
void write_iteration_jsonl(std::ostream& out, const SolveResult& result);

}  // namespace vkfem

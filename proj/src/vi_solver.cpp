#include "vkfem/vi_solver.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vkfem/errors.hpp"

namespace vkfem {

ActiveSetConvention parse_active_set_convention(const std::string& name) {
  if (name == "paper") return ActiveSetConvention::paper;
  if (name == "complementary") return ActiveSetConvention::complementary;
  throw ParseError("unknown active_set_convention '" + name + "'");
}

std::string to_string(ActiveSetConvention c) {
  return c == ActiveSetConvention::paper ? "paper" : "complementary";
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::active_set_cycle:
      return "active_set_cycle";
    case SolveStatus::max_iterations:
      return "max_iterations";
  }
  return "unknown";
}

std::string validate(const ProblemSpec& spec) {
  if (!spec.space) throw std::invalid_argument("problem has no Morley space");
  if (!spec.obstacle) throw std::invalid_argument("problem has no obstacle");
  if (!(spec.tol_newton > 0.0) || !(spec.tol_pdas > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (spec.max_pdas < 1 || spec.max_newton < 1)
    throw std::invalid_argument("iteration caps must be at least 1");
  if (spec.quad_degree < 2) throw std::invalid_argument("quad_degree must be at least 2");
  const Triangulation& mesh = spec.space->mesh();
  double max_chi = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.is_boundary_vertex(static_cast<int>(v))) continue;
    const Point& p = mesh.vertices()[v];
    max_chi = std::max(max_chi, spec.obstacle(p.x, p.y));
  }
  if (max_chi >= 0.0) {
    std::ostringstream msg;
    msg << "obstacle is not negative on the boundary (max " << max_chi << ")";
    return msg.str();
  }
  return {};
}

DiscreteProblem DiscreteProblem::assemble(const ProblemSpec& spec) {
  DiscreteProblem p;
  p.space = spec.space;
  p.stiffness = assemble_stiffness(*spec.space);
  p.load = spec.load ? assemble_load(*spec.space, spec.load, spec.quad_degree)
                     : Eigen::VectorXd::Zero(spec.space->n_dofs());
  const DofMap& dofs = spec.space->dof_map();
  p.obstacle.resize(dofs.n_vertex_dofs());
  for (int d = 0; d < dofs.n_vertex_dofs(); ++d) {
    const Point& x = spec.space->mesh().vertices()[dofs.dof_vertex(d)];
    p.obstacle[d] = spec.obstacle(x.x, x.y);
  }
  return p;
}

ActiveSets pdas_active_sets(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& lambda_prev,
                            const Eigen::VectorXd& obstacle, ActiveSetConvention convention) {
  ActiveSets sets;
  for (Eigen::Index d = 0; d < obstacle.size(); ++d) {
    const double indicator = lambda_prev[d] + obstacle[d] - u_prev[d];
    const bool active = convention == ActiveSetConvention::paper ? indicator <= 0.0 : indicator > 0.0;
    (active ? sets.active : sets.inactive).push_back(static_cast<int>(d));
  }
  return sets;
}

ActiveSets pdas_active_sets(const MorleyCoeffs& u_prev, const MorleyCoeffs& lambda_prev,
                            const ScalarField& obstacle, ActiveSetConvention convention) {
  require_same_space(u_prev, lambda_prev);
  const DofMap& dofs = u_prev.space->dof_map();
  Eigen::VectorXd chi(dofs.n_vertex_dofs());
  for (int d = 0; d < dofs.n_vertex_dofs(); ++d) {
    const Point& p = u_prev.space->mesh().vertices()[dofs.dof_vertex(d)];
    chi[d] = obstacle(p.x, p.y);
  }
  return pdas_active_sets(u_prev.values, lambda_prev.values, chi, convention);
}

ReducedSystem::ReducedSystem(const DiscreteProblem& problem, std::vector<int> active_dofs)
    : problem_(&problem), n_(problem.n_dofs()), active_(std::move(active_dofs)) {
  std::sort(active_.begin(), active_.end());
  alpha_column_.assign(n_, -1);
  lambda_column_.assign(n_, -1);
  for (int d : active_) {
    if (d < 0 || d >= problem.n_vertex_dofs())
      throw std::invalid_argument("active DOF is not an interior vertex");
    lambda_column_[d] = 0;  // marker, numbered below
  }
  int col = 0;
  for (int d = 0; d < n_; ++d) {
    if (lambda_column_[d] < 0) {
      free_.push_back(d);
      alpha_column_[d] = col++;
    }
  }
  for (int d : active_) lambda_column_[d] = col++;
}

Eigen::VectorXd ReducedSystem::pack(const Eigen::VectorXd& alpha, const Eigen::VectorXd& lambda,
                                    const Eigen::VectorXd& beta) const {
  Eigen::VectorXd s(2 * n_);
  for (int d : free_) s[alpha_column_[d]] = alpha[d];
  for (int d : active_) s[lambda_column_[d]] = lambda[d];
  s.tail(n_) = beta;
  return s;
}

void ReducedSystem::unpack(const Eigen::VectorXd& s, Eigen::VectorXd& alpha,
                           Eigen::VectorXd& lambda, Eigen::VectorXd& beta) const {
  alpha.setZero(n_);
  lambda.setZero(n_);
  for (int d : free_) alpha[d] = s[alpha_column_[d]];
  for (int d : active_) {
    alpha[d] = problem_->obstacle[d];
    lambda[d] = s[lambda_column_[d]];
  }
  beta = s.tail(n_);
}

Eigen::VectorXd ReducedSystem::residual(const Eigen::VectorXd& s) const {
  Eigen::VectorXd alpha, lambda, beta;
  unpack(s, alpha, lambda, beta);
  const MorleyCoeffs u{problem_->space, alpha};
  const MorleyCoeffs v{problem_->space, beta};
  Eigen::VectorXd g(2 * n_);
  g.head(n_) = problem_->stiffness * alpha + 2.0 * trilinear_vector(u, v, FreeSlot::second) -
               problem_->load - lambda;
  g.tail(n_) = problem_->stiffness * beta - trilinear_vector(u, u, FreeSlot::third);
  return g;
}

SparseMatrix ReducedSystem::jacobian(const Eigen::VectorXd& s) const {
  Eigen::VectorXd alpha, lambda, beta;
  unpack(s, alpha, lambda, beta);
  const MorleyCoeffs u{problem_->space, std::move(alpha)};
  const MorleyCoeffs v{problem_->space, std::move(beta)};
  const SparseMatrix& a = problem_->stiffness;
  // d(2N)/d(alpha) = 2 b(phi_j, phi_i, v); d(2N)/d(beta) = 2 b(u, phi_i, phi_j) = 2 M^T;
  // dQ/d(alpha) = 2 b(u, phi_j, phi_i) = 2 M.
  const SparseMatrix k = a + 2.0 * trilinear_matrix(v, FrozenSlot::third);
  const SparseMatrix m = trilinear_matrix(u, FrozenSlot::first);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(k.nonZeros() + 2 * m.nonZeros() + a.nonZeros()) +
                   active_.size());
  for (Eigen::Index c = 0; c < k.outerSize(); ++c) {
    const int col = alpha_column_[c];
    if (col < 0) continue;
    for (SparseMatrix::InnerIterator it(k, c); it; ++it) triplets.emplace_back(it.row(), col, it.value());
  }
  for (int d : active_) triplets.emplace_back(d, lambda_column_[d], -1.0);
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      const auto i = static_cast<int>(it.row());
      const auto j = static_cast<int>(c);
      triplets.emplace_back(j, n_ + i, 2.0 * it.value());
      if (alpha_column_[j] >= 0) triplets.emplace_back(n_ + i, alpha_column_[j], -2.0 * it.value());
    }
  }
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it)
      triplets.emplace_back(n_ + it.row(), n_ + c, it.value());
  }
  SparseMatrix jac(2 * n_, 2 * n_);
  jac.setFromTriplets(triplets.begin(), triplets.end());
  jac.makeCompressed();
  return jac;
}

NewtonResult newton_solve(const DiscreteProblem& problem, const std::vector<int>& active_dofs,
                          const Eigen::VectorXd& alpha_start, const Eigen::VectorXd& lambda_start,
                          const Eigen::VectorXd& beta_start, double tol, int max_iterations) {
  const ReducedSystem system(problem, active_dofs);
  Eigen::VectorXd s = system.pack(alpha_start, lambda_start, beta_start);
  Eigen::UmfPackLU<SparseMatrix> lu;
  bool analyzed = false;
  NewtonResult result;
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd g = system.residual(s);
    const SparseMatrix jac = system.jacobian(s);
    if (!g.allFinite()) {
      result.breakdown = true;
      break;
    }
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) {
      result.breakdown = true;
      break;
    }
    const Eigen::VectorXd step = lu.solve(g);
    if (!step.allFinite()) {
      result.breakdown = true;
      break;
    }
    s -= step;
    const double rho = step.norm();
    result.iterations = it;
    result.step_norms.push_back(rho);
    if (!std::isfinite(rho)) break;
    if (rho <= tol) {
      result.converged = true;
      break;
    }
  }
  system.unpack(s, result.alpha, result.lambda, result.beta);
  return result;
}

namespace {

struct LinearObstacleSolve {
  Eigen::VectorXd alpha;
  Eigen::VectorXd lambda;
};

/// A alpha - P lambda = F with alpha = chi on the active vertices and
/// lambda = 0 elsewhere.
LinearObstacleSolve solve_linear_obstacle(const DiscreteProblem& problem,
                                          const std::vector<int>& active) {
  const int n = problem.n_dofs();
  std::vector<int> reduced(n, -1);
  std::vector<char> is_active(n, 0);
  for (int d : active) is_active[d] = 1;
  int n_free = 0;
  for (int d = 0; d < n; ++d) {
    if (!is_active[d]) reduced[d] = n_free++;
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (int d : active) alpha[d] = problem.obstacle[d];

  const SparseMatrix& a = problem.stiffness;
  if (n_free > 0) {
    Eigen::VectorXd rhs(n_free);
    for (int d = 0; d < n; ++d) {
      if (reduced[d] >= 0) rhs[reduced[d]] = problem.load[d];
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
        const int r = reduced[it.row()];
        if (r < 0) continue;
        if (reduced[c] >= 0) {
          triplets.emplace_back(r, reduced[c], it.value());
        } else {
          rhs[r] -= it.value() * alpha[c];
        }
      }
    }
    SparseMatrix a_free(n_free, n_free);
    a_free.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::CholmodSupernodalLLT<SparseMatrix> llt(a_free);
    if (llt.info() != Eigen::Success)
      throw SingularSystemError("singular reduced biharmonic system (defective active set)");
    const Eigen::VectorXd x = llt.solve(rhs);
    for (int d = 0; d < n; ++d) {
      if (reduced[d] >= 0) alpha[d] = x[reduced[d]];
    }
  }

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  if (!active.empty()) {
    const Eigen::VectorXd residual = a * alpha - problem.load;
    for (int d : active) lambda[d] = residual[d];
  }
  return {std::move(alpha), std::move(lambda)};
}

double max_abs_difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).lpNorm<Eigen::Infinity>();
}

/// Remembers which active sets were used and the err each produced.
class CycleDetector {
 public:
  void record(const std::vector<int>& active, double err) { seen_.emplace_back(active, err); }

  /// True when `next` was used before and err has not decreased since.
  bool recurs_without_progress(const std::vector<int>& next, double err) const {
    for (const auto& [set, seen_err] : seen_) {
      if (set == next && !(err < seen_err)) return true;
    }
    return false;
  }

 private:
  std::vector<std::pair<std::vector<int>, double>> seen_;
};

std::vector<int> to_vertices(const DofMap& dofs, const std::vector<int>& vertex_dofs) {
  std::vector<int> out;
  out.reserve(vertex_dofs.size());
  for (int d : vertex_dofs) out.push_back(dofs.dof_vertex(d));
  return out;
}

}  // namespace

int SolveResult::outer_iterations(SolvePhase phase) const {
  return static_cast<int>(std::count_if(history.begin(), history.end(),
                                        [phase](const OuterIteration& r) { return r.phase == phase; }));
}

int SolveResult::max_newton_iterations() const {
  int best = 0;
  for (const auto& r : history) best = std::max(best, r.newton_iterations);
  return best;
}

SolveResult solve_biharmonic_obstacle(const ProblemSpec& spec) {
  validate(spec);
  return solve_biharmonic_obstacle(spec, DiscreteProblem::assemble(spec));
}

SolveResult solve_biharmonic_obstacle(const ProblemSpec& spec, const DiscreteProblem& problem) {
  const int n = problem.n_dofs();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  ActiveSets sets = pdas_active_sets(alpha, lambda, problem.obstacle, spec.convention);

  SolveResult result;
  result.status = SolveStatus::max_iterations;
  CycleDetector cycles;
  for (int m = 1; m <= spec.max_pdas; ++m) {
    LinearObstacleSolve next = solve_linear_obstacle(problem, sets.active);
    const double err = max_abs_difference(next.alpha, alpha);
    alpha = std::move(next.alpha);
    lambda = std::move(next.lambda);

    OuterIteration rec;
    rec.phase = SolvePhase::biharmonic;
    rec.m = m;
    rec.active_size = sets.active.size();
    rec.err = err;
    result.history.push_back(rec);
    result.active_set = to_vertices(problem.space->dof_map(), sets.active);

    ActiveSets following = pdas_active_sets(alpha, lambda, problem.obstacle, spec.convention);
    if (following.active == sets.active && err <= spec.tol_pdas) {
      result.status = SolveStatus::converged;
      break;
    }
    cycles.record(sets.active, err);
    if (spec.detect_cycles && following.active != sets.active &&
        cycles.recurs_without_progress(following.active, err)) {
      result.status = SolveStatus::active_set_cycle;
      break;
    }
    sets = std::move(following);
  }
  result.warm_start_status = result.status;
  result.u = MorleyCoeffs{problem.space, std::move(alpha)};
  result.v = MorleyCoeffs::zero(problem.space);
  result.lambda = MorleyCoeffs{problem.space, std::move(lambda)};
  return result;
}

SolveResult solve(const ProblemSpec& spec) {
  validate(spec);
  const DiscreteProblem problem = DiscreteProblem::assemble(spec);
  SolveResult result = solve_biharmonic_obstacle(spec, problem);
  result.warm_start_status = result.status;

  Eigen::VectorXd alpha = result.u.values;
  Eigen::VectorXd lambda = result.lambda.values;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(problem.n_dofs());
  ActiveSets sets = pdas_active_sets(alpha, lambda, problem.obstacle, spec.convention);

  result.status = SolveStatus::max_iterations;
  CycleDetector cycles;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(problem.n_dofs());
  for (int m = 1; m <= spec.max_pdas; ++m) {
    NewtonResult newton = newton_solve(problem, sets.active, alpha, lambda,
                                       spec.warm_start_beta ? beta : zero, spec.tol_newton,
                                       spec.max_newton);
    const double err = max_abs_difference(newton.alpha, alpha);
    alpha = std::move(newton.alpha);
    lambda = std::move(newton.lambda);
    beta = std::move(newton.beta);

    OuterIteration rec;
    rec.phase = SolvePhase::von_karman;
    rec.m = m;
    rec.active_size = sets.active.size();
    rec.newton_iterations = newton.iterations;
    rec.newton_steps = std::move(newton.step_norms);
    rec.newton_converged = newton.converged;
    rec.err = err;
    result.history.push_back(std::move(rec));
    result.active_set = to_vertices(problem.space->dof_map(), sets.active);

    ActiveSets following = pdas_active_sets(alpha, lambda, problem.obstacle, spec.convention);
    if (following.active == sets.active && err <= spec.tol_pdas && newton.converged) {
      result.status = SolveStatus::converged;
      break;
    }
    cycles.record(sets.active, err);
    if (spec.detect_cycles && following.active != sets.active &&
        cycles.recurs_without_progress(following.active, err)) {
      result.status = SolveStatus::active_set_cycle;
      break;
    }
    sets = std::move(following);
  }
  result.u = MorleyCoeffs{problem.space, std::move(alpha)};
  result.v = MorleyCoeffs{problem.space, std::move(beta)};
  result.lambda = MorleyCoeffs{problem.space, std::move(lambda)};
  return result;
}

NewtonResult solve_unconstrained(const ProblemSpec& spec) {
  validate(spec);
  const DiscreteProblem problem = DiscreteProblem::assemble(spec);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(problem.n_dofs());
  NewtonResult r = newton_solve(problem, {}, zero, zero, zero, spec.tol_newton, spec.max_newton);
  if (r.breakdown) throw SingularSystemError("singular Newton Jacobian");
  return r;
}

void write_iteration_log(std::ostream& out, const SolveResult& result) {
  SolvePhase phase = SolvePhase::biharmonic;
  bool first = true;
  char buf[128];
  for (const auto& r : result.history) {
    if (first || r.phase != phase) {
      out << (r.phase == SolvePhase::biharmonic ? "# biharmonic obstacle warm start\n"
                                                : "# von Karman obstacle\n");
      phase = r.phase;
      first = false;
    }
    std::snprintf(buf, sizeof buf, "%d %zu %d %.6e\n", r.m, r.active_size, r.newton_iterations,
                  r.err);
    out << buf;
  }
  out << "# status " << to_string(result.status) << '\n';
}

void write_iteration_jsonl(std::ostream& out, const SolveResult& result) {
  for (const auto& r : result.history) {
    nlohmann::json j;
    j["phase"] = r.phase == SolvePhase::biharmonic ? "biharmonic" : "von_karman";
    j["m"] = r.m;
    j["active"] = r.active_size;
    j["newton_iters"] = r.newton_iterations;
    j["newton_steps"] = r.newton_steps;
    j["newton_converged"] = r.newton_converged;
    j["err"] = r.err;
    out << j.dump() << '\n';
  }
  nlohmann::json tail;
  tail["status"] = to_string(result.status);
  out << tail.dump() << '\n';
}

}  // namespace vkfem

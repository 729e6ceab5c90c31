#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vkfem/mesh.hpp"
#include "vkfem/morley.hpp"
#include "vkfem/problem.hpp"
#include "vkfem/vi_solver.hpp"

namespace vkfem {

/// |||u_fine - u_coarse|||_pw, evaluated on the fine triangles with the
/// Hessian of the coarse ancestor. Both fields must live on meshes of `h`.
double energy_error_cross_level(const MorleyCoeffs& coarse, const MorleyCoeffs& fine,
                                const MeshHierarchy& h);

/// max over coarse vertices p of |u_fine(p) - u_coarse(p)|.
double vertex_max_error(const MorleyCoeffs& coarse, const MorleyCoeffs& fine,
                        const MeshHierarchy& h);

enum class EocMode { reference, successive };

/// errors[k] holds e_{k+1}. Reference mode returns EOC(1..n-1) against the
/// last entry; successive mode returns EOC(2..n).
std::vector<double> eoc(const std::vector<double>& errors, EocMode mode = EocMode::reference);

/// Interior vertices p with u(p) - chi(p) <= tolerance, ascending.
std::vector<int> coincidence_set(const MorleyCoeffs& u, const ScalarField& chi, double tolerance);

struct StudyLevel {
  int level = 0;
  double h = 0.0;
  std::size_t n_triangles = 0;
  int n_dofs = 0;
  SolveStatus status = SolveStatus::max_iterations;
  int outer_iterations = 0;      // von Karman phase
  int warm_start_iterations = 0; // biharmonic phase
  int max_newton_iterations = 0;
  double final_change = 0.0;     // err of the last outer iteration
  double last_newton_step = 0.0; // ||Delta S|| of the last Newton step
  bool has_errors = false;       // false on the reference level
  double einf_u = 0.0, einf_v = 0.0, e_u = 0.0, e_v = 0.0;
  std::optional<double> eoc_inf_u, eoc_inf_v, eoc_u, eoc_v;
  std::vector<int> active_set;
  std::vector<int> coincidence;
  std::vector<Point> coincidence_points;
};

struct StudyReport {
  std::string problem;
  int reference_level = 0;
  std::vector<StudyLevel> levels;  // levels 1..L in order
  /// False when some level did not converge; error columns are then absent.
  bool complete = false;

  const StudyLevel& at(int level) const;
};

struct StudyOptions {
  SolverOptions solver;
  /// Worker threads for independent levels; 0 means VKFEM_THREADS or the
  /// hardware concurrency.
  int threads = 0;
  /// Keep the solutions so callers can export fields.
  bool keep_solutions = false;
};

struct StudyRun {
  StudyReport report;
  std::shared_ptr<const MeshHierarchy> hierarchy;
  std::vector<SolveResult> solutions;  // index level-1, when kept
};

/// Solves on levels 1..L and tabulates errors against level L.
StudyRun refinement_study(const Problem& problem, int L, const StudyOptions& options = {});

/// Reference levels used for the published tables.
int default_reference_level(const Problem& problem);

/// Worker count from VKFEM_THREADS, else the hardware concurrency.
int default_thread_count();

/// Runs fn(0..count-1) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

void write_study_csv(std::ostream& out, const StudyReport& report);
extern const char* const kStudyCsvHeader;

struct RayleighBounds {
  double ratio_l2 = 0.0;
  double ratio_linf = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double energy = 0.0;
};

/// ||w||_L2 / |||w||| and ||w||_Linf / |||w|||, lower bounds for the
/// Friedrichs and Sobolev constants. The sup norm is sampled on a grid x grid
/// lattice over the bounding box of the mesh, restricted to the domain.
RayleighBounds rayleigh_lower_bounds(const SmoothFunction& w, const Domain& domain,
                                     int quad_degree = 16, int grid = 1001);

/// The bubble (x+1/2)^2 (y+1/2)^2 (1/2-x)^2 (1/2-y)^2 with analytic Hessian.
SmoothFunction square_bubble();

/// sqrt(3) C_S C_F ||f||_L2.
double smallness_bound(const ScalarField& f, double cs_lower, double cf_lower,
                       const Triangulation& mesh, int quad_degree);

inline constexpr double kSmallnessThreshold = 1.4142135623730951 - 1.0;

struct SmallnessReport {
  RayleighBounds rayleigh;
  double load_l2 = 0.0;
  double bound = 0.0;
  bool violated = false;
};

SmallnessReport check_smallness(const Problem& problem, int quad_degree = 16, int grid = 1001);

struct SweepEntry {
  double lambda = 0.0;
  int level = 0;
  SolveStatus status = SolveStatus::max_iterations;
  int outer_iterations = 0;
  double min_gap = 0.0;  // min over vertices of u - lambda*chi
};

/// Solves with obstacle lambda*chi for every (lambda, level) pair.
std::vector<SweepEntry> obstacle_scaling_sweep(const Problem& problem,
                                               const std::vector<double>& lambdas,
                                               const std::vector<int>& levels,
                                               const StudyOptions& options = {});

}  // namespace vkfem

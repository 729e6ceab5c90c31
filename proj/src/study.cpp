#include "vkfem/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "vkfem/forms.hpp"
#include "vkfem/quadrature.hpp"

namespace vkfem {

namespace {

int level_in(const MeshHierarchy& h, const MorleyCoeffs& field) {
  const int l = field.space->mesh().level();
  if (l < 0 || l > h.finest_level() || h.level(l).get() != field.space->mesh_ptr().get())
    throw std::invalid_argument("field does not live on a mesh of the hierarchy");
  return l;
}

}  // namespace

double energy_error_cross_level(const MorleyCoeffs& coarse, const MorleyCoeffs& fine,
                                const MeshHierarchy& h) {
  const int lc = level_in(h, coarse);
  const int lf = level_in(h, fine);
  if (lc > lf) throw std::invalid_argument("coarse field is finer than the reference");
  const Triangulation& mesh = fine.space->mesh();
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const Hessian d = fine.hessian(ti) - coarse.hessian(h.ancestor(lf, ti, lc));
    sum += mesh.area(ti) * frobenius(d, d);
  }
  return std::sqrt(sum);
}

double vertex_max_error(const MorleyCoeffs& coarse, const MorleyCoeffs& fine,
                        const MeshHierarchy& h) {
  const int lc = level_in(h, coarse);
  const int lf = level_in(h, fine);
  if (lc > lf) throw std::invalid_argument("coarse field is finer than the reference");
  // red refinement keeps the parent vertex numbering
  double err = 0.0;
  const std::size_t nv = coarse.space->mesh().num_vertices();
  for (std::size_t v = 0; v < nv; ++v) {
    const int vi = static_cast<int>(v);
    err = std::max(err, std::abs(fine.vertex_value(vi) - coarse.vertex_value(vi)));
  }
  return err;
}

std::vector<double> eoc(const std::vector<double>& errors, EocMode mode) {
  for (double e : errors)
    if (!(e > 0.0)) throw std::invalid_argument("EOC needs positive errors");
  const std::size_t n = errors.size();
  std::vector<double> out;
  if (n < 2) return out;
  if (mode == EocMode::reference) {
    const double last = errors.back();
    for (std::size_t k = 0; k + 1 < n; ++k)
      out.push_back(std::log(errors[k] / last) / (static_cast<double>(n - 1 - k) * std::log(2.0)));
  } else {
    for (std::size_t k = 1; k < n; ++k)
      out.push_back(std::log(errors[k - 1] / errors[k]) / std::log(2.0));
  }
  return out;
}

std::vector<int> coincidence_set(const MorleyCoeffs& u, const ScalarField& chi, double tolerance) {
  if (tolerance < 0.0) throw std::invalid_argument("negative coincidence tolerance");
  const Triangulation& mesh = u.space->mesh();
  std::vector<int> out;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const int vi = static_cast<int>(v);
    if (mesh.is_boundary_vertex(vi)) continue;
    const Point& p = mesh.vertices()[v];
    if (u.vertex_value(vi) - chi(p.x, p.y) <= tolerance) out.push_back(vi);
  }
  return out;
}

const StudyLevel& StudyReport::at(int level) const {
  for (const auto& l : levels)
    if (l.level == level) return l;
  throw std::out_of_range("level not in study");
}

int default_reference_level(const Problem& problem) {
  return problem.domain.kind == DomainKind::lshape ? 6 : 7;
}

int default_thread_count() {
  if (const char* env = std::getenv("VKFEM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

StudyRun refinement_study(const Problem& problem, int L, const StudyOptions& options) {
  if (L < 3) throw std::invalid_argument("refinement study needs L >= 3");
  auto hierarchy = std::make_shared<const MeshHierarchy>(problem.domain.initial_mesh(), L);
  std::vector<SolveResult> results(static_cast<std::size_t>(L));
  const int threads = options.threads > 0 ? options.threads : default_thread_count();

  // finest levels first so the expensive solves start early
  parallel_for(L, threads, [&](int i) {
    const int level = L - i;
    auto space = MorleySpace::create(hierarchy->level(level));
    results[static_cast<std::size_t>(level - 1)] = solve(make_spec(problem, space, options.solver));
  });

  StudyRun run;
  run.hierarchy = hierarchy;
  StudyReport& report = run.report;
  report.problem = problem.name;
  report.reference_level = L;
  report.complete = true;
  for (int level = 1; level <= L; ++level) {
    const SolveResult& r = results[static_cast<std::size_t>(level - 1)];
    const Triangulation& mesh = *hierarchy->level(level);
    StudyLevel row;
    row.level = level;
    row.h = mesh_statistics(mesh).h_max;
    row.n_triangles = mesh.num_triangles();
    row.n_dofs = r.u.space->n_dofs();
    row.status = r.status;
    row.outer_iterations = r.outer_iterations(SolvePhase::von_karman);
    row.warm_start_iterations = r.outer_iterations(SolvePhase::biharmonic);
    row.max_newton_iterations = r.max_newton_iterations();
    if (!r.history.empty()) {
      row.final_change = r.history.back().err;
      if (!r.history.back().newton_steps.empty())
        row.last_newton_step = r.history.back().newton_steps.back();
    }
    row.active_set = r.active_set;
    if (r.status != SolveStatus::converged) report.complete = false;
    report.levels.push_back(std::move(row));
  }

  const ScalarField chi = problem.obstacle.as_field();
  const SolveResult& ref = results.back();
  std::vector<double> einf_u, einf_v, e_u, e_v;
  for (int level = 1; level <= L; ++level) {
    StudyLevel& row = report.levels[static_cast<std::size_t>(level - 1)];
    const SolveResult& r = results[static_cast<std::size_t>(level - 1)];
    double tolerance = 0.0;
    if (report.complete && level < L) {
      row.has_errors = true;
      row.einf_u = vertex_max_error(r.u, ref.u, *hierarchy);
      row.einf_v = vertex_max_error(r.v, ref.v, *hierarchy);
      row.e_u = energy_error_cross_level(r.u, ref.u, *hierarchy);
      row.e_v = energy_error_cross_level(r.v, ref.v, *hierarchy);
      einf_u.push_back(row.einf_u);
      einf_v.push_back(row.einf_v);
      e_u.push_back(row.e_u);
      e_v.push_back(row.e_v);
      tolerance = row.einf_u;
    }
    row.coincidence = coincidence_set(r.u, chi, tolerance);
    for (int v : row.coincidence) row.coincidence_points.push_back(r.u.space->mesh().vertices()[v]);
  }

  if (report.complete) {
    auto assign = [&](const std::vector<double>& errors, std::optional<double> StudyLevel::*slot) {
      if (std::any_of(errors.begin(), errors.end(), [](double e) { return !(e > 0.0); })) return;
      const auto rates = eoc(errors, EocMode::reference);
      for (std::size_t k = 0; k < rates.size(); ++k) report.levels[k].*slot = rates[k];
    };
    assign(einf_u, &StudyLevel::eoc_inf_u);
    assign(einf_v, &StudyLevel::eoc_inf_v);
    assign(e_u, &StudyLevel::eoc_u);
    assign(e_v, &StudyLevel::eoc_v);
  }

  if (options.keep_solutions) run.solutions = std::move(results);
  return run;
}

const char* const kStudyCsvHeader =
    "level,h,einf_u,eoc_inf_u,einf_v,eoc_inf_v,e_u,eoc_u,e_v,eoc_v,outer_iters,max_newton_iters,"
    "status";

void write_study_csv(std::ostream& out, const StudyReport& report) {
  auto fixed = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return std::string(buf);
  };
  auto cell = [&](bool present, double x) { return present ? fixed(x) : std::string(); };
  auto rate = [&](const std::optional<double>& x) { return x ? fixed(*x) : std::string(); };

  out << kStudyCsvHeader << '\n';
  for (const auto& l : report.levels) {
    out << l.level << ',' << fixed(l.h) << ',' << cell(l.has_errors, l.einf_u) << ','
        << rate(l.eoc_inf_u) << ',' << cell(l.has_errors, l.einf_v) << ',' << rate(l.eoc_inf_v)
        << ',' << cell(l.has_errors, l.e_u) << ',' << rate(l.eoc_u) << ','
        << cell(l.has_errors, l.e_v) << ',' << rate(l.eoc_v) << ',' << l.outer_iterations << ','
        << l.max_newton_iterations << ',' << to_string(l.status) << '\n';
  }
}

SmoothFunction square_bubble() {
  // p(s) = (s + 1/2)^2 (1/2 - s)^2 = (1/4 - s^2)^2
  auto p = [](double s) { return (0.25 - s * s) * (0.25 - s * s); };
  auto dp = [](double s) { return -4.0 * s * (0.25 - s * s); };
  auto ddp = [](double s) { return 12.0 * s * s - 1.0; };
  SmoothFunction w;
  w.value = [p](double x, double y) { return p(x) * p(y); };
  w.gradient = [p, dp](double x, double y) { return Gradient{dp(x) * p(y), p(x) * dp(y)}; };
  w.hessian = [p, dp, ddp](double x, double y) {
    return Hessian{ddp(x) * p(y), dp(x) * dp(y), p(x) * ddp(y)};
  };
  return w;
}

RayleighBounds rayleigh_lower_bounds(const SmoothFunction& w, const Domain& domain,
                                     int quad_degree, int grid) {
  if (!w.value || !w.hessian) throw std::invalid_argument("trial function needs value and Hessian");
  if (grid < 2) throw std::invalid_argument("sampling grid needs at least 2 points per axis");
  const Triangulation mesh = domain.initial_mesh();
  const QuadratureRule rule = QuadratureRule::of_degree(quad_degree);
  double l2 = 0.0, energy = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const auto c = mesh.corners(ti);
    const double area = mesh.area(ti);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point p = map_barycentric(c, rule.points[q]);
      const double val = w.value(p.x, p.y);
      const Hessian hw = w.hessian(p.x, p.y);
      l2 += area * rule.weights[q] * val * val;
      energy += area * rule.weights[q] * frobenius(hw, hw);
    }
  }
  RayleighBounds b;
  b.l2 = std::sqrt(l2);
  b.energy = std::sqrt(energy);
  if (!(b.energy > 0.0)) throw std::invalid_argument("trial function has zero energy norm");

  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const Point& p : mesh.vertices()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  double linf = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = xmin + (xmax - xmin) * i / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double y = ymin + (ymax - ymin) * j / (grid - 1);
      if (domain.contains(x, y)) linf = std::max(linf, std::abs(w.value(x, y)));
    }
  }
  b.linf = linf;
  b.ratio_l2 = b.l2 / b.energy;
  b.ratio_linf = b.linf / b.energy;
  return b;
}

double smallness_bound(const ScalarField& f, double cs_lower, double cf_lower,
                       const Triangulation& mesh, int quad_degree) {
  return std::sqrt(3.0) * cs_lower * cf_lower * l2_norm(f, mesh, quad_degree);
}

SmallnessReport check_smallness(const Problem& problem, int quad_degree, int grid) {
  SmallnessReport s;
  s.rayleigh = rayleigh_lower_bounds(square_bubble(), problem.domain, quad_degree, grid);
  const Triangulation mesh = problem.domain.initial_mesh();
  const int deg = default_l2_quad_degree(problem.load);
  s.load_l2 = l2_norm(problem.load.as_field(), mesh, deg);
  s.bound = smallness_bound(problem.load.as_field(), s.rayleigh.ratio_linf, s.rayleigh.ratio_l2,
                            mesh, deg);
  s.violated = s.bound >= kSmallnessThreshold;
  return s;
}

std::vector<SweepEntry> obstacle_scaling_sweep(const Problem& problem,
                                               const std::vector<double>& lambdas,
                                               const std::vector<int>& levels,
                                               const StudyOptions& options) {
  if (levels.empty() || lambdas.empty()) return {};
  const int finest = *std::max_element(levels.begin(), levels.end());
  if (*std::min_element(levels.begin(), levels.end()) < 0)
    throw std::invalid_argument("negative level");
  const MeshHierarchy hierarchy(problem.domain.initial_mesh(), finest);
  const ScalarField chi = problem.obstacle.as_field();

  std::vector<SweepEntry> entries;
  for (double lambda : lambdas)
    for (int level : levels) entries.push_back({lambda, level});
  const int threads = options.threads > 0 ? options.threads : default_thread_count();
  parallel_for(static_cast<int>(entries.size()), threads, [&](int i) {
    SweepEntry& e = entries[static_cast<std::size_t>(i)];
    SolverOptions opts = options.solver;
    opts.obstacle_scale = e.lambda;
    auto space = MorleySpace::create(hierarchy.level(e.level));
    const SolveResult r = solve(make_spec(problem, space, opts));
    e.status = r.status;
    e.outer_iterations = r.outer_iterations(SolvePhase::von_karman);
    const Triangulation& mesh = space->mesh();
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      const Point& p = mesh.vertices()[v];
      gap = std::min(gap, r.u.vertex_value(static_cast<int>(v)) - e.lambda * chi(p.x, p.y));
    }
    e.min_gap = gap;
  });
  return entries;
}

}  // namespace vkfem

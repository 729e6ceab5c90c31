#include "vkfem/cli_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "vkfem/errors.hpp"
#include "vkfem/forms.hpp"

namespace vkfem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string key) {
  key = trim(key);
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

int to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  try {
    const int v = std::stoi(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("invalid integer for '" + key + "': '" + value + "'");
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  try {
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("invalid number for '" + key + "': '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ParseError("invalid boolean for '" + key + "': '" + value + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& value, F convert) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(convert(item));
  }
  return out;
}

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

std::filesystem::path output_dir(const Config& config) {
  std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void print_validation_warning(const ProblemSpec& spec, std::ostream& log) {
  const std::string warning = validate(spec);
  if (!warning.empty()) log << "warning: " << warning << '\n';
}

int run_solve(const Config& config, std::ostream& log) {
  const Problem problem = make_problem(config);
  const auto dir = output_dir(config);
  const MeshHierarchy hierarchy(problem.domain.initial_mesh(), config.level);
  auto space = MorleySpace::create(hierarchy.level(config.level));
  const ProblemSpec spec = make_spec(problem, space, config.solver);
  print_validation_warning(spec, log);
  const SolveResult r = solve(spec);
  const std::vector<int> coincidence =
      coincidence_set(r.u, problem.obstacle.as_field(), config.tolerance);

  {
    auto out = open_output(dir / "u.field");
    write_field(out, r.u);
  }
  {
    auto out = open_output(dir / "v.field");
    write_field(out, r.v);
  }
  {
    auto out = open_output(dir / "lambda.field");
    write_field(out, r.lambda);
  }
  {
    auto out = open_output(dir / "iterations.log");
    write_iteration_log(out, r);
  }
  if (config.jsonl_log) {
    auto out = open_output(dir / "iterations.jsonl");
    write_iteration_jsonl(out, r);
  }
  if (config.matrix_dump) {
    auto out = open_output(dir / "stiffness.txt");
    write_matrix(out, assemble_stiffness(*space));
  }
  if (config.csv) {
    auto out = open_output(dir / "coincidence.csv");
    write_coincidence_csv(out, space->mesh(), coincidence, r.active_set);
  }
  if (config.svg) {
    auto out = open_output(dir / "coincidence.svg");
    write_svg(out, space->mesh(), coincidence);
  }

  log << "problem " << problem.name << ", level " << config.level << ", "
      << space->mesh().num_triangles() << " triangles, " << space->n_dofs() << " dofs\n"
      << "warm start: " << r.outer_iterations(SolvePhase::biharmonic) << " outer iterations, "
      << to_string(r.warm_start_status) << '\n'
      << "von Karman: " << r.outer_iterations(SolvePhase::von_karman)
      << " outer iterations, max " << r.max_newton_iterations() << " Newton iterations\n"
      << "active vertices " << r.active_set.size() << ", coincidence vertices "
      << coincidence.size() << '\n'
      << "status " << to_string(r.status) << '\n';
  if (r.status != SolveStatus::converged && config.strict) return kExitSolver;
  return kExitOk;
}

int run_study(const Config& config, std::ostream& log) {
  const Problem problem = make_problem(config);
  const int L = config.levels > 0 ? config.levels : default_reference_level(problem);
  const auto dir = output_dir(config);
  StudyOptions options;
  options.solver = config.solver;
  options.threads = config.threads;
  const StudyRun run = refinement_study(problem, L, options);
  const StudyReport& report = run.report;

  // all files written here, after every level has finished
  if (config.csv) {
    auto out = open_output(dir / "study.csv");
    write_study_csv(out, report);
    for (const auto& row : report.levels) {
      const auto& mesh = *run.hierarchy->level(row.level);
      auto cout = open_output(dir / ("coincidence_level" + std::to_string(row.level) + ".csv"));
      write_coincidence_csv(cout, mesh, row.coincidence, row.active_set);
    }
  }
  if (config.svg) {
    for (const auto& row : report.levels) {
      auto out = open_output(dir / ("coincidence_level" + std::to_string(row.level) + ".svg"));
      write_svg(out, *run.hierarchy->level(row.level), row.coincidence);
    }
  }

  log << "# problem " << report.problem << ", reference level " << L << '\n';
  write_study_csv(log, report);
  if (!report.complete) {
    log << "study incomplete: some level did not converge\n";
    if (config.strict) return kExitSolver;
  }
  return kExitOk;
}

int run_coincidence(const Config& config, std::ostream& log) {
  const Problem problem = make_problem(config);
  const MeshHierarchy hierarchy(problem.domain.initial_mesh(), config.level);
  auto space = MorleySpace::create(hierarchy.level(config.level));
  const ProblemSpec spec = make_spec(problem, space, config.solver);
  print_validation_warning(spec, log);
  const SolveResult r = solve(spec);
  const auto vertices = coincidence_set(r.u, problem.obstacle.as_field(), config.tolerance);
  if (config.out.empty()) {
    write_coincidence_csv(log, space->mesh(), vertices, r.active_set);
  } else {
    auto out = open_output(config.out);
    write_coincidence_csv(out, space->mesh(), vertices, r.active_set);
  }
  if (r.status != SolveStatus::converged) {
    log << "# status " << to_string(r.status) << '\n';
    if (config.strict) return kExitSolver;
  }
  return kExitOk;
}

int run_check_smallness(const Config& config, std::ostream& log) {
  const Problem problem = make_problem(config);
  const SmallnessReport s = check_smallness(problem, config.quad_degree_rayleigh, config.grid);
  log << "problem " << problem.name << '\n'
      << "||w||_L2 / |||w|||   = " << fmt("%.4f", s.rayleigh.ratio_l2) << "  (C_F >= this)\n"
      << "||w||_Linf / |||w||| = " << fmt("%.4f", s.rayleigh.ratio_linf) << "  (C_S >= this)\n"
      << "||f||_L2             = " << fmt("%.6f", s.load_l2) << '\n'
      << "C_S*M(f,chi) >= " << fmt("%.4f", s.bound) << '\n'
      << "sqrt(2)-1 = " << fmt("%.4f", kSmallnessThreshold) << '\n';
  if (s.violated)
    log << "smallness condition VIOLATED\n";
  else
    log << "smallness condition not violated by the lower bound\n";
  return kExitOk;
}

int run_mesh(const Config& config, std::ostream& log) {
  Domain domain = parse_domain(config.domain);
  domain.lshape_diagonal = config.lshape_diagonal;
  Triangulation mesh =
      config.mesh_in.empty() ? domain.initial_mesh() : read_mesh_file(config.mesh_in);
  for (int i = 0; i < config.refine; ++i) mesh = red_refine(mesh);
  if (!config.out.empty()) write_mesh_file(config.out, mesh);
  if (config.svg) {
    auto out = open_output(output_dir(config) / "mesh.svg");
    write_svg(out, mesh, {});
  }
  const MeshStatistics s = mesh_statistics(mesh);
  log << "level " << mesh.level() << ": " << mesh.num_triangles() << " triangles, "
      << mesh.num_vertices() << " vertices (" << s.interior_vertices << " interior), "
      << mesh.num_edges() << " edges (" << s.interior_edges << " interior)\n"
      << "h_max " << fmt("%.6f", s.h_max) << ", min angle " << fmt("%.6f", s.min_angle * 180.0 / 3.141592653589793) << " deg"
      << ", area " << fmt("%.6f", s.total_area) << '\n';
  return kExitOk;
}

int run_scaling_sweep(const Config& config, std::ostream& log) {
  const Problem problem = make_problem(config);
  StudyOptions options;
  options.solver = config.solver;
  options.threads = config.threads;
  const auto entries = obstacle_scaling_sweep(problem, config.lambdas, config.sweep_levels, options);
  if (config.csv) {
    auto out = open_output(output_dir(config) / "sweep.csv");
    write_sweep_table(out, entries);
  }
  write_sweep_table(log, entries);
  const bool all = std::all_of(entries.begin(), entries.end(),
                               [](const SweepEntry& e) { return e.status == SolveStatus::converged; });
  return !all && config.strict ? kExitSolver : kExitOk;
}

}  // namespace

std::vector<std::string> config_keys() {
  return {"problem", "domain", "chi", "f", "lshape_diagonal", "levels", "level", "tol_newton",
          "tol_pdas", "max_pdas", "max_newton", "quad_degree", "convention", "warm_start_beta", "detect_cycles",
          "obstacle_scale", "threads", "tolerance", "lambdas", "sweep_levels", "refine",
          "mesh_in", "rayleigh_quad_degree", "grid", "output", "out", "csv", "svg",
          "matrix_dump", "jsonl_log", "strict"};
}

void apply_config_entry(Config& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value = trim(raw_value);
  if (key == "problem") {
    c.problem = value;
  } else if (key == "domain") {
    c.domain = value;
  } else if (key == "chi") {
    Expression::parse(value);
    c.chi = value;
  } else if (key == "f") {
    Expression::parse(value);
    c.f = value;
  } else if (key == "lshape_diagonal") {
    c.lshape_diagonal = parse_lshape_diagonal(value);
  } else if (key == "levels") {
    c.levels = to_int(key, value);
  } else if (key == "level") {
    c.level = to_int(key, value);
  } else if (key == "tol_newton") {
    c.solver.tol_newton = to_double(key, value);
  } else if (key == "tol_pdas") {
    c.solver.tol_pdas = to_double(key, value);
  } else if (key == "max_pdas") {
    c.solver.max_pdas = to_int(key, value);
  } else if (key == "max_newton") {
    c.solver.max_newton = to_int(key, value);
  } else if (key == "quad_degree") {
    c.solver.quad_degree = to_int(key, value);
  } else if (key == "convention") {
    c.solver.convention = parse_active_set_convention(value);
  } else if (key == "warm_start_beta") {
    c.solver.warm_start_beta = to_bool(key, value);
  } else if (key == "detect_cycles") {
    c.solver.detect_cycles = to_bool(key, value);
  } else if (key == "obstacle_scale") {
    c.solver.obstacle_scale = to_double(key, value);
  } else if (key == "threads") {
    c.threads = to_int(key, value);
  } else if (key == "tolerance") {
    c.tolerance = to_double(key, value);
  } else if (key == "lambdas") {
    c.lambdas = to_list<double>(value, [&](const std::string& s) { return to_double(key, s); });
  } else if (key == "sweep_levels") {
    c.sweep_levels = to_list<int>(value, [&](const std::string& s) { return to_int(key, s); });
  } else if (key == "refine") {
    c.refine = to_int(key, value);
  } else if (key == "mesh_in") {
    c.mesh_in = value;
  } else if (key == "rayleigh_quad_degree") {
    c.quad_degree_rayleigh = to_int(key, value);
  } else if (key == "grid") {
    c.grid = to_int(key, value);
  } else if (key == "output") {
    c.output = value;
  } else if (key == "out") {
    c.out = value;
  } else if (key == "csv") {
    c.csv = to_bool(key, value);
  } else if (key == "svg") {
    c.svg = to_bool(key, value);
  } else if (key == "matrix_dump") {
    c.matrix_dump = to_bool(key, value);
  } else if (key == "jsonl_log") {
    c.jsonl_log = to_bool(key, value);
  } else if (key == "strict") {
    c.strict = to_bool(key, value);
  } else {
    throw ParseError("unknown config key '" + key + "'");
  }
}

void apply_config_text(Config& config, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_config_entry(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(Config& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  apply_config_text(config, in);
}

Problem make_problem(const Config& config) {
  if (config.problem != "custom") {
    if (config.chi != "0" || config.f != "0")
      throw ParseError("preset '" + config.problem +
                       "' fixes chi and f; use problem = custom for other data");
    return preset_problem(config.problem, config.lshape_diagonal);
  }
  Problem p;
  p.name = "custom";
  p.domain = parse_domain(config.domain);
  p.domain.lshape_diagonal = config.lshape_diagonal;
  p.obstacle = Expression::parse(config.chi);
  p.load = Expression::parse(config.f);
  return p;
}

void write_coincidence_csv(std::ostream& out, const Triangulation& mesh,
                           const std::vector<int>& vertices, const std::vector<int>& active_set) {
  out << "x,y,active\n";
  char buf[96];
  for (int v : vertices) {
    const Point& p = mesh.vertices()[static_cast<std::size_t>(v)];
    const bool active = std::binary_search(active_set.begin(), active_set.end(), v);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", p.x, p.y, active ? 1 : 0);
    out << buf;
  }
}

void write_svg(std::ostream& out, const Triangulation& mesh, const std::vector<int>& markers) {
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const Point& p : mesh.vertices()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double size = 800.0, pad = 10.0;
  const double scale = size / std::max({xmax - xmin, ymax - ymin, 1e-300});
  auto px = [&](const Point& p) { return pad + (p.x - xmin) * scale; };
  auto py = [&](const Point& p) { return pad + (ymax - p.y) * scale; };
  const double width = 2 * pad + (xmax - xmin) * scale;
  const double height = 2 * pad + (ymax - ymin) * scale;
  const double stroke = std::max(0.2, std::min(1.0, 40.0 / std::sqrt(double(mesh.num_triangles()) + 1)));

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.1f\" height=\"%.1f\">\n",
                width, height);
  out << buf;
  std::snprintf(buf, sizeof buf, "<g fill=\"none\" stroke=\"#666\" stroke-width=\"%.2f\">\n", stroke);
  out << buf;
  for (const auto& e : mesh.edges()) {
    const Point& a = mesh.vertices()[static_cast<std::size_t>(e[0])];
    const Point& b = mesh.vertices()[static_cast<std::size_t>(e[1])];
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n",
                  px(a), py(a), px(b), py(b));
    out << buf;
  }
  out << "</g>\n<g fill=\"#c00\">\n";
  const double r = std::max(1.0, 2.5 * stroke);
  for (int v : markers) {
    const Point& p = mesh.vertices()[static_cast<std::size_t>(v)];
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", px(p), py(p), r);
    out << buf;
  }
  out << "</g>\n</svg>\n";
}

void write_sweep_table(std::ostream& out, const std::vector<SweepEntry>& entries) {
  out << "lambda,level,status,outer_iters,min_gap\n";
  char buf[128];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%g,%d,%s,%d,%.6f\n", e.lambda, e.level,
                  to_string(e.status).c_str(), e.outer_iterations, e.min_gap);
    out << buf;
  }
}

int run(const Config& config, std::ostream& log) {
  try {
    if (config.command == "solve") return run_solve(config, log);
    if (config.command == "study") return run_study(config, log);
    if (config.command == "coincidence") return run_coincidence(config, log);
    if (config.command == "check-smallness") return run_check_smallness(config, log);
    if (config.command == "mesh") return run_mesh(config, log);
    if (config.command == "scaling-sweep") return run_scaling_sweep(config, log);
    std::cerr << "error: unknown command '" << config.command << "'\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SingularSystemError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace vkfem

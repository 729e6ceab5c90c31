#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vkfem/problem.hpp"
#include "vkfem/study.hpp"

namespace vkfem {

struct Config {
  std::string command;
  /// Preset name or "custom".
  std::string problem = "example1";
  std::string domain = "square";  // custom problems
  std::string chi = "0";
  std::string f = "0";
  LShapeDiagonal lshape_diagonal = LShapeDiagonal::parallel;

  int levels = 0;  // study reference level; 0 picks the published one
  int level = 4;   // solve, coincidence
  SolverOptions solver;
  int threads = 0;
  double tolerance = 0.0;  // coincidence
  std::vector<double> lambdas{1.0, 2.0, 4.0};
  std::vector<int> sweep_levels{4, 5};
  int refine = 0;          // mesh
  std::string mesh_in;     // mesh
  int quad_degree_rayleigh = 16;
  int grid = 1001;

  std::string output = ".";
  std::string out;  // single-file outputs (mesh, coincidence)
  bool csv = true;
  bool svg = false;
  bool matrix_dump = false;
  bool jsonl_log = false;
  bool strict = false;
};

/// Sets one key (flag names without dashes, '-' and '_' interchangeable).
/// Throws ParseError on unknown keys or malformed values.
void apply_config_entry(Config& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines, `#` starts a comment.
void apply_config_text(Config& config, std::istream& in);
void apply_config_file(Config& config, const std::string& path);

std::vector<std::string> config_keys();

Problem make_problem(const Config& config);

/// x,y,active rows for the given vertices; active marks membership in the
/// solver's active set.
void write_coincidence_csv(std::ostream& out, const Triangulation& mesh,
                           const std::vector<int>& vertices, const std::vector<int>& active_set);

/// Mesh wireframe with one circle marker per listed vertex.
void write_svg(std::ostream& out, const Triangulation& mesh, const std::vector<int>& markers);

void write_sweep_table(std::ostream& out, const std::vector<SweepEntry>& entries);

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitIo = 4 };

/// Runs config.command; human-readable output goes to `log`.
int run(const Config& config, std::ostream& log);

}  // namespace vkfem

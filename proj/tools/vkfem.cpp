#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "vkfem/cli_io.hpp"
#include "vkfem/errors.hpp"

namespace {

struct Flag {
  const char* name;
  const char* help;
};

// Every flag maps onto the config key of the same name.
const Flag kCommonFlags[] = {
    {"problem", "example1 | example2 | example3 | lshape | custom"},
    {"domain", "square | lshape | mesh file (custom problems)"},
    {"chi", "obstacle expression in x, y (custom problems)"},
    {"f", "load expression in x, y (custom problems)"},
    {"lshape-diagonal", "parallel | toward_corner | away_from_corner"},
    {"tol-newton", "Newton step tolerance"},
    {"tol-pdas", "outer-iteration tolerance"},
    {"max-pdas", "outer iteration cap"},
    {"max-newton", "Newton iteration cap"},
    {"quad-degree", "load quadrature degree"},
    {"convention", "active-set rule: complementary | paper"},
    {"warm-start-beta", "start Newton from the previous Airy field"},
    {"detect-cycles", "stop when an active set recurs without progress (true/false)"},
    {"obstacle-scale", "multiply the obstacle by this factor"},
    {"threads", "worker threads (default VKFEM_THREADS or all cores)"},
    {"output", "output directory"},
    {"csv", "write CSV files (true/false)"},
    {"svg", "write SVG plots (true/false)"},
    {"matrix-dump", "write the stiffness matrix (true/false)"},
    {"jsonl-log", "write a JSON-lines iteration log (true/false)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morley FEM solver for the von Karman obstacle problem"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_file;
  bool strict = false;
  app.add_option("--config", config_file, "key = value config file; flags override it");
  app.add_flag("--strict", strict, "exit with status 3 when a solve does not converge");

  std::map<std::string, std::string> values;
  auto add_flags = [&](CLI::App* sub, std::initializer_list<Flag> extra, bool common) {
    if (common)
      for (const Flag& f : kCommonFlags) sub->add_option(std::string("--") + f.name, values[f.name], f.help);
    for (const Flag& f : extra) sub->add_option(std::string("--") + f.name, values[f.name], f.help);
  };

  auto* solve = app.add_subcommand("solve", "solve on one level, write fields and logs");
  add_flags(solve, {{"level", "refinement level"}, {"tolerance", "coincidence tolerance"}}, true);
  auto* study = app.add_subcommand("study", "refinement study with errors and EOC table");
  add_flags(study, {{"levels", "reference level L (default 7, L-shape 6)"}}, true);
  auto* coincidence = app.add_subcommand("coincidence", "coincidence vertices as x,y,active CSV");
  add_flags(coincidence,
            {{"level", "refinement level"}, {"tolerance", "coincidence tolerance"},
             {"out", "CSV file (default stdout)"}},
            true);
  auto* smallness = app.add_subcommand("check-smallness", "data smallness diagnostics");
  add_flags(smallness,
            {{"problem", "problem preset or custom"}, {"domain", "custom domain"},
             {"chi", "custom obstacle"}, {"f", "custom load"},
             {"lshape-diagonal", "parallel | toward_corner | away_from_corner"},
             {"rayleigh-quad-degree", "quadrature degree for the trial function"},
             {"grid", "sampling points per axis for the sup norm"}},
            false);
  auto* mesh = app.add_subcommand("mesh", "generate, refine, read and export meshes");
  add_flags(mesh,
            {{"domain", "square | lshape"}, {"lshape-diagonal", "parallel | toward_corner | away_from_corner"},
             {"refine", "red refinements"}, {"mesh-in", "read this mesh file"},
             {"out", "write the mesh here"}, {"svg", "write mesh.svg (true/false)"},
             {"output", "directory for mesh.svg"}},
            false);
  auto* sweep = app.add_subcommand("scaling-sweep", "solve with scaled obstacles lambda*chi");
  add_flags(sweep,
            {{"lambdas", "comma-separated scale factors"},
             {"sweep-levels", "comma-separated levels"}},
            true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vkfem::kExitConfig;
  }

  vkfem::Config config;
  CLI::App* sub = app.get_subcommands().front();
  config.command = sub->get_name();
  try {
    if (!config_file.empty()) vkfem::apply_config_file(config, config_file);
    for (const auto& [name, value] : values) {
      const auto* opt = sub->get_option_no_throw("--" + name);
      if (opt && opt->count() > 0) vkfem::apply_config_entry(config, name, value);
    }
  } catch (const vkfem::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vkfem::kExitIo;
  } catch (const vkfem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vkfem::kExitConfig;
  }
  if (strict) config.strict = true;
  return vkfem::run(config, std::cout);
}

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vkfem/cli_io.hpp"
#include "vkfem/errors.hpp"
#include "vkfem/study.hpp"

namespace py = pybind11;
using namespace vkfem;

namespace {

Problem build_problem(const std::string& problem, const std::optional<std::string>& chi,
                      const std::optional<std::string>& f, const std::string& domain,
                      const std::string& diagonal) {
  Config c;
  c.problem = problem;
  c.domain = domain;
  if (chi) c.chi = *chi;
  if (f) c.f = *f;
  c.lshape_diagonal = parse_lshape_diagonal(diagonal);
  if ((chi || f) && problem != "custom") c.problem = "custom";
  return make_problem(c);
}

SolverOptions build_options(double tol_newton, double tol_pdas, int max_pdas, int max_newton,
                            const std::string& convention, double obstacle_scale) {
  SolverOptions o;
  o.tol_newton = tol_newton;
  o.tol_pdas = tol_pdas;
  o.max_pdas = max_pdas;
  o.max_newton = max_newton;
  o.convention = parse_active_set_convention(convention);
  o.obstacle_scale = obstacle_scale;
  return o;
}

Eigen::MatrixXd vertex_array(const Triangulation& mesh) {
  Eigen::MatrixXd xy(mesh.num_vertices(), 2);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    xy(i, 0) = mesh.vertices()[i].x;
    xy(i, 1) = mesh.vertices()[i].y;
  }
  return xy;
}

Eigen::VectorXd vertex_values(const MorleyCoeffs& field) {
  const auto& mesh = field.space->mesh();
  Eigen::VectorXd out(mesh.num_vertices());
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    out[i] = field.vertex_value(static_cast<int>(i));
  return out;
}

py::dict level_dict(const StudyLevel& l) {
  py::dict d;
  d["level"] = l.level;
  d["h"] = l.h;
  d["status"] = to_string(l.status);
  d["outer_iters"] = l.outer_iterations;
  d["max_newton_iters"] = l.max_newton_iterations;
  d["final_change"] = l.final_change;
  if (l.has_errors) {
    d["einf_u"] = l.einf_u;
    d["einf_v"] = l.einf_v;
    d["e_u"] = l.e_u;
    d["e_v"] = l.e_v;
  }
  d["eoc_inf_u"] = l.eoc_inf_u;
  d["eoc_inf_v"] = l.eoc_inf_v;
  d["eoc_u"] = l.eoc_u;
  d["eoc_v"] = l.eoc_v;
  d["coincidence"] = l.coincidence;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Morley FEM for the von Karman obstacle problem";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<SingularSystemError>(m, "SingularSystemError", PyExc_RuntimeError);

  py::class_<Expression>(m, "Expression")
      .def(py::init([](const std::string& text) { return Expression::parse(text); }))
      .def("__call__", &Expression::evaluate, py::arg("x"), py::arg("y"))
      .def("__str__", &Expression::to_string)
      .def_property_readonly("degree", &Expression::polynomial_degree);

  py::class_<Triangulation, std::shared_ptr<Triangulation>>(m, "Triangulation")
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("triangles",
                             [](const Triangulation& t) {
                               Eigen::MatrixXi tri(t.num_triangles(), 3);
                               for (std::size_t i = 0; i < t.num_triangles(); ++i)
                                 for (int k = 0; k < 3; ++k) tri(i, k) = t.triangles()[i][k];
                               return tri;
                             })
      .def_property_readonly("level", &Triangulation::level)
      .def_property_readonly("num_edges", &Triangulation::num_edges)
      .def("__str__", [](const Triangulation& t) {
        std::ostringstream s;
        write_mesh(s, t);
        return s.str();
      });

  m.def("make_square", [] { return std::make_shared<Triangulation>(make_square_crisscross()); });
  m.def("make_lshape", [](const std::string& diagonal) {
    return std::make_shared<Triangulation>(make_lshape(parse_lshape_diagonal(diagonal)));
  }, py::arg("diagonal") = "parallel");
  m.def("red_refine", [](const Triangulation& t) {
    return std::make_shared<Triangulation>(red_refine(t));
  });
  m.def("mesh_statistics", [](const Triangulation& t) {
    const MeshStatistics s = mesh_statistics(t);
    py::dict d;
    d["h_max"] = s.h_max;
    d["min_angle"] = s.min_angle;
    d["interior_vertices"] = s.interior_vertices;
    d["boundary_vertices"] = s.boundary_vertices;
    d["interior_edges"] = s.interior_edges;
    d["boundary_edges"] = s.boundary_edges;
    d["total_area"] = s.total_area;
    return d;
  });

  py::class_<SolveResult>(m, "SolveResult")
      .def_property_readonly("status", [](const SolveResult& r) { return to_string(r.status); })
      .def_property_readonly("u", [](const SolveResult& r) { return r.u.values; })
      .def_property_readonly("v", [](const SolveResult& r) { return r.v.values; })
      .def_property_readonly("multiplier", [](const SolveResult& r) { return r.lambda.values; })
      .def_property_readonly("u_vertex", [](const SolveResult& r) { return vertex_values(r.u); })
      .def_property_readonly("vertices", [](const SolveResult& r) {
        return vertex_array(r.u.space->mesh());
      })
      .def_property_readonly("active_set", [](const SolveResult& r) { return r.active_set; })
      .def_property_readonly("outer_iterations", [](const SolveResult& r) {
        return r.outer_iterations(SolvePhase::von_karman);
      })
      .def_property_readonly("max_newton_iterations", &SolveResult::max_newton_iterations)
      .def_property_readonly("log", [](const SolveResult& r) {
        std::ostringstream s;
        write_iteration_log(s, r);
        return s.str();
      });

  m.def(
      "solve",
      [](const std::string& problem, int level, std::optional<std::string> chi,
         std::optional<std::string> f, const std::string& domain, const std::string& diagonal,
         double tol_newton, double tol_pdas, int max_pdas, int max_newton,
         const std::string& convention, double obstacle_scale) {
        const Problem p = build_problem(problem, chi, f, domain, diagonal);
        const SolverOptions o =
            build_options(tol_newton, tol_pdas, max_pdas, max_newton, convention, obstacle_scale);
        const MeshHierarchy h(p.domain.initial_mesh(), level);
        py::gil_scoped_release release;
        return solve(make_spec(p, MorleySpace::create(h.level(level)), o));
      },
      py::arg("problem") = "example1", py::arg("level") = 3, py::arg("chi") = py::none(),
      py::arg("f") = py::none(), py::arg("domain") = "square",
      py::arg("lshape_diagonal") = "parallel", py::arg("tol_newton") = 1e-7,
      py::arg("tol_pdas") = 1e-7, py::arg("max_pdas") = 100, py::arg("max_newton") = 50,
      py::arg("convention") = "complementary", py::arg("obstacle_scale") = 1.0);

  m.def(
      "refinement_study",
      [](const std::string& problem, int levels, const std::string& diagonal, int threads) {
        const Problem p = build_problem(problem, std::nullopt, std::nullopt, "square", diagonal);
        StudyOptions o;
        o.threads = threads;
        StudyRun run;
        {
          py::gil_scoped_release release;
          run = refinement_study(p, levels > 0 ? levels : default_reference_level(p), o);
        }
        py::dict d;
        d["problem"] = run.report.problem;
        d["reference_level"] = run.report.reference_level;
        d["complete"] = run.report.complete;
        py::list rows;
        for (const auto& l : run.report.levels) rows.append(level_dict(l));
        d["levels"] = rows;
        std::ostringstream csv;
        write_study_csv(csv, run.report);
        d["csv"] = csv.str();
        return d;
      },
      py::arg("problem") = "example1", py::arg("levels") = 0,
      py::arg("lshape_diagonal") = "parallel", py::arg("threads") = 0);

  m.def(
      "eoc",
      [](const std::vector<double>& errors, const std::string& mode) {
        if (mode != "reference" && mode != "successive")
          throw ParseError("unknown EOC mode '" + mode + "'");
        return eoc(errors, mode == "reference" ? EocMode::reference : EocMode::successive);
      },
      py::arg("errors"), py::arg("mode") = "reference");

  m.def(
      "check_smallness",
      [](const std::string& problem, int grid) {
        const SmallnessReport s = check_smallness(preset_problem(problem), 16, grid);
        py::dict d;
        d["ratio_l2"] = s.rayleigh.ratio_l2;
        d["ratio_linf"] = s.rayleigh.ratio_linf;
        d["load_l2"] = s.load_l2;
        d["bound"] = s.bound;
        d["threshold"] = kSmallnessThreshold;
        d["violated"] = s.violated;
        return d;
      },
      py::arg("problem") = "example3", py::arg("grid") = 1001);

  m.def(
      "scaling_sweep",
      [](const std::string& problem, const std::vector<double>& lambdas,
         const std::vector<int>& levels, int max_pdas) {
        StudyOptions o;
        o.solver.max_pdas = max_pdas;
        std::vector<SweepEntry> entries;
        {
          py::gil_scoped_release release;
          entries = obstacle_scaling_sweep(preset_problem(problem), lambdas, levels, o);
        }
        py::list out;
        for (const auto& e : entries) {
          py::dict d;
          d["lambda"] = e.lambda;
          d["level"] = e.level;
          d["status"] = to_string(e.status);
          d["outer_iters"] = e.outer_iterations;
          d["min_gap"] = e.min_gap;
          out.append(d);
        }
        return out;
      },
      py::arg("problem"), py::arg("lambdas"), py::arg("levels"), py::arg("max_pdas") = 100);

  m.def("preset_names", &preset_names);
}

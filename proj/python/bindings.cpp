#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fronttrack/expr.hpp"
#include "fronttrack/flux.hpp"
#include "fronttrack/riemann.hpp"
#include "fronttrack/run.hpp"
#include "fronttrack/stationary.hpp"
#include "fronttrack/tracker.hpp"
#include "fronttrack/validation.hpp"

namespace py = pybind11;
namespace ft = fronttrack;

namespace {

ft::Interval to_interval(std::pair<double, double> p) { return {p.first, p.second}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Front tracking for scalar conservation laws with heterogeneous convex flux.";

  py::register_exception<ft::dsl::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ft::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ft::InvariantBreach>(m, "InvariantBreach", PyExc_RuntimeError);
  py::register_exception<ft::WindowExit>(m, "WindowExit", PyExc_RuntimeError);
  py::register_exception<ft::BracketError>(m, "BracketError", PyExc_ValueError);
  py::register_exception<ft::DegenerateFrontError>(m, "DegenerateFrontError", PyExc_ValueError);

  py::enum_<ft::dsl::Variable>(m, "Variable").value("x", ft::dsl::Variable::x).value("u", ft::dsl::Variable::u);

  py::class_<ft::dsl::FluxExpr>(m, "FluxExpr")
      .def("evaluate", &ft::dsl::FluxExpr::evaluate, py::arg("x"), py::arg("u"))
      .def("differentiate", &ft::dsl::FluxExpr::differentiate, py::arg("var"))
      .def("free_variables",
           [](const ft::dsl::FluxExpr& e) {
             std::vector<std::string> out;
             for (auto v : e.free_variables()) out.push_back(v == ft::dsl::Variable::x ? "x" : "u");
             return out;
           })
      .def("node_count", &ft::dsl::FluxExpr::node_count)
      .def("__str__", &ft::dsl::FluxExpr::to_string);
  m.def("parse", &ft::dsl::parse, py::arg("src"));
  m.def(
      "differentiate",
      [](const ft::dsl::FluxExpr& e, const std::string& var) {
        if (var != "x" && var != "u") throw py::value_error("var must be 'x' or 'u'");
        return e.differentiate(var == "x" ? ft::dsl::Variable::x : ft::dsl::Variable::u);
      },
      py::arg("expr"), py::arg("var"));

  py::class_<ft::Flux>(m, "Flux")
      .def("f", &ft::Flux::f, py::arg("x"), py::arg("u"))
      .def("fu", &ft::Flux::fu, py::arg("x"), py::arg("u"))
      .def("fx", &ft::Flux::fx, py::arg("x"), py::arg("u"))
      .def("fuu", &ft::Flux::fuu, py::arg("x"), py::arg("u"))
      .def("fxu", &ft::Flux::fxu, py::arg("x"), py::arg("u"))
      .def_property_readonly("alpha", &ft::Flux::alpha)
      .def_property_readonly("family", [](const ft::Flux& f) { return ft::to_string(f.family()); })
      .def("__repr__", &ft::Flux::describe);

  m.def(
      "make_builtin_flux",
      [](const std::string& family, double mean, double amplitude, double wavenumber, double phase,
         const std::string& expr) {
        ft::FluxParams p{mean, amplitude, wavenumber, phase, expr};
        return ft::make_builtin_flux(ft::flux_family_from_string(family), p);
      },
      py::arg("family"), py::arg("mean") = 1.0, py::arg("amplitude") = 0.0, py::arg("wavenumber") = 1.0,
      py::arg("phase") = 0.0, py::arg("expr") = "");
  m.def("make_expr_flux", py::overload_cast<const std::string&>(&ft::make_expr_flux), py::arg("src"));

  py::class_<ft::AssumptionReport>(m, "AssumptionReport")
      .def_readonly("passed", &ft::AssumptionReport::passed)
      .def_readonly("certified_alpha", &ft::AssumptionReport::certified_alpha)
      .def_readonly("min_fuu", &ft::AssumptionReport::min_fuu)
      .def_readonly("max_fuu", &ft::AssumptionReport::max_fuu)
      .def_property_readonly("violations", [](const ft::AssumptionReport& r) {
        std::vector<std::tuple<std::string, double, double, double>> out;
        for (const auto& v : r.violations) out.emplace_back(ft::to_string(v.assumption), v.x, v.u, v.observed);
        return out;
      });
  m.def(
      "audit_assumptions",
      [](const ft::Flux& flux, std::pair<double, double> x_box, std::pair<double, double> u_box, int nx, int nu) {
        return ft::audit_assumptions(flux, to_interval(x_box), to_interval(u_box), {nx, nu});
      },
      py::arg("flux"), py::arg("x_box"), py::arg("u_box"), py::arg("nx") = 64, py::arg("nu") = 64);
  m.def("certify", &ft::certify, py::arg("flux"), py::arg("report"));

  m.def("g_of", &ft::g_of, py::arg("flux"), py::arg("x"), py::arg("u"));
  m.def("invert_level", &ft::invert_level, py::arg("flux"), py::arg("x"), py::arg("level"),
        py::arg("tol_rel") = ft::kTolInv);
  m.def("inversion_gap_bound", &ft::inversion_gap_bound, py::arg("g1"), py::arg("g2"), py::arg("alpha"));

  m.def(
      "classify", [](double gl, double gr) { return ft::to_string(ft::classify(gl, gr)); }, py::arg("g_l"),
      py::arg("g_r"));
  m.def(
      "front_speed",
      [](const ft::Flux& flux, double gl, double gr, double y) {
        return ft::front_speed(flux, ft::GLevel(gl), ft::GLevel(gr), y);
      },
      py::arg("flux"), py::arg("g_left"), py::arg("g_right"), py::arg("y"));
  m.def(
      "build_fan",
      [](double gl, double gr, double delta) {
        std::vector<double> levels;
        for (auto g : ft::build_fan(ft::GLevel(gl), ft::GLevel(gr), delta).levels) levels.push_back(g.value);
        return levels;
      },
      py::arg("g_l"), py::arg("g_r"), py::arg("delta"));

  py::class_<ft::ApproxFlux>(m, "ApproxFlux")
      .def(py::init<ft::Flux, double>(), py::arg("flux"), py::arg("delta"))
      .def("eval", &ft::ApproxFlux::eval, py::arg("x"), py::arg("u"))
      .def("dx", &ft::ApproxFlux::dx, py::arg("x"), py::arg("u"))
      .def_property_readonly("delta", &ft::ApproxFlux::delta);

  py::class_<ft::Front>(m, "Front")
      .def_readonly("id", &ft::Front::id)
      .def_readonly("position", &ft::Front::position)
      .def_readonly("z_left", &ft::Front::z_left)
      .def_readonly("z_right", &ft::Front::z_right)
      .def_readonly("birth_time", &ft::Front::birth_time)
      .def_property_readonly("kind", [](const ft::Front& f) { return ft::to_string(f.kind); })
      .def("__repr__", [](const ft::Front& f) {
        return "Front(id=" + std::to_string(f.id) + ", position=" + ft::format_double(f.position) +
               ", z=" + std::to_string(f.z_left) + "->" + std::to_string(f.z_right) + ")";
      });

  py::class_<ft::FrontField>(m, "FrontField")
      .def_readonly("time", &ft::FrontField::time)
      .def_readonly("fronts", &ft::FrontField::fronts)
      .def_readonly("z_leftmost", &ft::FrontField::z_leftmost)
      .def_readonly("delta", &ft::FrontField::delta)
      .def("validate", &ft::FrontField::validate, py::arg("admissible") = true)
      .def("__len__", [](const ft::FrontField& f) { return f.fronts.size(); });

  py::class_<ft::Event>(m, "Event")
      .def_readonly("time", &ft::Event::time)
      .def_readonly("position", &ft::Event::position)
      .def_readonly("consumed", &ft::Event::consumed)
      .def_readonly("produced", &ft::Event::produced)
      .def_readonly("tv_before", &ft::Event::tv_before)
      .def_readonly("tv_after", &ft::Event::tv_after)
      .def_readonly("grazing", &ft::Event::grazing);

  py::class_<ft::QuantizedData>(m, "QuantizedData")
      .def_readonly("delta", &ft::QuantizedData::delta)
      .def_readonly("breaks", &ft::QuantizedData::breaks)
      .def_readonly("levels", &ft::QuantizedData::levels)
      .def_readonly("l1_bound", &ft::QuantizedData::l1_bound)
      .def("g_at", &ft::QuantizedData::g_at, py::arg("x"));

  m.def(
      "quantize_initial",
      [](const ft::Flux& flux, const std::function<double(double)>& u0, double delta, std::pair<double, double> window,
         int cells, const std::string& boundary) {
        return ft::quantize_initial(flux, u0, delta, to_interval(window), cells, ft::boundary_from_string(boundary));
      },
      py::arg("flux"), py::arg("u0"), py::arg("delta"), py::arg("window"), py::arg("cells"),
      py::arg("boundary") = "zero");
  m.def("initial_fronts", &ft::initial_fronts, py::arg("data"));
  m.def(
      "resolve_collision",
      [](ft::FrontField field, std::vector<std::int64_t> ids, double rho, double tau) {
        auto produced = ft::resolve_collision(field, ids, rho, tau);
        return std::pair{field, produced};
      },
      py::arg("field"), py::arg("ids"), py::arg("rho"), py::arg("tau"),
      "Returns (new_field, produced_front_or_None).");
  m.def("sample_z", &ft::sample_z, py::arg("field"), py::arg("x"));
  m.def("sample_g", &ft::sample_g, py::arg("field"), py::arg("x"));
  m.def("tv_g", &ft::tv_g, py::arg("field"));

  py::class_<ft::FrontTracker>(m, "FrontTracker")
      .def(py::init([](const ft::Flux& flux, double delta, double h_ode) {
             ft::TrackerOptions o;
             o.h_ode = h_ode;
             return std::make_unique<ft::FrontTracker>(flux, delta, o);
           }),
           py::arg("flux"), py::arg("delta"), py::arg("h_ode") = 1e-3)
      .def(
          "advance",
          [](const ft::FrontTracker& t, ft::FrontField field, double t_target) {
            py::gil_scoped_release release;
            return t.advance(std::move(field), t_target);
          },
          py::arg("field"), py::arg("t_target"), "Returns (field, events).")
      .def("sample_u", &ft::FrontTracker::sample_u, py::arg("field"), py::arg("x"))
      .def("speed", &ft::FrontTracker::speed, py::arg("front"), py::arg("y"))
      .def_property_readonly("delta", &ft::FrontTracker::delta);

  // Event logs cross as plain lists of events.
  py::class_<ft::EventLog>(m, "EventLog")
      .def_readonly("events", &ft::EventLog::events)
      .def("__len__", [](const ft::EventLog& l) { return l.events.size(); });

  m.def(
      "characteristic_check",
      [](const ft::Flux& flux, double x0, double u0, double T, int steps) {
        const auto r = ft::characteristic_check(flux, x0, u0, T, steps);
        return std::tuple{r.drift, r.y_end, r.u_end};
      },
      py::arg("flux"), py::arg("x0"), py::arg("u0"), py::arg("T"), py::arg("steps"),
      "Returns (drift, y_end, u_end).");
  m.def(
      "fv_reference",
      [](const ft::Flux& flux, const std::function<double(double)>& u0, std::pair<double, double> window, int cells,
         double T, double cfl) {
        const auto g = ft::fv_reference(flux, u0, to_interval(window), cells, T, cfl);
        return std::pair{g.u, g.dx};
      },
      py::arg("flux"), py::arg("u0"), py::arg("window"), py::arg("cells"), py::arg("T"), py::arg("cfl") = 0.45,
      "Returns (cell_averages, dx).");

  m.def("parse_config", &ft::parse_config_string, py::arg("text"));
  py::class_<ft::RunConfig>(m, "RunConfig")
      .def_readwrite("name", &ft::RunConfig::name)
      .def_readwrite("delta", &ft::RunConfig::delta)
      .def_readwrite("t_end", &ft::RunConfig::t_end)
      .def("echo", &ft::RunConfig::echo);
  m.def(
      "run",
      [](const ft::RunConfig& config, const std::filesystem::path& out_dir) {
        ft::RunResult r;
        {
          py::gil_scoped_release release;
          r = ft::run(config, out_dir);
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["error"] = r.error;
        d["manifest"] = r.manifest_json;
        d["final"] = r.final;
        d["events"] = r.log.events;
        return d;
      },
      py::arg("config"), py::arg("out_dir"));
}

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "ffext/curves.hpp"
#include "ffext/distance_lab.hpp"
#include "ffext/extension_lab.hpp"
#include "ffext/finite_field.hpp"
#include "ffext/plane_fourier.hpp"
#include "ffext/verify.hpp"

namespace py = pybind11;
using namespace ffext;

namespace {

// Reports are built as JSON in the core; hand them over as plain dicts.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

using PyPoint = std::pair<std::uint32_t, std::uint32_t>;

PlanePoint to_point(const Field& f, PyPoint x) {
  if (x.first >= f.q() || x.second >= f.q()) throw Error(ErrorCode::InvalidArgument, "point outside the plane");
  return PlanePoint{Elem{x.first}, Elem{x.second}};
}

std::vector<PlanePoint> to_points(const Field& f, const std::vector<PyPoint>& xs) {
  std::vector<PlanePoint> out;
  out.reserve(xs.size());
  for (const PyPoint& x : xs) out.push_back(to_point(f, x));
  return out;
}

std::vector<PyPoint> from_points(const std::vector<PlanePoint>& xs) {
  std::vector<PyPoint> out;
  out.reserve(xs.size());
  for (const PlanePoint& x : xs) out.emplace_back(x.x1.v, x.x2.v);
  return out;
}

Elem elem(const Field& f, std::uint32_t v) { return f.element(v); }

}  // namespace

PYBIND11_MODULE(_ffext, m) {
  m.doc() = "Finite-field Fourier analysis, extension estimates and distance sets";

  static py::exception<Error> error(m, "FfextError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // the instance carries the stable error code name as `.code`
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  py::class_<Field>(m, "Field")
      .def(py::init([](std::uint32_t p, std::uint32_t k) { return Field::create(p, k); }), py::arg("p"),
           py::arg("k") = 1)
      .def_static("of_order", [](std::uint32_t q) { return Field::of_order(q); })
      .def_property_readonly("p", &Field::p)
      .def_property_readonly("k", &Field::k)
      .def_property_readonly("q", &Field::q)
      .def_property_readonly("modulus", [](const Field& f) {
        const auto mod = f.modulus();
        return std::vector<std::uint32_t>(mod.begin(), mod.end());
      })
      .def("modulus_string", &Field::modulus_string)
      .def("add", [](const Field& f, std::uint32_t a, std::uint32_t b) { return f.add(elem(f, a), elem(f, b)).v; })
      .def("sub", [](const Field& f, std::uint32_t a, std::uint32_t b) { return f.sub(elem(f, a), elem(f, b)).v; })
      .def("mul", [](const Field& f, std::uint32_t a, std::uint32_t b) { return f.mul(elem(f, a), elem(f, b)).v; })
      .def("inv", [](const Field& f, std::uint32_t a) { return f.inv(elem(f, a)).v; })
      .def("pow", [](const Field& f, std::uint32_t a, std::uint64_t e) { return f.pow(elem(f, a), e).v; })
      .def("trace", [](const Field& f, std::uint32_t a) { return f.trace(elem(f, a)); })
      .def("chi", [](const Field& f, std::uint32_t a) { return f.chi(elem(f, a)); })
      .def("eta", [](const Field& f, std::uint32_t a) { return f.eta(elem(f, a)); })
      .def("gauss_sum", &Field::gauss_sum)
      .def("gauss_sum_closed_form", &Field::gauss_sum_closed_form)
      .def("__repr__", [](const Field& f) { return "Field(q=" + std::to_string(f.q()) + ", modulus=" + f.modulus_string() + ")"; });

  py::class_<PlaneFunction>(m, "PlaneFunction")
      .def(py::init([](const Field& f, const std::string& space, std::vector<Complex> values) {
             return PlaneFunction(f, space_from_string(space), std::move(values));
           }),
           py::arg("field"), py::arg("space"), py::arg("values"))
      .def_property_readonly("space", [](const PlaneFunction& g) { return std::string(to_string(g.space())); })
      .def_property_readonly("values", [](const PlaneFunction& g) {
        return std::vector<Complex>(g.values().begin(), g.values().end());
      })
      .def("__getitem__", [](const PlaneFunction& g, PyPoint x) { return g(to_point(g.field(), x)); });

  m.def("forward_ft", &forward_ft);
  m.def("inverse_ft", &inverse_ft);
  m.def("dual_ft", &dual_ft);
  m.def("convolve", &convolve);
  m.def("norm_lp", &norm_lp, py::arg("f"), py::arg("exponent"));

  py::class_<BivariatePoly>(m, "Poly")
      .def_property_readonly("degree", &BivariatePoly::degree)
      .def("__call__", [](const BivariatePoly& p, PyPoint x) { return p.eval(to_point(p.field(), x)).v; })
      .def("__str__", &BivariatePoly::to_string);
  m.def("parse_poly", [](const std::string& text, const Field& f) { return parse_poly(text, f); });

  py::class_<Variety>(m, "Variety")
      .def(py::init<BivariatePoly>())
      .def_property_readonly("cardinality", &Variety::cardinality)
      .def_property_readonly("points", [](const Variety& v) { return from_points(v.points()); })
      .def("contains_line", [](const Variety& v) -> std::optional<std::string> {
        const auto l = contains_line(v.poly());
        if (!l) return std::nullopt;
        return to_string(v.field(), *l);
      })
      .def("to_dict", [](const Variety& v) { return to_py(to_json(v)); });

  py::class_<SurfaceMeasure>(m, "SurfaceMeasure")
      .def(py::init<Variety>())
      .def_property_readonly("size", &SurfaceMeasure::size)
      .def("total_mass", &SurfaceMeasure::total_mass);

  m.def("extend", [](const std::vector<Complex>& f, const SurfaceMeasure& s) { return extend(f, s); });
  m.def("rstar_ratio", [](const std::vector<Complex>& f, const SurfaceMeasure& s, double p, double r) {
    return rstar_ratio(f, s, p, r);
  });
  m.def(
      "estimate_rstar",
      [](const SurfaceMeasure& s, double p, double r, std::size_t restarts, std::uint64_t seed) {
        AscentOptions opt;
        opt.restarts = restarts;
        opt.seed = seed;
        const RstarEstimate est = estimate_rstar(s, p, r, opt);
        py::dict d;
        d["ratio"] = est.ratio;
        d["witness"] = est.witness;
        d["witness_origin"] = est.witness_origin;
        d["nonneg_ratio"] = est.nonneg_ratio;
        d["exhaustive_floor"] = est.exhaustive_floor;
        return d;
      },
      py::arg("sigma"), py::arg("p") = 2.0, py::arg("r") = 4.0, py::arg("restarts") = 32, py::arg("seed") = 42);
  m.def("additive_energy", &additive_energy);
  m.def("rstar_upper_bound_2_4", &rstar_upper_bound_2_4);
  m.def("necessary_conditions", [](double p, double r, double s, int alpha) {
    const NecessaryConditions nc = necessary_conditions(p, r, s, alpha);
    py::dict d;
    d["bound_dimension"] = nc.bound_dimension;
    d["bound_point"] = nc.bound_point;
    d["bound_subspace"] = nc.bound_subspace;
    d["admissible"] = nc.admissible;
    return d;
  });
  m.def(
      "analyze_extension",
      [](const BivariatePoly& poly, double p, double r, std::size_t restarts, std::uint64_t seed) {
        AscentOptions opt;
        opt.restarts = restarts;
        opt.seed = seed;
        return to_py(to_json(analyze_extension(poly, p, r, opt)));
      },
      py::arg("poly"), py::arg("p") = 2.0, py::arg("r") = 4.0, py::arg("restarts") = 32, py::arg("seed") = 42);

  py::class_<LevelSetFamily>(m, "LevelSetFamily")
      .def_static("circle", &LevelSetFamily::circle)
      .def_static("diagonal", [](const Field& f, std::uint32_t a1, std::uint32_t a2, std::uint32_t d) {
        return LevelSetFamily::diagonal(f, elem(f, a1), elem(f, a2), d);
      })
      .def("level_size", [](const LevelSetFamily& fam, std::uint32_t t) { return fam.level_size(elem(fam.field(), t)); });

  m.def("counting_function",
        [](const Field& f, const std::vector<PyPoint>& E, const std::vector<PyPoint>& F, const LevelSetFamily& fam) {
          return counting_function(make_pair(f, to_points(f, E), to_points(f, F)), fam).values;
        });
  m.def(
      "distance_set",
      [](const Field& f, const std::vector<PyPoint>& E, const std::vector<PyPoint>& F, std::uint32_t n) {
        std::vector<std::uint32_t> out;
        for (Elem t : distance_set(make_pair(f, to_points(f, E), to_points(f, F)), n)) out.push_back(t.v);
        return out;
      },
      py::arg("field"), py::arg("E"), py::arg("F"), py::arg("n") = 2);
  m.def("sphere_ft_explicit", [](const LevelSetFamily& fam, std::uint32_t t, PyPoint x) {
    return sphere_ft_explicit(fam, elem(fam.field(), t), to_point(fam.field(), x));
  });
  m.def("keylemma_sum", [](const LevelSetFamily& fam, PyPoint x) {
    const KeylemmaSum k = keylemma_sum(fam, to_point(fam.field(), x));
    py::dict d;
    d["value"] = k.value;
    d["first_piece"] = k.first_piece;
    d["second_piece"] = k.second_piece;
    return d;
  });
  m.def("double_decay_sum", [](const LevelSetFamily& fam, PyPoint a, PyPoint b) {
    const DoubleDecay dd = double_decay_sum(fam, to_point(fam.field(), a), to_point(fam.field(), b));
    return std::make_pair(dd.lhs, dd.rhs);
  });
  m.def("second_moment_decomposition",
        [](const Field& f, const std::vector<PyPoint>& E, const std::vector<PyPoint>& F, const LevelSetFamily& fam) {
          const SecondMoment s = second_moment_decomposition(make_pair(f, to_points(f, E), to_points(f, F)), fam);
          py::dict d;
          d["direct"] = s.direct;
          d["I"] = s.I;
          d["II"] = s.II;
          d["III"] = s.III;
          d["III_1"] = s.III_1;
          d["III_2"] = s.III_2;
          d["main_term"] = s.main_term;
          d["remainder"] = s.remainder;
          return d;
        });
  m.def(
      "falconer_experiment",
      [](std::uint32_t q, std::size_t size_e, std::size_t size_f, std::size_t trials, std::uint64_t seed,
         const std::vector<std::string>& generators) {
        ExperimentConfig cfg;
        cfg.q = q;
        cfg.size_E = size_e;
        cfg.size_F = size_f;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.generators.clear();
        for (const std::string& g : generators) cfg.generators.push_back(generator_from_string(g));
        const ExperimentReport rep = falconer_experiment(cfg);
        nlohmann::json rows = nlohmann::json::array();
        for (const ExperimentRow& r : rep.rows) rows.push_back(to_json(r));
        return to_py({{"rows", rows}, {"summary", to_json(rep.summary)}});
      },
      py::arg("q"), py::arg("size_e"), py::arg("size_f"), py::arg("trials") = 1, py::arg("seed") = 42,
      py::arg("generators") = std::vector<std::string>{"uniform"});

  m.def(
      "run_suite",
      [](const std::string& suite, const std::vector<std::uint32_t>& qs, std::uint64_t seed) {
        VerifyOptions opt;
        opt.seed = seed;
        nlohmann::json out = nlohmann::json::array();
        for (const VerifyCheck& c : run_suite(suite, qs, opt)) out.push_back(to_json(c));
        return to_py(out);
      },
      py::arg("suite"), py::arg("qs"), py::arg("seed") = 42);
}

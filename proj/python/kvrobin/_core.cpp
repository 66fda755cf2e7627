#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "kvrobin/error.hpp"
#include "kvrobin/experiment.hpp"
#include "kvrobin/svg.hpp"

namespace py = pybind11;
using namespace kvrobin;

namespace {

py::dict row_dict(const SweepRow& r) {
  py::dict d;
  d["delta"] = r.delta;
  d["h"] = r.h;
  d["tau"] = r.tau;
  d["alpha"] = r.alpha;
  d["seed"] = r.seed;
  d["e_q"] = r.e_q;
  d["J"] = r.J;
  d["iters"] = r.iters;
  d["seconds"] = r.seconds;
  d["error"] = r.error;
  return d;
}

py::dict history_dict(const std::vector<HistoryRow>& rows) {
  std::vector<int> k;
  std::vector<double> J, e_q, step;
  for (const auto& r : rows) {
    k.push_back(r.k);
    J.push_back(r.J);
    e_q.push_back(r.e_q);
    step.push_back(r.step);
  }
  py::dict d;
  d["k"] = py::array(py::cast(k));
  d["J"] = py::array(py::cast(J));
  d["e_q"] = py::array(py::cast(e_q));
  d["step"] = py::array(py::cast(step));
  return d;
}

ExperimentConfig config_from_text(const std::string& text) {
  std::istringstream in(text);
  return ExperimentConfig::from(KeyValueConfig::parse(in));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robin coefficient reconstruction with a Kohn-Vogelius functional";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<RobinCoefficient>(m, "RobinCoefficient")
      .def(py::init([](double length, std::vector<double> breakpoints, std::vector<double> values, double lower,
                       double upper) {
             return RobinCoefficient(length, std::move(breakpoints), std::move(values), CoefficientBounds{lower, upper});
           }),
           py::arg("length"), py::arg("breakpoints"), py::arg("values"), py::arg("lower") = 0.1,
           py::arg("upper") = 10.0)
      .def_property_readonly("length", &RobinCoefficient::length)
      .def_property_readonly("breakpoints", &RobinCoefficient::breakpoints)
      .def_property_readonly("values", &RobinCoefficient::values)
      .def("__call__", py::vectorize(&RobinCoefficient::evaluate), py::arg("s"))
      .def("__eq__", [](const RobinCoefficient& a, const RobinCoefficient& b) { return a == b; })
      .def("__repr__", [](const RobinCoefficient& q) {
        std::ostringstream s;
        write_coefficient(s, q);
        return s.str();
      });

  m.def("relative_error", &relative_error_eq, py::arg("q_star"), py::arg("q_dag"),
        "Relative L2 error of q_star against q_dag on the inaccessible boundary.");

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("load", [](const std::filesystem::path& p) { return ExperimentConfig::load(p); }, py::arg("path"))
      .def_static("parse", &config_from_text, py::arg("text"))
      .def_readonly("name", &ExperimentConfig::name)
      .def_readonly("deltas", &ExperimentConfig::deltas)
      .def_readonly("seeds", &ExperimentConfig::seeds)
      .def_readonly("q_dag", &ExperimentConfig::q_dag)
      .def_readonly("q0", &ExperimentConfig::q0)
      .def_readonly("known_partition", &ExperimentConfig::known_partition)
      .def_property_readonly("model",
                             [](const ExperimentConfig& c) { return c.model == Model::Elliptic ? "elliptic" : "parabolic"; })
      .def_property(
          "max_iterations", [](const ExperimentConfig& c) { return c.optimizer.max_iterations; },
          [](ExperimentConfig& c, int n) {
            c.optimizer.max_iterations = n;
            c.optimizer.validate();
          })
      .def("discretise", [](const ExperimentConfig& c, double delta) {
        const auto d = discretise(c, delta);
        py::dict out;
        out["delta"] = d.delta;
        out["h"] = d.h;
        out["tau"] = d.tau;
        out["alpha"] = d.alpha;
        return out;
      });

  m.def(
      "mesh",
      [](const ExperimentConfig& c, double delta) {
        const auto p = prepare_problem(c, delta);
        const auto& mesh = *p.mesh;
        py::array_t<double> v({static_cast<py::ssize_t>(mesh.vertices.size()), py::ssize_t{2}});
        auto vv = v.mutable_unchecked<2>();
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
          vv(i, 0) = mesh.vertices[i].x;
          vv(i, 1) = mesh.vertices[i].y;
        }
        py::array_t<int> t({static_cast<py::ssize_t>(mesh.triangles.size()), py::ssize_t{3}});
        auto tt = t.mutable_unchecked<2>();
        for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
          for (int k = 0; k < 3; ++k) tt(i, k) = mesh.triangles[i][k];
        }
        return py::make_tuple(v, t);
      },
      py::arg("config"), py::arg("delta"), "Inversion mesh for `delta` as (vertices, triangles).");

  m.def(
      "forward",
      [](const ExperimentConfig& c, double delta, std::uint64_t seed) {
        const auto p = prepare_problem(c, delta);
        const auto z = transfer_to_coarse(add_noise(p.exact_fine, NoiseSpec{delta, seed}), *p.space);
        py::dict out;
        out["s_fine"] = py::array(py::cast(p.exact_fine.s));
        out["f"] = py::array(py::cast(p.exact_fine.values));
        out["s"] = py::array(py::cast(z.s));
        out["z"] = py::array(py::cast(z.values));
        return out;
      },
      py::arg("config"), py::arg("delta"), py::arg("seed"),
      "Exact fine-mesh data and the noisy trace projected onto the inversion mesh.");

  m.def(
      "invert",
      [](const ExperimentConfig& c, double delta, std::uint64_t seed, std::optional<std::filesystem::path> out_dir) {
        RunOutput out;
        {
          py::gil_scoped_release release;
          out = run_single(c, delta, seed, out_dir);
        }
        py::dict d = row_dict(out.row);
        d["q_star"] = out.result.q_star;
        d["termination"] = std::string(to_string(out.result.reason));
        d["history"] = history_dict(out.result.history);
        return d;
      },
      py::arg("config"), py::arg("delta"), py::arg("seed"), py::arg("out_dir") = py::none());

  m.def(
      "sweep",
      [](const ExperimentConfig& c, int threads, std::optional<std::filesystem::path> out_dir) {
        SweepReport r;
        {
          py::gil_scoped_release release;
          r = run_sweep(c, threads, out_dir);
        }
        py::list rows;
        for (const auto& row : r.rows) rows.append(row_dict(row));
        py::dict d;
        d["rows"] = rows;
        d["medians"] = r.medians;
        if (r.rate) {
          d["rate"] = r.rate->slope;
          d["rate_half_width"] = r.rate->half_width;
        } else {
          d["rate"] = py::none();
          d["rate_half_width"] = py::none();
        }
        return d;
      },
      py::arg("config"), py::arg("threads") = 1, py::arg("out_dir") = py::none());

  m.def(
      "estimate_rate",
      [](const std::vector<std::pair<double, double>>& pairs) {
        const auto f = estimate_rate(pairs);
        return py::make_tuple(f.slope, f.half_width);
      },
      py::arg("pairs"), "Least-squares slope of log error against log delta and its 95% half-width.");

  m.def("reconstruction_svg", &reconstruction_svg, py::arg("q_star"), py::arg("q_dag"));
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bzeta/model_io.hpp"
#include "commands.hpp"

namespace py = pybind11;
using namespace bzeta;

namespace {

cli::Flags make_flags(const std::string& schedule, double damping, std::optional<double> tol,
                      std::optional<int> max_iters, const std::string& init, std::uint64_t seed, int samples,
                      int max_cycle_len) {
  cli::Flags f;
  f.schedule = schedule;
  f.damping = damping;
  f.tol = tol;
  f.max_iters = max_iters;
  f.init = init;
  f.seed = seed;
  f.samples = samples;
  f.max_cycle_len = max_cycle_len;
  return f;
}

py::tuple result(const cli::Output& o) { return py::make_tuple(o.exit_code, o.text, o.message); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bethe free energy, graph zeta and loopy belief propagation";
  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  static py::exception<InputError> input_error(m, "InputError", PyExc_ValueError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const DomainError& e) {
      py::set_error(numerical_error, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical_error, e.what());
    }
  });

  m.def("canonical_model", [](const std::string& text) { return serialize_model(parse_model(text)); },
        py::arg("text"), "Parse a model document and return its explicit canonical form.");

  m.def(
      "lbp_run",
      [](const std::string& text, const std::string& schedule, double damping, std::optional<double> tol,
         std::optional<int> max_iters, const std::string& init, std::uint64_t seed) {
        ModelSpec model = parse_model(text);
        py::gil_scoped_release release;
        return cli::lbp_run(model, make_flags(schedule, damping, tol, max_iters, init, seed, 50, 12));
      },
      py::arg("text"), py::arg("schedule") = "parallel", py::arg("damping") = 0.0, py::arg("tol") = py::none(),
      py::arg("max_iters") = py::none(), py::arg("init") = "", py::arg("seed") = 0);

  m.def(
      "verify",
      [](const std::string& text, const std::string& which, int samples, std::uint64_t seed,
         std::optional<double> tol, std::optional<int> max_iters) {
        ModelSpec model = parse_model(text);
        py::gil_scoped_release release;
        return cli::verify(model, which, make_flags("parallel", 0.0, tol, max_iters, "", seed, samples, 12));
      },
      py::arg("text"), py::arg("which"), py::arg("samples") = 50, py::arg("seed") = 0, py::arg("tol") = py::none(),
      py::arg("max_iters") = py::none());

  m.def(
      "zeta_info",
      [](const std::string& text, double u, int max_cycle_len) {
        ModelSpec model = parse_model(text);
        py::gil_scoped_release release;
        return cli::zeta_info(model, u, make_flags("parallel", 0.0, {}, {}, "", 0, 50, max_cycle_len));
      },
      py::arg("text"), py::arg("u") = 0.5, py::arg("max_cycle_len") = 12);

  m.def(
      "experiment_grid",
      [](double kmin, double kmax, double jmin, double jmax, int steps, std::optional<double> tol,
         std::optional<int> max_iters) {
        py::gil_scoped_release release;
        return cli::experiment_grid(kmin, kmax, jmin, jmax, steps,
                                    make_flags("parallel", 0.0, tol, max_iters, "", 0, 50, 12));
      },
      py::arg("kmin") = -1.0, py::arg("kmax") = 1.0, py::arg("jmin") = -1.0, py::arg("jmax") = 1.0,
      py::arg("steps") = 41, py::arg("tol") = py::none(), py::arg("max_iters") = py::none());

  m.def(
      "experiment_wn",
      [](double kmin, double kmax, int steps) {
        py::gil_scoped_release release;
        return cli::experiment_wn(kmin, kmax, steps, {});
      },
      py::arg("kmin") = -2.0, py::arg("kmax") = 2.0, py::arg("steps") = 41);

  m.def(
      "experiment_trajectory",
      [](const std::string& text, double tmax, int steps, double damping) {
        ModelSpec model = parse_model(text);
        py::gil_scoped_release release;
        return cli::experiment_trajectory(model, tmax, steps, damping, {});
      },
      py::arg("text"), py::arg("tmax") = 0.5, py::arg("steps") = 100, py::arg("damping") = 0.25);

  py::class_<cli::Output>(m, "Output")
      .def_readonly("exit_code", &cli::Output::exit_code)
      .def_readonly("text", &cli::Output::text)
      .def_readonly("message", &cli::Output::message)
      .def("__iter__", [](const cli::Output& o) { return py::iter(result(o)); });
}

#include "fate/cli.hpp"
#include "fate/dgp.hpp"
#include "fate/errors.hpp"
#include "fate/fate.hpp"
#include "fate/iv.hpp"
#include "fate/mc.hpp"
#include "fate/serialize.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace fate;

namespace {

// Results cross the boundary as JSON text; the Python side decodes them.
Dataset make_dataset(const Matrix& y, const Vector& d, const Matrix& z, const std::optional<Matrix>& x) {
  Dataset data;
  data.y = y;
  data.d = d;
  data.z = z;
  if (x) {
    data.x.resize(y.rows(), x->cols() + 1);
    data.x << Vector::Ones(y.rows()), *x;
  } else {
    data.x = Matrix::Ones(y.rows(), 1);
  }
  data.control_names.push_back(kInterceptName);
  for (long c = 1; c < data.x.cols(); ++c) data.control_names.push_back("x" + std::to_string(c));
  ensure_names(data);
  validate(data);
  return data;
}

std::string pi_json(const Matrix& y, const Vector& d, const Matrix& z, const std::optional<Matrix>& x) {
  const Dataset data = make_dataset(y, d, z, x);
  const auto pi = iv::pi_matrix(data);
  const auto fs = iv::first_stage(data);
  return serialize::Json{{"pi", serialize::to_json(pi)}, {"first_stage", serialize::to_json(fs, data)}}.dump();
}

std::string fit_json(const Matrix& y, const Vector& d, const Matrix& z, const std::optional<Matrix>& x, int l,
                     const std::vector<std::string>& defining, const std::string& weighting) {
  FateSpec spec;
  spec.L = l;
  spec.defining_instruments = defining;
  if (weighting == "identity") {
    spec.weighting = Weighting::Identity;
  } else if (weighting != "two_step") {
    throw Error(ErrorKind::InvalidConfig, "weighting must be 'two_step' or 'identity'");
  }
  return serialize::to_json(fate_fit(make_dataset(y, d, z, x), spec)).dump();
}

std::string iv_gmm_json(const Matrix& y, const Vector& d, const Matrix& z, const std::optional<Matrix>& x) {
  const Dataset data = make_dataset(y, d, z, x);
  return serialize::to_json(iv::iv_gmm(data), data).dump();
}

std::string identification_json(long k, long j, long l, long r) {
  return serialize::to_json(check_identification(k, j, l, r)).dump();
}

std::string montecarlo_json(const std::string& name, std::uint64_t seed, long reps, long n, int threads) {
  auto s = mc::find_scenario(name);
  if (reps > 0) s.reps = reps;
  if (n > 0) s.n = n;
  return serialize::to_json(mc::run_scenario(s, seed, {threads, false})).dump();
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Factor-augmented treatment effects";
  static py::exception<Error> error_type(m, "FateError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string kind(to_string(e.kind()));
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(kind + ": " + e.what());
      exc.attr("kind") = kind;
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("pi_matrix", &pi_json, py::arg("y"), py::arg("d"), py::arg("z"), py::arg("x") = std::nullopt);
  m.def("fit", &fit_json, py::arg("y"), py::arg("d"), py::arg("z"), py::arg("x") = std::nullopt,
        py::arg("L") = 1, py::arg("defining") = std::vector<std::string>{}, py::arg("weighting") = "two_step");
  m.def("iv_gmm", &iv_gmm_json, py::arg("y"), py::arg("d"), py::arg("z"), py::arg("x") = std::nullopt);
  m.def("check_identification", &identification_json, py::arg("K"), py::arg("J"), py::arg("L"),
        py::arg("R") = 1);
  m.def("montecarlo", &montecarlo_json, py::arg("scenario"), py::arg("seed") = 1, py::arg("reps") = 0,
        py::arg("n") = 0, py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("run_cli", &run_cli, py::arg("args"));
  m.def("scenario_names", &mc::scenario_names);
}

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "resflow/boundary.hpp"
#include "resflow/builtins.hpp"
#include "resflow/embedded.hpp"
#include "resflow/index_flow.hpp"
#include "resflow/report.hpp"
#include "resflow/verify.hpp"

namespace py = pybind11;
using namespace resflow;

namespace {

// Holder so the variant is exposed as one opaque class instead of going through the std::variant caster.
struct Model {
  OperatorModel m;
};

const FinitePencil& finite(const Model& w) {
  if (auto p = std::get_if<FinitePencil>(&w.m)) return *p;
  throw Error(ErrorCode::InvalidArgument, "this routine needs a finite pencil");
}

// Reports cross the boundary as JSON text; the Python side turns them into dicts.
std::string analyze_json(const Model& mm, double lambda, std::optional<std::pair<double, double>> interval,
                         std::optional<double> at, bool strict, bool classify) {
  return report_to_json(analyze(mm.m, lambda, {interval, at, strict, classify})).dump();
}

}  // namespace

PYBIND11_MODULE(_resflow, mod) {
  mod.doc() = "Resonance index and spectral flow for finite-rank perturbation models";

  static py::exception<Error> error(mod, "ResflowError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("code") = error_name(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<Model>(mod, "Model")
      .def_property_readonly("kind", [](const Model& w) { return std::string(model_kind(w.m)); })
      .def_property_readonly("dim", [](const Model& w) { return model_dim(w.m); })
      .def_property_readonly("digest", [](const Model& w) { return model_digest(w.m); })
      .def("to_json", [](const Model& w) { return model_to_json(w.m).dump(); })
      .def("__repr__", [](const Model& w) {
        return "<Model " + std::string(model_kind(w.m)) + " dim=" + std::to_string(model_dim(w.m)) + ">";
      });

  mod.def(
      "finite_pencil",
      [](const CMatrix& h0, const CMatrix& v) { return Model{FinitePencil::make(HermitianMatrix(h0), HermitianMatrix(v))}; },
      py::arg("h0"), py::arg("v"));
  mod.def(
      "rigged_pencil",
      [](const CMatrix& h0, const CMatrix& f, const CMatrix& j) {
        return Model{FinitePencil::make_rigged(HermitianMatrix(h0), f, HermitianMatrix(j))};
      },
      py::arg("h0"), py::arg("f"), py::arg("j"));
  mod.def("parse_model", [](const std::string& text) { return Model{parse_model(text)}; }, py::arg("text"));
  mod.def("load_model", [](const std::string& path) { return Model{load_model(path)}; }, py::arg("path"));
  mod.def(
      "construct_finite_example",
      [](double lambda, int d, std::uint64_t seed) { return Model{construct_finite_example(lambda, d, seed)}; },
      py::arg("lam"), py::arg("d"), py::arg("seed") = 0);
  mod.def(
      "embedded_example", [](int order, std::uint64_t seed) { return Model{embedded_continuum_example(order, seed)}; },
      py::arg("order"), py::arg("seed") = 0);

  py::class_<IndexReport>(mod, "IndexReport")
      .def_readonly("r_lambda", &IndexReport::r_lambda)
      .def_readonly("ind_splitting", &IndexReport::ind_splitting)
      .def_readonly("ind_rindex", &IndexReport::ind_rindex)
      .def_readonly("ind_signature", &IndexReport::ind_signature)
      .def_readonly("n_plus", &IndexReport::N_plus)
      .def_readonly("n_minus", &IndexReport::N_minus)
      .def_readonly("order", &IndexReport::order_d)
      .def_readonly("dim_upsilon1", &IndexReport::dim_upsilon1)
      .def_readonly("consistency", &IndexReport::consistency)
      .def_property_readonly("index", &IndexReport::index);

  mod.def(
      "resonance_index",
      [](const Model& w, double lambda, double r, bool strict) { return resonance_index(w.m, lambda, r, strict); },
      py::arg("model"), py::arg("lam"), py::arg("r"), py::arg("strict") = true);
  mod.def(
      "total_resonance_index",
      [](const Model& w, double lambda, double a, double b, bool strict) {
        return total_resonance_index(w.m, lambda, a, b, strict).total;
      },
      py::arg("model"), py::arg("lam"), py::arg("a"), py::arg("b"), py::arg("strict") = true);
  mod.def(
      "real_resonance_points",
      [](const Model& w, double lambda, double a, double b) { return real_resonance_points(w.m, lambda, a, b); },
      py::arg("model"), py::arg("lam"), py::arg("a"), py::arg("b"));
  mod.def(
      "ssf_counting",
      [](const Model& w, double lambda, double a, double b) { return ssf_counting(finite(w), lambda, a, b); },
      py::arg("model"), py::arg("lam"), py::arg("a"), py::arg("b"));
  mod.def(
      "spectral_flow_oracle",
      [](const Model& w, double lambda, double a, double b) {
        return spectral_flow_oracle(finite(w), lambda, a, b);
      },
      py::arg("model"), py::arg("lam"), py::arg("a"), py::arg("b"));
  mod.def(
      "point_order",
      [](const Model& w, double lambda, double r) { return point_structure(w.m, SpectralPoint::plus(lambda), r).order_d; },
      py::arg("model"), py::arg("lam"), py::arg("r"));
  mod.def(
      "op_A",
      [](const Model& w, cplx z, cplx s) { return op_A_only(w.m, SpectralPoint::from(z), s); }, py::arg("model"),
      py::arg("z"), py::arg("s"));

  mod.def("_analyze_json", &analyze_json, py::arg("model"), py::arg("lam"), py::arg("interval") = py::none(),
          py::arg("at") = py::none(), py::arg("strict") = false, py::arg("classify") = true);
  mod.def("example_names", &builtin_names);
  mod.def(
      "_example_json",
      [](const std::string& name) {
        auto ex = builtin_example(name);
        auto chk = check_example(ex);
        Json j = {{"name", ex.name}, {"ok", chk.ok()}, {"mismatches", chk.mismatches}};
        return j.dump();
      },
      py::arg("name"));
  mod.def(
      "_verify_text",
      [](std::uint64_t seed, int trials, int lo, int hi) {
        VerifyOptions opt;
        opt.seed = seed;
        opt.trials = trials;
        opt.dim_lo = lo;
        opt.dim_hi = hi;
        auto s = run_verify(opt);
        return std::make_pair(s.all_passed(), s.text());
      },
      py::arg("seed") = 42, py::arg("trials") = 10, py::arg("dim_lo") = 2, py::arg("dim_hi") = 6);
}

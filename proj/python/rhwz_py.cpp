#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>

#include "rhwz/factor.hpp"
#include "rhwz/moduli.hpp"
#include "rhwz/rhsolve.hpp"
#include "rhwz/verify.hpp"
#include "rhwz/version.hpp"
#include "rhwz/wznw.hpp"

namespace py = pybind11;
using namespace rhwz;

namespace {

py::dict report_dict(const SolveReport& r) {
  py::dict d;
  d["success"] = r.success;
  d["final_residual"] = r.final_residual;
  d["iterations"] = r.iterations;
  d["history"] = r.history;
  d["infinity_spectrum_error"] = r.infinity_spectrum_error;
  d["relation_residual"] = r.relation_residual;
  d["large_cell_flag"] = r.large_cell_flag;
  d["seed_used"] = r.seed_used;
  d["warnings"] = r.warnings;
  return d;
}

FuchsianSystem system_of(const WeightSystem& ws, const std::vector<CMatrix>& residues) {
  FuchsianSystem s{ws, residues};
  if (static_cast<int>(residues.size()) != ws.n() - 1)
    throw Error(ErrorKind::Validation, "expected one residue per finite point");
  return s;
}

}  // namespace

PYBIND11_MODULE(_rhwz, m) {
  m.doc() = "Riemann-Hilbert solver and regularized WZNW action for Fuchsian systems";
  m.attr("__version__") = kVersion;

  // Kept alive for the interpreter's lifetime; instances carry the error kind.
  static PyObject* error = PyErr_NewException("rhwz._rhwz.RhwzError", PyExc_RuntimeError, nullptr);
  m.attr("RhwzError") = py::handle(error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("kind") = kind_name(e.kind());
      PyErr_SetObject(error, exc.ptr());
    }
  });

  py::class_<WeightSystem>(m, "WeightSystem")
      .def(py::init(&build_weight_system), py::arg("points"), py::arg("weights"), py::arg("degree"))
      .def_readonly("points", &WeightSystem::points)
      .def_readonly("weights", &WeightSystem::weights)
      .def_readonly("degree", &WeightSystem::degree)
      .def_readonly("infinity_exponents", &WeightSystem::infinity_exponents)
      .def_property_readonly("n", &WeightSystem::n)
      .def_property_readonly("rank", &WeightSystem::rank)
      .def_property_readonly("K1", &WeightSystem::K1)
      .def_property_readonly("K2", &WeightSystem::K2);

  py::class_<AdmissibleRep>(m, "AdmissibleRep")
      .def(py::init(&build_admissible_rep), py::arg("weights"), py::arg("conjugators"))
      .def_readonly("generators", &AdmissibleRep::generators)
      .def_readonly("conjugators", &AdmissibleRep::conjugators)
      .def_readonly("warnings", &AdmissibleRep::warnings)
      .def("relation_residual", &AdmissibleRep::relation_residual)
      .def("is_irreducible", [](const AdmissibleRep& r) { return is_irreducible(r); });

  m.def("hypergeometric_target", [](const WeightSystem& ws) {
    return build_admissible_rep(ws, hypergeometric_conjugators(ws));
  });
  m.def("rep_distance", &rep_distance);

  m.def(
      "monodromy",
      [](const WeightSystem& ws, const std::vector<CMatrix>& residues, double tol) {
        auto mono = monodromy_rep(system_of(ws, residues), std::nullopt, tol);
        py::dict d;
        d["loop_factors"] = mono.loop_factors;
        d["generators"] = mono.generators;
        d["relation_residual"] = mono.relation_residual;
        d["basepoint"] = mono.basepoint;
        return d;
      },
      py::arg("weights"), py::arg("residues"), py::arg("tol") = 1e-10);

  m.def(
      "solve",
      [](const WeightSystem& ws, const AdmissibleRep& target, double tol, int max_iter, int restarts,
         std::uint64_t seed, int threads) {
        SolverOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        o.restarts = restarts;
        o.seed = seed;
        o.threads = threads;
        SolveResult res;
        {
          py::gil_scoped_release release;
          res = solve(ws, target, std::nullopt, o);
        }
        py::dict d;
        d["residues"] = res.system.residues;
        d["report"] = report_dict(res.report);
        if (res.normalization) d["canonical_residues"] = res.normalization->canonical.residues;
        return d;
      },
      py::arg("weights"), py::arg("target"), py::arg("tol") = 1e-6, py::arg("max_iter") = 200,
      py::arg("restarts") = 10, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def(
      "action",
      [](const WeightSystem& ws, const std::vector<CMatrix>& residues, std::vector<double> deltas, int threads,
         bool strict) {
        QuadratureOptions q;
        q.threads = threads;
        q.strict = strict;
        ActionResult a;
        bool flag;
        {
          py::gil_scoped_release release;
          auto norm = normalize_at_infinity(system_of(ws, residues));
          flag = norm.large_cell_flag;
          if (!flag) throw Error(ErrorKind::RegularLocus, "large-cell flag false");
          a = action_regularized(MetricField::from_normalization(norm), deltas, q);
        }
        py::dict d;
        d["value"] = a.value;
        d["extrapolation_error"] = a.extrapolation_error;
        d["imag_part"] = a.imag_part;
        d["kappa"] = a.kappa;
        d["K1"] = a.K1;
        d["K2"] = a.K2;
        py::list rows;
        for (const auto& r : a.per_delta)
          rows.append(py::dict(py::arg("delta") = r.delta, py::arg("kinetic") = r.kinetic,
                               py::arg("topological") = r.topological, py::arg("counterterm") = r.counterterm,
                               py::arg("total") = r.total));
        d["per_delta"] = rows;
        d["warnings"] = a.warnings;
        return d;
      },
      py::arg("weights"), py::arg("residues"), py::arg("deltas") = std::vector<double>{0.1, 0.05, 0.025, 0.0125},
      py::arg("threads") = 1, py::arg("strict") = true);

  m.def("bruhat", [](const CMatrix& g) {
    auto f = bruhat_factor(g);
    return py::make_tuple(f.P, f.Pi, f.L, f.perm);
  });
  m.def("in_large_cell", &in_large_cell);
  m.def("cholesky_minors", [](const CMatrix& h, const CMatrix& M) {
    auto f = cholesky_minors(HermitianPD(h), M);
    return py::make_tuple(f.b, f.a, f.c);
  });

  m.def("expected_dims", [](int r, int n) {
    auto d = expected_dims(r, n);
    return py::make_tuple(d.moduli, d.cotangent);
  });

  m.def(
      "verify",
      [](const std::string& suite, int count, std::uint64_t seed) {
        if (count < 0) count = default_count(suite);
        auto r = run_suite(suite, count, seed, 1);
        py::dict d;
        d["suite"] = r.suite;
        d["count"] = r.count;
        d["passed"] = r.passed;
        d["worst"] = r.worst;
        d["tolerance"] = r.tolerance;
        d["ok"] = r.ok();
        return d;
      },
      py::arg("suite"), py::arg("count") = -1, py::arg("seed") = 1);
}

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <string>

#include "sparsetopk/autodiff.hpp"
#include "sparsetopk/fy_loss.hpp"
#include "sparsetopk/hard_ops.hpp"
#include "sparsetopk/isotonic.hpp"
#include "sparsetopk/relaxed_ops.hpp"

namespace py = pybind11;
using namespace sparsetopk;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
  if (a.ndim() != 1) throw InvalidArgument("expected a 1-d array");
  return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

py::array_t<double> to_array(Vector v) {
  auto* owned = new Vector(std::move(v));
  py::capsule free_when_done(owned, [](void* p) { delete static_cast<Vector*>(p); });
  return py::array_t<double>({owned->size()}, {sizeof(double)}, owned->data(), free_when_done);
}

SolverOptions solver_options(const std::string& solver, std::size_t dykstra_iterations) {
  SolverOptions opt;
  opt.kind = parse_solver(solver);
  opt.dykstra_iterations = dykstra_iterations;
  return opt;
}

OperatorSpec make_spec(std::optional<std::size_t> k, std::optional<Array> w, const std::string& phi, double p,
                       double lam) {
  if (k.has_value() == w.has_value()) throw InvalidArgument("give exactly one of k and w");
  OperatorSpec spec{parse_phi(phi), Regularizer(p, lam), TopK{}};
  if (k) {
    spec.weights = TopK{*k};
  } else {
    const auto wv = view(*w);
    spec.weights = Vector(wv.begin(), wv.end());
  }
  return spec;
}

IsotonicProblem make_problem(const Array& s, const Array& w, const std::string& phi, double p, double lam) {
  const auto sv = view(s);
  const auto wv = view(w);
  return IsotonicProblem{Vector(sv.begin(), sv.end()), Vector(wv.begin(), wv.end()), parse_phi(phi),
                         Regularizer(p, lam)};
}

// A forward pass together with its Jacobian plan.
struct Relaxed {
  Vector x;
  RelaxedOutput out;
  JacobianPlan plan;

  Relaxed(Vector x_in, RelaxedOutput o) : x(std::move(x_in)), out(std::move(o)), plan(out) {}
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse, differentiable top-k operators";

  m.def("topkmask", [](const Array& x, std::size_t k) { return to_array(topkmask(view(x), k)); }, py::arg("x"),
        py::arg("k"));
  m.def("topk", [](const Array& x, std::size_t k) { return to_array(topk(view(x), k)); }, py::arg("x"),
        py::arg("k"));
  m.def("topkmag", [](const Array& x, std::size_t k) { return to_array(topkmag(view(x), k)); }, py::arg("x"),
        py::arg("k"));
  m.def("sort_desc", [](const Array& x) { return to_array(sort_desc(view(x))); }, py::arg("x"));
  m.def(
      "lmo",
      [](const Array& x, const Array& w) {
        LmoResult r = lmo(view(x), view(w));
        return py::make_tuple(r.value, to_array(std::move(r.argmax)));
      },
      py::arg("x"), py::arg("w"), "Returns (value, argmax) of max <x, y> over the permutahedron of w.");

  const auto soft_k = [&m](const char* name, Vector (*fn)(std::span<const double>, std::size_t, const Regularizer&,
                                                          const SolverOptions&)) {
    m.def(
        name,
        [fn](const Array& x, std::size_t k, double p, double lam, const std::string& solver) {
          return to_array(fn(view(x), k, Regularizer(p, lam), solver_options(solver, 100)));
        },
        py::arg("x"), py::arg("k"), py::arg("p") = 2.0, py::arg("lam") = 1.0, py::arg("solver") = "pav");
  };
  soft_k("soft_topkmask", &soft_topkmask);
  soft_k("soft_topkmag", &soft_topkmag);
  soft_k("soft_signed_topkmask", &soft_signed_topkmask);

  m.def(
      "soft_sort",
      [](const Array& x, double p, double lam, const std::string& solver) {
        return to_array(soft_sort(view(x), Regularizer(p, lam), solver_options(solver, 100)));
      },
      py::arg("x"), py::arg("p") = 2.0, py::arg("lam") = 1.0, py::arg("solver") = "pav");
  m.def(
      "soft_rank",
      [](const Array& x, double p, double lam, const std::string& solver) {
        return to_array(soft_rank(view(x), Regularizer(p, lam), solver_options(solver, 100)));
      },
      py::arg("x"), py::arg("p") = 2.0, py::arg("lam") = 1.0, py::arg("solver") = "pav");

  py::class_<Relaxed>(m, "RelaxedOutput")
      .def_property_readonly("y", [](const Relaxed& r) { return to_array(r.out.y); })
      .def_property_readonly("u", [](const Relaxed& r) { return to_array(r.out.u); })
      .def_property_readonly("block_count", [](const Relaxed& r) { return r.plan.block_count(); })
      .def("jvp", [](const Relaxed& r, const Array& t) { return to_array(r.plan.jvp(view(t))); }, py::arg("tangent"))
      .def("vjp", [](const Relaxed& r, const Array& g) { return to_array(r.plan.vjp(view(g))); },
           py::arg("cotangent"))
      .def("f_value", [](const Relaxed& r) { return f_value(r.x, r.out); });

  m.def(
      "relaxed_apply",
      [](const Array& x, std::optional<std::size_t> k, std::optional<Array> w, const std::string& phi, double p,
         double lam, const std::string& solver, std::size_t dykstra_iterations) {
        const auto xv = view(x);
        const OperatorSpec spec = make_spec(k, std::move(w), phi, p, lam);
        RelaxedOutput out = relaxed_apply(xv, spec, solver_options(solver, dykstra_iterations));
        return Relaxed(Vector(xv.begin(), xv.end()), std::move(out));
      },
      py::arg("x"), py::kw_only(), py::arg("k") = py::none(), py::arg("w") = py::none(),
      py::arg("phi") = "identity", py::arg("p") = 2.0, py::arg("lam") = 1.0, py::arg("solver") = "pav",
      py::arg("dykstra_iterations") = 100);

  m.def(
      "f_value",
      [](const Array& x, std::optional<std::size_t> k, std::optional<Array> w, const std::string& phi, double p,
         double lam) { return f_value(view(x), make_spec(k, std::move(w), phi, p, lam)); },
      py::arg("x"), py::kw_only(), py::arg("k") = py::none(), py::arg("w") = py::none(),
      py::arg("phi") = "identity", py::arg("p") = 2.0, py::arg("lam") = 1.0);

  m.def(
      "pav_solve",
      [](const Array& s, const Array& w, const std::string& phi, double p, double lam) {
        return to_array(pav_solve(make_problem(s, w, phi, p, lam)).v);
      },
      py::arg("s"), py::arg("w"), py::arg("phi") = "identity", py::arg("p") = 2.0, py::arg("lam") = 1.0);
  m.def(
      "dykstra_solve",
      [](const Array& s, const Array& w, const std::string& phi, double lam, std::size_t iterations) {
        return to_array(dykstra_solve(make_problem(s, w, phi, 2.0, lam), iterations));
      },
      py::arg("s"), py::arg("w"), py::arg("phi") = "identity", py::arg("lam") = 1.0, py::arg("iterations") = 100);
  m.def(
      "dual_bca_solve",
      [](const Array& s, const Array& w, const std::string& phi, double p, double lam, double tol,
         std::size_t max_sweeps) {
        const IsotonicSolution sol = dual_bca_solve(make_problem(s, w, phi, p, lam), DualBcaOptions{tol, max_sweeps});
        return py::make_tuple(to_array(sol.v), sol.converged);
      },
      py::arg("s"), py::arg("w"), py::arg("phi") = "identity", py::arg("p") = 2.0, py::arg("lam") = 1.0,
      py::arg("tol") = 1e-10, py::arg("max_sweeps") = 1'000'000, "Returns (v, converged).");

  m.def(
      "fy_topk_loss",
      [](const Array& logits, const Array& target, std::size_t k, double p, double lam) {
        LossResult r = fy_topk_loss(view(logits), view(target), LossConfig{k, Regularizer(p, lam)});
        return py::make_tuple(r.value, to_array(std::move(r.gradient)));
      },
      py::arg("logits"), py::arg("target"), py::arg("k"), py::arg("p") = 2.0, py::arg("lam") = 1.0,
      "Returns (loss, gradient).");
}

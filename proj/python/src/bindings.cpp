#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bilicut/driver.hpp"
#include "bilicut/error.hpp"
#include "bilicut/instances.hpp"
#include "bilicut/relaxations.hpp"
#include "bilicut/suite.hpp"
#include "bilicut/theorems.hpp"

namespace py = pybind11;
using namespace bilicut;

namespace {

py::array_t<double> to_numpy(const DenseMatrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) view(i, j) = m(i, j);
  return out;
}

py::array_t<double> to_numpy(const Vector& v) {
  py::array_t<double> out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

DenseMatrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                       const char* name) {
  if (a.ndim() != 2) throw py::value_error(std::string(name) + " must be two-dimensional");
  DenseMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.entries().begin());
  return m;
}

Vector vec_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return Vector(a.data(), a.data() + a.size());
}

LoopVariant parse_variant(const std::string& name) {
  switch (parse_method(name)) {
    case Method::kDisj: return LoopVariant::kDisj;
    case Method::kExtDisj: return LoopVariant::kExtDisj;
    case Method::kMixed: return LoopVariant::kMixed;
    default: throw py::value_error("variant must be Disj, ExtDisj or Mixed");
  }
}

py::dict trace_to_dict(const BoundTrace& t) {
  py::list lbs;
  py::list cuts_per_round;
  for (const auto& it : t.iterations) {
    lbs.append(it.lb);
    cuts_per_round.append(it.cuts_added);
  }
  py::list violations;
  for (const auto& c : t.cuts) violations.append(c.violation);
  py::dict d;
  d["root_lb"] = t.root_lb;
  d["final_lb"] = t.final_lb;
  d["lbs"] = lbs;
  d["cuts_per_round"] = cuts_per_round;
  d["cut_violations"] = violations;
  d["total_cuts"] = t.total_cuts();
  d["termination"] = std::string(to_string(t.termination));
  d["failure"] = t.failure;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lower bounds for box-constrained bilinear quadratic programs";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<BilinearInstance>(m, "Instance")
      .def(py::init([](py::array_t<double> A, py::array_t<double> Q, py::array_t<double> R,
                       py::array_t<double> ax, py::array_t<double> bx, py::array_t<double> ay,
                       py::array_t<double> by) {
             BilinearInstance inst;
             inst.A = from_numpy(A, "A");
             inst.Q = from_numpy(Q, "Q");
             inst.R = from_numpy(R, "R");
             inst.n = inst.A.rows();
             inst.m = inst.A.cols();
             inst.ax = vec_from_numpy(ax);
             inst.bx = vec_from_numpy(bx);
             inst.ay = vec_from_numpy(ay);
             inst.by = vec_from_numpy(by);
             validate(inst);
             return inst;
           }),
           py::arg("A"), py::arg("Q"), py::arg("R"), py::arg("ax"), py::arg("bx"), py::arg("ay"),
           py::arg("by"))
      .def_readonly("n", &BilinearInstance::n)
      .def_readonly("m", &BilinearInstance::m)
      .def_property_readonly("A", [](const BilinearInstance& i) { return to_numpy(i.A); })
      .def_property_readonly("Q", [](const BilinearInstance& i) { return to_numpy(i.Q); })
      .def_property_readonly("R", [](const BilinearInstance& i) { return to_numpy(i.R); })
      .def("to_json", [](const BilinearInstance& i) { return to_json(i); })
      .def_static("from_json", [](const std::string& s) { return from_json(s); })
      .def("objective",
           [](const BilinearInstance& i, const std::vector<double>& x, const std::vector<double>& y) {
             return true_objective(i, x, y);
           },
           py::arg("x"), py::arg("y"))
      .def("__repr__", [](const BilinearInstance& i) {
        return "<Instance n=" + std::to_string(i.n) + " m=" + std::to_string(i.m) + ">";
      });

  m.def(
      "generate",
      [](std::size_t n, std::size_t mm, double density, double rank_q, double rank_r,
         std::uint64_t seed) { return generate({n, mm, density, rank_q, rank_r, seed}); },
      py::arg("n"), py::arg("m"), py::arg("density") = 1.0, py::arg("rank_q") = 1.0,
      py::arg("rank_r") = 1.0, py::arg("seed") = 0);

  m.def(
      "bmc_bound", [](const BilinearInstance& i) {
        auto [model, map] = build_bmc(validate(i));
        return solve_relaxation(model).first;
      },
      py::arg("instance"), "Lower bound of the bilinear McCormick relaxation.");
  m.def(
      "smc_bound", [](const BilinearInstance& i) {
        auto [model, map] = build_smc(validate(i));
        return solve_relaxation(model).first;
      },
      py::arg("instance"), "Lower bound of the symmetric McCormick relaxation.");

  m.def(
      "upper_bound",
      [](const BilinearInstance& i, int starts, std::uint64_t seed) {
        const UpperBound ub = upper_bound(validate(i), starts, seed);
        return py::make_tuple(ub.z_bar, to_numpy(ub.x), to_numpy(ub.y));
      },
      py::arg("instance"), py::arg("num_starts") = 32, py::arg("seed") = 0);

  m.def(
      "cutting_plane",
      [](const BilinearInstance& i, const std::string& variant, int max_n_cuts,
         int max_cuts_per_round) {
        LoopConfig c;
        c.variant = parse_variant(variant);
        c.max_n_cuts = max_n_cuts;
        c.max_cuts_per_round = max_cuts_per_round;
        const CheckedInstance checked = validate(i);
        BoundTrace t;
        {
          py::gil_scoped_release release;
          t = cutting_plane(checked, c);
        }
        return trace_to_dict(t);
      },
      py::arg("instance"), py::arg("variant") = "ExtDisj", py::arg("max_n_cuts") = 40,
      py::arg("max_cuts_per_round") = 4);

  m.def("relative_gap", [](double z, double lb) { return relative_gap(z, lb).value; },
        py::arg("z_bar"), py::arg("lb"));
  m.def("gap_closed", [](double z, double r, double f) { return gap_closed(z, r, f).value; },
        py::arg("z_bar"), py::arg("lb_root"), py::arg("lb_final"));

  m.def("addmc_rhs",
        [](double a1, double b1, double a2, double b2, double p1, double p2) {
          return addmc_rhs({a1, b1, a2, b2}, p1, p2);
        },
        py::arg("a1"), py::arg("b1"), py::arg("a2"), py::arg("b2"), py::arg("p1"), py::arg("p2"));
  m.def("saxmf_rhs",
        [](double a1, double b1, double a2, double b2, double p1, double p2) {
          return saxmf_rhs({a1, b1, a2, b2}, p1, p2);
        },
        py::arg("a1"), py::arg("b1"), py::arg("a2"), py::arg("b2"), py::arg("p1"), py::arg("p2"));

  m.def(
      "run_suite",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& dims,
         const std::vector<double>& densities, const std::vector<double>& rank_fractions,
         const std::vector<std::string>& methods, std::uint64_t seed, int jobs) {
        ExperimentConfig c;
        c.dims = dims;
        c.densities = densities;
        c.rank_fractions = rank_fractions;
        c.methods.clear();
        for (const auto& name : methods) c.methods.push_back(parse_method(name));
        c.seed = seed;
        c.jobs = jobs;
        py::gil_scoped_release release;
        const std::string csv = to_csv(run_suite(c));
        return csv;
      },
      py::arg("dims"), py::arg("densities") = std::vector<double>{0.5, 1.0},
      py::arg("rank_fractions") = std::vector<double>{0.25, 0.5, 0.75, 1.0},
      py::arg("methods") = std::vector<std::string>{"S.Mc", "B.Mc"},
      py::arg("seed") = ExperimentConfig{}.seed, py::arg("jobs") = 1,
      "Runs a suite and returns its CSV text.");
}

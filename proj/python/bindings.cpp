#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "plap/classify.hpp"
#include "plap/experiments.hpp"
#include "plap/graph.hpp"
#include "plap/operators.hpp"
#include "plap/report.hpp"
#include "plap/synthetic.hpp"

namespace py = pybind11;
using namespace plap;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("points must be a 2-d array");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto d = static_cast<std::size_t>(a.shape(1));
  return PointCloud(n, d, std::vector<double>(a.data(), a.data() + n * d));
}

Array from_cloud(const PointCloud& p) {
  Array out({p.size(), p.dim()});
  std::copy(p.coords().begin(), p.coords().end(), out.mutable_data());
  return out;
}

ScalarField to_field(const Array& a) {
  if (a.ndim() != 1) throw std::invalid_argument("field must be a 1-d array");
  return ScalarField(a.data(), a.data() + a.size());
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<std::size_t> to_indices(const IndexArray& a) {
  std::vector<std::size_t> out;
  out.reserve(a.size());
  for (py::ssize_t i = 0; i < a.size(); ++i) {
    if (a.data()[i] < 0) throw std::invalid_argument("negative vertex index");
    out.push_back(static_cast<std::size_t>(a.data()[i]));
  }
  return out;
}

PExponent exponent(double p) { return std::isinf(p) ? PExponent::infinity() : PExponent(p); }

py::object report_dict(const SolveReport& r) {
  return py::module_::import("json").attr("loads")(r.to_json().dump());
}

ClassifyConfig classify_config(double p, const std::string& method, double tol, bool homotopy) {
  ClassifyConfig c;
  c.method = solver_method_from_string(method);
  c.p = exponent(p);
  c.homotopy = homotopy;
  c.variational.tol = tol;
  c.game.tol = tol;
  return c;
}

}  // namespace

PYBIND11_MODULE(_plap, m) {
  m.doc() = "Graph p-Laplacian solvers";
  m.attr("__version__") = version();
  // Leaked on purpose: the type must outlive interpreter shutdown.
  static auto* solver_error = new py::exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr e) {
    try {
      if (e) std::rethrow_exception(e);
    } catch (const SolverError& err) {
      py::object exc = py::reinterpret_borrow<py::object>(*solver_error)(err.what());
      exc.attr("report") = report_dict(err.report());
      py::set_error(*solver_error, exc);
    }
  });

  py::class_<WeightedGraph>(m, "Graph")
      .def_property_readonly("n", &WeightedGraph::size)
      .def_property_readonly("nnz", &WeightedGraph::nnz)
      .def_property_readonly("sigma", &WeightedGraph::sigma)
      .def_property_readonly("is_symmetric", &WeightedGraph::is_symmetric)
      .def("is_connected", [](const WeightedGraph& g) { return is_connected(g); })
      .def("csr",
           [](const WeightedGraph& g) {
             return py::make_tuple(to_array(g.offsets()), to_array(g.columns()),
                                   to_array(g.values()));
           },
           "Row offsets, column indices and weights.")
      .def_static(
          "from_edges",
          [](std::size_t n, const IndexArray& rows, const IndexArray& cols, const Array& w,
             double sigma) {
            const auto r = to_indices(rows), c = to_indices(cols);
            if (r.size() != c.size() || static_cast<py::ssize_t>(r.size()) != w.size()) {
              throw std::invalid_argument("rows, cols and weights differ in length");
            }
            std::vector<WeightedGraph::Edge> e;
            for (std::size_t t = 0; t < r.size(); ++t) e.push_back({r[t], c[t], w.data()[t]});
            return WeightedGraph::from_edges(n, std::move(e), sigma);
          },
          py::arg("n"), py::arg("rows"), py::arg("cols"), py::arg("weights"),
          py::arg("sigma") = 0.0);

  m.def(
      "knn_graph",
      [](const Array& points, std::size_t K, const std::string& weights) {
        if (weights != "gaussian" && weights != "unit") {
          throw std::invalid_argument("weights must be 'gaussian' or 'unit'");
        }
        return knn_graph(to_cloud(points), K,
                         weights == "unit" ? WeightRule::unit : WeightRule::gaussian);
      },
      py::arg("points"), py::arg("K"), py::arg("weights") = "gaussian");

  m.def(
      "problem_s",
      [](std::size_t n, std::size_t d, std::size_t m_labels, std::uint64_t seed) {
        const SyntheticProblem s = problem_s(n, d, m_labels, seed);
        return py::make_tuple(from_cloud(s.points), to_array(s.labels.indices),
                              to_array(s.labels.values));
      },
      py::arg("n"), py::arg("d"), py::arg("m"), py::arg("seed"),
      "Uniform points in the unit cube; the first m are labeled with their first coordinate.");

  m.def(
      "two_gaussians",
      [](std::size_t n, std::size_t d, double sep, std::uint64_t seed) {
        const LabeledCloud c = two_gaussians(n, d, sep, seed);
        return py::make_tuple(from_cloud(c.points), to_array(c.classes));
      },
      py::arg("n"), py::arg("d"), py::arg("separation"), py::arg("seed"));

  m.def(
      "solve",
      [](const WeightedGraph& g, const IndexArray& idx, const Array& vals, double p,
         const std::string& method, double tol, bool homotopy) {
        const LabelSet labels(to_indices(idx), to_field(vals));
        const SolveResult r = solve_binary(g, labels, classify_config(p, method, tol, homotopy));
        return py::make_tuple(to_array(r.u), report_dict(r.report));
      },
      py::arg("graph"), py::arg("label_index"), py::arg("label_value"), py::arg("p"),
      py::arg("method") = "newton", py::arg("tol") = 1e-8, py::arg("homotopy") = true,
      "Returns (u, report).");

  m.def(
      "classify",
      [](const WeightedGraph& g, const IndexArray& idx, const py::array_t<int, py::array::c_style | py::array::forcecast>& cls, double p,
         const std::string& method, double tol) {
        std::vector<int> classes(cls.data(), cls.data() + cls.size());
        const MulticlassLabels labels(to_indices(idx), std::move(classes));
        const ScoreMatrix s = one_vs_rest(g, labels, classify_config(p, method, tol, true));
        Array out({s.rows(), static_cast<std::size_t>(labels.num_classes)});
        std::copy(s.data().begin(), s.data().end(), out.mutable_data());
        return out;
      },
      py::arg("graph"), py::arg("label_index"), py::arg("label_class"), py::arg("p"),
      py::arg("method") = "newton_like", py::arg("tol") = 1e-6,
      "One-vs-rest score matrix of shape (n, classes).");

  m.def(
      "variational_residual",
      [](const WeightedGraph& g, const Array& u, double p) {
        return to_array(variational_residual(g, to_field(u), p));
      },
      py::arg("graph"), py::arg("u"), py::arg("p"));
  m.def(
      "game_operator",
      [](const WeightedGraph& g, const Array& u, double p) {
        return to_array(game_operator(g, to_field(u), exponent(p)));
      },
      py::arg("graph"), py::arg("u"), py::arg("p"));
  m.def(
      "energy",
      [](const WeightedGraph& g, const Array& u, double p) {
        return energy_Jp(g, to_field(u), LabelSet(), exponent(p));
      },
      py::arg("graph"), py::arg("u"), py::arg("p"));
}

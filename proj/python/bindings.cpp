#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "qnk/acceptance.hpp"
#include "qnk/consistency.hpp"
#include "qnk/error.hpp"
#include "qnk/fields.hpp"
#include "qnk/meshbias.hpp"
#include "qnk/normalize.hpp"
#include "qnk/opsim.hpp"
#include "qnk/quadrature.hpp"
#include "qnk/resample.hpp"
#include "qnk/statkit.hpp"
#include "qnk/stats.hpp"

namespace py = pybind11;
using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

qnk::FieldTensor to_tensor(const Array& a, const qnk::GridSpec& grid) {
  const auto shape = grid.shape();
  if (static_cast<std::size_t>(a.ndim()) != shape.size() + 2) {
    throw qnk::ShapeError("expected an array of shape (batch, channels, *grid.shape)");
  }
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (static_cast<std::size_t>(a.shape(static_cast<py::ssize_t>(k + 2))) != shape[k]) {
      throw qnk::ShapeError("array spatial shape does not match the grid");
    }
  }
  const auto B = static_cast<std::size_t>(a.shape(0));
  const auto C = static_cast<std::size_t>(a.shape(1));
  return qnk::FieldTensor(B, C, grid, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const qnk::FieldTensor& x) {
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(x.batch()), static_cast<py::ssize_t>(x.channels())};
  for (std::size_t n : x.grid().shape()) shape.push_back(static_cast<py::ssize_t>(n));
  Array out(shape);
  std::copy(x.data().begin(), x.data().end(), out.mutable_data());
  return out;
}

Array vector_array(const std::vector<double>& v, std::vector<py::ssize_t> shape) {
  Array out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

qnk::FieldSpec field_spec(const std::string& name, double constant) { return {qnk::parse_field_id(name), constant}; }

qnk::NormSpec norm_spec(const std::string& method, const std::string& mode, double alpha, std::size_t groups,
                        double epsilon) {
  qnk::NormSpec s;
  s.method = qnk::parse_norm_method(method);
  s.quad_mode = qnk::parse_pattern(mode);
  s.alpha = alpha;
  s.groups = groups;
  s.epsilon = epsilon;
  return s;
}

qnk::PairedSamples paired(std::vector<double> a, std::vector<double> b) {
  qnk::PairedSamples s;
  s.a = std::move(a);
  s.b = std::move(b);
  return s;
}

py::dict report_dict(const qnk::ConsistencyReport& r) {
  py::list rungs;
  for (const auto& g : r.rungs) {
    py::dict d;
    d["n"] = g.n;
    d["h"] = g.h;
    d["n_prime"] = g.n_prime;
    d["h_prime"] = g.h_prime;
    d["mismatch"] = g.mismatch;
    rungs.append(d);
  }
  py::dict d;
  d["field"] = r.field;
  d["quantity"] = r.quantity;
  d["rule"] = r.rule;
  d["pattern"] = r.pattern;
  d["rungs"] = rungs;
  d["fitted_order"] = r.fitted_order;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quadrature-weighted normalization toolkit";

  // Translators run newest first, so the base class goes in before its subclasses.
  py::register_exception<qnk::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<qnk::InvalidGridError>(m, "InvalidGridError", PyExc_ValueError);
  py::register_exception<qnk::CompatibilityError>(m, "CompatibilityError", PyExc_ValueError);
  py::register_exception<qnk::ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<qnk::DegenerateFieldError>(m, "DegenerateFieldError", PyExc_ValueError);
  py::register_exception<qnk::DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<qnk::GridSpec>(m, "Grid")
      .def_property_readonly("dim", &qnk::GridSpec::dim)
      .def_property_readonly("shape", &qnk::GridSpec::shape)
      .def_property_readonly("num_nodes", &qnk::GridSpec::num_nodes)
      .def("coords", [](const qnk::GridSpec& g, std::size_t k) { return g.axis(k).coords; }, py::arg("axis"))
      .def("kind", [](const qnk::GridSpec& g, std::size_t k) { return std::string(qnk::to_string(g.axis(k).kind)); },
           py::arg("axis"))
      .def("__repr__", [](const qnk::GridSpec& g) {
        std::string s = "Grid(";
        for (std::size_t k = 0; k < g.dim(); ++k) {
          s += (k ? ", " : "") + std::string(qnk::to_string(g.axis(k).kind)) + ":" + std::to_string(g.axis(k).size());
        }
        return s + ")";
      });

  m.def("uniform_grid", [](const std::vector<std::size_t>& n) { return qnk::uniform_grid(n); }, py::arg("n"));
  m.def("periodic_grid", [](const std::vector<std::size_t>& n) { return qnk::periodic_grid(n); }, py::arg("n"));
  m.def("boundary_refined_grid",
        [](std::size_t n, std::size_t dim, double strength) {
          return qnk::nonuniform_grid(qnk::BoundaryRefined{strength}, n, dim);
        },
        py::arg("n"), py::arg("dim") = 2, py::arg("strength") = 2.0);
  m.def("chebyshev_grid", [](std::size_t n, std::size_t dim) { return qnk::nonuniform_grid(qnk::Chebyshev{}, n, dim); },
        py::arg("n"), py::arg("dim") = 2);
  m.def("custom_grid",
        [](const std::vector<std::vector<double>>& coords) {
          std::vector<qnk::Axis1D> axes;
          for (const auto& c : coords) axes.push_back(qnk::nonuniform_axis(qnk::CustomCoords{c}, 0));
          return qnk::GridSpec(std::move(axes));
        },
        py::arg("coords"));

  m.def("weight_field",
        [](const qnk::GridSpec& g, const std::string& rule) {
          const auto wf = rule == "natural" ? qnk::quadrature_weight_field(g)
                                            : qnk::weight_field(g, qnk::parse_weight_rule(rule));
          std::vector<py::ssize_t> shape;
          for (std::size_t n : g.shape()) shape.push_back(static_cast<py::ssize_t>(n));
          return vector_array(wf.weights, shape);
        },
        py::arg("grid"), py::arg("rule") = "natural");

  m.def("sample_field",
        [](const std::string& name, const qnk::GridSpec& g, std::size_t channels, double constant) {
          return to_array(qnk::sample_field(field_spec(name, constant), g, channels));
        },
        py::arg("field"), py::arg("grid"), py::arg("channels") = 1, py::arg("constant") = 1.0);

  m.def("moments",
        [](const Array& a, const qnk::GridSpec& g, const std::string& pattern, const std::string& rule,
           std::optional<double> alpha) {
          const auto x = to_tensor(a, g);
          const auto p = qnk::parse_pattern(pattern);
          qnk::Moments mo = rule == "natural" ? qnk::weighted_moments(x, qnk::quadrature_weight_field(g), p)
                                              : qnk::rule_moments(x, qnk::parse_weight_rule(rule), p);
          if (alpha) mo = qnk::blend_moments(qnk::uniform_moments(x, p), mo, *alpha);
          const std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(mo.batch), static_cast<py::ssize_t>(mo.slices)};
          return py::make_tuple(vector_array(mo.mean, shape), vector_array(mo.variance, shape));
        },
        py::arg("x"), py::arg("grid"), py::arg("pattern") = "layer", py::arg("rule") = "natural",
        py::arg("alpha") = py::none(),
        "Mean and variance per (batch, slice). rule='natural' uses quadrature weights; "
        "alpha blends with the uniform statistics.");

  m.def("normalize",
        [](const Array& a, const qnk::GridSpec& g, const std::string& method, const std::string& mode, double alpha,
           std::size_t groups, double epsilon) {
          return to_array(qnk::apply_norm(to_tensor(a, g), norm_spec(method, mode, alpha, groups, epsilon)));
        },
        py::arg("x"), py::arg("grid"), py::arg("method") = "quadnorm", py::arg("mode") = "layer",
        py::arg("alpha") = 0.3, py::arg("groups") = 8, py::arg("epsilon") = 1e-5);

  m.def("interpolate",
        [](const Array& a, const qnk::GridSpec& g, const qnk::GridSpec& target, const std::string& method) {
          return to_array(qnk::interpolate(to_tensor(a, g), target, qnk::parse_interp_method(method)));
        },
        py::arg("x"), py::arg("grid"), py::arg("target"), py::arg("method") = "bicubic");

  m.def("statistic_ladder",
        [](const std::string& field, const std::vector<std::size_t>& ladder, std::size_t dim, const std::string& rule,
           const std::string& pattern, const std::string& statistic) {
          const auto stat = statistic == "mean" ? qnk::Statistic::mean : qnk::Statistic::variance;
          if (statistic != "mean" && statistic != "variance") throw qnk::DomainError("statistic must be mean or variance");
          return report_dict(qnk::statistic_ladder(field_spec(field, 1.0), ladder, dim, qnk::parse_weight_rule(rule),
                                                   qnk::parse_pattern(pattern), stat));
        },
        py::arg("field"), py::arg("ladder"), py::arg("dim"), py::arg("rule") = "trapezoid",
        py::arg("pattern") = "layer", py::arg("statistic") = "mean");

  m.def("output_ladder",
        [](const std::string& field, const std::vector<std::size_t>& ladder, std::size_t dim, const std::string& method,
           const std::string& mode, const std::string& interp) {
          return report_dict(qnk::output_ladder(field_spec(field, 1.0), norm_spec(method, mode, 0.3, 8, 1e-5), ladder,
                                                dim, qnk::parse_interp_method(interp)));
        },
        py::arg("field"), py::arg("ladder"), py::arg("dim") = 2, py::arg("method") = "quadnorm",
        py::arg("mode") = "layer", py::arg("interp") = "bicubic");

  m.def("bias_report",
        [](const std::string& field, const qnk::GridSpec& g) {
          const auto r = qnk::bias_report(field_spec(field, 1.0), g);
          py::dict d;
          d["nonuniformity_ratio"] = r.nonuniformity_ratio;
          d["reference_mean"] = r.reference_mean;
          d["uniform_estimate"] = r.uniform_estimate;
          d["weighted_estimate"] = r.weighted_estimate;
          d["uniform_bias"] = r.uniform_bias;
          d["weighted_bias"] = r.weighted_bias;
          d["reduction_factor"] = r.reduction_factor;
          return d;
        },
        py::arg("field"), py::arg("grid"));

  m.def("transfer_discrepancy",
        [](const std::string& field, std::size_t n, std::size_t n_prime, const std::string& method,
           std::size_t depth, std::size_t width, std::size_t modes, std::uint64_t seed, std::size_t ensemble) {
          qnk::StackSpec s;
          s.depth = depth;
          s.width = width;
          s.modes = modes;
          s.seed = seed;
          s.norm = qnk::NormSpec::with(qnk::parse_norm_method(method));
          const auto f = field_spec(field, 1.0);
          s.dim = qnk::required_dim(f.id).value_or(2);
          const auto r = qnk::ensemble_discrepancy(s, ensemble, f, qnk::cube_grid(n, s.dim),
                                                   qnk::cube_grid(n_prime, s.dim), qnk::InterpMethod::bicubic);
          py::dict d;
          d["h"] = r.h;
          d["h_prime"] = r.h_prime;
          d["discrepancy"] = r.discrepancy;
          d["per_layer"] = r.per_layer;
          return d;
        },
        py::arg("field") = "mixed2d", py::arg("n") = 33, py::arg("n_prime") = 129, py::arg("method") = "quadnorm",
        py::arg("depth") = 4, py::arg("width") = 16, py::arg("modes") = 6, py::arg("seed") = 7,
        py::arg("ensemble") = 8);

  m.def("bootstrap_improvement_ci",
        [](std::vector<double> a, std::vector<double> b, std::size_t resamples, double confidence, std::uint64_t seed) {
          const auto r = qnk::bootstrap_improvement_ci(paired(std::move(a), std::move(b)), resamples, confidence, seed);
          return py::make_tuple(r.improvement, r.lo, r.hi);
        },
        py::arg("a"), py::arg("b"), py::arg("resamples") = 10000, py::arg("confidence") = 0.95, py::arg("seed") = 7);

  m.def("tost_equivalence",
        [](std::vector<double> a, std::vector<double> b, double margin, double alpha) {
          const auto r = qnk::tost_equivalence(paired(std::move(a), std::move(b)), margin, alpha);
          py::dict d;
          d["p_value"] = r.p_value;
          d["equivalent"] = r.equivalent;
          d["mean_diff"] = r.mean_diff;
          d["ci"] = py::make_tuple(r.ci_lo, r.ci_hi);
          return d;
        },
        py::arg("a"), py::arg("b"), py::arg("margin"), py::arg("alpha") = 0.05);

  m.def("holm_bonferroni", [](const std::vector<double>& p, double alpha) { return qnk::holm_bonferroni(p, alpha); },
        py::arg("p_values"), py::arg("alpha") = 0.05);

  m.def("cohens_d",
        [](std::vector<double> a, std::vector<double> b) {
          const auto r = qnk::cohens_d(paired(std::move(a), std::move(b)));
          return py::make_tuple(r.d, r.degenerate);
        },
        py::arg("a"), py::arg("b"));

  m.def("paired_t_test",
        [](std::vector<double> a, std::vector<double> b) {
          const auto r = qnk::paired_t_test(paired(std::move(a), std::move(b)));
          return py::make_tuple(r.t, r.p_two_sided);
        },
        py::arg("a"), py::arg("b"));

  m.def("run_acceptance",
        [](const std::vector<int>& only, std::uint64_t seed) {
          qnk::AcceptanceOptions opts;
          opts.seed = seed;
          opts.only = std::set<int>(only.begin(), only.end());
          qnk::AcceptanceReport rep;
          {
            py::gil_scoped_release release;
            rep = qnk::run_acceptance(opts);
          }
          py::list out;
          for (const auto& r : rep.results) {
            py::dict d;
            d["id"] = r.id;
            d["name"] = r.name;
            d["passed"] = r.pass();
            d["detail"] = r.detail;
            d["seconds"] = r.seconds;
            out.append(d);
          }
          return out;
        },
        py::arg("only") = std::vector<int>{}, py::arg("seed") = 7);
}

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "ifl/analytics.hpp"
#include "ifl/enumerate.hpp"
#include "ifl/error.hpp"
#include "ifl/io.hpp"
#include "ifl/model.hpp"
#include "ifl/simulator.hpp"
#include "ifl/sweep.hpp"
#include "ifl/tensor.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace ifl;

namespace {

py::dict estimate_dict(const EstimateResult& r) {
  return py::dict("mean"_a = r.mean, "stderr"_a = r.std_error, "n"_a = r.n_samples, "seed"_a = r.seed);
}

py::array_t<std::uint32_t> triples_array(const InteractionTensor& omega) {
  py::array_t<std::uint32_t> out({static_cast<py::ssize_t>(omega.entries.size()), py::ssize_t{3}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < omega.entries.size(); ++i) {
    const auto& e = omega.entries[i];
    v(i, 0) = e.m;
    v(i, 1) = e.n;
    v(i, 2) = e.t;
  }
  return out;
}

py::dict tensor_dict(const InteractionTensor& omega) {
  return py::dict("shape"_a = py::make_tuple(omega.models, omega.data, omega.features),
                  "gamma_corr"_a = omega.gamma_corr, "gamma_data"_a = omega.gamma_data,
                  "triples"_a = triples_array(omega));
}

InteractionTensor tensor_from(py::dict d) {
  InteractionTensor omega;
  auto shape = d["shape"].cast<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>();
  std::tie(omega.models, omega.data, omega.features) = shape;
  omega.gamma_corr = d.contains("gamma_corr") ? d["gamma_corr"].cast<float>() : 0.0f;
  omega.gamma_data = d.contains("gamma_data") ? d["gamma_data"].cast<float>() : 0.0f;
  auto t = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>::ensure(d["triples"]);
  if (!t || (t.size() > 0 && (t.ndim() != 2 || t.shape(1) != 3))) {
    throw ValidationError("triples must be an (nnz, 3) integer array");
  }
  const auto* p = t.data();
  for (py::ssize_t i = 0; i < t.size() / 3; ++i) omega.entries.push_back({p[3 * i], p[3 * i + 1], p[3 * i + 2]});
  // round trip through the codec for the bounds and ordering checks
  return decode_tensor(encode_tensor(omega));
}

PredictionMatrix prediction_matrix(const std::vector<std::vector<int>>& preds, const std::vector<int>& labels,
                                   int num_classes) {
  PredictionMatrix pm{preds, labels, num_classes};
  if (pm.num_classes <= 0) {
    for (const int l : labels) pm.num_classes = std::max(pm.num_classes, l + 1);
    for (const auto& row : preds) {
      for (const int l : row) pm.num_classes = std::max(pm.num_classes, l + 1);
    }
  }
  pm.validate();
  return pm;
}

std::vector<py::dict> sweep_rows(const std::vector<SweepRow>& rows) {
  std::vector<py::dict> out;
  for (const auto& r : rows) {
    py::dict d("param"_a = to_double(r.param), "skipped"_a = r.skipped, "reason"_a = r.reason,
               "zeta"_a = r.zeta);
    if (r.eta) d["eta"] = to_double(*r.eta);
    if (r.coupled) d["coupled"] = *r.coupled;
    if (!r.skipped) {
      d["acc"] = r.acc;
      d["agr"] = r.agr;
      d["diff"] = r.diff;
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed forms, simulation, sweeps and interaction tensors for the feature-learning framework";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<FrameworkParams>(m, "FrameworkParams")
      .def(py::init([](double p_d, std::int64_t c, std::int64_t t_d, std::int64_t t_r, std::int64_t n_d,
                       std::int64_t n_r) { return FrameworkParams{p_d, c, t_d, t_r, n_d, n_r}; }),
           "p_d"_a = 0.7, "c"_a = 20, "t_d"_a = 20, "t_r"_a = 180, "n_d"_a = 5, "n_r"_a = 10)
      .def_readwrite("p_d", &FrameworkParams::p_d)
      .def_readwrite("c", &FrameworkParams::c)
      .def_readwrite("t_d", &FrameworkParams::t_d)
      .def_readwrite("t_r", &FrameworkParams::t_r)
      .def_readwrite("n_d", &FrameworkParams::n_d)
      .def_readwrite("n_r", &FrameworkParams::n_r)
      .def("capacities",
           [](const FrameworkParams& p) {
             const auto c = derived_capacities(p);
             return py::make_tuple(c.c_d, c.c_r);
           })
      .def("__eq__", [](const FrameworkParams& a, const FrameworkParams& b) { return a == b; })
      .def("__repr__", [](const FrameworkParams& p) { return "FrameworkParams(" + to_json(p).dump() + ")"; });

  py::class_<AgreementFn>(m, "AgreementFn")
      .def(py::init(&AgreementFn::parse), "spec"_a)
      .def_static("constant", &AgreementFn::constant, "eta"_a)
      .def_static("proportional", &AgreementFn::proportional, "eta"_a)
      .def_static("step", &AgreementFn::step, "eta"_a, "theta"_a)
      .def("__call__", &AgreementFn::operator(), "k"_a, "c"_a)
      .def("__str__", &AgreementFn::to_string)
      .def("__repr__", [](const AgreementFn& z) { return "AgreementFn('" + z.to_string() + "')"; });
  py::implicitly_convertible<std::string, AgreementFn>();

  m.def("expected_accuracy", py::overload_cast<const FrameworkParams&>(&expected_accuracy), "params"_a);
  m.def("expected_agreement", py::overload_cast<const FrameworkParams&, const AgreementFn&>(&expected_agreement),
        "params"_a, "zeta"_a);
  m.def(
      "q_components",
      [](const FrameworkParams& p) {
        const auto q = q_components(p);
        return py::dict("q1"_a = q.q1, "q2"_a = q.q2, "q3"_a = q.q3);
      },
      "params"_a);
  m.def(
      "coverage_bound",
      [](const FrameworkParams& p, double beta_d, double beta_r) {
        return coverage_bound(p, CoverageParams{beta_d, beta_r});
      },
      "params"_a, "beta_d"_a, "beta_r"_a);

  m.def(
      "exact_accuracy", [](const FrameworkParams& p) { return to_string(exact::expected_accuracy(p)); },
      "params"_a);
  m.def(
      "exact_agreement",
      [](const FrameworkParams& p, const AgreementFn& z) { return to_string(exact::expected_agreement(p, z)); },
      "params"_a, "zeta"_a);
  m.def(
      "enum_accuracy", [](const FrameworkParams& p) { return to_string(enum_accuracy(p)); }, "params"_a);
  m.def(
      "enum_agreement",
      [](const FrameworkParams& p, const AgreementFn& z) { return to_string(enum_agreement(p, z)); }, "params"_a,
      "zeta"_a);

  m.def(
      "mc_accuracy",
      [](const FrameworkParams& p, std::uint64_t samples, std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release nogil;
        const auto r = mc_accuracy(p, samples, seed, threads);
        py::gil_scoped_acquire gil;
        return estimate_dict(r);
      },
      "params"_a, "samples"_a = 1'000'000, "seed"_a = 0, "threads"_a = 1);
  m.def(
      "mc_agreement",
      [](const FrameworkParams& p, const AgreementFn& z, std::uint64_t samples, std::uint64_t seed,
         const std::string& mode, unsigned threads) {
        AgreementMode am = AgreementMode::Rao;
        if (mode == "bernoulli") {
          am = AgreementMode::Bernoulli;
        } else if (mode != "rao") {
          throw ValidationError("mode must be rao or bernoulli");
        }
        py::gil_scoped_release nogil;
        const auto r = mc_agreement(p, z, samples, seed, am, threads);
        py::gil_scoped_acquire gil;
        return estimate_dict(r);
      },
      "params"_a, "zeta"_a, "samples"_a = 1'000'000, "seed"_a = 0, "mode"_a = "rao", "threads"_a = 1);

  m.def(
      "sweep",
      [](const std::string& vary, const std::string& grid, const FrameworkParams& p, const AgreementFn& z,
         std::optional<std::string> couple, unsigned threads) {
        SweepSpec spec;
        spec.base = p;
        spec.vary = vary;
        spec.grid = parse_grid(grid);
        spec.zeta = z;
        if (couple) {
          spec.couple_alpha = parse_decimal(*couple);
          return sweep_rows(sweep_coupled(spec, threads));
        }
        return sweep_rows(sweep_single(spec, threads));
      },
      "vary"_a, "grid"_a, "params"_a = FrameworkParams{}, "zeta"_a = AgreementFn::constant(0.9),
      "couple"_a = py::none(), "threads"_a = 1);
  m.def("parse_grid", [](const std::string& spec) {
    std::vector<double> out;
    for (const auto& q : parse_grid(spec)) out.push_back(to_double(q));
    return out;
  });

  m.def(
      "fit_pca",
      [](const Eigen::MatrixXf& values, std::size_t k) {
        const auto b = fit_pca(ActivationMatrix{{}, values}, k);
        return py::dict("columns"_a = b.columns, "singular_values"_a = b.singular_values,
                        "column_means"_a = b.column_means);
      },
      "values"_a, "k"_a);
  m.def(
      "build_interaction_tensor",
      [](const std::vector<Eigen::MatrixXf>& acts, std::size_t pcs, double corr_percentile, double data_percentile,
         std::optional<double> gamma_corr, std::optional<double> gamma_data, unsigned threads) {
        std::vector<ActivationMatrix> models;
        for (std::size_t i = 0; i < acts.size(); ++i) models.push_back({"m" + std::to_string(i), acts[i]});
        PipelineConfig cfg{pcs, corr_percentile, data_percentile, gamma_corr.value_or(-1.0),
                           gamma_data.value_or(-1.0), threads};
        PipelineResult r;
        {
          py::gil_scoped_release nogil;
          r = build_interaction_tensor(models, cfg);
        }
        py::dict d = tensor_dict(r.features.omega);
        py::array_t<std::uint32_t> ids({static_cast<py::ssize_t>(r.assignment.models),
                                        static_cast<py::ssize_t>(r.assignment.k)});
        std::copy(r.assignment.ids.begin(), r.assignment.ids.end(), ids.mutable_data());
        d["assignment"] = ids;
        d["pcs"] = r.pcs;
        d["warnings"] = r.warnings;
        return d;
      },
      "activations"_a, "pcs"_a = 50, "corr_percentile"_a = 90.0, "data_percentile"_a = 90.0,
      "gamma_corr"_a = py::none(), "gamma_data"_a = py::none(), "threads"_a = 1);

  m.def(
      "read_activations", [](const std::filesystem::path& p) { return read_activations(p).values; }, "path"_a);
  m.def(
      "write_activations",
      [](const std::filesystem::path& p, const Eigen::MatrixXf& v) { write_activations(p, ActivationMatrix{{}, v}); },
      "path"_a, "values"_a);
  m.def("read_predictions", &read_predictions, "path"_a);
  m.def("write_predictions", &write_predictions, "path"_a, "labels"_a);
  m.def(
      "read_tensor", [](const std::filesystem::path& p) { return tensor_dict(read_tensor(p)); }, "path"_a);
  m.def(
      "write_tensor", [](const std::filesystem::path& p, py::dict d) { write_tensor(p, tensor_from(d)); }, "path"_a,
      "tensor"_a);

  m.def(
      "feature_frequency",
      [](py::dict d) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        for (const auto& f : feature_frequency(tensor_from(d))) out.emplace_back(f.feature, f.data_count);
        return out;
      },
      "tensor"_a);
  m.def("ensemble_confidence",
        [](const std::vector<std::vector<int>>& preds, const std::vector<int>& labels, int num_classes) {
          return ensemble_confidence(prediction_matrix(preds, labels, num_classes));
        },
        "predictions"_a, "labels"_a, "num_classes"_a = 0);
  m.def(
      "feature_similarity",
      [](std::vector<std::uint32_t> a, std::vector<std::uint32_t> b) { return feature_similarity(a, b); }, "a"_a,
      "b"_a);
  m.def(
      "nearest_neighbors",
      [](py::dict d, std::size_t index, std::size_t top) {
        std::vector<std::pair<std::uint32_t, double>> out;
        for (const auto& n : nearest_neighbors(data_features(tensor_from(d)), index, top)) {
          out.emplace_back(n.datum, n.similarity);
        }
        return out;
      },
      "tensor"_a, "index"_a, "top"_a = 10);

  m.def("feature_frequency_csv", [](py::dict d) { return feature_frequency_csv(tensor_from(d)); }, "tensor"_a);
  m.def("data_model_csv", [](py::dict d) { return data_model_csv(tensor_from(d)); }, "tensor"_a);
  m.def(
      "shared_error_csv",
      [](py::dict d, const std::vector<std::vector<int>>& preds, const std::vector<int>& labels,
         const std::string& mode, int num_classes) {
        return shared_error_csv(tensor_from(d), prediction_matrix(preds, labels, num_classes),
                                parse_mistake_mode(mode));
      },
      "tensor"_a, "predictions"_a, "labels"_a, "mode"_a = "identical", "num_classes"_a = 0);
}

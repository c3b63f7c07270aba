#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ifl/analytics.hpp"
#include "ifl/enumerate.hpp"
#include "ifl/error.hpp"
#include "ifl/io.hpp"
#include "ifl/model.hpp"
#include "ifl/parallel.hpp"
#include "ifl/simulator.hpp"
#include "ifl/sweep.hpp"
#include "ifl/tensor.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace ifl;

struct Options {
  std::string params;
  std::string zeta = "constant:0.9";
  std::uint64_t seed = 0;
  std::uint64_t samples = 1'000'000;
  std::string mode = "rao";
  unsigned threads = 0;
  std::string out;

  std::string vary;
  std::string grid;
  std::string couple;
  std::string zeta_family;
  std::string eta_grid;
  double theta = 0.8;
  std::uint64_t mc_samples = 0;

  std::string manifest;
  std::string meta;
  std::size_t pcs = 0;
  double corr_percentile = -1.0;
  double data_percentile = -1.0;
  double gamma_corr = -1.0;
  double gamma_data = -1.0;

  std::string tensor;
  std::string report;
  std::vector<std::string> predictions;
  std::string labels;
  int num_classes = 0;
  std::string mistake_mode = "identical";
  bool density = false;
  std::size_t index = 0;
  std::size_t top = 10;
};

unsigned threads_of(const Options& o) { return o.threads > 0 ? o.threads : default_threads(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Inline JSON or a file; fields left out keep their defaults.
FrameworkParams load_params(const std::string& arg) {
  json merged = to_json(FrameworkParams{});
  if (arg.empty()) return params_from_json(merged);
  const std::string text = arg.front() == '{' ? arg : slurp(arg);
  json given;
  try {
    given = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed parameter JSON: ") + e.what());
  }
  if (!given.is_object()) throw ValidationError("parameters must be a JSON object");
  for (const auto& [k, v] : given.items()) merged[k] = v;
  return params_from_json(merged);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

void emit_json(const json& j, const std::string& out = {}) { emit(j.dump(2) + "\n", out); }

json q_json(const QComponents& q) { return {{"q1", q.q1}, {"q2", q.q2}, {"q3", q.q3}}; }

void cmd_closed_form(const Options& o) {
  const FrameworkParams p = load_params(o.params);
  const AgreementFn zeta = AgreementFn::parse(o.zeta);
  const Capacities caps = derived_capacities(p);
  const double acc = expected_accuracy(p);
  const double agr = expected_agreement(p, zeta);
  json j{{"params", to_json(p)}, {"zeta", zeta.to_string()}, {"acc", acc}, {"agr", agr}, {"diff", acc - agr},
         {"c_d", caps.c_d}, {"c_r", caps.c_r}};
  j.update(q_json(q_components(p)));
  emit_json(j);
}

AgreementMode parse_mode(const std::string& s) {
  if (s == "rao") return AgreementMode::Rao;
  if (s == "bernoulli") return AgreementMode::Bernoulli;
  throw ValidationError("mode must be rao or bernoulli");
}

void cmd_simulate(const Options& o) {
  const FrameworkParams p = load_params(o.params);
  const AgreementFn zeta = AgreementFn::parse(o.zeta);
  const AgreementMode mode = parse_mode(o.mode);
  const unsigned threads = threads_of(o);
  const double acc = expected_accuracy(p);
  const double agr = expected_agreement(p, zeta);
  const EstimateResult a = mc_accuracy(p, o.samples, o.seed, threads);
  const EstimateResult g = mc_agreement(p, zeta, o.samples, o.seed, mode, threads);
  json ja = to_json(a);
  ja["closed_form"] = acc;
  ja["delta"] = a.mean - acc;
  json jg = to_json(g);
  jg["closed_form"] = agr;
  jg["delta"] = g.mean - agr;
  emit_json({{"params", to_json(p)},
             {"zeta", zeta.to_string()},
             {"samples", o.samples},
             {"seed", o.seed},
             {"mode", o.mode},
             {"accuracy", ja},
             {"agreement", jg}});
}

void cmd_enumerate(const Options& o) {
  const FrameworkParams p = load_params(o.params);
  const AgreementFn zeta = AgreementFn::parse(o.zeta);
  derived_capacities(p);
  const Rational acc = enum_accuracy(p);
  const Rational agr = enum_agreement(p, zeta);
  const exact::QComponents q = enum_q_components(p);
  json q2 = json::array();
  for (const auto& v : q.q2) q2.push_back(to_string(v));
  emit_json({{"params", to_json(p)},
             {"zeta", zeta.to_string()},
             {"acc", to_string(acc)},
             {"agr", to_string(agr)},
             {"q1", to_string(q.q1)},
             {"q2", q2},
             {"q3", to_string(q.q3)},
             {"acc_float", to_double(acc)},
             {"agr_float", to_double(agr)}});
}

void write_with_sidecar(const std::string& csv, const std::string& sidecar, const std::string& out) {
  if (out.empty()) {
    std::cout << csv;
    return;
  }
  write_text_file(out, csv);
  write_text_file(sidecar_path(out), sidecar);
}

void run_coverage(const Options& o, const FrameworkParams& p) {
  const auto betas = parse_grid(o.grid.empty() ? "0:1:0.05" : o.grid);
  const auto rows = sweep_coverage(p, betas, o.mc_samples, o.seed, threads_of(o));
  write_with_sidecar(coverage_csv(rows), coverage_params_json(p, rows), o.out);
}

const char* default_grid(const std::string& vary) {
  if (vary == "p_d") return "0.5:0.95:0.05";
  if (vary == "c") return "10:40:2";
  if (vary == "t_d") return "5:50:5";
  if (vary == "t_r") return "60:300:20";
  if (vary == "n_d") return "1:10:1";
  if (vary == "n_r") return "5:25:5";
  return "0:1:0.05";
}

void cmd_sweep(const Options& o) {
  if (o.vary.empty()) throw ValidationError("sweep requires --vary");
  if (!is_sweep_param(o.vary)) throw ValidationError("unknown sweep parameter '" + o.vary + "'");
  const FrameworkParams base = load_params(o.params);
  if (o.vary == "beta") {
    run_coverage(o, base);
    return;
  }
  const auto grid = parse_grid(o.grid.empty() ? default_grid(o.vary) : o.grid);
  const unsigned threads = threads_of(o);
  std::vector<SweepRow> rows;
  SweepKind kind = SweepKind::Single;
  std::string coupled_name;
  if (!o.zeta_family.empty()) {
    if (!o.couple.empty()) throw ValidationError("--zeta-family cannot be combined with --couple");
    const auto family = parse_zeta_family(o.zeta_family);
    if (o.eta_grid.empty()) throw ValidationError("--zeta-family requires --eta-grid");
    rows = sweep_zeta(base, family, parse_grid(o.eta_grid), o.theta, o.vary, grid, threads);
    kind = SweepKind::Zeta;
  } else {
    SweepSpec spec;
    spec.base = base;
    spec.vary = o.vary;
    spec.grid = grid;
    spec.zeta = AgreementFn::parse(o.zeta);
    if (!o.couple.empty()) {
      spec.couple_alpha = parse_decimal(o.couple);
      rows = sweep_coupled(spec, threads);
      kind = SweepKind::Coupled;
      coupled_name = o.vary == "n_r" ? "n_d" : "t_d";
    } else {
      rows = sweep_single(spec, threads);
    }
  }
  write_with_sidecar(sweep_csv(rows, kind, coupled_name), sweep_params_json(rows), o.out);
}

void cmd_coverage(const Options& o) { run_coverage(o, load_params(o.params)); }

void cmd_tensor_build(const Options& o) {
  if (o.manifest.empty()) throw ValidationError("tensor build requires --manifest");
  if (o.out.empty()) throw ValidationError("tensor build requires --out");
  const Manifest m = read_manifest(o.manifest);
  std::vector<ActivationMatrix> models;
  json ids = json::array();
  for (const auto& entry : m.models) {
    models.push_back(read_activations(entry.activations, entry.id));
    ids.push_back(entry.id);
  }
  PipelineConfig cfg;
  cfg.pcs = o.pcs > 0 ? o.pcs : m.pcs;
  cfg.corr_percentile = o.corr_percentile >= 0 ? o.corr_percentile : m.corr_percentile;
  cfg.data_percentile = o.data_percentile >= 0 ? o.data_percentile : m.data_percentile;
  cfg.gamma_corr = o.gamma_corr;
  cfg.gamma_data = o.gamma_data;
  cfg.threads = threads_of(o);
  const PipelineResult r = build_interaction_tensor(models, cfg);
  const InteractionTensor& omega = r.features.omega;
  write_tensor(o.out, omega);

  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  json sizes = json::array();
  for (const auto s : r.assignment.cluster_sizes()) sizes.push_back(s);
  json meta{{"tensor", o.out},
            {"models", ids},
            {"data", omega.data},
            {"pcs", r.pcs},
            {"corr_percentile", cfg.corr_percentile},
            {"data_percentile", cfg.data_percentile},
            {"gamma_corr", omega.gamma_corr},
            {"gamma_data", omega.gamma_data},
            {"clusters", omega.features},
            {"cluster_sizes", sizes},
            {"entries", omega.entries.size()},
            {"warnings", r.warnings}};
  emit_json(meta);
  if (!o.meta.empty()) emit_json(meta, o.meta);
}

PredictionMatrix load_predictions(const Options& o, std::size_t models) {
  std::vector<std::string> paths = o.predictions;
  std::string labels = o.labels;
  if (!o.manifest.empty()) {
    const Manifest m = read_manifest(o.manifest);
    if (paths.empty()) {
      for (const auto& entry : m.models) {
        if (entry.predictions.empty()) throw ValidationError("model '" + entry.id + "' has no predictions");
        paths.push_back(entry.predictions.string());
      }
    }
    if (labels.empty()) labels = m.labels.string();
  }
  if (paths.empty()) throw ValidationError("report '" + o.report + "' requires --predictions or --manifest");
  if (labels.empty()) throw ValidationError("report '" + o.report + "' requires --labels");
  if (paths.size() != models) {
    throw ValidationError("got " + std::to_string(paths.size()) + " prediction files for " +
                          std::to_string(models) + " models");
  }
  PredictionMatrix pm;
  for (const auto& p : paths) pm.predictions.push_back(read_predictions(p));
  pm.true_labels = read_predictions(labels);
  int top = 0;
  for (const int l : pm.true_labels) top = std::max(top, l + 1);
  for (const auto& row : pm.predictions) {
    for (const int l : row) top = std::max(top, l + 1);
  }
  pm.num_classes = o.num_classes > 0 ? o.num_classes : top;
  pm.validate();
  return pm;
}

std::vector<int> load_labels(const Options& o) {
  std::string labels = o.labels;
  if (labels.empty() && !o.manifest.empty()) labels = read_manifest(o.manifest).labels.string();
  if (labels.empty()) throw ValidationError("report 'perclass' requires --labels or --manifest");
  return read_predictions(labels);
}

void cmd_tensor_analyze(const Options& o) {
  if (o.tensor.empty()) throw ValidationError("tensor analyze requires --tensor");
  if (o.report.empty()) throw ValidationError("tensor analyze requires --report");
  const InteractionTensor omega = read_tensor(o.tensor);
  std::string csv;
  if (o.report == "o1") {
    csv = feature_frequency_csv(omega);
  } else if (o.report == "o2") {
    const PredictionMatrix pm = load_predictions(o, omega.models);
    csv = o.density ? density_csv(omega, pm) : confidence_csv(omega, pm);
  } else if (o.report == "o3") {
    csv = data_model_csv(omega);
  } else if (o.report == "o4") {
    const PredictionMatrix pm = load_predictions(o, omega.models);
    csv = shared_error_csv(omega, pm, parse_mistake_mode(o.mistake_mode));
  } else if (o.report == "neighbors") {
    csv = neighbors_csv(omega, o.index, o.top);
  } else if (o.report == "perclass") {
    const std::vector<int> labels = load_labels(o);
    int top = 0;
    for (const int l : labels) top = std::max(top, l + 1);
    csv = per_class_csv(omega, labels, o.num_classes > 0 ? o.num_classes : top);
  } else {
    throw ValidationError("report must be one of o1, o2, o3, o4, neighbors, perclass");
  }
  emit(csv, o.out);
}

void cmd_neighbors(const Options& o) {
  if (o.tensor.empty()) throw ValidationError("neighbors requires --tensor");
  emit(neighbors_csv(read_tensor(o.tensor), o.index, o.top), o.out);
}

void add_model_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--params", o.params, "parameter JSON file or inline object");
  cmd->add_option("--zeta", o.zeta, "agreement function, e.g. constant:0.9, proportional:0.5, step:3:0.8");
}

void add_threads(CLI::App* cmd, Options& o) {
  cmd->add_option("--threads", o.threads, "worker cap (default IFL_THREADS or hardware)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-learning framework: closed forms, simulation, sweeps and interaction tensors"};
  app.require_subcommand(1);
  Options o;

  auto* closed = app.add_subcommand("closed-form", "expected accuracy and agreement");
  add_model_flags(closed, o);

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo estimates next to the closed forms");
  add_model_flags(sim, o);
  sim->add_option("--samples", o.samples, "samples per estimator");
  sim->add_option("--seed", o.seed, "random seed");
  sim->add_option("--mode", o.mode, "agreement estimator: rao or bernoulli");
  add_threads(sim, o);

  auto* en = app.add_subcommand("enumerate", "exact rationals by exhaustive enumeration");
  add_model_flags(en, o);

  auto* sweep = app.add_subcommand("sweep", "one-parameter sweeps to CSV");
  add_model_flags(sweep, o);
  sweep->add_option("--vary", o.vary, "p_d, c, t_d, t_r, n_d, n_r or beta");
  sweep->add_option("--grid", o.grid, "start:stop:step");
  sweep->add_option("--couple", o.couple, "alpha for n_d = floor(alpha n_r) or t_d = floor(alpha t_r)");
  sweep->add_option("--zeta-family", o.zeta_family, "constant, proportional or step");
  sweep->add_option("--eta-grid", o.eta_grid, "eta values for --zeta-family");
  sweep->add_option("--theta", o.theta, "theta for the step family");
  sweep->add_option("--mc-samples", o.mc_samples, "simulated column for beta sweeps");
  sweep->add_option("--seed", o.seed, "random seed");
  sweep->add_option("--out", o.out, "CSV path (stdout when absent)");
  add_threads(sweep, o);

  auto* cov = app.add_subcommand("coverage", "coverage bound over a beta grid");
  cov->add_option("--params", o.params, "parameter JSON file or inline object");
  cov->add_option("--grid", o.grid, "beta grid, default 0:1:0.05");
  cov->add_option("--mc-samples", o.mc_samples, "simulated column");
  cov->add_option("--seed", o.seed, "random seed");
  cov->add_option("--out", o.out, "CSV path (stdout when absent)");
  add_threads(cov, o);

  auto* tensor = app.add_subcommand("tensor", "interaction tensor");
  tensor->require_subcommand(1);
  auto* build = tensor->add_subcommand("build", "build the interaction tensor from a manifest");
  build->add_option("--manifest", o.manifest, "manifest JSON");
  build->add_option("--out", o.out, "tensor file");
  build->add_option("--meta", o.meta, "also write the metadata JSON here");
  build->add_option("--pcs", o.pcs, "principal components per model");
  build->add_option("--corr-percentile", o.corr_percentile, "percentile for gamma_corr");
  build->add_option("--data-percentile", o.data_percentile, "percentile for gamma_data");
  build->add_option("--gamma-corr", o.gamma_corr, "explicit gamma_corr");
  build->add_option("--gamma-data", o.gamma_data, "explicit gamma_data");
  add_threads(build, o);

  auto* analyze = tensor->add_subcommand("analyze", "reports over a tensor file");
  analyze->add_option("--tensor", o.tensor, "tensor file");
  analyze->add_option("--report", o.report, "o1, o2, o3, o4, neighbors or perclass");
  analyze->add_option("--predictions", o.predictions, "PRED files, one per model")->delimiter(',');
  analyze->add_option("--labels", o.labels, "PRED file of true labels");
  analyze->add_option("--manifest", o.manifest, "take predictions and labels from a manifest");
  analyze->add_option("--num-classes", o.num_classes, "class count (default max label + 1)");
  analyze->add_option("--mistake-mode", o.mistake_mode, "identical or joint");
  analyze->add_flag("--density", o.density, "o2 as high/low feature density");
  analyze->add_option("--index", o.index, "query datum for neighbors");
  analyze->add_option("--top", o.top, "neighbor count");
  analyze->add_option("--out", o.out, "CSV path (stdout when absent)");

  auto* nb = app.add_subcommand("neighbors", "most similar data by feature overlap");
  nb->add_option("--tensor", o.tensor, "tensor file");
  nb->add_option("--index", o.index, "query datum");
  nb->add_option("--top", o.top, "neighbor count");
  nb->add_option("--out", o.out, "CSV path (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*closed) cmd_closed_form(o);
    if (*sim) cmd_simulate(o);
    if (*en) cmd_enumerate(o);
    if (*sweep) cmd_sweep(o);
    if (*cov) cmd_coverage(o);
    if (*build) cmd_tensor_build(o);
    if (*analyze) cmd_tensor_analyze(o);
    if (*nb) cmd_neighbors(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "ifl/sweep.hpp"

#include <array>

#include "ifl/analytics.hpp"
#include "ifl/error.hpp"
#include "ifl/model.hpp"
#include "ifl/parallel.hpp"

namespace ifl {
namespace {

constexpr std::size_t kMaxGrid = 1'000'000;
constexpr std::array<std::string_view, 7> kParams{"p_d", "c", "t_d", "t_r", "n_d", "n_r", "beta"};

std::string decimal(const Rational& q) { return format_number(to_double(q)); }

std::int64_t as_integer(std::string_view name, const Rational& value) {
  if (value.get_den() != 1) {
    throw ValidationError(std::string(name) + " must be an integer, got " + decimal(value));
  }
  if (!value.get_num().fits_slong_p()) throw ValidationError(std::string(name) + " out of range");
  return value.get_num().get_si();
}

void evaluate(SweepRow& row, const AgreementFn& zeta) {
  try {
    const FrameworkParams& p = *row.resolved;
    derived_capacities(p);
    row.acc = expected_accuracy(p);
    row.agr = expected_agreement(p, zeta);
    row.diff = row.acc - row.agr;
  } catch (const ValidationError& e) {
    row.skipped = true;
    row.reason = e.what();
  }
}

std::vector<std::string> numbers(const SweepRow& row) {
  if (row.skipped) return {"", "", "", "1", row.reason};
  return {format_number(row.acc), format_number(row.agr), format_number(row.diff), "0", ""};
}

}  // namespace

std::vector<Rational> parse_grid(std::string_view spec) {
  const auto first = spec.find(':');
  if (first == std::string_view::npos) return {parse_decimal(spec)};
  const auto second = spec.find(':', first + 1);
  if (second == std::string_view::npos || spec.find(':', second + 1) != std::string_view::npos) {
    throw ValidationError("grid must be start:stop:step, got '" + std::string(spec) + "'");
  }
  const Rational start = parse_decimal(spec.substr(0, first));
  const Rational stop = parse_decimal(spec.substr(first + 1, second - first - 1));
  const Rational step = parse_decimal(spec.substr(second + 1));
  if (step <= 0) throw ValidationError("grid step must be positive");
  if (stop < start) throw ValidationError("grid '" + std::string(spec) + "' is empty");
  const std::int64_t count = floor_to_int((stop - start) / step) + 1;
  if (count > static_cast<std::int64_t>(kMaxGrid)) {
    throw ValidationError("grid '" + std::string(spec) + "' has more than 1e6 points");
  }
  std::vector<Rational> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    Rational v = start + step * i;
    v.canonicalize();
    out.push_back(v);
  }
  return out;
}

bool is_sweep_param(std::string_view name) {
  for (const auto p : kParams) {
    if (p == name) return true;
  }
  return false;
}

FrameworkParams apply_param(const FrameworkParams& base, std::string_view name, const Rational& value) {
  FrameworkParams p = base;
  if (name == "p_d") {
    p.p_d = to_double(value);
  } else if (name == "c") {
    p.c = as_integer(name, value);
  } else if (name == "t_d") {
    p.t_d = as_integer(name, value);
  } else if (name == "t_r") {
    p.t_r = as_integer(name, value);
  } else if (name == "n_d") {
    p.n_d = as_integer(name, value);
  } else if (name == "n_r") {
    p.n_r = as_integer(name, value);
  } else {
    throw ValidationError("cannot vary '" + std::string(name) + "' here");
  }
  return p;
}

std::vector<SweepRow> sweep_single(const SweepSpec& spec, unsigned threads) {
  if (spec.vary == "beta") throw ValidationError("beta sweeps go through sweep_coverage");
  if (!is_sweep_param(spec.vary)) throw ValidationError("unknown sweep parameter '" + spec.vary + "'");
  if (spec.couple_alpha) throw ValidationError("sweep_single does not couple parameters");
  if (spec.grid.empty()) throw ValidationError("empty grid");
  std::vector<SweepRow> rows(spec.grid.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.param = spec.grid[i];
    row.zeta = spec.zeta.to_string();
    try {
      row.resolved = apply_param(spec.base, spec.vary, row.param);
    } catch (const ValidationError& e) {
      row.skipped = true;
      row.reason = e.what();
      return;
    }
    evaluate(row, spec.zeta);
  });
  return rows;
}

std::vector<SweepRow> sweep_coupled(const SweepSpec& spec, unsigned threads) {
  if (!spec.couple_alpha) throw ValidationError("coupled sweep needs alpha");
  if (*spec.couple_alpha <= 0) throw ValidationError("alpha must be positive");
  if (spec.vary != "n_r" && spec.vary != "t_r") {
    throw ValidationError("coupling applies to n_r or t_r, not '" + spec.vary + "'");
  }
  if (spec.grid.empty()) throw ValidationError("empty grid");
  const std::string target = spec.vary == "n_r" ? "n_d" : "t_d";
  const Rational alpha = *spec.couple_alpha;
  std::vector<SweepRow> rows(spec.grid.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.param = spec.grid[i];
    row.zeta = spec.zeta.to_string();
    try {
      FrameworkParams p = apply_param(spec.base, spec.vary, row.param);
      const std::int64_t coupled = floor_to_int(alpha * row.param);
      row.coupled = coupled;
      (target == "n_d" ? p.n_d : p.t_d) = coupled;
      row.resolved = p;
      if (coupled < 1) {
        row.skipped = true;
        row.reason = target + " = " + std::to_string(coupled) + " after coupling";
        return;
      }
    } catch (const ValidationError& e) {
      row.skipped = true;
      row.reason = e.what();
      return;
    }
    evaluate(row, spec.zeta);
  });
  return rows;
}

AgreementFn::Kind parse_zeta_family(std::string_view text) {
  if (text == "constant") return AgreementFn::Kind::Constant;
  if (text == "proportional") return AgreementFn::Kind::Proportional;
  if (text == "step") return AgreementFn::Kind::Step;
  throw ValidationError("zeta family must be constant, proportional or step");
}

std::vector<SweepRow> sweep_zeta(const FrameworkParams& base, AgreementFn::Kind family,
                                 const std::vector<Rational>& eta_grid, double theta,
                                 const std::string& vary, const std::vector<Rational>& grid,
                                 unsigned threads) {
  if (eta_grid.empty() || grid.empty()) throw ValidationError("empty grid");
  std::vector<AgreementFn> zetas;
  for (const auto& eta : eta_grid) {
    switch (family) {
      case AgreementFn::Kind::Constant:
        zetas.push_back(AgreementFn::constant(to_double(eta)));
        break;
      case AgreementFn::Kind::Proportional:
        zetas.push_back(AgreementFn::proportional(to_double(eta)));
        break;
      case AgreementFn::Kind::Step:
        zetas.push_back(AgreementFn::step(as_integer("step eta", eta), theta));
        break;
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t e = 0; e < zetas.size(); ++e) {
    SweepSpec spec;
    spec.base = base;
    spec.vary = vary;
    spec.grid = grid;
    spec.zeta = zetas[e];
    for (auto& row : sweep_single(spec, threads)) {
      row.eta = eta_grid[e];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<CoverageRow> sweep_coverage(const FrameworkParams& base, const std::vector<Rational>& betas,
                                        std::uint64_t mc_samples, std::uint64_t seed, unsigned threads) {
  derived_capacities(base);
  std::vector<CoverageRow> rows;
  for (const auto& b : betas) {
    if (b < 0 || b > 1) throw ValidationError("beta " + decimal(b) + " outside [0, 1]");
    CoverageRow row;
    row.beta = b;
    const double beta = to_double(b);
    row.bound = coverage_bound(base, {beta, beta});
    if (mc_samples > 0) row.mc = mc_coverage_accuracy(base, {beta, beta}, mc_samples, seed, threads);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, SweepKind kind, const std::string& coupled_name) {
  std::vector<std::string> header;
  if (kind == SweepKind::Zeta) header.push_back("eta");
  header.push_back("param");
  if (kind == SweepKind::Coupled) header.push_back(coupled_name.empty() ? "coupled" : coupled_name);
  for (const char* h : {"acc", "agr", "diff", "skipped", "reason"}) header.push_back(h);

  std::vector<std::vector<std::string>> out;
  for (const auto& row : rows) {
    std::vector<std::string> fields;
    if (kind == SweepKind::Zeta) fields.push_back(row.eta ? decimal(*row.eta) : "");
    fields.push_back(decimal(row.param));
    if (kind == SweepKind::Coupled) fields.push_back(row.coupled ? std::to_string(*row.coupled) : "");
    for (auto& f : numbers(row)) fields.push_back(std::move(f));
    out.push_back(std::move(fields));
  }
  return render_csv(header, out);
}

std::string coverage_csv(const std::vector<CoverageRow>& rows) {
  const bool mc = !rows.empty() && rows.front().mc.has_value();
  std::vector<std::string> header{"param", "bound"};
  if (mc) {
    header.push_back("mc_mean");
    header.push_back("mc_stderr");
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& row : rows) {
    std::vector<std::string> fields{decimal(row.beta), format_number(row.bound)};
    if (row.mc) {
      fields.push_back(format_number(row.mc->mean));
      fields.push_back(format_number(row.mc->std_error));
    }
    out.push_back(std::move(fields));
  }
  return render_csv(header, out);
}

std::string sweep_params_json(const std::vector<SweepRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    if (!row.resolved) {
      arr.push_back(nullptr);
      continue;
    }
    nlohmann::json j = to_json(*row.resolved);
    j["zeta"] = row.zeta;
    j["skipped"] = row.skipped;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string coverage_params_json(const FrameworkParams& base, const std::vector<CoverageRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json j = to_json(base);
    const double beta = to_double(row.beta);
    j["beta_d"] = beta;
    j["beta_r"] = beta;
    if (row.mc) j["mc"] = to_json(*row.mc);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  std::filesystem::path out = csv;
  out.replace_extension();
  out += ".params.json";
  return out;
}

}  // namespace ifl

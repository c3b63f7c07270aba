#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifl/params.hpp"
#include "ifl/rational.hpp"
#include "ifl/simulator.hpp"

namespace ifl {

/// Inclusive "start:stop:step" grid in exact decimal arithmetic; stop is
/// included only when reached exactly. A lone number is a one-point grid.
std::vector<Rational> parse_grid(std::string_view spec);

/// Names accepted by --vary.
bool is_sweep_param(std::string_view name);

struct SweepSpec {
  FrameworkParams base;
  std::string vary;
  std::vector<Rational> grid;
  std::optional<Rational> couple_alpha;
  AgreementFn zeta = AgreementFn::constant(0.9);
};

struct SweepRow {
  Rational param;
  std::optional<Rational> eta;            // zeta sweeps
  std::optional<std::int64_t> coupled;    // coupled sweeps
  double acc = 0.0;
  double agr = 0.0;
  double diff = 0.0;
  bool skipped = false;
  std::string reason;
  std::optional<FrameworkParams> resolved;  // absent when the value cannot be applied
  std::string zeta;
};

/// Sets `name` to `value` on a copy of `base`. Throws ValidationError when the
/// value does not fit the parameter (e.g. a fractional t_r).
FrameworkParams apply_param(const FrameworkParams& base, std::string_view name, const Rational& value);

std::vector<SweepRow> sweep_single(const SweepSpec& spec, unsigned threads = 1);

/// n_r or t_r sweep with n_d = floor(alpha n_r) or t_d = floor(alpha t_r).
std::vector<SweepRow> sweep_coupled(const SweepSpec& spec, unsigned threads = 1);

/// Rows for every (eta, value) pair, eta-major.
std::vector<SweepRow> sweep_zeta(const FrameworkParams& base, AgreementFn::Kind family,
                                 const std::vector<Rational>& eta_grid, double theta,
                                 const std::string& vary, const std::vector<Rational>& grid,
                                 unsigned threads = 1);

AgreementFn::Kind parse_zeta_family(std::string_view text);

struct CoverageRow {
  Rational beta;
  double bound = 0.0;
  std::optional<EstimateResult> mc;
};

/// beta_d = beta_r = beta at every grid point; mc_samples > 0 adds a
/// simulated column.
std::vector<CoverageRow> sweep_coverage(const FrameworkParams& base, const std::vector<Rational>& betas,
                                        std::uint64_t mc_samples = 0, std::uint64_t seed = 0,
                                        unsigned threads = 1);

enum class SweepKind { Single, Coupled, Zeta };

std::string sweep_csv(const std::vector<SweepRow>& rows, SweepKind kind,
                      const std::string& coupled_name = {});
std::string coverage_csv(const std::vector<CoverageRow>& rows);

/// One JSON object per row: the resolved parameters (null when the grid value
/// could not be applied), zeta, and the skip flag.
std::string sweep_params_json(const std::vector<SweepRow>& rows);
std::string coverage_params_json(const FrameworkParams& base, const std::vector<CoverageRow>& rows);

/// "<dir>/<stem>.params.json" next to a CSV path.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

}  // namespace ifl

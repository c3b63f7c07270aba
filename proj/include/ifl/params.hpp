#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ifl/rational.hpp"
#include "json.hpp"

namespace ifl {

/// The six free parameters of the binary feature-learning model.
///
/// `c` is the total capacity of a model; each class receives c/2 features of
/// which `c_d` are dominant and `c_r` rare (see derived_capacities).
struct FrameworkParams {
  double p_d = 0.7;
  std::int64_t c = 20;
  std::int64_t t_d = 20;
  std::int64_t t_r = 180;
  std::int64_t n_d = 5;
  std::int64_t n_r = 10;

  double p_r() const { return 1.0 - p_d; }
  bool operator==(const FrameworkParams&) const = default;
};

/// Per-class capacity split.
struct Capacities {
  std::int64_t c_d = 0;
  std::int64_t c_r = 0;
  bool operator==(const Capacities&) const = default;
};

/// c_d = round-half-up(p_d * c / 2), c_r = c/2 - c_d. Validates the whole
/// parameter set and throws ValidationError naming the first violation.
Capacities derived_capacities(const FrameworkParams& params);

/// Exact p_d (shortest-decimal reading of the double).
Rational exact_p_d(const FrameworkParams& params);

/// Fraction of each feature pool that is learnable.
struct CoverageParams {
  double beta_d = 1.0;
  double beta_r = 1.0;
};

void validate(const CoverageParams& cov);

/// Agreement function: probability that two models sharing k of c features
/// agree on a datum neither of them can classify from its features.
class AgreementFn {
 public:
  enum class Kind { Constant, Proportional, Step };

  static AgreementFn constant(double eta);
  static AgreementFn proportional(double eta);
  static AgreementFn step(std::int64_t eta, double theta);

  /// "constant:0.9", "proportional:2.0", "step:2:0.8".
  static AgreementFn parse(std::string_view text);

  Kind kind() const { return kind_; }
  double eta() const { return eta_; }
  double theta() const { return theta_; }

  double operator()(std::int64_t k, std::int64_t c) const;
  Rational exact(std::int64_t k, std::int64_t c) const;

  std::string to_string() const;

 private:
  AgreementFn(Kind kind, Rational eta, Rational theta, std::string eta_text,
              std::string theta_text);

  Kind kind_;
  double eta_;
  double theta_;
  Rational eta_exact_;
  Rational theta_exact_;
  std::string eta_text_;
  std::string theta_text_;
};

/// ζ(k, c) as a free function.
inline double zeta_eval(const AgreementFn& zeta, std::int64_t k, std::int64_t c) {
  return zeta(k, c);
}

FrameworkParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FrameworkParams& params);

}  // namespace ifl

#include "ifl/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "ifl/error.hpp"

namespace ifl {
namespace {

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

Rational exact_p_d(const FrameworkParams& params) { return decimal_rational(params.p_d); }

Capacities derived_capacities(const FrameworkParams& params) {
  if (!(params.p_d >= 0.0 && params.p_d <= 1.0)) {
    throw ValidationError("p_d must lie in [0, 1]");
  }
  if (params.c < 0) throw ValidationError("c must be nonnegative");
  if (params.c % 2 != 0) throw ValidationError("c must be even");
  if (params.t_d < 1) throw ValidationError("t_d must be a positive integer");
  if (params.t_r < 1) throw ValidationError("t_r must be a positive integer");
  if (params.n_d < 1 || params.n_d > params.t_d) {
    throw ValidationError("n_d must satisfy 1 <= n_d <= t_d");
  }
  if (params.n_r < 1 || params.n_r > params.t_r) {
    throw ValidationError("n_r must satisfy 1 <= n_r <= t_r");
  }
  // Round half up: floor(p_d * c / 2 + 1/2), computed exactly.
  const Rational half_budget = exact_p_d(params) * Rational(params.c, 2);
  Capacities caps;
  caps.c_d = floor_to_int(half_budget + Rational(1, 2));
  caps.c_r = params.c / 2 - caps.c_d;
  if (caps.c_d > params.t_d) {
    throw ValidationError("c_d = " + std::to_string(caps.c_d) + " exceeds t_d = " +
                          std::to_string(params.t_d));
  }
  if (caps.c_r > params.t_r) {
    throw ValidationError("c_r = " + std::to_string(caps.c_r) + " exceeds t_r = " +
                          std::to_string(params.t_r));
  }
  return caps;
}

void validate(const CoverageParams& cov) {
  if (!(cov.beta_d >= 0.0 && cov.beta_d <= 1.0)) {
    throw ValidationError("beta_d must lie in [0, 1]");
  }
  if (!(cov.beta_r >= 0.0 && cov.beta_r <= 1.0)) {
    throw ValidationError("beta_r must lie in [0, 1]");
  }
}

AgreementFn::AgreementFn(Kind kind, Rational eta, Rational theta, std::string eta_text,
                         std::string theta_text)
    : kind_(kind),
      eta_(to_double(eta)),
      theta_(to_double(theta)),
      eta_exact_(std::move(eta)),
      theta_exact_(std::move(theta)),
      eta_text_(std::move(eta_text)),
      theta_text_(std::move(theta_text)) {
  switch (kind_) {
    case Kind::Constant:
      if (eta_exact_ < Rational(1, 2) || eta_exact_ > 1) {
        throw ValidationError("constant agreement requires eta in [0.5, 1]");
      }
      break;
    case Kind::Proportional:
      if (eta_exact_ <= 0) throw ValidationError("proportional agreement requires eta > 0");
      break;
    case Kind::Step:
      if (eta_exact_ < 0 || eta_exact_.get_den() != 1) {
        throw ValidationError("step agreement requires a nonnegative integer eta");
      }
      if (theta_exact_ < Rational(1, 2) || theta_exact_ > 1) {
        throw ValidationError("step agreement requires theta in [0.5, 1]");
      }
      break;
  }
}

AgreementFn AgreementFn::constant(double eta) {
  return AgreementFn(Kind::Constant, decimal_rational(eta), Rational(0), shortest(eta), "");
}

AgreementFn AgreementFn::proportional(double eta) {
  return AgreementFn(Kind::Proportional, decimal_rational(eta), Rational(0), shortest(eta),
                     "");
}

AgreementFn AgreementFn::step(std::int64_t eta, double theta) {
  return AgreementFn(Kind::Step, Rational(eta), decimal_rational(theta),
                     std::to_string(eta), shortest(theta));
}

AgreementFn AgreementFn::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const std::string whole(text);
  if (parts.size() == 2 && parts[0] == "constant") {
    return AgreementFn(Kind::Constant, parse_decimal(parts[1]), Rational(0),
                       std::string(parts[1]), "");
  }
  if (parts.size() == 2 && parts[0] == "proportional") {
    return AgreementFn(Kind::Proportional, parse_decimal(parts[1]), Rational(0),
                       std::string(parts[1]), "");
  }
  if (parts.size() == 3 && parts[0] == "step") {
    return AgreementFn(Kind::Step, parse_decimal(parts[1]), parse_decimal(parts[2]),
                       std::string(parts[1]), std::string(parts[2]));
  }
  throw ValidationError("bad agreement function '" + whole +
                        "' (expected constant:ETA, proportional:ETA or step:ETA:THETA)");
}

double AgreementFn::operator()(std::int64_t k, std::int64_t c) const {
  if (k < 0 || c < 1) throw ValidationError("zeta requires k >= 0 and c >= 1");
  switch (kind_) {
    case Kind::Constant:
      return eta_;
    case Kind::Proportional:
      return std::min(eta_ * static_cast<double>(k) / static_cast<double>(c), 1.0);
    case Kind::Step:
      return Rational(k) <= eta_exact_ ? theta_ : 1.0;
  }
  return 0.0;
}

Rational AgreementFn::exact(std::int64_t k, std::int64_t c) const {
  if (k < 0 || c < 1) throw ValidationError("zeta requires k >= 0 and c >= 1");
  switch (kind_) {
    case Kind::Constant:
      return eta_exact_;
    case Kind::Proportional: {
      Rational v = eta_exact_ * Rational(k, c);
      v.canonicalize();
      return v > 1 ? Rational(1) : v;
    }
    case Kind::Step:
      return Rational(k) <= eta_exact_ ? theta_exact_ : Rational(1);
  }
  return Rational(0);
}

std::string AgreementFn::to_string() const {
  switch (kind_) {
    case Kind::Constant:
      return "constant:" + eta_text_;
    case Kind::Proportional:
      return "proportional:" + eta_text_;
    case Kind::Step:
      return "step:" + eta_text_ + ":" + theta_text_;
  }
  return {};
}

FrameworkParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("parameters must be a JSON object");
  static const char* const kFields[] = {"p_d", "c", "t_d", "t_r", "n_d", "n_r"};
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* f : kFields) known = known || key == f;
    if (!known) throw ValidationError("unknown field '" + key + "'");
  }
  auto integer = [&](const char* key) -> std::int64_t {
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw ValidationError(std::string("field '") + key + "' must be an integer");
  };
  FrameworkParams p;
  if (!j.contains("p_d")) throw ValidationError("missing field 'p_d'");
  if (!j.at("p_d").is_number()) throw ValidationError("field 'p_d' must be a number");
  p.p_d = j.at("p_d").get<double>();
  p.c = integer("c");
  p.t_d = integer("t_d");
  p.t_r = integer("t_r");
  p.n_d = integer("n_d");
  p.n_r = integer("n_r");
  return p;
}

nlohmann::json to_json(const FrameworkParams& params) {
  return nlohmann::json{{"p_d", params.p_d}, {"c", params.c},     {"t_d", params.t_d},
                        {"t_r", params.t_r}, {"n_d", params.n_d}, {"n_r", params.n_r}};
}

}  // namespace ifl

#include "ifl/model.hpp"

#include <algorithm>

#include "ifl/error.hpp"

namespace ifl {

double avoid_ratio(std::int64_t t, std::int64_t m, std::int64_t n) {
  if (n < 0 || t < n) throw ValidationError("avoid_ratio requires 0 <= n <= t");
  if (t - m < n) return 0.0;
  double r = 1.0;
  for (std::int64_t i = 0; i < n; ++i) {
    r *= static_cast<double>(t - m - i) / static_cast<double>(t - i);
  }
  return r;
}

double hypergeometric_pmf(std::int64_t population, std::int64_t marked, std::int64_t draws,
                          std::int64_t a) {
  if (a < 0 || a > draws || a > marked || draws > population || marked > population ||
      draws - a > population - marked) {
    return 0.0;
  }
  // C(draws, a) * K!/(K-a)! * (N-K)!/(N-K-draws+a)! * (N-draws)!/N!
  const std::int64_t lo = std::min(a, draws - a);
  double choose = 1.0;
  for (std::int64_t i = 1; i <= lo; ++i) {
    choose = choose * static_cast<double>(draws - lo + i) / static_cast<double>(i);
  }
  double r = choose;
  for (std::int64_t i = 0; i < a; ++i) {
    r *= static_cast<double>(marked - i) / static_cast<double>(population - i);
  }
  for (std::int64_t j = 0; j < draws - a; ++j) {
    r *= static_cast<double>(population - marked - j) / static_cast<double>(population - a - j);
  }
  return r;
}

double expected_accuracy(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  const double miss_d = avoid_ratio(params.t_d, caps.c_d, params.n_d);
  const double miss_r = avoid_ratio(params.t_r, caps.c_r, params.n_r);
  return params.p_d * (1.0 - 0.5 * miss_d) + params.p_r() * (1.0 - 0.5 * miss_r);
}

QComponents q_components(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  const auto [c_d, c_r] = caps;
  const double hit_d = 1.0 - avoid_ratio(params.t_d, c_d, params.n_d);
  const double hit_r = 1.0 - avoid_ratio(params.t_r, c_r, params.n_r);

  QComponents q;
  q.q1 = params.p_d * hit_d * hit_d + params.p_r() * hit_r * hit_r;

  // Neither model touches x: (C(t - n, c) / C(t, c))^2 on the datum's pool.
  const double both_miss_d = avoid_ratio(params.t_d, params.n_d, c_d);
  const double both_miss_r = avoid_ratio(params.t_r, params.n_r, c_r);
  const double w_d = params.p_d * both_miss_d * both_miss_d;
  const double w_r = params.p_r() * both_miss_r * both_miss_r;

  q.q2.assign(static_cast<std::size_t>(params.c), 0.0);
  double total = 0.0;
  for (std::int64_t k = 1; k <= params.c; ++k) {
    double dom_term = 0.0;
    double rare_term = 0.0;
    for (std::int64_t a = std::max<std::int64_t>(0, k - c_r); a <= std::min(k, c_d); ++a) {
      const std::int64_t b = k - a;
      dom_term += hypergeometric_pmf(params.t_d - params.n_d, c_d, c_d, a) *
                  hypergeometric_pmf(params.t_r, c_r, c_r, b);
      rare_term += hypergeometric_pmf(params.t_d, c_d, c_d, a) *
                   hypergeometric_pmf(params.t_r - params.n_r, c_r, c_r, b);
    }
    const double v = w_d * dom_term + w_r * rare_term;
    q.q2[static_cast<std::size_t>(k - 1)] = v;
    total += v;
  }
  q.q3 = 1.0 - q.q1 - total;
  return q;
}

double expected_agreement(const FrameworkParams& params, const AgreementFn& zeta) {
  const QComponents q = q_components(params);
  double agr = 0.5 + 0.5 * q.q1;
  for (std::size_t i = 0; i < q.q2.size(); ++i) {
    agr += (zeta(static_cast<std::int64_t>(i + 1), params.c) - 0.5) * q.q2[i];
  }
  return agr;
}

double expected_agreement_partition(const FrameworkParams& params, const AgreementFn& zeta) {
  const QComponents q = q_components(params);
  double agr = q.q1 + 0.5 * q.q3;
  for (std::size_t i = 0; i < q.q2.size(); ++i) {
    agr += zeta(static_cast<std::int64_t>(i + 1), params.c) * q.q2[i];
  }
  return agr;
}

std::int64_t uncovered_pool(double beta, std::int64_t t) {
  return floor_to_int((Rational(1) - decimal_rational(beta)) * Rational(t));
}

double coverage_bound(const FrameworkParams& params, const CoverageParams& cov) {
  derived_capacities(params);
  validate(cov);
  const std::int64_t u_d = uncovered_pool(cov.beta_d, params.t_d);
  const std::int64_t u_r = uncovered_pool(cov.beta_r, params.t_r);
  const double miss_d = avoid_ratio(params.t_d, params.t_d - u_d, params.n_d);
  const double miss_r = avoid_ratio(params.t_r, params.t_r - u_r, params.n_r);
  return params.p_d * (1.0 - 0.5 * miss_d) + params.p_r() * (1.0 - 0.5 * miss_r);
}

namespace exact {
namespace {

Rational ratio(const BigInt& num, const BigInt& den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace

Rational expected_accuracy(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  const Rational p_d = exact_p_d(params);
  const Rational p_r = 1 - p_d;
  const Rational miss_d =
      ratio(binom(params.t_d - caps.c_d, params.n_d), binom(params.t_d, params.n_d));
  const Rational miss_r =
      ratio(binom(params.t_r - caps.c_r, params.n_r), binom(params.t_r, params.n_r));
  const Rational half(1, 2);
  return p_d * (1 - half * miss_d) + p_r * (1 - half * miss_r);
}

QComponents q_components(const FrameworkParams& params) {
  const Capacities caps = derived_capacities(params);
  const std::int64_t c_d = caps.c_d;
  const std::int64_t c_r = caps.c_r;
  const std::int64_t t_d = params.t_d;
  const std::int64_t t_r = params.t_r;
  const std::int64_t n_d = params.n_d;
  const std::int64_t n_r = params.n_r;
  const Rational p_d = exact_p_d(params);
  const Rational p_r = 1 - p_d;

  QComponents q;
  const Rational hit_d = 1 - ratio(binom(t_d - c_d, n_d), binom(t_d, n_d));
  const Rational hit_r = 1 - ratio(binom(t_r - c_r, n_r), binom(t_r, n_r));
  q.q1 = p_d * hit_d * hit_d + p_r * hit_r * hit_r;

  const BigInt free_d = binom(t_d - n_d, c_d);
  const BigInt free_r = binom(t_r - n_r, c_r);
  const Rational pre_d = ratio(free_d * free_d, binom(t_d, c_d) * binom(t_d, c_d));
  const Rational pre_r = ratio(free_r * free_r, binom(t_r, c_r) * binom(t_r, c_r));

  q.q2.assign(static_cast<std::size_t>(params.c), Rational(0));
  Rational total = 0;
  for (std::int64_t k = 1; k <= params.c; ++k) {
    Rational dom_sum = 0;
    Rational rare_sum = 0;
    for (std::int64_t a = 0; a <= k; ++a) {
      const std::int64_t b = k - a;
      if (free_d != 0) {
        dom_sum += ratio(binom(c_d, a) * binom(t_d - n_d - c_d, c_d - a), free_d) *
                   ratio(binom(c_r, b) * binom(t_r - c_r, c_r - b), binom(t_r, c_r));
      }
      if (free_r != 0) {
        rare_sum += ratio(binom(c_d, a) * binom(t_d - c_d, c_d - a), binom(t_d, c_d)) *
                    ratio(binom(c_r, b) * binom(t_r - n_r - c_r, c_r - b), free_r);
      }
    }
    Rational v = p_d * pre_d * dom_sum + p_r * pre_r * rare_sum;
    v.canonicalize();
    total += v;
    q.q2[static_cast<std::size_t>(k - 1)] = v;
  }
  q.q3 = 1 - q.q1 - total;
  return q;
}

Rational expected_agreement(const FrameworkParams& params, const AgreementFn& zeta) {
  const QComponents q = exact::q_components(params);
  const Rational half(1, 2);
  Rational agr = half + half * q.q1;
  for (std::size_t i = 0; i < q.q2.size(); ++i) {
    agr += (zeta.exact(static_cast<std::int64_t>(i + 1), params.c) - half) * q.q2[i];
  }
  agr.canonicalize();
  return agr;
}

Rational expected_agreement_partition(const FrameworkParams& params, const AgreementFn& zeta) {
  const QComponents q = exact::q_components(params);
  Rational agr = q.q1 + Rational(1, 2) * q.q3;
  for (std::size_t i = 0; i < q.q2.size(); ++i) {
    agr += zeta.exact(static_cast<std::int64_t>(i + 1), params.c) * q.q2[i];
  }
  agr.canonicalize();
  return agr;
}

Rational coverage_bound(const FrameworkParams& params, const CoverageParams& cov) {
  derived_capacities(params);
  validate(cov);
  const std::int64_t u_d = uncovered_pool(cov.beta_d, params.t_d);
  const std::int64_t u_r = uncovered_pool(cov.beta_r, params.t_r);
  const Rational p_d = exact_p_d(params);
  const Rational half(1, 2);
  return p_d * (1 - half * ratio(binom(u_d, params.n_d), binom(params.t_d, params.n_d))) +
         (1 - p_d) * (1 - half * ratio(binom(u_r, params.n_r), binom(params.t_r, params.n_r)));
}

}  // namespace exact
}  // namespace ifl

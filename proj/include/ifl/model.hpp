#pragma once

// Closed-form accuracy, agreement and coverage bound of the binary
// feature-learning model.
//
// Two arithmetic paths are provided. The double path evaluates every binomial
// ratio as a telescoping product of factors in [0, 1], which stays accurate at
// pool sizes where the binomials themselves overflow. The exact path
// (namespace ifl::exact) uses big-integer binomials and rationals and is the
// reference the double path is checked against.

#include <cstdint>
#include <vector>

#include "ifl/params.hpp"
#include "ifl/rational.hpp"

namespace ifl {

/// Decomposition of the (f, g, x) event space: both models share a feature
/// with x (q1); neither does but they share k >= 1 class features with each
/// other (q2[k-1], k = 1..c); everything else (q3).
struct QComponents {
  double q1 = 0.0;
  std::vector<double> q2;
  double q3 = 0.0;
};

/// C(t - m, n) / C(t, n): probability that n features drawn from a pool of t
/// avoid a fixed subset of m.
double avoid_ratio(std::int64_t t, std::int64_t m, std::int64_t n);

/// Hypergeometric pmf: P(a marked items when drawing `draws` of `population`
/// items, `marked` of which are marked). Zero outside the support.
double hypergeometric_pmf(std::int64_t population, std::int64_t marked, std::int64_t draws,
                          std::int64_t a);

double expected_accuracy(const FrameworkParams& params);
QComponents q_components(const FrameworkParams& params);

/// Agr = 1/2 + q1/2 + sum_k (zeta(k, c) - 1/2) q2(k).
double expected_agreement(const FrameworkParams& params, const AgreementFn& zeta);

/// Agr = q1 + q3/2 + sum_k zeta(k, c) q2(k); algebraically identical to
/// expected_agreement.
double expected_agreement_partition(const FrameworkParams& params, const AgreementFn& zeta);

/// Upper bound on accuracy when only a fraction beta of each pool can be
/// learned. The uncovered pool size (1 - beta) t is rounded down.
double coverage_bound(const FrameworkParams& params, const CoverageParams& cov);

/// Number of uncovered features: floor((1 - beta) t), computed exactly.
std::int64_t uncovered_pool(double beta, std::int64_t t);

namespace exact {

struct QComponents {
  Rational q1;
  std::vector<Rational> q2;
  Rational q3;
};

Rational expected_accuracy(const FrameworkParams& params);
QComponents q_components(const FrameworkParams& params);
Rational expected_agreement(const FrameworkParams& params, const AgreementFn& zeta);
Rational expected_agreement_partition(const FrameworkParams& params, const AgreementFn& zeta);
Rational coverage_bound(const FrameworkParams& params, const CoverageParams& cov);

}  // namespace exact
}  // namespace ifl

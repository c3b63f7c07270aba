#pragma once

// Exhaustive oracles for the closed forms. They enumerate feature sets
// directly and never evaluate a binomial ratio, so agreement with the
// closed forms is a genuine cross-check.

#include <cstdint>

#include "ifl/model.hpp"
#include "ifl/params.hpp"
#include "ifl/rational.hpp"

namespace ifl {

inline constexpr std::uint64_t kEnumerationLimit = 10'000'000;

/// C(t_d, c_d) C(t_r, c_r) (C(t_d, n_d) + C(t_r, n_r)).
BigInt enum_accuracy_size(const FrameworkParams& params);

/// 2 (C(t_d, c_d) C(t_r, c_r))^2: ordered hypothesis pairs against one
/// canonical datum per kind.
BigInt enum_agreement_size(const FrameworkParams& params);

/// Exact expected accuracy by enumerating every class-y hypothesis against
/// every datum feature set. Throws ResourceError beyond kEnumerationLimit.
Rational enum_accuracy(const FrameworkParams& params);

/// Exact q1, q2(k), q3 as frequencies of the A / B(k) / C cases over all
/// ordered hypothesis pairs.
exact::QComponents enum_q_components(const FrameworkParams& params);

/// Exact expected agreement: case A contributes 1, B(k) contributes
/// zeta(k, c), C contributes 1/2.
Rational enum_agreement(const FrameworkParams& params, const AgreementFn& zeta);

}  // namespace ifl

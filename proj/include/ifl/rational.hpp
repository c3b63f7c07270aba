#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace ifl {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Binomial coefficient with the combinatorial convention used throughout:
/// C(n, r) = 0 whenever n < 0, r < 0 or n < r.
BigInt binom(std::int64_t n, std::int64_t r);

/// Parses a plain or scientific decimal literal ("0.7", "-2", "1e-3") into an
/// exact rational. Throws ValidationError on anything else.
Rational parse_decimal(std::string_view text);

/// Exact rational for the shortest decimal that round-trips `x`, so 0.7 maps
/// to 7/10 rather than the binary expansion of the nearest double.
Rational decimal_rational(double x);

/// Nearest double to q (mpq_get_d truncates).
double to_double(const Rational& q);

/// Floor of a rational as a signed 64-bit integer.
std::int64_t floor_to_int(const Rational& q);

/// "p/q" (or "p" for integers) in lowest terms.
std::string to_string(const Rational& q);

}  // namespace ifl

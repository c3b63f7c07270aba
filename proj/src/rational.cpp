#include "ifl/rational.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <limits>
#include <system_error>

#include "ifl/error.hpp"

namespace ifl {

BigInt binom(std::int64_t n, std::int64_t r) {
  if (n < 0 || r < 0 || n < r) return 0;
  BigInt out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(r));
  return out;
}

Rational parse_decimal(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> Rational {
    throw ValidationError("not a decimal number: '" + original + "'");
  };
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  std::int64_t scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char ch = text[pos];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_point) ++scale;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return fail();
  std::int64_t exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    const char* first = text.data() + pos;
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, exponent);
    if (ec != std::errc() || ptr == first) return fail();
    pos = static_cast<std::size_t>(ptr - text.data());
  }
  if (pos != text.size()) return fail();
  if (exponent > 4000 || exponent < -4000) return fail();

  BigInt numerator(digits, 10);
  if (negative) numerator = -numerator;
  const std::int64_t power = exponent - scale;
  BigInt ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10,
                static_cast<unsigned long>(power < 0 ? -power : power));
  Rational out = power < 0 ? Rational(numerator, ten_pow)
                           : Rational(numerator * ten_pow);
  out.canonicalize();
  return out;
}

Rational decimal_rational(double x) {
  if (!(x == x) || x == std::numeric_limits<double>::infinity() ||
      x == -std::numeric_limits<double>::infinity()) {
    throw ValidationError("non-finite value has no rational form");
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw ValidationError("cannot format value");
  return parse_decimal(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

double to_double(const Rational& q) {
  const double guess = q.get_d();
  double best = guess;
  Rational best_err = abs(Rational(guess) - q);
  for (const double candidate : {std::nextafter(guess, -HUGE_VAL), std::nextafter(guess, HUGE_VAL)}) {
    const Rational err = abs(Rational(candidate) - q);
    if (err < best_err) {
      best = candidate;
      best_err = err;
    }
  }
  return best;
}

std::int64_t floor_to_int(const Rational& q) {
  BigInt out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!out.fits_slong_p()) throw ValidationError("integer out of range");
  return out.get_si();
}

std::string to_string(const Rational& q) { return q.get_str(10); }

}  // namespace ifl

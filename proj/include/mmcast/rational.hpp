#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "mmcast/error.hpp"

namespace mmcast {

using Rational = mpq_class;

// Accepts integers, plain decimals ("0.25") and fractions ("7/4"); no exponents.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::InvalidInput, "malformed rational '" + std::string(text) + "'",
                 std::string(text));
  };
  if (text.empty()) throw fail();
  std::string s(text);
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    auto all_digits = [](const std::string& v, bool allow_sign) {
      if (v.empty()) return false;
      std::size_t i = (allow_sign && (v[0] == '-' || v[0] == '+')) ? 1 : 0;
      if (i == v.size()) return false;
      for (; i < v.size(); ++i)
        if (v[i] < '0' || v[i] > '9') return false;
      return true;
    };
    if (!all_digits(num, true) || !all_digits(den, false)) throw fail();
    if (num[0] == '+') num.erase(0, 1);
    mpz_class n(num, 10), d(den, 10);
    if (d == 0) throw fail();
    Rational r(n, d);
    r.canonicalize();
    return r;
  }
  std::size_t i = 0;
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    i = 1;
  }
  std::string digits;
  std::size_t frac_digits = 0;
  bool seen_point = false, seen_digit = false;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (ch == '.' && !seen_point) {
      seen_point = true;
    } else if (ch >= '0' && ch <= '9') {
      digits.push_back(ch);
      seen_digit = true;
      if (seen_point) ++frac_digits;
    } else {
      throw fail();
    }
  }
  if (!seen_digit) throw fail();
  mpz_class num(digits, 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_digits);
  Rational r(negative ? mpz_class(-num) : num, den);
  r.canonicalize();
  return r;
}

// Canonical "p/q" form; integers print without a denominator.
inline std::string to_string(const Rational& r) { return r.get_str(10); }

inline double to_double(const Rational& r) { return r.get_d(); }

// Exact conversion; every finite double is a dyadic rational.
inline Rational from_double(double v) { return Rational(v); }

inline Rational rational_from_int(std::int64_t v) {
  return Rational(mpz_class(static_cast<signed long>(v)));
}

}  // namespace mmcast

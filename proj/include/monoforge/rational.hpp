#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "monoforge/error.hpp"

namespace monoforge {

using Integer = mpz_class;
using Rational = mpq_class;
using IntVector = std::vector<Integer>;
using RatVector = std::vector<Rational>;

inline Integer gcd(const Integer& a, const Integer& b) {
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  Integer l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

// Floor division and the matching nonnegative remainder for b > 0.
inline Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Integer pow(const Integer& base, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Rational pow(const Rational& base, long e) {
  Rational r = 1;
  Rational b = base;
  if (e < 0) {
    if (b == 0) fail(ErrorCode::PoleDetected, "zero raised to a negative power");
    b = 1 / b;
    e = -e;
  }
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

inline std::string to_string(const Integer& z) { return z.get_str(); }

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

// Accepts "n" or "n/d" with an optional leading sign.
inline Rational parse_rational(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) fail(ErrorCode::InvalidInput, "empty rational literal");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool slash = false, digit = false;
  for (std::size_t k = i; k < s.size(); ++k) {
    if (s[k] == '/') {
      if (slash || !digit) fail(ErrorCode::InvalidInput, "bad rational literal: " + s);
      slash = true;
      digit = false;
    } else if (std::isdigit(static_cast<unsigned char>(s[k]))) {
      digit = true;
    } else {
      fail(ErrorCode::InvalidInput, "bad rational literal: " + s);
    }
  }
  if (!digit) fail(ErrorCode::InvalidInput, "bad rational literal: " + s);
  if (s[0] == '+') s.erase(0, 1);
  Rational q;
  if (q.set_str(s, 10) != 0) fail(ErrorCode::InvalidInput, "bad rational literal: " + s);
  if (q.get_den() == 0) fail(ErrorCode::InvalidInput, "zero denominator: " + s);
  q.canonicalize();
  return q;
}

inline IntVector to_integers(const std::vector<long>& v) {
  return IntVector(v.begin(), v.end());
}

}  // namespace monoforge

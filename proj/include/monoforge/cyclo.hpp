#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/polynomial.hpp"
#include "monoforge/rational.hpp"

namespace monoforge {

// Coefficients of the d-th cyclotomic polynomial, constant term first.
inline const std::vector<Integer>& cyclotomic_polynomial(unsigned d) {
  static std::recursive_mutex mu;
  static std::map<unsigned, std::vector<Integer>> cache;
  if (d == 0) fail(ErrorCode::InvalidInput, "cyclotomic order must be positive");
  std::lock_guard<std::recursive_mutex> lock(mu);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;
  std::vector<Integer> num(d + 1);
  num[0] = -1;
  num[d] = 1;
  std::vector<unsigned> divisors;
  for (unsigned k = 1; k < d; ++k)
    if (d % k == 0) divisors.push_back(k);
  for (unsigned k : divisors) {
    const std::vector<Integer>& den = cyclotomic_polynomial(k);
    std::size_t dd = den.size() - 1;
    std::vector<Integer> q(num.size() - dd, 0);
    for (std::size_t i = num.size(); i-- > dd;) {
      Integer c = num[i];
      q[i - dd] = c;
      for (std::size_t j = 0; j <= dd; ++j) num[i - dd + j] -= c * den[j];
    }
    num = q;
  }
  return cache.emplace(d, num).first->second;
}

// Element of Q(e) with e a primitive d-th root of unity, stored reduced mod Phi_d.
class CycloScalar {
 public:
  CycloScalar() : CycloScalar(0) {}
  CycloScalar(int v) : d_(0), c_{Rational(v)} {}
  CycloScalar(const Rational& v) : d_(0), c_{v} {}

  // e^k in the field of d-th roots of unity.
  static CycloScalar root_power(unsigned d, long k) {
    CycloScalar r;
    r.d_ = d;
    long kk = ((k % static_cast<long>(d)) + d) % d;
    r.c_.assign(kk + 1, Rational(0));
    r.c_[kk] = 1;
    r.reduce();
    return r;
  }

  unsigned order() const { return d_; }
  bool is_zero() const {
    for (const auto& x : c_)
      if (sgn(x) != 0) return false;
    return true;
  }
  bool is_rational() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (sgn(c_[i]) != 0) return false;
    return true;
  }
  Rational to_rational() const {
    if (!is_rational()) fail(ErrorCode::CycloLeak, "cyclotomic coefficient did not reduce to a rational");
    return c_.empty() ? Rational(0) : c_[0];
  }

  CycloScalar operator-() const {
    CycloScalar r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  CycloScalar& operator+=(const CycloScalar& o) {
    unify(o);
    if (c_.size() < o.c_.size()) c_.resize(o.c_.size(), Rational(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  CycloScalar& operator-=(const CycloScalar& o) { return *this += -o; }
  friend CycloScalar operator+(CycloScalar a, const CycloScalar& b) { return a += b; }
  friend CycloScalar operator-(CycloScalar a, const CycloScalar& b) { return a -= b; }
  friend CycloScalar operator*(const CycloScalar& a, const CycloScalar& b) {
    CycloScalar r;
    r.d_ = a.d_ ? a.d_ : b.d_;
    if (a.d_ && b.d_ && a.d_ != b.d_) fail(ErrorCode::InternalAssertion, "mixed cyclotomic orders");
    r.c_.assign(a.c_.size() + b.c_.size(), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      if (sgn(a.c_[i]) != 0)
        for (std::size_t j = 0; j < b.c_.size(); ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    r.reduce();
    return r;
  }
  friend bool operator==(const CycloScalar& a, const CycloScalar& b) { return (a - b).is_zero(); }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (sgn(c_[i]) == 0) continue;
      if (!s.empty()) s += " + ";
      s += c_[i].get_str();
      if (i) s += "*e^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
  }

 private:
  void unify(const CycloScalar& o) {
    if (d_ == 0) d_ = o.d_;
    else if (o.d_ && o.d_ != d_) fail(ErrorCode::InternalAssertion, "mixed cyclotomic orders");
  }
  void reduce() {
    if (d_ == 0) {
      c_.resize(1, Rational(0));
      return;
    }
    const auto& phi = cyclotomic_polynomial(d_);
    std::size_t deg = phi.size() - 1;
    for (std::size_t i = c_.size(); i-- > deg;) {
      if (sgn(c_[i]) == 0) continue;
      Rational k = c_[i];
      for (std::size_t j = 0; j <= deg; ++j) c_[i - deg + j] -= k * Rational(phi[j]);
    }
    if (c_.size() > deg) c_.resize(deg);
    if (c_.empty()) c_.push_back(Rational(0));
  }

  unsigned d_;
  std::vector<Rational> c_;
};

inline bool coeff_is_zero(const CycloScalar& c) { return c.is_zero(); }

using CycloPolynomial = BasicPolynomial<CycloScalar>;

inline CycloPolynomial to_cyclo(const Polynomial& p) {
  CycloPolynomial r(p.nvars());
  for (const auto& [e, c] : p.terms()) r.add_term(e, CycloScalar(c));
  return r;
}

inline Polynomial to_rational_polynomial(const CycloPolynomial& p) {
  Polynomial r(p.nvars());
  for (const auto& [e, c] : p.terms()) r.add_term(e, c.to_rational());
  return r;
}

}  // namespace monoforge

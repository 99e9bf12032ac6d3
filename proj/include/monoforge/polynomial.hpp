#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/rational.hpp"

namespace monoforge {

// u divisor, v bounded, w free; x, y, z, t live on the target side.
enum class VarClass { U, V, W, X, Y, Z, T };

inline char class_letter(VarClass c) {
  switch (c) {
    case VarClass::U: return 'u';
    case VarClass::V: return 'v';
    case VarClass::W: return 'w';
    case VarClass::X: return 'x';
    case VarClass::Y: return 'y';
    case VarClass::Z: return 'z';
    case VarClass::T: return 't';
  }
  return '?';
}

inline std::optional<VarClass> class_from_letter(char c) {
  switch (c) {
    case 'u': return VarClass::U;
    case 'v': return VarClass::V;
    case 'w': return VarClass::W;
    case 'x': return VarClass::X;
    case 'y': return VarClass::Y;
    case 'z': return VarClass::Z;
    case 't': return VarClass::T;
    default: return std::nullopt;
  }
}

struct Variable {
  std::string name;
  VarClass cls;
  friend bool operator==(const Variable&, const Variable&) = default;
};

class Ring {
 public:
  Ring() = default;
  explicit Ring(std::vector<Variable> vars) : vars_(std::move(vars)) {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (vars_[i].name == vars_[j].name)
          fail(ErrorCode::InvalidInput, "duplicate variable name " + vars_[i].name);
  }
  // Class taken from the leading letter of each name.
  static Ring from_names(const std::vector<std::string>& names) {
    std::vector<Variable> vars;
    for (const auto& n : names) {
      auto c = n.empty() ? std::nullopt : class_from_letter(n[0]);
      if (!c) fail(ErrorCode::InvalidInput, "cannot infer variable class of '" + n + "'");
      vars.push_back({n, *c});
    }
    return Ring(std::move(vars));
  }
  // u1..ur, v1..vs, w1..wt
  static Ring source(std::size_t r, std::size_t s, std::size_t t) {
    std::vector<Variable> vars;
    for (std::size_t i = 1; i <= r; ++i) vars.push_back({"u" + std::to_string(i), VarClass::U});
    for (std::size_t i = 1; i <= s; ++i) vars.push_back({"v" + std::to_string(i), VarClass::V});
    for (std::size_t i = 1; i <= t; ++i) vars.push_back({"w" + std::to_string(i), VarClass::W});
    return Ring(std::move(vars));
  }

  std::size_t size() const { return vars_.size(); }
  const Variable& var(std::size_t i) const { return vars_[i]; }
  const std::vector<Variable>& vars() const { return vars_; }
  const std::string& name(std::size_t i) const { return vars_[i].name; }
  VarClass cls(std::size_t i) const { return vars_[i].cls; }
  void set_class(std::size_t i, VarClass c) { vars_[i].cls = c; }
  void rename(std::size_t i, std::string n) { vars_[i].name = std::move(n); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].name == name) return i;
    return std::nullopt;
  }
  std::size_t index(std::string_view name) const {
    auto i = find(name);
    if (!i) fail(ErrorCode::InvalidInput, "undeclared variable '" + std::string(name) + "'");
    return *i;
  }
  std::vector<std::size_t> indices(VarClass c) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].cls == c) out.push_back(i);
    return out;
  }
  // First unused name of the form <prefix><k>.
  std::string fresh_name(const std::string& prefix) const {
    for (std::size_t k = 1;; ++k) {
      std::string n = prefix + std::to_string(k);
      if (!find(n)) return n;
    }
  }

  friend bool operator==(const Ring&, const Ring&) = default;

 private:
  std::vector<Variable> vars_;
};

using Exponent = std::vector<int>;

// Graded order: total degree first, then lexicographic in declared variable order.
struct GrlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    long da = 0, db = 0;
    for (int e : a) da += e;
    for (int e : b) db += e;
    if (da != db) return da < db;
    return a < b;
  }
};

inline long total_degree(const Exponent& e) {
  long d = 0;
  for (int x : e) d += x;
  return d;
}

inline bool coeff_is_zero(const Rational& c) { return sgn(c) == 0; }

template <class C>
class BasicPolynomial {
 public:
  using Coeff = C;
  using TermMap = std::map<Exponent, C, GrlexLess>;

  BasicPolynomial() = default;
  explicit BasicPolynomial(std::size_t nvars) : nvars_(nvars) {}
  BasicPolynomial(std::size_t nvars, const C& c) : nvars_(nvars) { add_term(Exponent(nvars, 0), c); }

  static BasicPolynomial variable(std::size_t nvars, std::size_t i) {
    Exponent e(nvars, 0);
    e[i] = 1;
    return monomial(nvars, e, C(1));
  }
  static BasicPolynomial monomial(std::size_t nvars, const Exponent& e, const C& c) {
    BasicPolynomial p(nvars);
    p.add_term(e, c);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponent& e, const C& c) {
    if (e.size() != nvars_) fail(ErrorCode::DimensionMismatch, "exponent length mismatch");
    if (coeff_is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (coeff_is_zero(it->second)) terms_.erase(it);
    }
  }

  C coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? C(0) : it->second;
  }
  C constant_term() const { return coefficient(Exponent(nvars_, 0)); }
  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
  }

  long degree() const {
    long d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
  }
  int degree_in(std::size_t i) const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[i]);
    return d;
  }
  bool depends_on(std::size_t i) const {
    for (const auto& [e, c] : terms_)
      if (e[i] != 0) return true;
    return false;
  }
  // Greatest term in the graded order.
  std::pair<Exponent, C> leading_term() const {
    if (terms_.empty()) fail(ErrorCode::ZeroPolynomial, "leading term of zero");
    auto it = std::prev(terms_.end());
    return {it->first, it->second};
  }

  BasicPolynomial operator-() const {
    BasicPolynomial r(nvars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, C(-c));
    return r;
  }
  BasicPolynomial& operator+=(const BasicPolynomial& o) {
    check_compatible(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  BasicPolynomial& operator-=(const BasicPolynomial& o) {
    check_compatible(o);
    for (const auto& [e, c] : o.terms_) add_term(e, C(-c));
    return *this;
  }
  friend BasicPolynomial operator+(BasicPolynomial a, const BasicPolynomial& b) { return a += b; }
  friend BasicPolynomial operator-(BasicPolynomial a, const BasicPolynomial& b) { return a -= b; }
  friend BasicPolynomial operator*(const BasicPolynomial& a, const BasicPolynomial& b) {
    a.check_compatible(b);
    BasicPolynomial r(a.nvars_);
    Exponent e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < a.nvars_; ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, C(ca * cb));
      }
    return r;
  }
  BasicPolynomial& operator*=(const BasicPolynomial& o) { return *this = *this * o; }
  BasicPolynomial scaled(const C& k) const {
    BasicPolynomial r(nvars_);
    if (coeff_is_zero(k)) return r;
    for (const auto& [e, c] : terms_) r.add_term(e, C(c * k));
    return r;
  }
  // Multiplies by the monomial x^shift.
  BasicPolynomial shifted(const Exponent& shift) const {
    BasicPolynomial r(nvars_);
    Exponent e(nvars_);
    for (const auto& [ea, c] : terms_) {
      for (std::size_t i = 0; i < nvars_; ++i) e[i] = ea[i] + shift[i];
      r.terms_.emplace_hint(r.terms_.end(), e, c);
    }
    return r;
  }
  BasicPolynomial pow(unsigned k) const {
    BasicPolynomial r(nvars_, C(1));
    BasicPolynomial b = *this;
    while (k) {
      if (k & 1) r *= b;
      k >>= 1;
      if (k) b *= b;
    }
    return r;
  }

  BasicPolynomial derivative(std::size_t i) const {
    BasicPolynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e[i] == 0) continue;
      Exponent f = e;
      --f[i];
      r.add_term(f, C(c * C(e[i])));
    }
    return r;
  }
  // x_i * d/dx_i
  BasicPolynomial log_derivative(std::size_t i) const {
    BasicPolynomial r(nvars_);
    for (const auto& [e, c] : terms_)
      if (e[i] != 0) r.terms_.emplace(e, C(c * C(e[i])));
    return r;
  }

  template <class F>
  BasicPolynomial map_terms(F&& f) const {
    BasicPolynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
      auto [e2, c2] = f(e, c);
      r.add_term(e2, c2);
    }
    return r;
  }

  friend bool operator==(const BasicPolynomial& a, const BasicPolynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

 private:
  void check_compatible(const BasicPolynomial& o) const {
    if (o.nvars_ != nvars_) fail(ErrorCode::DimensionMismatch, "polynomials over different rings");
  }

  std::size_t nvars_ = 0;
  TermMap terms_;
};

using Polynomial = BasicPolynomial<Rational>;

inline Polynomial operator*(const Rational& k, const Polynomial& p) { return p.scaled(k); }

inline Polynomial make_var(const Ring& ring, std::string_view name) {
  return Polynomial::variable(ring.size(), ring.index(name));
}

inline Polynomial make_monomial(std::size_t nvars, const Exponent& e, const Rational& c = 1) {
  return Polynomial::monomial(nvars, e, c);
}

// Substitutes images[i] for variable i; images live in a common target ring.
template <class C>
BasicPolynomial<C> substitute(const BasicPolynomial<C>& p, const std::vector<BasicPolynomial<C>>& images,
                              std::size_t target_nvars) {
  if (images.size() != p.nvars()) fail(ErrorCode::DimensionMismatch, "substitute: wrong number of images");
  BasicPolynomial<C> result(target_nvars);
  std::vector<std::vector<BasicPolynomial<C>>> powers(p.nvars());
  auto power = [&](std::size_t i, int k) -> const BasicPolynomial<C>& {
    auto& cache = powers[i];
    if (cache.empty()) cache.emplace_back(target_nvars, C(1));
    while (static_cast<int>(cache.size()) <= k) cache.push_back(cache.back() * images[i]);
    return cache[k];
  };
  for (const auto& [e, c] : p.terms()) {
    BasicPolynomial<C> term(target_nvars, c);
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0) term = term * power(i, e[i]);
    result += term;
  }
  return result;
}

inline Polynomial substitute(const Polynomial& p, const std::vector<Polynomial>& images) {
  std::size_t m = images.empty() ? 0 : images.front().nvars();
  return substitute<Rational>(p, images, m);
}

// Substitutes values for a subset of the variables, keeping the ring.
inline Polynomial partial_evaluate(const Polynomial& p, const std::vector<std::pair<std::size_t, Rational>>& values) {
  Polynomial r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    Exponent f = e;
    Rational k = c;
    for (const auto& [i, val] : values) {
      k *= pow(val, e[i]);
      f[i] = 0;
    }
    r.add_term(f, k);
  }
  return r;
}

inline Rational evaluate(const Polynomial& p, const RatVector& point) {
  if (point.size() != p.nvars()) fail(ErrorCode::DimensionMismatch, "evaluate: point has wrong length");
  Rational s = 0;
  for (const auto& [e, c] : p.terms()) {
    Rational t = c;
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i]) t *= pow(point[i], e[i]);
    s += t;
  }
  return s;
}

inline Rational evaluate_at_origin(const Polynomial& p) { return p.constant_term(); }

// Extends or permutes variables: new index of old variable i is where[i].
inline Polynomial remap_variables(const Polynomial& p, const std::vector<std::size_t>& where, std::size_t new_nvars) {
  Polynomial r(new_nvars);
  for (const auto& [e, c] : p.terms()) {
    Exponent f(new_nvars, 0);
    for (std::size_t i = 0; i < e.size(); ++i) f[where[i]] += e[i];
    r.add_term(f, c);
  }
  return r;
}

// Exact quotient a / b; fails if b does not divide a.
inline Polynomial divide_exact(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) fail(ErrorCode::ZeroPolynomial, "division by zero polynomial");
  Polynomial q(a.nvars());
  Polynomial rem = a;
  auto [lb, cb] = b.leading_term();
  while (!rem.is_zero()) {
    auto [lr, cr] = rem.leading_term();
    Exponent e(a.nvars());
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] = lr[i] - lb[i];
      if (e[i] < 0) fail(ErrorCode::InternalAssertion, "divide_exact: not divisible");
    }
    Polynomial t = make_monomial(a.nvars(), e, cr / cb);
    q += t;
    rem -= t * b;
  }
  return q;
}

inline std::optional<Polynomial> try_divide(const Polynomial& a, const Polynomial& b) {
  try {
    Polynomial q = divide_exact(a, b);
    return q;
  } catch (const Error&) {
    return std::nullopt;
  }
}

// --- monomial times unit ---------------------------------------------------

struct MonomialTimesUnit {
  Exponent gamma;  // full-length; zero outside the divisor variables
  Polynomial unit;

  bool unit_at_origin() const { return !coeff_is_zero(unit.constant_term()); }
  Polynomial expand() const { return unit.shifted(gamma); }
};

// Pulls out the largest monomial in the divisor variables dividing p.
inline MonomialTimesUnit factor_monomial_unit(const Polynomial& p, const std::vector<std::size_t>& divisor) {
  if (p.is_zero()) fail(ErrorCode::ZeroPolynomial, "factor_monomial_unit of zero");
  Exponent gamma(p.nvars(), 0);
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    for (std::size_t i : divisor) gamma[i] = first ? e[i] : std::min(gamma[i], e[i]);
    first = false;
  }
  Exponent neg(p.nvars(), 0);
  for (std::size_t i : divisor) neg[i] = -gamma[i];
  return {gamma, p.shifted(neg)};
}

// --- printing --------------------------------------------------------------

inline std::string monomial_string(const Exponent& e, const Ring& ring) {
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += ring.name(i);
    if (e[i] != 1) s += '^' + std::to_string(e[i]);
  }
  return s;
}

template <class C, class CoeffFmt>
std::string format_polynomial(const BasicPolynomial<C>& p, const Ring& ring, CoeffFmt&& coeff_fmt) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [e, c] = *it;
    auto [negative, body] = coeff_fmt(c);
    std::string mono = monomial_string(e, ring);
    if (first)
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    first = false;
    if (mono.empty())
      out += body.empty() ? "1" : body;
    else if (body.empty())
      out += mono;
    else
      out += body + "*" + mono;
  }
  return out;
}

inline std::string to_string(const Polynomial& p, const Ring& ring) {
  return format_polynomial(p, ring, [](const Rational& c) {
    Rational a = abs(c);
    return std::pair<bool, std::string>(sgn(c) < 0, a == 1 ? std::string() : a.get_str());
  });
}

// Debug output with positional names.
inline std::ostream& operator<<(std::ostream& os, const Polynomial& p) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p.nvars(); ++i) names.push_back("t" + std::to_string(i + 1));
  return os << to_string(p, Ring::from_names(names));
}

// --- parsing ---------------------------------------------------------------

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view text, const Ring& ring) : s_(text), ring_(ring) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorCode::InvalidInput, "polynomial syntax error at offset " + std::to_string(pos_) + ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  Polynomial expr() {
    Polynomial p = term();
    for (;;) {
      if (accept('+'))
        p += term();
      else if (accept('-'))
        p -= term();
      else
        return p;
    }
  }
  Polynomial term() {
    Polynomial p = unary();
    for (;;) {
      if (accept('*')) {
        p = p * unary();
      } else if (accept('/')) {
        Polynomial d = unary();
        if (!d.is_constant() || d.is_zero()) error("division only by nonzero constants");
        p = p.scaled(1 / d.constant_term());
      } else {
        return p;
      }
    }
  }
  Polynomial unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }
  Polynomial power() {
    Polynomial base = atom();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) error("exponent must be a nonnegative integer");
      if (pos_ - start > 6) error("exponent too large");
      base = base.pow(static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start)))));
    }
    return base;
  }
  Polynomial atom() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial p = expr();
      if (!accept(')')) error("missing ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      Integer n(std::string(s_.substr(start, pos_ - start)));
      return Polynomial(ring_.size(), Rational(n));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      auto idx = ring_.find(name);
      if (!idx) fail(ErrorCode::InvalidInput, "undeclared variable '" + name + "'");
      return Polynomial::variable(ring_.size(), *idx);
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const Ring& ring_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Polynomial parse_polynomial(std::string_view text, const Ring& ring) {
  return detail::PolyParser(text, ring).parse();
}

}  // namespace monoforge

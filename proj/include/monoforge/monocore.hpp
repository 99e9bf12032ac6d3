#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/exactlin.hpp"
#include "monoforge/polynomial.hpp"

namespace monoforge {

// x_j = u^{A_j}, y_k = u^{B_k}(xi_k + v_k), z_l = v_l (q < l <= s), z_l = 0 (s < l <= s').
struct MonomialMorphism {
  std::size_t r = 0, s = 0, t = 0, s_prime = 0;
  IntMatrix A;
  IntMatrix B;
  RatVector xi;

  std::size_t p() const { return A.rows(); }
  std::size_t q() const { return B.rows(); }
  std::size_t source_dim() const { return r + s + t; }
  std::size_t target_dim() const { return p() + s_prime; }
  bool dominant() const { return s_prime == s; }

  friend bool operator==(const MonomialMorphism&, const MonomialMorphism&) = default;
};

struct MorphismData {
  std::size_t r = 0, s = 0, t = 0, s_prime = 0;
  std::vector<IntVector> A;
  std::vector<IntVector> B;
  RatVector xi;
};

inline MonomialMorphism validate(const MorphismData& d) {
  auto rows_ok = [&](const std::vector<IntVector>& m, const char* what) {
    for (const auto& row : m) {
      if (row.size() != d.r)
        fail(ErrorCode::DimensionMismatch, std::string(what) + " row length differs from r");
      for (const auto& x : row)
        if (x < 0) fail(ErrorCode::DimensionMismatch, std::string(what) + " has a negative exponent");
    }
  };
  rows_ok(d.A, "A");
  rows_ok(d.B, "B");
  if (d.xi.size() != d.B.size()) fail(ErrorCode::DimensionMismatch, "xi must have one entry per B row");
  if (!(d.B.size() <= d.s && d.s <= d.s_prime))
    fail(ErrorCode::DimensionMismatch, "need q <= s <= s_prime");
  MonomialMorphism m;
  m.r = d.r;
  m.s = d.s;
  m.t = d.t;
  m.s_prime = d.s_prime;
  m.A = IntMatrix::from_rows(d.A, d.r);
  m.B = IntMatrix::from_rows(d.B, d.r);
  m.xi = d.xi;
  if (rank(m.A) != m.A.rows()) fail(ErrorCode::DependentAlphaRows, "rows of A are linearly dependent");
  for (std::size_t k = 0; k < m.q(); ++k) {
    IntVector beta = m.B.row(k);
    bool nonzero = false;
    for (const auto& x : beta) nonzero = nonzero || x != 0;
    if (!nonzero || !in_rational_span(m.A, beta))
      fail(ErrorCode::BadBetaRow, "B row " + std::to_string(k + 1) + " is zero or independent of A");
    if (sgn(m.xi[k]) == 0) fail(ErrorCode::ZeroXi, "xi " + std::to_string(k + 1) + " is zero");
  }
  return m;
}

inline MonomialMorphism validate(const MonomialMorphism& m) {
  return validate(MorphismData{m.r, m.s, m.t, m.s_prime, m.A.row_list(), m.B.row_list(), m.xi});
}

inline Ring source_ring(const MonomialMorphism& m) { return Ring::source(m.r, m.s, m.t); }

inline Ring target_ring(const MonomialMorphism& m) {
  std::vector<Variable> vars;
  for (std::size_t j = 1; j <= m.p(); ++j) vars.push_back({"x" + std::to_string(j), VarClass::X});
  for (std::size_t k = 1; k <= m.q(); ++k) vars.push_back({"y" + std::to_string(k), VarClass::Y});
  for (std::size_t l = m.q() + 1; l <= m.s_prime; ++l) vars.push_back({"z" + std::to_string(l), VarClass::Z});
  return Ring(std::move(vars));
}

inline Exponent exponent_of(const IntVector& row, std::size_t nvars) {
  Exponent e(nvars, 0);
  for (std::size_t i = 0; i < row.size(); ++i) e[i] = static_cast<int>(row[i].get_si());
  return e;
}

// Component functions of m in the source ring u1..ur, v1..vs, w1..wt.
inline std::vector<Polynomial> components(const MonomialMorphism& m) {
  std::size_t n = m.source_dim();
  std::vector<Polynomial> out;
  for (std::size_t j = 0; j < m.p(); ++j) out.push_back(make_monomial(n, exponent_of(m.A.row(j), n)));
  for (std::size_t k = 0; k < m.q(); ++k) {
    Polynomial unit = Polynomial(n, m.xi[k]) + Polynomial::variable(n, m.r + k);
    out.push_back(unit.shifted(exponent_of(m.B.row(k), n)));
  }
  for (std::size_t l = m.q(); l < m.s; ++l) out.push_back(Polynomial::variable(n, m.r + l));
  for (std::size_t l = m.s; l < m.s_prime; ++l) out.push_back(Polynomial(n));
  return out;
}

// Sum over i of (log_coeffs[i]*x_i + plain_coeffs[i]) d/dx_i on a fixed ring.
struct LogVectorField {
  RatVector log_coeffs;
  RatVector plain_coeffs;

  LogVectorField() = default;
  explicit LogVectorField(std::size_t n) : log_coeffs(n, Rational(0)), plain_coeffs(n, Rational(0)) {}

  static LogVectorField diagonal(const RatVector& weights) {
    LogVectorField f(weights.size());
    f.log_coeffs = weights;
    return f;
  }
  static LogVectorField plain(std::size_t n, std::size_t i) {
    LogVectorField f(n);
    f.plain_coeffs[i] = 1;
    return f;
  }

  std::size_t size() const { return log_coeffs.size(); }
  bool is_diagonal() const {
    for (const auto& c : plain_coeffs)
      if (sgn(c) != 0) return false;
    return true;
  }
  bool is_zero() const {
    for (std::size_t i = 0; i < size(); ++i)
      if (sgn(log_coeffs[i]) != 0 || sgn(plain_coeffs[i]) != 0) return false;
    return true;
  }
  // Nonvanishing at the origin.
  bool regular_at_origin() const { return !is_diagonal(); }

  friend bool operator==(const LogVectorField&, const LogVectorField&) = default;
};

inline Polynomial apply_field(const LogVectorField& x, const Polynomial& p) {
  if (x.size() != p.nvars()) fail(ErrorCode::DimensionMismatch, "field and polynomial live on different rings");
  Polynomial out(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    Rational w = 0;
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0 && sgn(x.log_coeffs[i]) != 0) w += x.log_coeffs[i] * e[i];
    if (sgn(w) != 0) out.add_term(e, c * w);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0 || sgn(x.plain_coeffs[i]) == 0) continue;
      Exponent f = e;
      --f[i];
      out.add_term(f, c * x.plain_coeffs[i] * e[i]);
    }
  }
  return out;
}

// r-p diagonal fields from the saturated kernel of A, then d/dw_l.
inline std::vector<LogVectorField> tangent_basis(const MonomialMorphism& m) {
  std::size_t n = m.source_dim();
  std::vector<LogVectorField> out;
  IntMatrix k = integer_kernel(m.A);
  for (std::size_t j = 0; j < k.rows(); ++j) {
    LogVectorField f(n);
    for (std::size_t i = 0; i < m.r; ++i) f.log_coeffs[i] = k(j, i);
    out.push_back(f);
  }
  for (std::size_t l = 0; l < m.t; ++l) out.push_back(LogVectorField::plain(n, m.r + m.s + l));
  return out;
}

inline bool has_free_variable(const MonomialMorphism& m) { return m.t >= 1; }

using EigenKey = RatVector;

struct EigenKeyLess {
  bool operator()(const EigenKey& a, const EigenKey& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  }
};

using EigenDecomposition = std::map<EigenKey, Polynomial, EigenKeyLess>;

// Groups the terms of f by their eigenvalue tuple under the diagonal fields of basis.
inline EigenDecomposition eigen_decompose(const Polynomial& f, const std::vector<LogVectorField>& basis) {
  std::vector<const LogVectorField*> diag;
  for (const auto& x : basis)
    if (x.is_diagonal()) diag.push_back(&x);
  EigenDecomposition out;
  for (const auto& [e, c] : f.terms()) {
    EigenKey key;
    for (const auto* x : diag) {
      Rational w = 0;
      for (std::size_t i = 0; i < e.size(); ++i) w += x->log_coeffs[i] * e[i];
      key.push_back(w);
    }
    auto it = out.try_emplace(key, Polynomial(f.nvars())).first;
    it->second.add_term(e, c);
  }
  return out;
}

struct DependenceCheck {
  bool dependent = true;
  std::optional<Exponent> witness;
};

// True iff g is annihilated by every tangent field, i.e. g is a function of the components.
inline DependenceCheck algebraic_dependence_check(const Polynomial& g, const MonomialMorphism& m) {
  if (!m.dominant()) fail(ErrorCode::NotDominant, "algebraic_dependence_check needs a dominant morphism");
  if (g.nvars() != m.source_dim()) fail(ErrorCode::DimensionMismatch, "g does not live on the source ring");
  IntMatrix kernel = kernel_lattice(m.A);
  DependenceCheck out;
  for (const auto& [e, c] : g.terms()) {
    bool bad = false;
    for (std::size_t l = 0; l < m.t; ++l) bad = bad || e[m.r + m.s + l] != 0;
    for (std::size_t j = 0; j < kernel.rows() && !bad; ++j) {
      Integer s = 0;
      for (std::size_t i = 0; i < m.r; ++i) s += kernel(j, i) * e[i];
      bad = s != 0;
    }
    if (bad) {
      out.dependent = false;
      out.witness = e;
      break;
    }
  }
  bool killed = true;
  for (const auto& x : tangent_basis(m)) killed = killed && apply_field(x, g).is_zero();
  ensure(killed == out.dependent, "dependence test disagrees with tangent-field annihilation");
  return out;
}

struct DivisorProfile {
  std::size_t e = 0;
  std::size_t i = 0;
  friend bool operator==(const DivisorProfile&, const DivisorProfile&) = default;
};

inline DivisorProfile divisor_profile(const MonomialMorphism& m) { return {m.p() + m.q(), m.p()}; }

}  // namespace monoforge

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/exactlin.hpp"
#include "monoforge/monocore.hpp"
#include "monoforge/polynomial.hpp"

namespace monoforge {

// Divisor components are monomial times unit in the u variables; plain ones are arbitrary.
enum class ComponentKind { Divisor, Plain };

struct SymbolicComponent {
  std::string name;
  ComponentKind kind = ComponentKind::Plain;
  Polynomial poly;
};

struct SymbolicMorphism {
  Ring source;
  std::vector<SymbolicComponent> comps;

  std::vector<std::size_t> divisor() const { return source.indices(VarClass::U); }
  std::size_t source_dim() const { return source.size(); }
  std::size_t target_dim() const { return comps.size(); }
};

inline SymbolicMorphism symbolic(const MonomialMorphism& m) {
  SymbolicMorphism out{source_ring(m), {}};
  Ring target = target_ring(m);
  auto polys = components(m);
  for (std::size_t j = 0; j < polys.size(); ++j) {
    ComponentKind kind = j < m.p() + m.q() ? ComponentKind::Divisor : ComponentKind::Plain;
    out.comps.push_back({target.name(j), kind, polys[j]});
  }
  return out;
}

inline SymbolicMorphism with_component(SymbolicMorphism m, std::string name, ComponentKind kind, Polynomial p) {
  if (p.nvars() != m.source_dim()) fail(ErrorCode::DimensionMismatch, "component does not live on the source ring");
  m.comps.push_back({std::move(name), kind, std::move(p)});
  return m;
}

inline MonomialTimesUnit divisor_factor(const SymbolicMorphism& m, std::size_t j) {
  const auto& c = m.comps[j];
  if (c.poly.is_zero()) fail(ErrorCode::NotAMorphism, "divisor component " + c.name + " is zero");
  MonomialTimesUnit f = factor_monomial_unit(c.poly, m.divisor());
  if (!f.unit_at_origin())
    fail(ErrorCode::NotAMorphism, "divisor component " + c.name + " is not a monomial times a unit");
  return f;
}

// D_i = u_i d/du_i on divisor variables, d/dx_i elsewhere.
inline Polynomial log_partial(const Ring& ring, const Polynomial& p, std::size_t i) {
  return ring.cls(i) == VarClass::U ? p.log_derivative(i) : p.derivative(i);
}

struct LogJacobianAtPoint {
  std::vector<std::string> rows, cols;
  std::vector<RatVector> entries;

  std::size_t rank() const {
    IntMatrix m(0, cols.size());
    for (const auto& row : entries) {
      Integer d = lcm_of_denominators(row);
      IntVector r;
      for (const auto& x : row) {
        Rational scaled = x * d;
        r.push_back(scaled.get_num());
      }
      m.append_row(r);
    }
    return monoforge::rank(m);
  }
};

inline LogJacobianAtPoint log_jacobian_at_origin(const SymbolicMorphism& m) {
  std::size_t n = m.source_dim();
  LogJacobianAtPoint out;
  for (std::size_t i = 0; i < n; ++i) out.rows.push_back(m.source.name(i));
  for (const auto& c : m.comps) out.cols.push_back(c.name);
  out.entries.assign(n, RatVector(m.target_dim(), Rational(0)));
  for (std::size_t j = 0; j < m.target_dim(); ++j) {
    if (m.comps[j].kind == ComponentKind::Divisor) {
      MonomialTimesUnit f = divisor_factor(m, j);
      Rational u0 = f.unit.constant_term();
      for (std::size_t i = 0; i < n; ++i)
        out.entries[i][j] = m.source.cls(i) == VarClass::U ? Rational(f.gamma[i])
                                                           : Rational(f.unit.derivative(i).constant_term() / u0);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        out.entries[i][j] = log_partial(m.source, m.comps[j].poly, i).constant_term();
    }
  }
  return out;
}

using PolyMatrix = std::vector<std::vector<Polynomial>>;

// Rows D_i, columns: (gamma_i U + D_i U) for divisor components, D_i P for plain ones.
inline PolyMatrix symbolic_log_jacobian(const SymbolicMorphism& m) {
  std::size_t n = m.source_dim();
  PolyMatrix out(n, std::vector<Polynomial>(m.target_dim(), Polynomial(n)));
  for (std::size_t j = 0; j < m.target_dim(); ++j) {
    const Polynomial& p = m.comps[j].poly;
    Exponent neg(n, 0);
    if (m.comps[j].kind == ComponentKind::Divisor) {
      MonomialTimesUnit f = divisor_factor(m, j);
      for (std::size_t i = 0; i < n; ++i) neg[i] = -f.gamma[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i][j] = log_partial(m.source, p, i).shifted(neg);
  }
  return out;
}

// Fraction-free elimination; returns rank and, for square input, the determinant.
inline std::pair<std::size_t, Polynomial> bareiss(PolyMatrix a, std::size_t nvars) {
  std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  std::size_t r = 0;
  int sign = 1;
  Polynomial prev(nvars, Rational(1));
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && a[piv][c].is_zero()) ++piv;
    if (piv == rows) continue;
    if (piv != r) {
      std::swap(a[piv], a[r]);
      sign = -sign;
    }
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j)
        a[i][j] = divide_exact(a[r][c] * a[i][j] - a[i][c] * a[r][j], prev);
      a[i][c] = Polynomial(nvars);
    }
    prev = a[r][c];
    ++r;
  }
  Polynomial det(nvars);
  if (rows == cols && r == rows) det = rows ? a[rows - 1][cols - 1].scaled(Rational(sign)) : Polynomial(nvars, 1);
  if (rows == 0 && cols == 0) det = Polynomial(nvars, 1);
  return {r, det};
}

inline std::size_t generic_rank(const SymbolicMorphism& m) {
  if (m.target_dim() == 0) return 0;
  return bareiss(symbolic_log_jacobian(m), m.source_dim()).first;
}

// Maximal minors of the symbolic log-Jacobian: generators of the top log Fitting ideal.
inline std::vector<Polynomial> log_minors(const SymbolicMorphism& m) {
  std::size_t n = m.source_dim(), k = m.target_dim();
  if (k > n) fail(ErrorCode::DimensionMismatch, "more components than source variables");
  PolyMatrix full = symbolic_log_jacobian(m);
  std::vector<Polynomial> out;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + k, true);
  do {
    PolyMatrix sub;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) sub.push_back(full[i]);
    out.push_back(bareiss(sub, n).second);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

inline void require_dominant(const SymbolicMorphism& m) {
  if (generic_rank(m) < m.target_dim())
    fail(ErrorCode::NotDominant, "generic rank is below the target dimension");
}

inline bool is_monomial_at(const SymbolicMorphism& m) {
  require_dominant(m);
  return log_jacobian_at_origin(m).rank() == m.target_dim();
}

inline std::size_t fitting_unit_order(const SymbolicMorphism& m) {
  require_dominant(m);
  return m.target_dim() - log_jacobian_at_origin(m).rank();
}

// F_index is the unit ideal at the origin iff some (n - index)-minor is nonzero there.
inline bool fitting_ideal_is_unit(const SymbolicMorphism& m, std::size_t index) {
  if (index > m.target_dim()) return true;
  return log_jacobian_at_origin(m).rank() >= m.target_dim() - index;
}

}  // namespace monoforge

#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/exactlin.hpp"
#include "monoforge/logfit.hpp"
#include "monoforge/monideal.hpp"
#include "monoforge/monocore.hpp"
#include "monoforge/polynomial.hpp"

namespace monoforge {

// u_i -> u_l u_i for i in center, i != l.
struct Blowup {
  std::vector<std::size_t> center;
  std::size_t chart = 0;
  friend bool operator==(const Blowup&, const Blowup&) = default;
};

// u_{vars[i]} -> eps[i] u^{k[i]}
struct PowerSubst {
  std::vector<std::size_t> vars;
  std::vector<int> k;
  std::vector<int> eps;
  friend bool operator==(const PowerSubst&, const PowerSubst&) = default;
};

// x -> c + x; divisor variables moved off zero leave the divisor.
struct Recentre {
  std::vector<std::pair<std::size_t, Rational>> point;
  friend bool operator==(const Recentre&, const Recentre&) = default;
};

// Adds a variable to the divisor, no substitution.
struct CodimOneBlowup {
  std::size_t variable = 0;
  friend bool operator==(const CodimOneBlowup&, const CodimOneBlowup&) = default;
};

using ChartTransform = std::variant<Blowup, PowerSubst, Recentre, CodimOneBlowup>;

inline std::string describe(const ChartTransform& t, const Ring& ring) {
  std::string out;
  if (const auto* b = std::get_if<Blowup>(&t)) {
    out = "blowup (";
    for (std::size_t i = 0; i < b->center.size(); ++i) out += (i ? "," : "") + ring.name(b->center[i]);
    out += ") chart " + ring.name(b->chart);
  } else if (const auto* p = std::get_if<PowerSubst>(&t)) {
    out = "power";
    for (std::size_t i = 0; i < p->vars.size(); ++i) {
      const std::string& n = ring.name(p->vars[i]);
      out += (i ? ", " : " ") + n + "=" + (p->eps[i] < 0 ? "-" : "") + n;
      if (p->k[i] != 1) out += "^" + std::to_string(p->k[i]);
    }
  } else if (const auto* r = std::get_if<Recentre>(&t)) {
    out = "recentre";
    for (std::size_t i = 0; i < r->point.size(); ++i)
      out += (i ? ", " : " ") + ring.name(r->point[i].first) + "=" + to_string(r->point[i].second);
  } else {
    out = "codim-one " + ring.name(std::get<CodimOneBlowup>(t).variable);
  }
  return out;
}

struct NormalFormMatch {
  MonomialMorphism m;
  std::vector<std::size_t> source_order;  // variable i of m is chart variable source_order[i]
  std::vector<std::size_t> target_order;  // component j of m is chart component target_order[j]
  RatVector scale;                        // chart component = scale * component of m
};

// The single term c*v of p when p is exactly that for a v-variable.
inline std::optional<std::pair<std::size_t, Rational>> single_linear(const Polynomial& p, const Ring& ring) {
  if (p.terms().size() != 1) return std::nullopt;
  const auto& [e, c] = *p.terms().begin();
  if (total_degree(e) != 1) return std::nullopt;
  std::size_t i = std::find(e.begin(), e.end(), 1) - e.begin();
  if (ring.cls(i) != VarClass::V) return std::nullopt;
  return std::make_pair(i, c);
}

inline bool block_ordered(const Ring& ring) {
  auto rank_of = [](VarClass c) { return c == VarClass::U ? 0 : c == VarClass::V ? 1 : c == VarClass::W ? 2 : 3; };
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (rank_of(ring.cls(i)) == 3) return false;
    if (i && rank_of(ring.cls(i)) < rank_of(ring.cls(i - 1))) return false;
  }
  return true;
}

// Recognizes x = c u^a, y = c u^b (xi + v), z = c v, z = 0, and checks the match by substitution.
inline std::optional<NormalFormMatch> match_normal_form(const SymbolicMorphism& s) {
  const Ring& ring = s.source;
  if (!block_ordered(ring)) return std::nullopt;
  std::size_t n = ring.size();
  auto U = ring.indices(VarClass::U), V = ring.indices(VarClass::V), W = ring.indices(VarClass::W);
  std::size_t r = U.size();
  struct Slot {
    std::size_t comp;
    IntVector row;
    Rational scale, xi;
    std::size_t v;
  };
  std::vector<Slot> xs, ys, zs;
  std::vector<std::size_t> zeros;
  std::vector<bool> v_used(n, false);
  for (std::size_t j = 0; j < s.comps.size(); ++j) {
    const auto& c = s.comps[j];
    if (c.poly.is_zero()) {
      if (c.kind != ComponentKind::Plain) return std::nullopt;
      zeros.push_back(j);
      continue;
    }
    if (c.kind == ComponentKind::Divisor) {
      auto f = factor_monomial_unit(c.poly, U);
      if (!f.unit_at_origin()) return std::nullopt;
      IntVector row(r);
      for (std::size_t i = 0; i < r; ++i) row[i] = f.gamma[i];
      if (f.unit.degree() == 0) {
        xs.push_back({j, row, f.unit.constant_term(), 0, 0});
        continue;
      }
      Rational a = f.unit.constant_term();
      auto v = single_linear(f.unit - Polynomial(n, a), ring);
      if (!v || v_used[v->first]) return std::nullopt;
      v_used[v->first] = true;
      ys.push_back({j, row, v->second, a / v->second, v->first});
    } else {
      auto v = single_linear(c.poly, ring);
      if (!v || v_used[v->first]) return std::nullopt;
      v_used[v->first] = true;
      zs.push_back({j, {}, v->second, 0, v->first});
    }
  }
  if (ys.size() + zs.size() != V.size()) return std::nullopt;
  MorphismData d{r, V.size(), W.size(), V.size() + zeros.size(), {}, {}, {}};
  for (const auto& x : xs) d.A.push_back(x.row);
  for (const auto& y : ys) {
    d.B.push_back(y.row);
    d.xi.push_back(y.xi);
  }
  NormalFormMatch out;
  try {
    out.m = validate(d);
  } catch (const Error&) {
    return std::nullopt;
  }
  for (std::size_t i = 0; i < r; ++i) out.source_order.push_back(U[i]);
  for (const auto& y : ys) out.source_order.push_back(y.v);
  for (const auto& z : zs) out.source_order.push_back(z.v);
  for (std::size_t w : W) out.source_order.push_back(w);
  for (const auto* group : {&xs, &ys, &zs})
    for (const auto& slot : *group) {
      out.target_order.push_back(slot.comp);
      out.scale.push_back(slot.scale);
    }
  for (std::size_t j : zeros) {
    out.target_order.push_back(j);
    out.scale.push_back(1);
  }
  auto comps = components(out.m);
  for (std::size_t j = 0; j < comps.size(); ++j) {
    Polynomial expect = remap_variables(comps[j], out.source_order, n).scaled(out.scale[j]);
    ensure(expect == s.comps[out.target_order[j]].poly, "normal form match does not reproduce the components");
  }
  return out;
}

enum class ChartStatus { NormalForm, MonomialUpToUnits, NotMonomial, NotDominant };

inline std::string status_name(ChartStatus s) {
  switch (s) {
    case ChartStatus::NormalForm: return "normal-form";
    case ChartStatus::MonomialUpToUnits: return "monomial-up-to-units";
    case ChartStatus::NotMonomial: return "not-monomial";
    case ChartStatus::NotDominant: return "not-dominant";
  }
  return "?";
}

struct ChartNode {
  std::optional<std::size_t> parent;
  std::optional<ChartTransform> transform;
  std::vector<std::size_t> children;
  std::size_t depth = 0;
  SymbolicMorphism state;
  std::vector<std::size_t> var_map;  // parent variable i is chart variable var_map[i]
  std::vector<Polynomial> edge;      // parent variables in chart variables
  std::vector<Polynomial> to_root;   // root variables in chart variables
  RatVector target_shift;            // accumulated translation of each target component
  std::optional<NormalFormMatch> normal;
  ChartStatus status = ChartStatus::NotMonomial;
  std::string label;

  const Ring& ring() const { return state.source; }
  std::vector<std::size_t> divisor() const { return state.divisor(); }
};

inline void classify(ChartNode& node) {
  node.normal = match_normal_form(node.state);
  if (node.normal) {
    node.status = ChartStatus::NormalForm;
    return;
  }
  try {
    node.status = is_monomial_at(node.state) ? ChartStatus::MonomialUpToUnits : ChartStatus::NotMonomial;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotDominant) node.status = ChartStatus::NotDominant;
    else if (e.code() == ErrorCode::NotAMorphism) node.status = ChartStatus::NotMonomial;
    else throw;
  }
}

inline std::vector<Polynomial> identity_images(std::size_t n) {
  std::vector<Polynomial> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Polynomial::variable(n, i));
  return out;
}

inline ChartNode make_root(SymbolicMorphism s) {
  ChartNode node;
  std::size_t n = s.source_dim();
  node.state = std::move(s);
  node.var_map.resize(n);
  std::iota(node.var_map.begin(), node.var_map.end(), 0);
  node.edge = identity_images(n);
  node.to_root = node.edge;
  node.target_shift.assign(node.state.target_dim(), Rational(0));
  classify(node);
  return node;
}

inline ChartNode make_root(const MonomialMorphism& m) { return make_root(symbolic(m)); }

inline ChartNode derive(const ChartNode& parent, ChartTransform t, Ring ring, std::vector<Polynomial> edge,
                        std::vector<std::size_t> var_map) {
  ChartNode c;
  std::size_t n = ring.size();
  c.transform = std::move(t);
  c.depth = parent.depth + 1;
  c.state.source = std::move(ring);
  c.var_map = std::move(var_map);
  c.edge = std::move(edge);
  c.target_shift = parent.target_shift;
  auto divisor = c.state.divisor();
  for (std::size_t j = 0; j < parent.state.comps.size(); ++j) {
    SymbolicComponent comp = parent.state.comps[j];
    comp.poly = substitute<Rational>(comp.poly, c.edge, n);
    if (comp.kind == ComponentKind::Divisor) {
      if (comp.poly.is_zero()) fail(ErrorCode::NotAMorphism, "divisor component " + comp.name + " became zero");
      auto f = factor_monomial_unit(comp.poly, divisor);
      bool trivial = std::all_of(f.gamma.begin(), f.gamma.end(), [](int g) { return g == 0; });
      if (trivial && f.unit_at_origin()) comp.kind = ComponentKind::Plain;
    }
    if (comp.kind == ComponentKind::Plain) {
      Rational c0 = comp.poly.constant_term();
      if (sgn(c0) != 0) {
        comp.poly -= Polynomial(n, c0);
        c.target_shift[j] += c0;
      }
    }
    c.state.comps.push_back(std::move(comp));
  }
  for (const auto& p : parent.to_root) c.to_root.push_back(substitute<Rational>(p, c.edge, n));
  classify(c);
  return c;
}

struct ChartTree {
  std::vector<ChartNode> nodes;

  ChartTree() = default;
  explicit ChartTree(ChartNode root) { nodes.push_back(std::move(root)); }

  std::vector<std::size_t> attach(std::size_t parent, std::vector<ChartNode> kids) {
    std::vector<std::size_t> ids;
    for (auto& k : kids) {
      k.parent = parent;
      k.depth = nodes[parent].depth + 1;
      ids.push_back(nodes.size());
      nodes.push_back(std::move(k));
    }
    auto& ch = nodes[parent].children;
    ch.insert(ch.end(), ids.begin(), ids.end());
    return ids;
  }
  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].children.empty()) out.push_back(i);
    return out;
  }
  // Node ids from the root down to id.
  std::vector<std::size_t> path(std::size_t id) const {
    std::vector<std::size_t> out{id};
    while (nodes[out.back()].parent) out.push_back(*nodes[out.back()].parent);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

inline std::vector<ChartNode> blowup_charts(const ChartNode& node, const std::vector<std::size_t>& center) {
  const Ring& ring = node.ring();
  std::size_t n = ring.size();
  if (center.size() < 2) fail(ErrorCode::BadCenter, "blowup center needs at least two divisor variables");
  for (std::size_t k = 0; k < center.size(); ++k) {
    if (center[k] >= n || ring.cls(center[k]) != VarClass::U)
      fail(ErrorCode::BadCenter, "blowup center must consist of divisor variables");
    for (std::size_t m = 0; m < k; ++m)
      if (center[m] == center[k]) fail(ErrorCode::BadCenter, "repeated variable in blowup center");
  }
  std::vector<std::size_t> ident(n);
  std::iota(ident.begin(), ident.end(), 0);
  std::vector<ChartNode> out;
  for (std::size_t l : center) {
    auto edge = identity_images(n);
    for (std::size_t i : center)
      if (i != l) edge[i] = Polynomial::variable(n, i) * Polynomial::variable(n, l);
    out.push_back(derive(node, Blowup{center, l}, ring, edge, ident));
  }
  return out;
}

// One chart per sign vector; odd exponents force the sign +1.
inline std::vector<ChartNode> power_subst_charts(const ChartNode& node, const std::vector<int>& k) {
  const Ring& ring = node.ring();
  std::size_t n = ring.size();
  auto U = node.divisor();
  if (k.size() != U.size()) fail(ErrorCode::BadExponents, "one exponent per divisor variable is required");
  std::vector<std::size_t> even;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 1) fail(ErrorCode::BadExponents, "power substitution exponents must be positive");
    if (k[i] % 2 == 0) even.push_back(i);
  }
  if (even.size() > 20) fail(ErrorCode::BadExponents, "too many sign charts");
  std::vector<std::size_t> ident(n);
  std::iota(ident.begin(), ident.end(), 0);
  std::vector<ChartNode> out;
  for (unsigned long mask = 0; mask < (1ul << even.size()); ++mask) {
    PowerSubst ps{U, k, std::vector<int>(U.size(), 1)};
    for (std::size_t b = 0; b < even.size(); ++b)
      if (mask >> b & 1) ps.eps[even[b]] = -1;
    auto edge = identity_images(n);
    for (std::size_t i = 0; i < U.size(); ++i) {
      Exponent e(n, 0);
      e[U[i]] = k[i];
      edge[U[i]] = make_monomial(n, e, Rational(ps.eps[i]));
    }
    out.push_back(derive(node, ps, ring, edge, ident));
  }
  return out;
}

// New index of each variable after sorting the classes into u, v, w blocks (stable).
inline std::vector<std::size_t> block_permutation(const Ring& ring) {
  std::vector<std::size_t> order;
  for (VarClass c : {VarClass::U, VarClass::V, VarClass::W})
    for (std::size_t i : ring.indices(c)) order.push_back(i);
  for (std::size_t i = 0; i < ring.size(); ++i)
    if (std::find(order.begin(), order.end(), i) == order.end()) order.push_back(i);
  std::vector<std::size_t> where(ring.size());
  for (std::size_t k = 0; k < order.size(); ++k) where[order[k]] = k;
  return where;
}

inline Ring permuted(const Ring& ring, const std::vector<std::size_t>& where) {
  std::vector<Variable> vars(ring.size());
  for (std::size_t i = 0; i < ring.size(); ++i) vars[where[i]] = ring.var(i);
  return Ring(std::move(vars));
}

inline ChartNode recentre(const ChartNode& node, const std::vector<std::pair<std::size_t, Rational>>& point) {
  Ring ring = node.ring();
  std::size_t n = ring.size();
  RatVector shift(n, Rational(0));
  std::vector<bool> seen(n, false);
  for (const auto& [i, c] : point) {
    if (i >= n) fail(ErrorCode::InvalidPoint, "recentre: no such variable");
    if (seen[i]) fail(ErrorCode::InvalidPoint, "recentre: variable " + ring.name(i) + " assigned twice");
    seen[i] = true;
    if (ring.cls(i) == VarClass::U) {
      if (sgn(c) == 0)
        fail(ErrorCode::OnDivisorZero, "recentre: divisor variable " + ring.name(i) + " at 0 needs no recentring");
      ring.set_class(i, VarClass::V);
      ring.rename(i, ring.fresh_name("v"));
    }
    shift[i] = c;
  }
  auto where = block_permutation(ring);
  Ring child = permuted(ring, where);
  std::vector<Polynomial> edge;
  for (std::size_t i = 0; i < n; ++i) edge.push_back(Polynomial::variable(n, where[i]) + Polynomial(n, shift[i]));
  return derive(node, Recentre{point}, child, edge, where);
}

inline ChartNode codim_one_blowup(const ChartNode& node, std::size_t variable) {
  Ring ring = node.ring();
  std::size_t n = ring.size();
  if (variable >= n || (ring.cls(variable) != VarClass::V && ring.cls(variable) != VarClass::W))
    fail(ErrorCode::BadCenter, "codimension-one blowup needs a v or w variable");
  ring.set_class(variable, VarClass::U);
  auto where = block_permutation(ring);
  Ring child = permuted(ring, where);
  std::vector<Polynomial> edge;
  for (std::size_t i = 0; i < n; ++i) edge.push_back(Polynomial::variable(n, where[i]));
  return derive(node, CodimOneBlowup{variable}, child, edge, where);
}

// Exponent bookkeeping of a blowup or power substitution on the normal form.
struct PulledBack {
  MonomialMorphism m;
  std::vector<int> signs;  // component j of the pullback = signs[j] * component j of m (x and y rows)
};

inline PulledBack pullback_monomial(const MonomialMorphism& m, const ChartTransform& t) {
  PulledBack out{m, std::vector<int>(m.p() + m.q(), 1)};
  if (const auto* b = std::get_if<Blowup>(&t)) {
    for (std::size_t i : b->center)
      if (i >= m.r) fail(ErrorCode::BadCenter, "blowup center outside the divisor");
    for (IntMatrix* M : {&out.m.A, &out.m.B}) {
      IntMatrix before = *M;
      for (std::size_t j = 0; j < M->rows(); ++j)
        for (std::size_t i : b->center)
          if (i != b->chart) (*M)(j, b->chart) += before(j, i);
    }
    return out;
  }
  if (const auto* p = std::get_if<PowerSubst>(&t)) {
    for (std::size_t a = 0; a < p->vars.size(); ++a) {
      std::size_t i = p->vars[a];
      if (i >= m.r) fail(ErrorCode::BadExponents, "power substitution outside the divisor");
      for (std::size_t j = 0; j < m.p() + m.q(); ++j) {
        const Integer& e = j < m.p() ? m.A(j, i) : m.B(j - m.p(), i);
        if (p->eps[a] < 0 && e % 2 != 0) out.signs[j] = -out.signs[j];
      }
      for (IntMatrix* M : {&out.m.A, &out.m.B})
        for (std::size_t j = 0; j < M->rows(); ++j) (*M)(j, i) *= p->k[a];
    }
    return out;
  }
  fail(ErrorCode::InvalidInput, "pullback_monomial handles blowups and power substitutions only");
}

// Column bookkeeping on the parent's normal form, checked against the substituted chart.
inline PulledBack pullback_morphism(const ChartTree& tree, std::size_t id) {
  const ChartNode& node = tree.nodes[id];
  if (!node.parent) {
    if (!node.normal) fail(ErrorCode::InvalidInput, "root is not in normal form");
    return {node.normal->m, std::vector<int>(node.normal->m.p() + node.normal->m.q(), 1)};
  }
  const ChartNode& par = tree.nodes[*node.parent];
  if (!par.normal) fail(ErrorCode::InvalidInput, "parent chart is not in normal form");
  PulledBack out = pullback_monomial(par.normal->m, *node.transform);
  ensure(node.normal.has_value(), "combinatorial transform lost the normal form");
  ensure(node.normal->m.A == out.m.A && node.normal->m.B == out.m.B && node.normal->m.xi == out.m.xi,
         "column bookkeeping disagrees with substitution");
  for (std::size_t j = 0; j < out.signs.size(); ++j)
    ensure(node.normal->scale[j] == par.normal->scale[j] * out.signs[j], "sign bookkeeping disagrees");
  return out;
}

// sum (a_i x_i + b_i) d/dx_i transported along the chart edge.
inline std::vector<LogVectorField> pullback_derivations(const ChartNode& node, const std::vector<LogVectorField>& fields) {
  if (!node.transform) return fields;
  std::size_t n = node.ring().size();
  std::vector<LogVectorField> out;
  for (const auto& x : fields) {
    if (x.size() != n) fail(ErrorCode::DimensionMismatch, "field lives on a different ring");
    LogVectorField y(n);
    if (const auto* b = std::get_if<Blowup>(&*node.transform)) {
      y = x;
      for (std::size_t i : b->center)
        if (sgn(x.plain_coeffs[i]) != 0) fail(ErrorCode::PoleDetected, "non-logarithmic field along the center");
      for (std::size_t i : b->center)
        if (i != b->chart) y.log_coeffs[i] = x.log_coeffs[i] - x.log_coeffs[b->chart];
    } else if (const auto* p = std::get_if<PowerSubst>(&*node.transform)) {
      y = x;
      for (std::size_t a = 0; a < p->vars.size(); ++a) {
        std::size_t i = p->vars[a];
        if (p->k[a] > 1 && sgn(x.plain_coeffs[i]) != 0)
          fail(ErrorCode::PoleDetected, "non-logarithmic field along a power substitution");
        y.log_coeffs[i] = x.log_coeffs[i] / Rational(p->k[a]);
        y.plain_coeffs[i] = x.plain_coeffs[i] * Rational(p->eps[a]);
      }
    } else if (const auto* r = std::get_if<Recentre>(&*node.transform)) {
      RatVector shift(n, Rational(0));
      for (const auto& [i, c] : r->point) shift[i] = c;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = node.var_map[i];
        y.log_coeffs[k] = x.log_coeffs[i];
        y.plain_coeffs[k] = x.plain_coeffs[i] + x.log_coeffs[i] * shift[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        y.log_coeffs[node.var_map[i]] = x.log_coeffs[i];
        y.plain_coeffs[node.var_map[i]] = x.plain_coeffs[i];
      }
    }
    out.push_back(y);
  }
  return out;
}

// Replaces the diagonal fields by a saturated integer basis of their rational span.
inline std::vector<LogVectorField> renormalize(const std::vector<LogVectorField>& fields) {
  std::vector<LogVectorField> plain, out;
  std::size_t n = fields.empty() ? 0 : fields[0].size();
  IntMatrix rows(0, n);
  for (const auto& x : fields) {
    if (!x.is_diagonal()) {
      plain.push_back(x);
      continue;
    }
    if (x.is_zero()) continue;
    Integer d = lcm_of_denominators(x.log_coeffs);
    IntVector row;
    for (const auto& c : x.log_coeffs) {
      Rational s = c * d;
      row.push_back(s.get_num());
    }
    rows.append_row(row);
  }
  IntMatrix sat = saturate_rows(rows);
  for (std::size_t j = 0; j < sat.rows(); ++j) {
    RatVector w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(Rational(sat(j, i)));
    out.push_back(LogVectorField::diagonal(w));
  }
  out.insert(out.end(), plain.begin(), plain.end());
  return out;
}

inline int sign_character(const IntVector& alpha, const std::vector<int>& eps) {
  int s = 1;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (eps[i] < 0 && alpha[i] % 2 != 0) s = -s;
  return s;
}

struct LiftedLeaf {
  std::size_t node = 0;
  std::size_t target_chart = 0;  // index of the target variable whose chart receives this leaf
  MonomialMorphism lifted;
};

struct TargetLift {
  std::vector<std::size_t> center;
  ChartTree tree;
  std::vector<LiftedLeaf> leaves;
};

// Components of phi after the target blowup x_j = x_l x_j (j in center, j != l).
inline std::vector<Polynomial> target_blowup_images(const std::vector<Polynomial>& comps,
                                                    const std::vector<std::size_t>& center, std::size_t l) {
  std::vector<Polynomial> out = comps;
  for (std::size_t j : center)
    if (j != l) out[j] = comps[l] * comps[j];
  return out;
}

inline TargetLift lift_target_blowup(const MonomialMorphism& phi, const std::vector<std::size_t>& center,
                                     std::size_t depth_cap = 64) {
  if (center.size() < 2) fail(ErrorCode::BadCenter, "target center needs at least two x variables");
  for (std::size_t k = 0; k < center.size(); ++k) {
    if (center[k] >= phi.p()) fail(ErrorCode::BadCenter, "target center must consist of x variables");
    for (std::size_t m = 0; m < k; ++m)
      if (center[m] == center[k]) fail(ErrorCode::BadCenter, "repeated variable in target center");
  }
  std::vector<Exponent> gens;
  for (std::size_t j : center) gens.push_back(exponent_of(phi.A.row(j), phi.r));
  PrincipalizationTree pt = principalize(minimalize(phi.r, gens), depth_cap);
  TargetLift out{center, ChartTree(make_root(phi)), {}};
  std::vector<std::size_t> chart_of(pt.nodes.size(), 0);
  for (std::size_t id = 0; id < pt.nodes.size(); ++id) {
    const auto& kids = pt.nodes[id].children;
    if (kids.empty()) continue;
    auto ids = out.tree.attach(chart_of[id], blowup_charts(out.tree.nodes[chart_of[id]], pt.nodes[kids[0]].center));
    for (std::size_t k = 0; k < kids.size(); ++k) chart_of[kids[k]] = ids[k];
  }
  for (std::size_t leaf : pt.leaves()) {
    std::size_t id = chart_of[leaf];
    const ChartNode& node = out.tree.nodes[id];
    ensure(node.normal.has_value(), "blowup chart lost the normal form");
    MonomialMorphism m = node.normal->m;
    std::optional<std::size_t> l;
    for (std::size_t j : center) {
      bool divides_all = true;
      for (std::size_t k : center)
        for (std::size_t i = 0; i < m.r; ++i) divides_all = divides_all && m.A(j, i) <= m.A(k, i);
      if (divides_all) {
        l = j;
        break;
      }
    }
    ensure(l.has_value(), "pulled-back center is not principal at a leaf");
    MonomialMorphism lifted = m;
    for (std::size_t j : center)
      if (j != *l)
        for (std::size_t i = 0; i < m.r; ++i) lifted.A(j, i) -= m.A(*l, i);
    lifted = validate(lifted);
    std::vector<Polynomial> lhs;
    for (const auto& c : node.state.comps) lhs.push_back(c.poly);
    auto rhs = target_blowup_images(components(lifted), center, *l);
    ensure(lhs == rhs, "target blowup lift does not commute");
    out.leaves.push_back({id, *l, lifted});
  }
  return out;
}

struct PowerLift {
  PowerSubst subst;  // u_i = eps_i u_i^t on all divisor variables
  MonomialMorphism lifted;
  std::vector<int> y_signs;  // y_k of the composite = y_signs[k] * y_k of the lift
};

// Lifts x_j = delta_j x_j^{t_j} (t_j even) through phi, if some sign vector matches delta.
inline std::optional<PowerLift> lift_power_substitution(const MonomialMorphism& phi, const std::vector<int>& t,
                                                        const std::vector<int>& delta) {
  if (t.size() != phi.p() || delta.size() != phi.p())
    fail(ErrorCode::DimensionMismatch, "one exponent and sign per x variable");
  Integer big = 1;
  for (int tj : t) {
    if (tj < 2 || tj % 2 != 0) fail(ErrorCode::BadExponents, "target power substitutions must be even");
    big = lcm(big, Integer(tj));
  }
  for (int d : delta)
    if (d != 1 && d != -1) fail(ErrorCode::BadExponents, "signs must be +1 or -1");
  if (phi.r > 24) fail(ErrorCode::BadExponents, "too many sign vectors to search");
  for (unsigned long mask = 0; mask < (1ul << phi.r); ++mask) {
    std::vector<int> eps(phi.r, 1);
    for (std::size_t i = 0; i < phi.r; ++i)
      if (mask >> i & 1) eps[i] = -1;
    bool ok = true;
    for (std::size_t j = 0; j < phi.p() && ok; ++j) ok = sign_character(phi.A.row(j), eps) == delta[j];
    if (!ok) continue;
    PowerLift out;
    long T = big.get_si();
    out.subst.vars.resize(phi.r);
    std::iota(out.subst.vars.begin(), out.subst.vars.end(), 0);
    out.subst.k.assign(phi.r, int(T));
    out.subst.eps = eps;
    out.lifted = phi;
    for (std::size_t j = 0; j < phi.p(); ++j)
      for (std::size_t i = 0; i < phi.r; ++i) out.lifted.A(j, i) = phi.A(j, i) * (T / t[j]);
    for (std::size_t k = 0; k < phi.q(); ++k) {
      for (std::size_t i = 0; i < phi.r; ++i) out.lifted.B(k, i) = phi.B(k, i) * T;
      out.y_signs.push_back(sign_character(phi.B.row(k), eps));
    }
    out.lifted = validate(out.lifted);
    return out;
  }
  return std::nullopt;
}

struct CubeRestriction {
  std::vector<std::size_t> fixed;  // divisor variables set to a sign
  std::vector<int> signs;
  MonomialMorphism phi;            // on the remaining variables, in order
  std::vector<int> component_signs;  // x and y rows of the restriction = component_signs * phi
};

inline CubeRestriction restrict_to_signs(const MonomialMorphism& m, const std::vector<std::size_t>& fixed,
                                         const std::vector<int>& signs) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < m.r; ++i)
    if (std::find(fixed.begin(), fixed.end(), i) == fixed.end()) kept.push_back(i);
  std::vector<int> eps(m.r, 1);
  for (std::size_t k = 0; k < fixed.size(); ++k) eps[fixed[k]] = signs[k];
  auto cut = [&](const IntVector& row) {
    IntVector out;
    for (std::size_t i : kept) out.push_back(row[i]);
    return out;
  };
  MorphismData d{kept.size(), m.s, m.t, m.s_prime, {}, {}, m.xi};
  CubeRestriction out{fixed, signs, {}, {}};
  for (std::size_t j = 0; j < m.p(); ++j) {
    d.A.push_back(cut(m.A.row(j)));
    out.component_signs.push_back(sign_character(m.A.row(j), eps));
  }
  for (std::size_t k = 0; k < m.q(); ++k) {
    d.B.push_back(cut(m.B.row(k)));
    out.component_signs.push_back(sign_character(m.B.row(k), eps));
  }
  out.phi = validate(d);
  return out;
}

// Fix r-p divisor variables to +-1 in every way; keep the restrictions of full generic rank.
inline std::vector<CubeRestriction> cube_restrictions(const MonomialMorphism& m) {
  if (!m.dominant()) fail(ErrorCode::NotDominant, "cube_restrictions needs a dominant morphism");
  std::size_t f = m.r - m.p();
  if (f > 12) fail(ErrorCode::BadShape, "too many coordinates to fix");
  std::vector<CubeRestriction> out;
  std::vector<bool> pick(m.r, false);
  std::fill(pick.begin(), pick.begin() + f, true);
  do {
    std::vector<std::size_t> fixed, kept;
    for (std::size_t i = 0; i < m.r; ++i) (pick[i] ? fixed : kept).push_back(i);
    IntMatrix square(0, kept.size());
    for (std::size_t j = 0; j < m.p(); ++j) {
      IntVector row;
      for (std::size_t i : kept) row.push_back(m.A(j, i));
      square.append_row(row);
    }
    if (determinant(square) == 0) continue;
    for (unsigned long mask = 0; mask < (1ul << f); ++mask) {
      std::vector<int> signs(f, 1);
      for (std::size_t b = 0; b < f; ++b)
        if (mask >> b & 1) signs[b] = -1;
      out.push_back(restrict_to_signs(m, fixed, signs));
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

// var_i = sign_i * new^{E_i}
struct SignedMonomialMap {
  IntMatrix E;
  std::vector<int> sign;

  static SignedMonomialMap identity(std::size_t n) { return {IntMatrix::identity(n), std::vector<int>(n, 1)}; }
  friend bool operator==(const SignedMonomialMap&, const SignedMonomialMap&) = default;
};

inline SignedMonomialMap compose(const SignedMonomialMap& outer, const SignedMonomialMap& inner) {
  SignedMonomialMap out{outer.E * inner.E, outer.sign};
  for (std::size_t i = 0; i < outer.E.rows(); ++i)
    for (std::size_t k = 0; k < inner.E.rows(); ++k)
      if (inner.sign[k] < 0 && outer.E(i, k) % 2 != 0) out.sign[i] = -out.sign[i];
  return out;
}

inline RatVector apply_map(const SignedMonomialMap& f, const RatVector& point) {
  RatVector out;
  for (std::size_t i = 0; i < f.E.rows(); ++i) {
    Rational v(f.sign[i]);
    for (std::size_t k = 0; k < f.E.cols(); ++k) v *= pow(point[k], f.E(i, k).get_si());
    out.push_back(v);
  }
  return out;
}

enum class StepKind { SourceBlowup, SourcePower, TargetBlowup, TargetPower, TargetPermute };

inline std::string step_kind_name(StepKind k) {
  switch (k) {
    case StepKind::SourceBlowup: return "source-blowup";
    case StepKind::SourcePower: return "source-power";
    case StepKind::TargetBlowup: return "target-blowup";
    case StepKind::TargetPower: return "target-power";
    case StepKind::TargetPermute: return "target-permute";
  }
  return "?";
}

struct MonomialStep {
  StepKind kind;
  std::vector<std::size_t> center;  // blowups
  std::size_t chart = 0;
  std::vector<int> exponents;       // power substitutions
  std::vector<int> signs;
  std::vector<std::size_t> perm;    // x_j -> x_{perm[j]}
};

struct FactorDiagram {
  SignedMonomialMap sigma, tau;
  IntMatrix phi;  // exponents of the lifted morphism, identity when finished
  std::vector<MonomialStep> steps;
};

inline bool commutes(const IntMatrix& a, const FactorDiagram& d) {
  if (!(a * d.sigma.E == d.tau.E * d.phi)) return false;
  for (std::size_t j = 0; j < a.rows(); ++j)
    if (sign_character(a.row(j), d.sigma.sign) != d.tau.sign[j]) return false;
  return true;
}

namespace detail {

inline SignedMonomialMap blowup_map_of(std::size_t n, const std::vector<std::size_t>& center, std::size_t l) {
  SignedMonomialMap f = SignedMonomialMap::identity(n);
  for (std::size_t i : center)
    if (i != l) f.E(i, l) = 1;
  return f;
}

inline void source_step(FactorDiagram& d, const SignedMonomialMap& f, MonomialStep step) {
  d.sigma = compose(d.sigma, f);
  d.phi = d.phi * f.E;
  d.steps.push_back(std::move(step));
}

inline bool row_leq(const IntMatrix& a, std::size_t j, std::size_t k) {
  for (std::size_t i = 0; i < a.cols(); ++i)
    if (a(j, i) > a(k, i)) return false;
  return true;
}

// Blows up the source until the rows in rows are totally ordered by divisibility.
inline std::vector<FactorDiagram> order_rows(FactorDiagram d, const std::vector<std::size_t>& rows, std::size_t depth_cap) {
  std::size_t n = d.phi.cols();
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      std::size_t j = rows[a], k = rows[b];
      if (row_leq(d.phi, j, k) || row_leq(d.phi, k, j)) continue;
      PrincipalizationTree pt = principalize(
          minimalize(n, {exponent_of(d.phi.row(j), n), exponent_of(d.phi.row(k), n)}), depth_cap);
      std::vector<FactorDiagram> out;
      for (std::size_t leaf : pt.leaves()) {
        FactorDiagram e = d;
        std::vector<std::size_t> path;
        for (std::optional<std::size_t> id = leaf; pt.nodes[*id].parent; id = pt.nodes[*id].parent) path.push_back(*id);
        std::reverse(path.begin(), path.end());
        for (std::size_t id : path) {
          const auto& node = pt.nodes[id];
          source_step(e, blowup_map_of(n, node.center, node.chart),
                      {StepKind::SourceBlowup, node.center, node.chart, {}, {}, {}});
        }
        auto more = order_rows(e, rows, depth_cap);
        out.insert(out.end(), more.begin(), more.end());
      }
      return out;
    }
  return {d};
}

inline void target_blowup(FactorDiagram& d, const std::vector<std::size_t>& center, std::size_t l) {
  std::size_t p = d.phi.rows();
  d.tau = compose(d.tau, blowup_map_of(p, center, l));
  for (std::size_t j : center)
    if (j != l)
      for (std::size_t i = 0; i < d.phi.cols(); ++i) d.phi(j, i) -= d.phi(l, i);
  d.steps.push_back({StepKind::TargetBlowup, center, l, {}, {}, {}});
}

}  // namespace detail

// Chains of blowups and even power substitutions reducing a square exponent matrix to the identity.
inline std::vector<FactorDiagram> factorize_to_identity(const MonomialMorphism& m, std::size_t depth_cap = 64) {
  if (m.r != m.p()) fail(ErrorCode::NotSquare, "factorize_to_identity needs r = p");
  if (!m.dominant()) fail(ErrorCode::NotDominant, "factorize_to_identity needs a dominant morphism");
  if (m.q() != 0) fail(ErrorCode::BadShape, "factorize_to_identity handles morphisms without y components");
  std::size_t p = m.p();
  std::vector<FactorDiagram> work{{SignedMonomialMap::identity(p), SignedMonomialMap::identity(p), m.A, {}}};
  for (std::size_t c = 0; c < p; ++c) {
    std::vector<FactorDiagram> next;
    for (auto& d : work) {
      std::vector<std::size_t> I;
      for (std::size_t j = c; j < p; ++j)
        if (d.phi(j, c) != 0) I.push_back(j);
      ensure(!I.empty(), "factorization lost full rank");
      std::vector<FactorDiagram> powered;
      bool unit_column = std::all_of(I.begin(), I.end(), [&](std::size_t j) { return d.phi(j, c) == 1; });
      if (unit_column) {
        powered.push_back(d);
      } else {
        Integer q = 1;
        for (std::size_t j : I) q = lcm(q, d.phi(j, c));
        std::vector<int> k(p, 2);
        for (std::size_t i = c + 1; i < p; ++i) k[i] = int(2 * q.get_si());
        if (p > 20) fail(ErrorCode::BadShape, "too many sign charts");
        for (unsigned long mask = 0; mask < (1ul << p); ++mask) {
          FactorDiagram e = d;
          SignedMonomialMap f = SignedMonomialMap::identity(p);
          for (std::size_t i = 0; i < p; ++i) {
            f.E(i, i) = k[i];
            if (mask >> i & 1) f.sign[i] = -1;
          }
          IntMatrix before = e.phi;
          detail::source_step(e, f, {StepKind::SourcePower, {}, 0, k, f.sign, {}});
          SignedMonomialMap g = SignedMonomialMap::identity(p);
          std::vector<int> t(p, 2);
          for (std::size_t j = 0; j < p; ++j) {
            g.sign[j] = sign_character(before.row(j), f.sign);
            if (std::find(I.begin(), I.end(), j) != I.end()) t[j] = int(2 * before(j, c).get_si());
            g.E(j, j) = t[j];
            for (std::size_t i = 0; i < p; ++i) {
              ensure(e.phi(j, i) % t[j] == 0, "power substitution left a non-divisible exponent");
              e.phi(j, i) /= t[j];
            }
          }
          e.tau = compose(e.tau, g);
          e.steps.push_back({StepKind::TargetPower, {}, 0, t, g.sign, {}});
          powered.push_back(e);
        }
      }
      for (auto& e : powered)
        for (auto& o : detail::order_rows(e, I, depth_cap)) {
          std::size_t l = I[0];
          for (std::size_t j : I)
            if (detail::row_leq(o.phi, j, l) && !detail::row_leq(o.phi, l, j)) l = j;
          if (I.size() > 1) detail::target_blowup(o, I, l);
          if (l != c) {
            std::vector<std::size_t> perm(p);
            std::iota(perm.begin(), perm.end(), 0);
            std::swap(perm[c], perm[l]);
            SignedMonomialMap g = SignedMonomialMap::identity(p);
            for (std::size_t j = 0; j < p; ++j)
              for (std::size_t i = 0; i < p; ++i) g.E(j, i) = perm[j] == i ? 1 : 0;
            o.tau = compose(o.tau, g);
            o.phi.swap_rows(c, l);
            o.steps.push_back({StepKind::TargetPermute, {}, 0, {}, {}, perm});
          }
          next.push_back(std::move(o));
        }
    }
    work = std::move(next);
  }
  for (auto& d : work) {
    for (std::size_t c = p; c-- > 1;)
      for (std::size_t j = 0; j < c; ++j)
        while (d.phi(j, c) > 0) detail::target_blowup(d, {j, c}, c);
    ensure(d.phi == IntMatrix::identity(p), "factorization did not reach the identity");
    ensure(commutes(m.A, d), "factorization diagram does not commute");
  }
  return work;
}

}  // namespace monoforge

#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "monoforge/charts.hpp"
#include "monoforge/closure.hpp"
#include "monoforge/cyclo.hpp"
#include "monoforge/exactlin.hpp"
#include "monoforge/monideal.hpp"
#include "monoforge/monocore.hpp"

namespace monoforge {

// --- semigroup of regular Laurent monomials -------------------------------

struct SemigroupCertificate {
  IntVector gamma;
  std::vector<long> lambda;  // gamma = sum lambda_l * generators[l]
};

struct SemigroupGens {
  IntMatrix a;
  std::size_t search_bound = 0;  // candidates gamma with |gamma*a| <= search_bound
  std::vector<IntVector> generators;
  std::vector<SemigroupCertificate> certificates;
};

inline bool nonnegative(const IntVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Integer& x) { return sgn(x) >= 0; });
}

inline bool is_zero_vector(const IntVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Integer& x) { return sgn(x) == 0; });
}

inline IntVector positive_part(const IntVector& v) {
  IntVector out;
  for (const auto& x : v) out.push_back(sgn(x) > 0 ? x : Integer(0));
  return out;
}

inline IntVector negative_part(const IntVector& v) {
  IntVector out;
  for (const auto& x : v) out.push_back(sgn(x) < 0 ? Integer(-x) : Integer(0));
  return out;
}

inline std::optional<std::vector<long>> decompose(const IntMatrix& a, const std::vector<IntVector>& gens,
                                                  IntVector gamma) {
  std::vector<long> lambda(gens.size(), 0);
  while (!is_zero_vector(gamma)) {
    bool found = false;
    for (std::size_t l = 0; l < gens.size() && !found; ++l) {
      IntVector rest = gamma;
      for (std::size_t j = 0; j < rest.size(); ++j) rest[j] -= gens[l][j];
      if (nonnegative(vec_mat(rest, a))) {
        gamma = rest;
        ++lambda[l];
        found = true;
      }
    }
    if (!found) return std::nullopt;
  }
  return lambda;
}

inline SemigroupGens semigroup_generators(const IntMatrix& a, std::size_t search_bound = 8) {
  require_independent_rows(a, "semigroup_generators");
  std::size_t p = a.rows(), r = a.cols();
  auto rows = to_rational_rows(a);
  std::vector<std::pair<long, IntVector>> found;
  std::vector<int> w(r, 0);
  std::function<void(std::size_t, long)> walk = [&](std::size_t i, long left) {
    if (i == r) {
      long deg = static_cast<long>(search_bound) - left;
      if (deg == 0) return;
      RatVector target(w.begin(), w.end());
      auto g = solve_left(rows, target);
      if (!g) return;
      IntVector gamma;
      for (const auto& x : *g) {
        if (x.get_den() != 1) return;
        gamma.push_back(x.get_num());
      }
      found.emplace_back(deg, gamma);
      return;
    }
    for (long k = 0; k <= left; ++k) {
      w[i] = static_cast<int>(k);
      walk(i + 1, left - k);
    }
    w[i] = 0;
  };
  walk(0, static_cast<long>(search_bound));
  std::sort(found.begin(), found.end());
  SemigroupGens out{a, search_bound, {}, {}};
  for (const auto& [deg, gamma] : found)
    if (!decompose(a, out.generators, gamma)) out.generators.push_back(gamma);
  for (std::size_t j = 0; j < p; ++j) {
    IntVector e(p, 0);
    e[j] = 1;
    if (std::find(out.generators.begin(), out.generators.end(), e) == out.generators.end())
      out.generators.push_back(e);
  }
  for (const auto& [deg, gamma] : found) {
    auto lambda = decompose(a, out.generators, gamma);
    ensure(lambda.has_value(), "semigroup element without a decomposition");
    out.certificates.push_back({gamma, *lambda});
  }
  return out;
}

// --- joint source/target chart bookkeeping ---------------------------------

// One source chart together with the target chart it maps into.  Target
// coordinate k of the chart pulls back to u^rows[k] times a unit whose value
// at the origin is prod_m unit_values[m]^units(k, m).
struct JointLeaf {
  std::size_t node = 0;
  std::vector<Blowup> target_steps;
  IntMatrix map;    // original target coordinate j = prod_k chart coordinate k ^ map(j, k)
  IntMatrix local;  // the same since the last extension
  IntMatrix rows;
  IntMatrix units;
  RatVector unit_values;

  std::vector<std::size_t> divisor() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < rows.rows(); ++k)
      if (!is_zero_vector(rows.row(k))) out.push_back(k);
    return out;
  }
  Rational value(std::size_t k) const {
    if (!is_zero_vector(rows.row(k))) return Rational(0);
    Rational v(1);
    for (std::size_t m = 0; m < unit_values.size(); ++m) v *= pow(unit_values[m], units(k, m).get_si());
    return v;
  }
  DivisorProfile profile() const {
    IntMatrix d(0, rows.cols());
    for (std::size_t k : divisor()) d.append_row(rows.row(k));
    return {d.rows(), d.rows() ? rank(d) : 0};
  }
};

struct JointTree {
  ChartTree source;
  Ring target;
  std::vector<std::size_t> target_divisor;  // original target coordinates tracked as divisor components
  std::vector<JointLeaf> leaves;
};

// Seeds a leaf at a source chart from the pulled-back target components.
inline JointLeaf seed_leaf(const ChartNode& node, std::size_t id, const std::vector<Polynomial>& comps) {
  auto div = node.divisor();
  std::size_t n = comps.size();
  JointLeaf leaf;
  leaf.node = id;
  leaf.map = IntMatrix::identity(n);
  leaf.local = IntMatrix::identity(n);
  leaf.rows = IntMatrix(0, div.size());
  leaf.units = IntMatrix::identity(n);
  for (const auto& c : comps) {
    auto f = factor_monomial_unit(c, div);
    if (!f.unit_at_origin()) fail(ErrorCode::BadShape, "target component is not a monomial times a unit");
    IntVector row;
    for (std::size_t i : div) row.push_back(f.gamma[i]);
    leaf.rows.append_row(row);
    leaf.unit_values.push_back(f.unit.constant_term());
  }
  return leaf;
}

inline std::vector<Polynomial> divisor_components(const MonomialMorphism& phi) {
  auto comps = components(phi);
  comps.resize(phi.p() + phi.q());
  return comps;
}

inline JointTree joint_root(const MonomialMorphism& phi) {
  JointTree out;
  out.source = ChartTree(make_root(phi));
  Ring full = target_ring(phi);
  std::vector<Variable> vars;
  for (std::size_t j = 0; j < phi.p() + phi.q(); ++j) {
    vars.push_back(full.var(j));
    out.target_divisor.push_back(j);
  }
  out.target = Ring(vars);
  out.leaves.push_back(seed_leaf(out.source.nodes[0], 0, divisor_components(phi)));
  return out;
}

namespace detail {

inline void source_blowup_rows(JointLeaf& leaf, const std::vector<std::size_t>& center, std::size_t chart) {
  for (std::size_t k = 0; k < leaf.rows.rows(); ++k)
    for (std::size_t i : center)
      if (i != chart) leaf.rows(k, chart) += leaf.rows(k, i);
}

inline void target_blowup(JointLeaf& leaf, const std::vector<std::size_t>& center, std::size_t l) {
  for (std::size_t j : center) {
    if (j == l) continue;
    for (std::size_t i = 0; i < leaf.rows.cols(); ++i) leaf.rows(j, i) -= leaf.rows(l, i);
    for (std::size_t m = 0; m < leaf.units.cols(); ++m) leaf.units(j, m) -= leaf.units(l, m);
    for (std::size_t i = 0; i < leaf.map.rows(); ++i) leaf.map(i, l) += leaf.map(i, j);
    for (std::size_t i = 0; i < leaf.local.rows(); ++i) leaf.local(i, l) += leaf.local(i, j);
  }
  leaf.target_steps.push_back({center, l});
}

inline std::optional<std::size_t> minimal_row(const JointLeaf& leaf, const std::vector<std::size_t>& center) {
  for (std::size_t l : center) {
    bool ok = true;
    for (std::size_t j : center)
      for (std::size_t i = 0; i < leaf.rows.cols() && ok; ++i) ok = leaf.rows(l, i) <= leaf.rows(j, i);
    if (ok) return l;
  }
  return std::nullopt;
}

inline void lift(JointTree& tree, const PrincipalizationTree& pt, std::size_t tid, JointLeaf leaf,
                 std::vector<JointLeaf>& out, std::size_t depth_cap) {
  const auto& kids = pt.nodes[tid].children;
  if (kids.empty()) {
    out.push_back(std::move(leaf));
    return;
  }
  const auto& center = pt.nodes[kids[0]].center;
  auto pick = [&](JointLeaf lf) {
    auto l = minimal_row(lf, center);
    ensure(l.has_value(), "pulled-back target center is not principal");
    std::size_t pos = std::find(center.begin(), center.end(), *l) - center.begin();
    target_blowup(lf, center, *l);
    lift(tree, pt, kids[pos], std::move(lf), out, depth_cap);
  };
  std::vector<Exponent> gens;
  for (std::size_t j : center) gens.push_back(exponent_of(leaf.rows.row(j), leaf.rows.cols()));
  PrincipalizationTree sp = principalize(minimalize(leaf.rows.cols(), gens), depth_cap);
  std::vector<std::pair<std::size_t, JointLeaf>> state(sp.nodes.size());
  state[0] = {leaf.node, leaf};
  for (std::size_t id = 0; id < sp.nodes.size(); ++id) {
    const auto& skids = sp.nodes[id].children;
    auto [node, lf] = state[id];
    if (skids.empty()) {
      lf.node = node;
      pick(std::move(lf));
      continue;
    }
    const auto& sc = sp.nodes[skids[0]].center;
    auto div = tree.source.nodes[node].divisor();
    std::vector<std::size_t> ring_center;
    for (std::size_t i : sc) ring_center.push_back(div[i]);
    auto ids = tree.source.attach(node, blowup_charts(tree.source.nodes[node], ring_center));
    for (std::size_t k = 0; k < skids.size(); ++k) {
      JointLeaf child = lf;
      source_blowup_rows(child, sc, sp.nodes[skids[k]].chart);
      state[skids[k]] = {ids[k], child};
    }
  }
}

}  // namespace detail

// Principalizes a monomial ideal in the chart coordinates of a joint leaf and
// lifts each target blowup through combinatorial source blowups.
inline std::vector<std::size_t> extend_leaf(JointTree& tree, std::size_t leaf_index, const MonomialIdeal& ideal,
                                            std::size_t depth_cap = 64) {
  JointLeaf start = tree.leaves[leaf_index];
  if (ideal.r != start.rows.rows()) fail(ErrorCode::DimensionMismatch, "ideal lives on the wrong target chart");
  start.local = IntMatrix::identity(start.rows.rows());
  PrincipalizationTree pt = principalize(ideal, depth_cap);
  std::vector<JointLeaf> fresh;
  detail::lift(tree, pt, 0, std::move(start), fresh, depth_cap);
  std::vector<std::size_t> ids{leaf_index};
  tree.leaves[leaf_index] = fresh[0];
  for (std::size_t k = 1; k < fresh.size(); ++k) {
    ids.push_back(tree.leaves.size());
    tree.leaves.push_back(fresh[k]);
  }
  return ids;
}

// Ideal pulled back to the chart coordinates of a leaf, restricted to its divisor.
inline std::vector<IntVector> chart_exponents(const IntMatrix& map, const std::vector<IntVector>& gammas) {
  std::vector<IntVector> out;
  for (const auto& g : gammas) out.push_back(vec_mat(g, map));
  return out;
}

inline bool regular_on(const IntVector& e, const std::vector<std::size_t>& divisor) {
  return std::all_of(divisor.begin(), divisor.end(), [&](std::size_t k) { return sgn(e[k]) >= 0; });
}

// Pulls a polynomial on the original target ring (divisor coordinates first)
// back to a leaf's target chart, centred at the image point.
inline Polynomial target_pullback(const JointTree& tree, const JointLeaf& leaf, const Polynomial& h) {
  std::size_t nd = leaf.rows.rows(), n = h.nvars();
  std::vector<Polynomial> shifted;
  for (std::size_t k = 0; k < nd; ++k) shifted.push_back(Polynomial::variable(n, k) + Polynomial(n, leaf.value(k)));
  std::vector<Polynomial> images;
  for (std::size_t j = 0; j < n; ++j) {
    if (j >= nd) {
      images.push_back(Polynomial::variable(n, j));
      continue;
    }
    Polynomial img(n, Rational(1));
    for (std::size_t k = 0; k < nd; ++k) {
      long e = leaf.map(j, k).get_si();
      ensure(e >= 0, "combinatorial target chart with a negative exponent");
      if (e) img = img * shifted[k].pow(static_cast<unsigned>(e));
    }
    images.push_back(img);
  }
  (void)tree;
  return substitute<Rational>(h, images, n);
}

// --- relation trick --------------------------------------------------------

struct RelationTrickReport {
  JointTree tree;
  SemigroupGens semigroup;
  MonomialIdeal ideal;  // the product ideal in the target chart
  bool regular = true;  // every generator regular at every leaf
};

inline MonomialIdeal pair_product(std::size_t n, const std::vector<std::pair<IntVector, IntVector>>& pairs) {
  MonomialIdeal acc = minimalize(n, {Exponent(n, 0)});
  for (const auto& [a, b] : pairs) acc = product(acc, minimalize(n, {exponent_of(a, n), exponent_of(b, n)}));
  return acc;
}

inline std::vector<IntVector> embed(const std::vector<IntVector>& gammas, const std::vector<std::size_t>& where,
                                    std::size_t n) {
  std::vector<IntVector> out;
  for (const auto& g : gammas) {
    IntVector e(n, 0);
    for (std::size_t j = 0; j < g.size(); ++j) e[where[j]] = g[j];
    out.push_back(e);
  }
  return out;
}

// Makes every monomial of the semigroup regular, starting from a leaf with q = 0.
inline RelationTrickReport relation_trick_at(JointTree tree, std::size_t leaf_index, std::size_t search_bound = 8,
                                             std::size_t depth_cap = 64) {
  const JointLeaf& leaf = tree.leaves[leaf_index];
  auto div = leaf.divisor();
  std::size_t n = leaf.rows.rows();
  IntMatrix a(0, leaf.rows.cols());
  for (std::size_t k : div) a.append_row(leaf.rows.row(k));
  if (div.empty() || rank(a) != div.size())
    fail(ErrorCode::BadShape, "relation trick needs independent divisor exponents");
  RelationTrickReport out{std::move(tree), semigroup_generators(a, search_bound), {}, true};
  std::vector<std::pair<IntVector, IntVector>> pairs;
  std::vector<IntVector> negative;
  for (const auto& g : out.semigroup.generators)
    if (!nonnegative(g)) negative.push_back(g);
  for (const auto& g : embed(negative, div, n)) pairs.emplace_back(positive_part(g), negative_part(g));
  out.ideal = pair_product(n, pairs);
  auto ids = extend_leaf(out.tree, leaf_index, out.ideal, depth_cap);
  auto gens = embed(out.semigroup.generators, div, n);
  for (std::size_t id : ids) {
    const JointLeaf& lf = out.tree.leaves[id];
    for (const auto& e : chart_exponents(lf.local, gens)) out.regular = out.regular && regular_on(e, lf.divisor());
  }
  return out;
}

inline RelationTrickReport relation_trick(const MonomialMorphism& phi, std::size_t search_bound = 8,
                                          std::size_t depth_cap = 64) {
  if (!phi.dominant()) fail(ErrorCode::NotDominant, "relation trick needs a dominant morphism");
  JointTree tree = joint_root(phi);
  if (phi.q() > 0) {
    // Only the x coordinates enter the semigroup; the y rows are dependent.
    JointLeaf& root = tree.leaves[0];
    IntMatrix a(0, phi.r);
    for (std::size_t j = 0; j < phi.p(); ++j) a.append_row(root.rows.row(j));
    RelationTrickReport out{tree, semigroup_generators(a, search_bound), {}, true};
    std::size_t n = phi.p() + phi.q();
    std::vector<std::size_t> where(phi.p());
    std::iota(where.begin(), where.end(), 0);
    std::vector<std::pair<IntVector, IntVector>> pairs;
    for (const auto& g : embed(out.semigroup.generators, where, n))
      if (!nonnegative(g)) pairs.emplace_back(positive_part(g), negative_part(g));
    out.ideal = pair_product(n, pairs);
    auto ids = extend_leaf(out.tree, 0, out.ideal, depth_cap);
    auto gens = embed(out.semigroup.generators, where, n);
    for (std::size_t id : ids) {
      const JointLeaf& lf = out.tree.leaves[id];
      for (const auto& e : chart_exponents(lf.local, gens)) out.regular = out.regular && regular_on(e, lf.divisor());
    }
    return out;
  }
  return relation_trick_at(std::move(tree), 0, search_bound, depth_cap);
}

// --- translation trick -----------------------------------------------------

struct TranslationData {
  std::vector<Integer> d;
  std::vector<IntVector> gamma_plus, gamma_minus;
};

// Smallest d_k with y_k^{d_k} x^{gamma+} / x^{gamma-} a unit.
inline TranslationData translation_data(const MonomialMorphism& phi) {
  TranslationData out;
  for (std::size_t k = 0; k < phi.q(); ++k) {
    auto c = rational_dependence(phi.A, phi.B.row(k));
    ensure(c.has_value(), "y exponent independent of the x exponents");
    Integer d = lcm_of_denominators(*c);
    IntVector g;
    for (const auto& x : *c) {
      Rational v = -x * Rational(d);
      g.push_back(v.get_num());
    }
    out.d.push_back(d);
    out.gamma_plus.push_back(positive_part(g));
    out.gamma_minus.push_back(negative_part(g));
  }
  return out;
}

struct TranslationTrickReport {
  JointTree tree;
  TranslationData data;
  MonomialIdeal ideal;
};

inline TranslationTrickReport translation_trick(const MonomialMorphism& phi, std::size_t depth_cap = 64) {
  if (phi.q() == 0) fail(ErrorCode::NoDependentDivisors, "translation trick needs a dependent divisor component");
  TranslationTrickReport out{joint_root(phi), translation_data(phi), {}};
  std::size_t n = phi.p() + phi.q();
  std::vector<std::pair<IntVector, IntVector>> pairs;
  for (std::size_t k = 0; k < phi.q(); ++k) {
    IntVector a(n, 0), b(n, 0);
    for (std::size_t j = 0; j < phi.p(); ++j) {
      a[j] = out.data.gamma_plus[k][j];
      b[j] = out.data.gamma_minus[k][j];
    }
    a[phi.p() + k] = out.data.d[k];
    pairs.emplace_back(a, b);
  }
  out.ideal = pair_product(n, pairs);
  extend_leaf(out.tree, 0, out.ideal, depth_cap);
  for (const auto& lf : out.tree.leaves)
    ensure(lf.profile().e <= phi.p(), "translation trick left too many divisor components");
  return out;
}

// --- principal ideal trick -------------------------------------------------

struct PrincipalTrickReport {
  JointTree tree;
  std::vector<Polynomial> leaf_functions;  // h on each leaf's target chart
};

inline PrincipalTrickReport principal_ideal_trick(const MonomialMorphism& phi, const Polynomial& h,
                                                  std::size_t search_bound = 8, std::size_t depth_cap = 64) {
  if (!phi.dominant()) fail(ErrorCode::NotDominant, "principal ideal trick needs a dominant morphism");
  if (h.nvars() != phi.target_dim()) fail(ErrorCode::DimensionMismatch, "h must live on the target ring");
  Polynomial pulled = substitute(h, components(phi));
  std::vector<std::size_t> udiv(phi.r);
  std::iota(udiv.begin(), udiv.end(), 0);
  if (pulled.is_zero() || !factor_monomial_unit(pulled, udiv).unit_at_origin())
    fail(ErrorCode::PrenotMonomialTimesUnit, "h pulled back is not a monomial times a unit");
  PrincipalTrickReport out{joint_root(phi), {}};
  if (phi.q() > 0) out.tree = translation_trick(phi, depth_cap).tree;
  std::size_t count = out.tree.leaves.size();
  for (std::size_t k = 0; k < count; ++k) {
    // Leaves that lost every divisor component carry a unit h.
    if (out.tree.leaves[k].divisor().empty()) continue;
    auto rep = relation_trick_at(std::move(out.tree), k, search_bound, depth_cap);
    out.tree = std::move(rep.tree);
  }
  std::size_t nd = phi.p() + phi.q();
  for (const auto& lf : out.tree.leaves) {
    Polynomial hl = target_pullback(out.tree, lf, h);
    auto div = lf.divisor();
    ensure(div.size() <= nd, "leaf divisor out of range");
    ensure(!hl.is_zero() && factor_monomial_unit(hl, div).unit_at_origin(),
           "h is not a monomial times a unit on a leaf target chart");
    out.leaf_functions.push_back(hl);
  }
  return out;
}

// --- relations -------------------------------------------------------------

struct Relation {
  Polynomial r;       // on x1..xp, the remaining variables of h, then t
  Ring ring;
  std::size_t t_index = 0;
  bool extended = true;
  unsigned d = 1;
  std::size_t degree = 0;  // degree in t
};

// prod over all tuples of d-th roots of unity of (t - h(e^i1 y1, ..., e^ip yp, z)), with y_j^d = x_j.
inline Relation build_relation(const Polynomial& h, const Ring& ring, std::size_t p, unsigned d) {
  if (d == 0) fail(ErrorCode::InvalidInput, "root order must be positive");
  if (p > ring.size() || h.nvars() != ring.size()) fail(ErrorCode::DimensionMismatch, "radical variables out of range");
  std::size_t n = ring.size() + 1, t = ring.size();
  std::size_t tuples = 1;
  for (std::size_t j = 0; j < p; ++j) {
    tuples *= d;
    if (tuples > 4096) fail(ErrorCode::InvalidInput, "too many conjugates");
  }
  CycloPolynomial acc(n, CycloScalar(1));
  std::vector<unsigned> idx(p, 0);
  for (std::size_t count = 0; count < tuples; ++count) {
    CycloPolynomial factor = CycloPolynomial::variable(n, t);
    for (const auto& [e, c] : h.terms()) {
      long power = 0;
      for (std::size_t j = 0; j < p; ++j) power += static_cast<long>(idx[j]) * e[j];
      Exponent ee = e;
      ee.push_back(0);
      factor.add_term(ee, -(CycloScalar::root_power(d, power) * CycloScalar(c)));
    }
    acc = acc * factor;
    for (std::size_t j = 0; j < p; ++j) {
      if (++idx[j] < d) break;
      idx[j] = 0;
    }
  }
  Polynomial r(n);
  for (const auto& [e, c] : acc.terms()) {
    Exponent ee = e;
    for (std::size_t j = 0; j < p; ++j) {
      if (e[j] % static_cast<int>(d) != 0) fail(ErrorCode::CycloLeak, "radical exponent not divisible by d");
      ee[j] = e[j] / static_cast<int>(d);
    }
    r.add_term(ee, c.to_rational());
  }
  std::vector<Variable> vars;
  for (std::size_t j = 0; j < ring.size(); ++j) {
    Variable v = ring.var(j);
    if (j < p) v = {"x" + std::to_string(j + 1), VarClass::X};
    vars.push_back(v);
  }
  vars.push_back({"t", VarClass::Z});
  return {r, Ring(vars), t, true, d, static_cast<std::size_t>(r.degree_in(t))};
}

// R(phi, g) with the target coordinates replaced by the pulled-back components.
inline Polynomial evaluate_relation(const Polynomial& r, const std::vector<Polynomial>& comps, const Polynomial& g) {
  std::vector<Polynomial> images = comps;
  images.push_back(g);
  return substitute(r, images);
}

// --- extended to induced divisor -------------------------------------------

enum class LeafOutcome { Induced, RelationMonomial, Unresolved };

inline std::string outcome_name(LeafOutcome o) {
  switch (o) {
    case LeafOutcome::Induced: return "induced";
    case LeafOutcome::RelationMonomial: return "relation-monomial";
    case LeafOutcome::Unresolved: return "unresolved";
  }
  return "?";
}

struct ReducedLeaf {
  std::size_t leaf = 0;
  bool t_dependent = false;     // t exponents in the span of the x exponents
  bool unit_absorption = false; // the new t coordinate needs a genuine unit change
  bool relation_monomial = false;
  LeafOutcome outcome = LeafOutcome::Unresolved;
  Polynomial relation;          // R on the leaf target chart
};

struct ReductionReport {
  JointTree tree;
  std::size_t rho = 0;
  bool control_shape = false;  // R = sum x^e_i t^k_i * unit with increasing k_i
  MonomialIdeal ideal;         // toroidal hull of R in (x, t)
  std::vector<ReducedLeaf> leaves;
};

// R = sum_k a_k(x, z) t^k has the control shape when each nonzero a_k is either
// absorbed by an earlier kept term or a monomial times a unit.
inline bool has_control_shape(const Polynomial& r, std::size_t t, const std::vector<std::size_t>& xdiv) {
  std::vector<Exponent> kept;
  for (int k = 0; k <= r.degree_in(t); ++k) {
    Polynomial a(r.nvars());
    for (const auto& [e, c] : r.terms())
      if (e[t] == k) {
        Exponent ee = e;
        ee[t] = 0;
        a.add_term(ee, c);
      }
    if (a.is_zero()) continue;
    bool absorbed = false;
    for (const auto& m : kept) {
      bool all = true;
      for (const auto& [e, c] : a.terms())
        for (std::size_t i : xdiv) all = all && e[i] >= m[i];
      absorbed = absorbed || all;
    }
    if (absorbed) continue;
    auto f = factor_monomial_unit(a, xdiv);
    if (!f.unit_at_origin()) return false;
    kept.push_back(f.gamma);
  }
  return true;
}

inline ReductionReport reduce_extended_divisor(const MonomialMorphism& phi, const Polynomial& g, const Relation& rel,
                                               const ClosureConfig& cfg = {}, std::size_t depth_cap = 64) {
  if (phi.q() != 0) fail(ErrorCode::BadShape, "dependent divisor components must be translated away first");
  if (!phi.dominant()) fail(ErrorCode::NotDominant, "reduction needs a dominant morphism");
  if (!rel.extended) fail(ErrorCode::BadShape, "the relation must be taken with the extended divisor");
  std::size_t nt = phi.target_dim();
  if (rel.r.nvars() != nt + 1 || rel.t_index != nt) fail(ErrorCode::BadShape, "relation ring must be the target ring plus t");
  if (g.nvars() != phi.source_dim() || g.is_zero()) fail(ErrorCode::BadShape, "remainder must be a nonzero source function");
  if (sgn(g.constant_term()) != 0) fail(ErrorCode::BadShape, "remainder must vanish at the point");
  ReductionReport out;
  out.rho = relation_order(rel.r, rel.t_index, true, cfg);
  if (out.rho == 0) fail(ErrorCode::BadShape, "relation order is zero; the morphism is already monomial");
  if (!evaluate_relation(rel.r, components(phi), g).is_zero())
    fail(ErrorCode::BadShape, "R(phi, g) does not vanish");
  std::vector<std::size_t> xdiv(phi.p());
  std::iota(xdiv.begin(), xdiv.end(), 0);
  out.control_shape = has_control_shape(rel.r, rel.t_index, xdiv);
  std::vector<std::size_t> tdiv = xdiv;
  tdiv.push_back(rel.t_index);
  out.ideal = toroidal_hull({rel.r}, tdiv);

  // Source charts where g is a monomial times a unit.
  out.tree.source = ChartTree(make_root(phi));
  std::vector<Variable> vars;
  for (std::size_t j = 0; j < phi.p(); ++j) vars.push_back(target_ring(phi).var(j));
  vars.push_back({"t", VarClass::X});
  out.tree.target = Ring(vars);
  out.tree.target_divisor = tdiv;
  std::vector<std::size_t> udiv(phi.r);
  std::iota(udiv.begin(), udiv.end(), 0);
  PrincipalizationTree prep = principalize(toroidal_hull({g}, udiv), depth_cap);
  std::vector<std::size_t> chart_of(prep.nodes.size(), 0);
  for (std::size_t id = 0; id < prep.nodes.size(); ++id) {
    const auto& kids = prep.nodes[id].children;
    if (kids.empty()) continue;
    auto ids = out.tree.source.attach(chart_of[id], blowup_charts(out.tree.source.nodes[chart_of[id]],
                                                                  prep.nodes[kids[0]].center));
    for (std::size_t k = 0; k < kids.size(); ++k) chart_of[kids[k]] = ids[k];
  }
  for (std::size_t leaf : prep.leaves()) {
    std::size_t id = chart_of[leaf];
    const ChartNode& node = out.tree.source.nodes[id];
    std::vector<Polynomial> comps;
    for (std::size_t j = 0; j < phi.p(); ++j) comps.push_back(node.state.comps[j].poly);
    comps.push_back(substitute<Rational>(g, node.to_root, node.ring().size()));
    out.tree.leaves.push_back(seed_leaf(node, id, comps));
  }
  std::size_t seeds = out.tree.leaves.size();
  MonomialIdeal ideal = out.ideal;
  for (std::size_t k = 0; k < seeds; ++k) extend_leaf(out.tree, k, ideal, depth_cap);

  // Target ring of the leaf charts: x, z, t with the divisor coordinates first.
  std::size_t p = phi.p();
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < p; ++j) order.push_back(j);
  order.push_back(nt);
  for (std::size_t j = p; j < nt; ++j) order.push_back(j);
  std::vector<std::size_t> where(nt + 1);
  for (std::size_t k = 0; k < order.size(); ++k) where[order[k]] = k;
  Polynomial r_sorted = remap_variables(rel.r, where, nt + 1);
  for (std::size_t k = 0; k < out.tree.leaves.size(); ++k) {
    const JointLeaf& lf = out.tree.leaves[k];
    ReducedLeaf rl;
    rl.leaf = k;
    auto div = lf.divisor();
    IntMatrix lam(0, div.size());
    for (std::size_t j = 0; j < p; ++j) {
      IntVector row;
      for (std::size_t c : div) row.push_back(lf.map(j, c));
      lam.append_row(row);
    }
    IntVector lam0;
    for (std::size_t c : div) lam0.push_back(lf.map(p, c));
    auto coeffs = rational_dependence(lam, lam0);
    rl.t_dependent = coeffs.has_value();
    if (rl.t_dependent) {
      std::size_t unit_columns = 0;
      for (std::size_t c = 0; c <= p; ++c)
        if (std::find(div.begin(), div.end(), c) == div.end() && lf.map(p, c) != 0) ++unit_columns;
      rl.unit_absorption = lcm_of_denominators(*coeffs) != 1 || unit_columns > 1;
    }
    rl.relation = target_pullback(out.tree, lf, r_sorted);
    rl.relation_monomial = !rl.relation.is_zero() && factor_monomial_unit(rl.relation, div).unit_at_origin();
    rl.outcome = rl.t_dependent ? LeafOutcome::Induced
                 : rl.relation_monomial ? LeafOutcome::RelationMonomial : LeafOutcome::Unresolved;
    out.leaves.push_back(std::move(rl));
  }
  return out;
}

}  // namespace monoforge

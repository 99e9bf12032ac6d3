#include <gtest/gtest.h>

#include <random>

#include "monoforge/charts.hpp"
#include "monoforge/closure.hpp"
#include "monoforge/monideal.hpp"
#include "oracles.hpp"

using namespace monoforge;

namespace {

Ring R3 = Ring::source(3, 0, 0);

Polynomial P(const std::string& s, const Ring& r = R3) { return parse_polynomial(s, r); }

PolyIdeal ideal(const Ring& r, std::vector<std::string> gens) {
  std::vector<Polynomial> ps;
  for (const auto& g : gens) ps.push_back(parse_polynomial(g, r));
  return make_ideal(r.size(), ps);
}

const std::string kSectionF = "u1*u2 + u2*u3 + u2*u3^4 + u1*u2^6";

MonomialMorphism section_phi() { return validate(MorphismData{3, 0, 0, 0, {{1, 1, 0}, {0, 1, 1}}, {}, {}}); }
MonomialMorphism closure_phi() { return validate(MorphismData{3, 0, 0, 0, {{2, 1, 0}, {4, 1, 1}}, {}, {}}); }

const std::string kClosurePsi = "u1^4*u2*u3*((u2 - u3)^2 + (u2 + u3)^3)";

Polynomial random_poly(std::mt19937& rng, std::size_t n, int terms, int maxexp) {
  Polynomial p(n);
  for (int k = 0; k < terms; ++k) {
    Exponent e(n);
    for (auto& x : e) x = int(rng() % (maxexp + 1));
    p.add_term(e, Rational(int(rng() % 7) - 3));
  }
  return p;
}

// Membership in a monomial ideal: every term divisible by a generator.
bool monomial_member(const Polynomial& p, const std::vector<Exponent>& gens) {
  for (const auto& [e, c] : p.terms()) {
    bool ok = false;
    for (const auto& g : gens) {
      bool div = true;
      for (std::size_t i = 0; i < e.size(); ++i) div = div && g[i] <= e[i];
      ok = ok || div;
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

TEST(ApplyField, Examples) {
  auto x = LogVectorField::diagonal({1, -1, 1});
  EXPECT_EQ(apply_field(x, P(kSectionF)), P("3*u2*u3^4 - 5*u1*u2^6"));
  EXPECT_TRUE(apply_field(x, Polynomial(3, Rational(7))).is_zero());
  Ring T = Ring::from_names({"x1", "t"});
  auto tdt = LogVectorField::diagonal({0, 1});
  EXPECT_EQ(apply_field(tdt, P("t^2", T)), P("2*t^2", T));
}

TEST(Member, Examples) {
  EXPECT_TRUE(member(P("u1*u2"), ideal(R3, {"u1"})));
  EXPECT_FALSE(member(P("u1"), ideal(R3, {"u1*u2"})));
  ClosureConfig cfg;
  cfg.degree_bound = P(kSectionF).degree() + 2;
  EXPECT_TRUE(member(P(kSectionF), ideal(R3, {"u1*u2 + u2*u3", "u2*u3^4", "u1*u2^6"}), cfg));
  // Units are invertible locally but not in the polynomial ring.
  ClosureConfig poly;
  poly.mode = RingMode::Polynomial;
  EXPECT_TRUE(member(P("u2"), ideal(R3, {"u2 + u1*u2"})));
  EXPECT_FALSE(member(P("u2"), ideal(R3, {"u2 + u1*u2"}), poly));
  EXPECT_FALSE(member(P("u2"), ideal(R3, {"u2 + u1"})));
  EXPECT_TRUE(member(P("u1^5*u2"), ideal(R3, {"u2 + u1^6*u2"})));
  EXPECT_FALSE(member(P("u1^5*u2"), ideal(R3, {"u2 + u1^6*u2"}), poly));
  EXPECT_TRUE(member(P("0"), PolyIdeal{3, {}}));
  EXPECT_FALSE(member(P("u1"), PolyIdeal{3, {}}));
}

TEST(Member, MonomialIdealsMatchDivisibility) {
  std::mt19937 rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng() % 2;
    std::vector<Exponent> gens;
    std::vector<Polynomial> polys;
    for (int k = 0; k < 2; ++k) {
      Exponent e(n);
      for (auto& x : e) x = int(rng() % 3);
      gens.push_back(e);
      polys.push_back(make_monomial(n, e));
    }
    Polynomial p = random_poly(rng, n, 3, 3);
    if (p.is_zero()) continue;
    bool expect = monomial_member(p, gens);
    ClosureConfig poly;
    poly.mode = RingMode::Polynomial;
    EXPECT_EQ(member(p, make_ideal(n, polys)), expect);
    EXPECT_EQ(member(p, make_ideal(n, polys), poly), expect);
  }
}

TEST(Member, ExplicitCombinationsAreMembers) {
  std::mt19937 rng(52);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 2 + rng() % 2;
    std::vector<Polynomial> gens{random_poly(rng, n, 3, 2), random_poly(rng, n, 2, 2)};
    Polynomial p(n);
    for (const auto& g : gens) p += g * random_poly(rng, n, 2, 2);
    ClosureConfig poly;
    poly.mode = RingMode::Polynomial;
    EXPECT_TRUE(member(p, make_ideal(n, gens), poly));
    EXPECT_TRUE(member(p, make_ideal(n, gens)));
    // A unit multiple of a generator is a member only locally (when it is not a polynomial multiple).
    if (gens[0].is_zero() || sgn(gens[0].constant_term()) != 0) continue;
    Polynomial unit = Polynomial(n, Rational(1)) + Polynomial::variable(n, 0);
    EXPECT_TRUE(member(gens[0], make_ideal(n, {gens[0] * unit})));
  }
}

TEST(DeltaChain, SectionExample) {
  auto delta = tangent_basis(section_phi());
  auto rep = delta_chain(ideal(R3, {kSectionF}), delta);
  EXPECT_EQ(rep.mu, 2u);
  ASSERT_EQ(rep.chain.size(), 3u);
  EXPECT_TRUE(ideals_equal(rep.chain[1], ideal(R3, {kSectionF, "3*u2*u3^4 - 5*u1*u2^6"})));
  EXPECT_TRUE(ideals_equal(rep.chain[2], ideal(R3, {"u1*u2 + u2*u3", "u2*u3^4", "u1*u2^6"})));
  EXPECT_FALSE(ideals_equal(rep.chain[1], rep.chain[2]));
}

TEST(DeltaChain, SmallCases) {
  auto x = LogVectorField::diagonal({1, -1, 0});
  EXPECT_EQ(delta_chain(ideal(R3, {"u1^2*u3"}), {x}).mu, 0u);
  auto rep = delta_chain(ideal(R3, {"u1 + u2"}), {x});
  EXPECT_EQ(rep.mu, 1u);
  EXPECT_TRUE(ideals_equal(rep.chain[1], ideal(R3, {"u1", "u2"})));
  auto zero = delta_chain(PolyIdeal{3, {}}, {x});
  EXPECT_EQ(zero.mu, 0u);
  EXPECT_TRUE(zero.closure().is_zero());
}

TEST(DeltaChain, CutoffIsLoud) {
  Ring W = Ring::source(0, 0, 1);
  ClosureConfig cfg;
  cfg.chain_cap = 3;
  try {
    delta_chain(ideal(W, {"w1^6"}), {LogVectorField::plain(1, 0)}, cfg);
    ADD_FAILURE() << "expected a cutoff";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CutoffReached);
  }
}

TEST(EigenGenerators, Examples) {
  auto delta = tangent_basis(section_phi());
  EXPECT_EQ(eigen_generators(ideal(R3, {kSectionF}), delta), ideal(R3, {"u1*u2 + u2*u3", "u2*u3^4", "u1*u2^6"}));
  EXPECT_EQ(eigen_generators(ideal(R3, {"u2*u3^4"}), delta), ideal(R3, {"u2*u3^4"}));
  Ring S = Ring::source(1, 1, 1);
  EXPECT_EQ(eigen_generators(ideal(S, {"v1*w1 + u1"}), {LogVectorField::plain(3, 2)}), ideal(S, {"v1", "u1"}));
}

TEST(NuIdeal, Examples) {
  auto rep = nu_ideal(ideal(R3, {kSectionF}), section_phi());
  EXPECT_EQ(rep.mu, 2u);
  EXPECT_EQ(nu_ideal(ideal(R3, {"u1^3*u2"}), section_phi()).mu, 0u);
  auto free = validate(MorphismData{1, 0, 1, 0, {{1}}, {}, {}});
  Ring S = source_ring(free);
  auto w = nu_ideal(ideal(S, {"w1"}), free);
  EXPECT_EQ(w.mu, 1u);
  EXPECT_TRUE(member(Polynomial(2, Rational(1)), w.closure()));
}

TEST(NuPartial, ClosureExample) {
  auto phi = closure_phi();
  auto rep = nu_partial(phi, P(kClosurePsi));
  ASSERT_EQ(rep.j1.gens.size(), 1u);
  Polynomial f0 = P("u1^4*u2*u3*(2*(u2 - u3)^2 + 3*(u2 + u3)^3)");
  EXPECT_EQ(rep.j1.gens[0], monic(f0));
  EXPECT_EQ(rep.nu, 2u);
  EXPECT_TRUE(ideals_equal(rep.closure(), ideal(R3, {"u1^4*u2*u3*(u2 - u3)^2", "u1^4*u2*u3*(u2 + u3)^3"})));
  EXPECT_FALSE(principal_monomial(rep.closure(), {0, 1, 2}, rep.chain.degree_bound).has_value());
}

TEST(NuPartial, SmallCases) {
  auto phi = validate(MorphismData{2, 0, 1, 0, {{1, 1}}, {}, {}});
  Ring S = source_ring(phi);
  auto dep = nu_partial(phi, P("u1*u2 + u1^2*u2^2", S));
  EXPECT_TRUE(dep.j1.is_zero());
  EXPECT_EQ(dep.nu, 1u);
  EXPECT_EQ(nu_partial(phi, P("w1^2", S)).nu, 2u);
  EXPECT_EQ(nu_partial(phi, P("w1", S)).nu, 1u);
}

TEST(IsPremonomial, ClosureChart) {
  // After blowing up (u2,u3) and recentring u3 = 1 + v in the u2 chart.
  Ring S({{"u1", VarClass::U}, {"u2", VarClass::U}, {"v", VarClass::V}});
  std::vector<Polynomial> images{P("u1", S), P("u2", S), P("u2*(v + 1)", S)};
  Polynomial psi1 = substitute(P(kClosurePsi), images);
  std::vector<LogVectorField> delta{LogVectorField::diagonal({-1, 2, 0})};
  EXPECT_TRUE(apply_field(delta[0], P("u1^2*u2", S)).is_zero());
  auto res = is_premonomial(delta, {0, 1}, psi1);
  EXPECT_FALSE(res.premonomial);
  EXPECT_TRUE(ideals_equal(res.report.closure(), ideal(S, {"u1^4*u2^4*v^2", "u1^4*u2^5"})));
  EXPECT_FALSE(ideals_equal(res.report.closure(), ideal(S, {"u1^4*u2^4"})));
}

TEST(IsPremonomial, NormalForms) {
  auto phi = validate(MorphismData{2, 0, 1, 0, {{1, 1}}, {}, {}});
  Ring S = source_ring(phi);
  auto delta = tangent_basis(phi);
  std::vector<std::size_t> div{0, 1};
  auto indep = is_premonomial(delta, div, P("u1", S));
  EXPECT_TRUE(indep.premonomial);
  EXPECT_EQ(indep.form, NormalForm::IndependentMonomial);
  EXPECT_TRUE(indep.g.is_zero());
  EXPECT_EQ(indep.gamma, (Exponent{1, 0, 0}));

  auto zero = is_premonomial(delta, div, P("u1*u2 + 3*u1^2*u2^2", S));
  EXPECT_TRUE(zero.premonomial);
  EXPECT_EQ(zero.form, NormalForm::Zero);
  EXPECT_EQ(zero.g, P("u1*u2 + 3*u1^2*u2^2", S));

  auto free = is_premonomial(delta, div, P("w1 + u1*u2 + u1*w1", S));
  EXPECT_TRUE(free.premonomial);
  EXPECT_EQ(free.form, NormalForm::FreeCoordinate);
  EXPECT_EQ(free.g, P("u1*u2", S));
  EXPECT_EQ(*free.coordinate, 2u);

  auto dmu = is_premonomial(delta, div, P("u1*u2*w1 + u1^2*u2^2", S));
  EXPECT_TRUE(dmu.premonomial);
  EXPECT_EQ(dmu.form, NormalForm::DependentMonomialUnit);
  EXPECT_EQ(dmu.gamma, (Exponent{1, 1, 0}));

  auto sq = is_premonomial(delta, div, P("w1^2", S));
  EXPECT_FALSE(sq.premonomial);
  EXPECT_EQ(sq.report.nu, 2u);
}

TEST(IsPremonomial, DecompositionProperties) {
  std::mt19937 rng(53);
  auto phi = validate(MorphismData{3, 0, 1, 0, {{1, 1, 0}, {0, 1, 2}}, {}, {}});
  auto delta = tangent_basis(phi);
  int pre = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Polynomial psi = random_poly(rng, 4, 2, 2);
    if (psi.is_zero() || sgn(psi.constant_term()) != 0) continue;
    auto res = is_premonomial(delta, {0, 1, 2}, psi);
    if (!res.premonomial) continue;
    ++pre;
    EXPECT_EQ(res.g + res.phi, psi);
    EXPECT_TRUE(algebraic_dependence_check(res.g, phi).dependent);
    if (res.form != NormalForm::Zero) EXPECT_EQ(res.cofactor.shifted(res.gamma), res.phi);
  }
  EXPECT_GT(pre, 5);
}

TEST(RelationOrder, Examples) {
  Ring T = Ring::from_names({"x1", "x2", "t"});
  EXPECT_EQ(relation_order(P("t^4 - 2*x1*(x1^2 + x2)*t^2 + x1^2*(x1^2 - x2)^2", T), 2, true), 2u);
  EXPECT_EQ(relation_order(P("t^4 - x1*(x1^2 + x2)*t^2 + x1^2*(x1^2 - x2)^2", T), 2, true), 2u);
  EXPECT_EQ(relation_order(P("t - x1*x2 - x2^2", T), 2, false), 1u);
  EXPECT_EQ(relation_order(P("t^2", T), 2, true), 0u);
}

// A prepared relation with d+1 distinct t-powers times units has order at most d.
TEST(RelationOrder, PreparedRelationsAreBounded) {
  std::mt19937 rng(54);
  Ring T = Ring::from_names({"x1", "x2", "t"});
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t d = 1 + rng() % 2;
    std::vector<int> ks;
    while (ks.size() < d + 1) {
      int k = int(rng() % 4);
      if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
    }
    Polynomial r(3);
    for (int k : ks) {
      Exponent e{int(rng() % 2), int(rng() % 2), k};
      if (e == Exponent{0, 0, 0}) e[0] = 1;
      Polynomial unit = Polynomial(3, Rational(1 + int(rng() % 3))) + random_poly(rng, 3, 1, 1);
      unit -= Polynomial(3, unit.constant_term() - Rational(1 + int(rng() % 3)));
      r += unit.shifted(e);
    }
    if (r.is_zero() || sgn(r.constant_term()) != 0) continue;
    EXPECT_LE(relation_order(r, 2, true), d) << to_string(r, T);
  }
}

// Closures are monotone in the ideal and in the set of fields.
TEST(Closure, Monotone) {
  std::mt19937 rng(55);
  auto x1 = LogVectorField::diagonal({1, -1, 0});
  auto x2 = LogVectorField::diagonal({0, 1, -1});
  for (int trial = 0; trial < 20; ++trial) {
    PolyIdeal small = make_ideal(3, {random_poly(rng, 3, 3, 2)});
    if (small.is_zero()) continue;
    PolyIdeal big = make_ideal(3, {small.gens[0], random_poly(rng, 3, 2, 2)});
    auto cs = delta_chain(small, {x1}).closure();
    auto cb = delta_chain(big, {x1}).closure();
    IdealOracle ob(cb, 8, RingMode::Local);
    EXPECT_TRUE(ob.contains(cs));
    auto c12 = delta_chain(small, {x1, x2}).closure();
    IdealOracle o12(c12, 8, RingMode::Local);
    EXPECT_TRUE(o12.contains(cs));
  }
}

// Distinct eigenvalues: each eigencomponent is recovered from F, X F, ..., X^d F.
TEST(Closure, VandermondeSplit) {
  std::mt19937 rng(56);
  auto x = LogVectorField::diagonal({1, -1, 2});
  for (int trial = 0; trial < 30; ++trial) {
    Polynomial f = random_poly(rng, 3, 4, 3);
    auto parts = eigen_decompose(f, {x});
    std::vector<Rational> lambdas;
    std::vector<Polynomial> comps;
    for (const auto& [key, comp] : parts) {
      lambdas.push_back(key[0]);
      comps.push_back(comp);
    }
    std::size_t d = comps.size();
    if (d == 0) continue;
    std::vector<Polynomial> iter{f};
    for (std::size_t k = 1; k < d; ++k) iter.push_back(apply_field(x, iter.back()));
    // X^k F = sum_i lambda_i^k f_i: invert the Vandermonde matrix column by column.
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<RatVector> rows;
      for (std::size_t k = 0; k < d; ++k) {
        RatVector row;
        for (std::size_t j = 0; j < d; ++j) row.push_back(pow(lambdas[j], long(k)));
        rows.push_back(row);
      }
      RatVector target(d, Rational(0));
      target[i] = 1;
      auto coeffs = oracle::combination(rows, target);
      ASSERT_TRUE(coeffs.has_value());
      Polynomial rebuilt(3);
      for (std::size_t k = 0; k < d; ++k) rebuilt += iter[k].scaled((*coeffs)[k]);
      EXPECT_EQ(rebuilt, comps[i]);
    }
    auto chain = delta_chain(make_ideal(3, {f}), {x});
    EXPECT_LE(chain.mu, d > 0 ? d - 1 : 0);
    for (const auto& c : comps) EXPECT_TRUE(member(c, chain.closure()));
  }
}

// The support projection equals the closure under all log derivations.
TEST(Closure, ToroidalHullIsDerivationClosure) {
  std::mt19937 rng(57);
  Ring S = Ring::source(2, 1, 0);
  std::vector<LogVectorField> all{LogVectorField::diagonal({1, 0, 0}), LogVectorField::diagonal({0, 1, 0}),
                                  LogVectorField::plain(3, 2)};
  for (int trial = 0; trial < 25; ++trial) {
    PolyIdeal i = make_ideal(3, {random_poly(rng, 3, 3, 2)});
    if (i.is_zero()) continue;
    auto hull = toroidal_hull(i.gens, {0, 1});
    PolyIdeal h = make_ideal(3, ideal_polynomials(hull, {0, 1}, 3));
    auto closure = delta_chain(i, all).closure();
    EXPECT_TRUE(ideals_equal(h, closure)) << to_string(i.gens[0], S);
  }
}

// After principalizing the toroidal hull, the pulled-back ideal is principal monomial
// at every chart origin, where all the divisor components meet.
TEST(Closure, HullPrincipalizationPrincipalizesTheIdeal) {
  std::mt19937 rng(58);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Polynomial> gens{random_poly(rng, 2, 3, 3)};
    if (gens[0].is_zero()) continue;
    auto hull = toroidal_hull(gens, {0, 1});
    auto tree = principalize(hull);
    for (auto leaf : tree.leaves()) {
      std::vector<Polynomial> images;
      for (std::size_t i = 0; i < 2; ++i) {
        Exponent e{int(tree.nodes[leaf].map(i, 0).get_si()), int(tree.nodes[leaf].map(i, 1).get_si())};
        images.push_back(make_monomial(2, e));
      }
      PolyIdeal pulled = make_ideal(2, {substitute(gens[0], images)});
      auto gamma = principal_monomial(pulled, {0, 1}, pulled.degree() + 4);
      ASSERT_TRUE(gamma.has_value());
      EXPECT_EQ(make_monomial(2, *gamma), make_monomial(2, *is_principal(tree.nodes[leaf].ideal)));
    }
  }
}

// Chains commute with pullback by blowups and power substitutions, and mu cannot grow.
TEST(DeltaChain, PullbackByCharts) {
  std::mt19937 rng(58);
  ClosureConfig cfg;
  cfg.degree_slack = 8;
  int done = 0;
  for (int trial = 0; trial < 200 && done < 50; ++trial) {
    std::size_t p = 1 + rng() % 2, t = rng() % 2;
    IntMatrix a = oracle::random_matrix(rng, p, 3 - t, 0, 2);
    if (oracle::rank_by_rationals(a) != p) continue;
    auto phi = validate(MorphismData{3 - t, 0, t, 0, a.row_list(), {}, {}});
    std::size_t n = phi.source_dim();
    std::vector<Polynomial> gens;
    for (int k = 0; k < 1 + int(rng() % 2); ++k) {
      Polynomial g = random_poly(rng, n, 2, 2);
      g -= Polynomial(n, g.constant_term());
      gens.push_back(g);
    }
    PolyIdeal I = make_ideal(n, gens);
    if (I.is_zero()) continue;
    ChartNode root = make_root(phi);
    std::vector<ChartNode> kids;
    if (rng() % 2) {
      kids = blowup_charts(root, {0, 1});
    } else {
      std::vector<int> k(phi.r);
      for (auto& x : k) x = 1 + int(rng() % 2);
      kids = power_subst_charts(root, k);
    }
    const ChartNode& node = kids[rng() % kids.size()];
    std::vector<LogVectorField> delta;
    try {
      delta = pullback_derivations(node, tangent_basis(phi));
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::PoleDetected);
      continue;
    }
    auto pull = [&](const PolyIdeal& J) {
      std::vector<Polynomial> out;
      for (const auto& g : J.gens) out.push_back(substitute<Rational>(g, node.edge, n));
      return make_ideal(n, out);
    };
    auto chain = delta_chain(I, tangent_basis(phi), cfg);
    auto pulled_chain = delta_chain(pull(I), delta, cfg);
    EXPECT_LE(pulled_chain.mu, chain.mu) << trial;
    std::size_t top = std::max(chain.mu, pulled_chain.mu);
    for (std::size_t k = 0; k <= top; ++k) {
      const auto& lhs = chain.chain[std::min(k, chain.mu)];
      const auto& rhs = pulled_chain.chain[std::min(k, pulled_chain.mu)];
      EXPECT_TRUE(ideals_equal(pull(lhs), rhs, cfg)) << trial << " k=" << k;
    }
    ++done;
  }
  EXPECT_GE(done, 50);
}

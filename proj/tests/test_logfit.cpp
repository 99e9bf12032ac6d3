#include <gtest/gtest.h>

#include <random>

#include "monoforge/logfit.hpp"
#include "oracles.hpp"

using namespace monoforge;

namespace {

SymbolicMorphism closure_psi() {
  auto phi = validate(MorphismData{3, 0, 0, 0, {{2, 1, 0}, {4, 1, 1}}, {}, {}});
  Ring R = source_ring(phi);
  Polynomial z = parse_polynomial("u1^4*u2*u3*((u2 - u3)^2 + (u2 + u3)^3)", R);
  return with_component(symbolic(phi), "z", ComponentKind::Plain, z);
}

template <class F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << error_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Jacobian of D_i(component_j) evaluated at a point, computed from scratch.
std::size_t rank_at(const SymbolicMorphism& m, const RatVector& point) {
  std::vector<RatVector> rows;
  for (std::size_t i = 0; i < m.source_dim(); ++i) {
    RatVector row;
    for (const auto& c : m.comps) {
      Polynomial d = c.poly.derivative(i);
      Rational v = evaluate(d, point);
      if (m.source.cls(i) == VarClass::U) v *= point[i];
      row.push_back(v);
    }
    rows.push_back(row);
  }
  return oracle::rank_of_rows(rows);
}

Polynomial random_unit(std::mt19937& rng, std::size_t n) {
  Polynomial u(n, Rational(1));
  for (int k = 0; k < 2; ++k) {
    Exponent e(n, 0);
    e[rng() % n] = 1 + int(rng() % 2);
    u.add_term(e, oracle::frac(int(rng() % 3) - 1, 2));
  }
  return u;
}

MonomialMorphism random_morphism(std::mt19937& rng) {
  while (true) {
    std::size_t r = 1 + rng() % 3, p = 1 + rng() % r, s = rng() % 2, t = rng() % 2;
    IntMatrix a = oracle::random_matrix(rng, p, r, 0, 3);
    if (oracle::rank_by_rationals(a) != p) continue;
    std::vector<IntVector> B;
    RatVector xi;
    if (s == 1 && rng() % 2) {
      IntVector beta(r);
      for (std::size_t i = 0; i < r; ++i) beta[i] = 2 * a(0, i);
      B.push_back(beta);
      xi.push_back(Rational(1 + int(rng() % 3)));
    }
    return validate(MorphismData{r, s, t, s, a.row_list(), B, xi});
  }
}

}  // namespace

TEST(LogJacobian, MonomialMorphismMatrix) {
  // x1 = u1 u2, y1 = u1^2 u2^2 (3 + v1), z2 = v2
  auto m = validate(MorphismData{2, 2, 0, 2, {{1, 1}}, {{2, 2}}, {3}});
  auto jac = log_jacobian_at_origin(symbolic(m));
  std::vector<RatVector> expect{{1, 2, 0}, {1, 2, 0}, {0, Rational(1, 3), 0}, {0, 0, 1}};
  EXPECT_EQ(jac.entries, expect);
  EXPECT_EQ(jac.rank(), 3u);
  EXPECT_TRUE(is_monomial_at(symbolic(m)));
}

TEST(LogJacobian, IdentityWithoutDivisor) {
  Ring R = Ring::from_names({"v1", "v2"});
  SymbolicMorphism m{R, {}};
  m = with_component(m, "z1", ComponentKind::Plain, make_var(R, "v1"));
  m = with_component(m, "z2", ComponentKind::Plain, make_var(R, "v2"));
  auto jac = log_jacobian_at_origin(m);
  EXPECT_EQ(jac.entries, (std::vector<RatVector>{{1, 0}, {0, 1}}));
}

TEST(LogJacobian, NotAMorphism) {
  Ring R = Ring::from_names({"u1", "u2"});
  SymbolicMorphism m{R, {}};
  m = with_component(m, "x1", ComponentKind::Divisor, parse_polynomial("u1 + u2", R));
  expect_error(ErrorCode::NotAMorphism, [&] { log_jacobian_at_origin(m); });
}

TEST(Fitting, ClosureExample) {
  auto psi = closure_psi();
  auto jac = log_jacobian_at_origin(psi);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(jac.entries[i][2], 0);
  EXPECT_EQ(jac.rank(), 2u);
  EXPECT_EQ(generic_rank(psi), 3u);
  EXPECT_FALSE(is_monomial_at(psi));
  EXPECT_EQ(fitting_unit_order(psi), 1u);
  EXPECT_TRUE(fitting_ideal_is_unit(psi, 2));
  EXPECT_TRUE(fitting_ideal_is_unit(psi, 1));
  EXPECT_FALSE(fitting_ideal_is_unit(psi, 0));
  // The single maximal minor is -2 F_0 with F_0 = u1^4 u2 u3 (2(u2-u3)^2 + 3(u2+u3)^3).
  auto minors = log_minors(psi);
  ASSERT_EQ(minors.size(), 1u);
  Polynomial f0 = parse_polynomial("u1^4*u2*u3*(2*(u2 - u3)^2 + 3*(u2 + u3)^3)", psi.source);
  EXPECT_EQ(minors[0], f0.scaled(Rational(-2)));
  EXPECT_EQ(minors[0].constant_term(), 0);
}

TEST(Fitting, MonomialTimesUnit) {
  Ring R({{"u1", VarClass::U}, {"u2", VarClass::V}});
  SymbolicMorphism m{R, {}};
  m = with_component(m, "x", ComponentKind::Divisor, parse_polynomial("u1*u2 + u1", R));
  EXPECT_TRUE(is_monomial_at(m));
  EXPECT_EQ(fitting_unit_order(m), 0u);
}

TEST(Fitting, NotDominant) {
  auto m = validate(MorphismData{2, 0, 0, 0, {{1, 1}}, {}, {}});
  auto s = with_component(symbolic(m), "z", ComponentKind::Plain, Polynomial(2, Rational(3)));
  expect_error(ErrorCode::NotDominant, [&] { is_monomial_at(s); });
  expect_error(ErrorCode::NotDominant, [&] { fitting_unit_order(s); });
}

TEST(GenericRank, Examples) {
  auto closure = closure_psi();
  EXPECT_EQ(generic_rank(closure), 3u);
  auto constant = validate(MorphismData{2, 0, 0, 0, {}, {}, {}});
  EXPECT_EQ(generic_rank(symbolic(constant)), 0u);
  auto xz = validate(MorphismData{2, 1, 0, 1, {{1, 1}}, {}, {}});
  EXPECT_EQ(generic_rank(symbolic(xz)), 2u);
}

TEST(Fitting, ValidatedMorphismsAreMonomial) {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_morphism(rng);
    auto s = symbolic(m);
    EXPECT_TRUE(is_monomial_at(s));
    EXPECT_EQ(fitting_unit_order(s), 0u);
  }
}

TEST(Fitting, RankBoundedByGenericRank) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    auto m = random_morphism(rng);
    auto s = symbolic(m);
    std::size_t n = s.source_dim();
    Polynomial extra(n);
    for (int k = 0; k < 3; ++k) {
      Exponent e(n, 0);
      for (auto& x : e) x = int(rng() % 3);
      extra.add_term(e, Rational(int(rng() % 5) - 2));
    }
    s = with_component(s, "z", ComponentKind::Plain, extra);
    std::size_t g = generic_rank(s);
    EXPECT_LE(log_jacobian_at_origin(s).rank(), g);
    // Generic rank from evaluations at a few random points.
    std::size_t best = 0;
    for (int k = 0; k < 4; ++k) {
      RatVector pt;
      for (std::size_t i = 0; i < n; ++i) pt.push_back(oracle::frac(int(rng() % 17) + 2, int(rng() % 5) + 1));
      best = std::max(best, rank_at(s, pt));
    }
    EXPECT_EQ(g, best);
  }
}

// Monomiality at the origin persists at nearby points where the units stay nonzero.
TEST(Fitting, OpenInTheSource) {
  std::mt19937 rng(43);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto m = random_morphism(rng);
    auto s = symbolic(m);
    std::size_t n = s.source_dim();
    std::vector<Polynomial> units;
    for (auto& c : s.comps) {
      units.push_back(random_unit(rng, n));
      if (c.kind == ComponentKind::Divisor) c.poly = c.poly * units.back();
    }
    // Unit factors can break monomiality at the origin; those inputs say nothing here.
    if (!is_monomial_at(s)) continue;
    for (int k = 0; k < 5; ++k) {
      RatVector pt;
      for (std::size_t i = 0; i < n; ++i) pt.push_back(oracle::frac(int(rng() % 5) - 2, 8));
      bool units_ok = true;
      for (const auto& u : units) units_ok = units_ok && evaluate(u, pt) != 0;
      if (!units_ok) continue;
      SymbolicMorphism moved{s.source, {}};
      std::vector<Polynomial> images;
      for (std::size_t i = 0; i < n; ++i) {
        images.push_back(Polynomial::variable(n, i) + Polynomial(n, pt[i]));
        if (s.source.cls(i) == VarClass::U && pt[i] != 0) moved.source.set_class(i, VarClass::V);
      }
      for (const auto& c : s.comps) {
        Polynomial p = substitute(c.poly, images);
        // Plain components are centred at their value at the point.
        if (c.kind == ComponentKind::Plain) p -= Polynomial(n, p.constant_term());
        moved.comps.push_back({c.name, c.kind, p});
      }
      EXPECT_TRUE(is_monomial_at(moved)) << trial;
      ++checked;
    }
  }
  EXPECT_GE(checked, 60);
}

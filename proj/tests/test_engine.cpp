#include <gtest/gtest.h>

#include <random>

#include "monoforge/engine.hpp"
#include "oracles.hpp"

using namespace monoforge;

namespace {

template <class F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << error_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

const char* kClosurePsi = "u1^4*u2*u3*((u2 - u3)^2 + (u2 + u3)^3)";

MonomialMorphism closure_phi() { return validate(MorphismData{3, 0, 0, 0, {{2, 1, 0}, {4, 1, 1}}, {}, {}}); }

Polynomial closure_psi() { return parse_polynomial(kClosurePsi, source_ring(closure_phi())); }

Json closure_create() {
  return Json{{"op", "create"}, {"morphism", morphism_to_json(closure_phi())}, {"psi", kClosurePsi}};
}

Move origin() { return Move{}; }

Move point(std::vector<std::pair<std::string, std::string>> p) {
  Move m;
  m.point = std::move(p);
  return m;
}

EngineRun run_of(std::size_t r, std::size_t t, std::vector<IntVector> a, const std::string& psi) {
  auto phi = validate(MorphismData{r, 0, t, 0, std::move(a), {}, {}});
  return monomialize_partial(phi, parse_polynomial(psi, source_ring(phi)));
}

PolyIdeal ideal_in(const ChartNode& node, std::vector<std::string> gens) {
  std::vector<Polynomial> ps;
  for (const auto& g : gens) ps.push_back(parse_polynomial(g, node.ring()));
  return make_ideal(node.ring().size(), ps);
}

}  // namespace

TEST(Engine, ClosureExampleRun) {
  auto run = monomialize_partial(closure_phi(), closure_psi());
  ASSERT_EQ(run.tree.nodes.size(), 3u);
  const auto& root = *run.outcomes[0].trail;
  EXPECT_EQ(run.outcomes[0].label, LeafLabel::Expanded);
  EXPECT_EQ(root.k, 1u);
  EXPECT_EQ(root.nu, 2u);
  EXPECT_EQ(root.action, "principalize toroidal hull: blowup (u2,u3)");
  for (std::size_t id : {1, 2}) {
    EXPECT_EQ(run.outcomes[id].label, LeafLabel::Monomial) << id;
    EXPECT_EQ(run.outcomes[id].trail->nu, 1u) << id;
    EXPECT_TRUE(is_monomial_at(run.tree.nodes[id].state)) << id;
  }
  EXPECT_TRUE(labels_sound(run));
  EXPECT_TRUE(trail_monotone(run));
}

TEST(Engine, RootHullIsTheExpectedMonomialIdeal) {
  auto run = monomialize_partial(closure_phi(), closure_psi());
  const auto& hull = run.outcomes[0].trail->detail.at("hull");
  EXPECT_EQ(hull, Json::parse(R"(["u1^4*u2*u3^3","u1^4*u2^2*u3^2","u1^4*u2^3*u3"])"));
}

TEST(Engine, DeterministicOutput) {
  auto a = run_to_json(monomialize_partial(closure_phi(), closure_psi())).dump();
  auto b = run_to_json(monomialize_partial(closure_phi(), closure_psi())).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(run_to_dot(monomialize_partial(closure_phi(), closure_psi())),
            run_to_dot(monomialize_partial(closure_phi(), closure_psi())));
}

TEST(Engine, ConstantTermMovesToTargetShift) {
  auto run = run_of(1, 0, {{1}}, "5 + u1^2");
  EXPECT_EQ(run.tree.nodes[0].target_shift.back(), Rational(5));
  EXPECT_EQ(run.outcomes[0].label, LeafLabel::Monomial);
  EXPECT_EQ(run.outcomes[0].bookkeeping.front(), "z1 -> z1 - (x1^2)");
}

TEST(Engine, RemainderAsTargetPolynomial) {
  auto run = run_of(2, 0, {{1, 2}}, "u1^2*u2^4 + u1^3*u2^5");
  EXPECT_EQ(run.outcomes[0].label, LeafLabel::Monomial);
  EXPECT_EQ(run.outcomes[0].bookkeeping,
            (std::vector<std::string>{"z1 -> z1 - (x1^2)", "z1 joins the target divisor"}));
  EXPECT_EQ(to_string(run.tree.nodes[0].state.comps.back().poly, run.tree.nodes[0].ring()), "u1^3*u2^5");
}

TEST(Engine, PreMonomialWithFractionalRemainder) {
  auto run = run_of(2, 0, {{2, 0}, {0, 3}}, "u1*u2");
  EXPECT_EQ(run.outcomes[0].label, LeafLabel::PreMonomial);
  EXPECT_TRUE(labels_sound(run));
}

TEST(Engine, PreMonomialRecordsRelationOrder) {
  auto run = run_of(2, 0, {{2, 0}, {0, 2}}, "u1*u2 + u1^3");
  ASSERT_EQ(run.outcomes[0].label, LeafLabel::PreMonomial);
  const auto& trail = *run.outcomes[0].trail;
  EXPECT_EQ(trail.detail.at("radical"), "y1^3 + y1*y2");
  EXPECT_EQ(trail.detail.at("d"), 2);
  EXPECT_EQ(trail.detail.at("relation"), "x1^6 - 2*x1^4*x2 - 2*x1^3*t^2 + x1^2*x2^2 - 2*x1*x2*t^2 + t^4");
  EXPECT_EQ(trail.rho, 2u);
  EXPECT_TRUE(labels_sound(run));
}

TEST(Engine, FreeCoordinateTschirnhausenPath) {
  auto run = run_of(1, 1, {{1}}, "w1^2");
  ASSERT_EQ(run.tree.nodes.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<CodimOneBlowup>(*run.tree.nodes[1].transform));
  EXPECT_EQ(run.outcomes[0].trail->nu, 2u);
  EXPECT_EQ(run.outcomes[1].label, LeafLabel::Monomial);
  EXPECT_EQ(run.outcomes[1].trail->nu, 1u);
  EXPECT_TRUE(labels_sound(run));
}

TEST(Engine, MonomialTimesFreeCoordinate) {
  auto run = run_of(1, 1, {{1}}, "u1*w1 + u1^2*w1^2");
  ASSERT_EQ(run.tree.nodes.size(), 2u);
  EXPECT_EQ(run.outcomes[0].bookkeeping, (std::vector<std::string>{"w1 -> u1*w1^2 + w1"}));
  EXPECT_TRUE(std::holds_alternative<CodimOneBlowup>(*run.tree.nodes[1].transform));
  EXPECT_EQ(run.outcomes[1].label, LeafLabel::Monomial);
  EXPECT_TRUE(labels_sound(run));
}

TEST(Engine, FreeCoordinateAloneIsImmediate) {
  auto run = run_of(1, 1, {{1}}, "w1 + u1*w1^2");
  EXPECT_EQ(run.tree.nodes.size(), 1u);
  EXPECT_EQ(run.outcomes[0].label, LeafLabel::Monomial);
  EXPECT_TRUE(labels_sound(run));
}

TEST(Engine, PrincipalizedLeafCarriesItsIdeal) {
  auto run = run_of(2, 1, {{1, 1}}, "u1^2*w1^2 + u2^3");
  bool seen = false;
  for (const auto& o : run.outcomes)
    if (o.label == LeafLabel::Principalized) {
      seen = true;
      ASSERT_TRUE(o.ideal.has_value());
      EXPECT_TRUE(is_principal(*o.ideal));
    }
  EXPECT_TRUE(seen);
  EXPECT_TRUE(labels_sound(run));
  EXPECT_TRUE(trail_monotone(run));
}

TEST(Engine, DepthCapIsACutoff) {
  auto phi = closure_phi();
  EngineConfig cfg;
  cfg.depth_cap = 0;
  expect_error(ErrorCode::CutoffReached, [&] { monomialize_partial(phi, closure_psi(), cfg); });
  cfg = {};
  cfg.step_cap = 1;
  expect_error(ErrorCode::CutoffReached, [&] { monomialize_partial(phi, closure_psi(), cfg); });
}

TEST(Engine, DimensionMismatchOnPsi) {
  auto phi = closure_phi();
  expect_error(ErrorCode::DimensionMismatch, [&] { engine_start(phi, Polynomial(2)); });
}

TEST(Engine, RandomRunsAreSoundAndMonotone) {
  std::mt19937 rng(11);
  std::size_t finished = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t r = 1 + rng() % 2, t = rng() % 2;
    IntMatrix a = oracle::random_matrix(rng, 1, r, 1, 3);
    auto phi = validate(MorphismData{r, 0, t, 0, a.row_list(), {}, {}});
    Polynomial psi(r + t);
    for (int k = 0; k < 3; ++k) {
      Exponent e(r + t);
      for (auto& x : e) x = int(rng() % 4);
      psi.add_term(e, Rational(1 + int(rng() % 3)));
    }
    EngineConfig cfg;
    cfg.depth_cap = 8;
    try {
      auto run = monomialize_partial(phi, psi, cfg);
      ++finished;
      EXPECT_TRUE(labels_sound(run)) << trial;
      EXPECT_TRUE(trail_monotone(run)) << trial;
      EXPECT_FALSE(first_live(run).has_value());
      EXPECT_EQ(run_to_json(run).dump(), run_to_json(monomialize_partial(phi, psi, cfg)).dump()) << trial;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::CutoffReached) << trial << ": " << e.what();
    }
  }
  EXPECT_GT(finished, 30u);
}

TEST(Game, OriginPicksMatchTheAutomaticRun) {
  GameSession s("s1", closure_phi(), closure_psi());
  while (s.cursor()) s.play(origin());
  auto run = monomialize_partial(closure_phi(), closure_psi());
  EXPECT_EQ(run_to_json(s.run()).dump(), run_to_json(run).dump());
  EXPECT_EQ(s.moves().size(), run.steps);
}

TEST(Game, BobPicksOffOriginPoint) {
  GameSession s("s1", closure_phi(), closure_psi());
  s.play(origin());
  ASSERT_EQ(s.cursor(), 1u);
  s.play(point({{"u3", "1"}}));
  const auto& run = s.run();
  ASSERT_EQ(run.tree.nodes.size(), 4u);
  const ChartNode& chart = run.tree.nodes[3];
  EXPECT_EQ(chart.ring().indices(VarClass::U), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(chart.ring().indices(VarClass::V).size(), 1u);
  const auto& trail = *run.outcomes[3].trail;
  EXPECT_EQ(trail.nu, 2u);
  EXPECT_EQ(trail.detail.at("hull"), Json::parse(R"(["u1^4*u2^4"])"));
  auto closure = ideal_in(chart, trail.detail.at("closure").get<std::vector<std::string>>());
  EXPECT_TRUE(ideals_equal(closure, ideal_in(chart, {"u1^4*u2^4*v1^2", "u1^4*u2^5"})));
  EXPECT_EQ(run.outcomes[3].label, LeafLabel::Open);
  EXPECT_EQ(s.cursor(), 2u);
}

TEST(Game, ZeroOnNonDivisorCoordinateIsOrigin) {
  auto phi = validate(MorphismData{1, 0, 1, 0, {{1}}, {}, {}});
  auto psi = parse_polynomial("u1*w1^2 + u1^3", source_ring(phi));
  GameSession a("s1", phi, psi), b("s1", phi, psi);
  a.play(point({{"w1", "0"}}));
  b.play(origin());
  EXPECT_EQ(run_to_json(a.run()).dump(), run_to_json(b.run()).dump());
}

TEST(Game, OffOriginFreeCoordinate) {
  auto phi = validate(MorphismData{1, 0, 1, 0, {{1}}, {}, {}});
  auto psi = parse_polynomial("u1*w1^2 + u1^3", source_ring(phi));
  GameSession s("s1", phi, psi);
  s.play(point({{"w1", "2"}}));
  ASSERT_EQ(s.cursor(), 2u);
  s.play(origin());
  EXPECT_FALSE(s.cursor().has_value());
  const auto& run = s.run();
  ASSERT_EQ(run.tree.nodes.size(), 3u);
  EXPECT_TRUE(std::holds_alternative<Recentre>(*run.tree.nodes[1].transform));
  EXPECT_TRUE(std::holds_alternative<CodimOneBlowup>(*run.tree.nodes[2].transform));
  EXPECT_EQ(run.outcomes[2].label, LeafLabel::Monomial);
  EXPECT_TRUE(labels_sound(run));
}

TEST(Game, OffDivisorPointClosesAsMonomial) {
  GameSession s("s1", closure_phi(), closure_psi());
  s.play(point({{"u1", "1"}, {"u2", "2"}, {"u3", "3"}}));
  const auto& run = s.run();
  ASSERT_EQ(run.tree.nodes.size(), 2u);
  EXPECT_TRUE(run.tree.nodes[1].divisor().empty());
  EXPECT_EQ(run.outcomes[1].label, LeafLabel::Monomial);
  EXPECT_EQ(run.outcomes[1].trail->k, 0u);
  EXPECT_FALSE(s.cursor().has_value());
  EXPECT_TRUE(labels_sound(run));
}

TEST(Game, InvalidMoves) {
  GameSession s("s1", closure_phi(), closure_psi());
  expect_error(ErrorCode::InvalidPoint, [&] { s.play(point({{"q7", "1"}})); });
  expect_error(ErrorCode::InvalidPoint, [&] { s.play(point({{"u2", "1/0"}})); });
  expect_error(ErrorCode::InvalidPoint, [&] { s.play(point({{"u2", "abc"}})); });
  expect_error(ErrorCode::OnDivisorZero, [&] { s.play(point({{"u1", "0"}})); });
  expect_error(ErrorCode::InvalidPoint, [&] { s.play(Move{Move::Kind::Select, {}, 5}); });
  EXPECT_TRUE(s.moves().empty());
  s.play(origin());
  expect_error(ErrorCode::InvalidPoint, [&] { s.play(Move{Move::Kind::Select, {}, 0}); });
  s.play(Move{Move::Kind::Select, {}, 2});
  EXPECT_EQ(s.cursor(), 2u);
}

TEST(Game, ReplayReproducesState) {
  GameSession s("s1", closure_phi(), closure_psi());
  s.play(origin());
  s.play(Move{Move::Kind::Select, {}, 2});
  s.play(origin());
  s.play(point({{"u3", "1"}}));
  auto again = replay("s1", closure_phi(), closure_psi(), EngineConfig{}, s.moves());
  EXPECT_EQ(s.state().dump(), again.state().dump());
}

TEST(Game, FinishedGameRejectsMoves) {
  GameSession s("s1", closure_phi(), closure_psi());
  while (s.cursor()) s.play(origin());
  expect_error(ErrorCode::InvalidPoint, [&] { s.play(origin()); });
}

TEST(Serve, SessionLifecycle) {
  GameServer server;
  auto created = server.handle(closure_create());
  ASSERT_EQ(created.at("session"), "s1");
  EXPECT_EQ(created.at("state").at("cursor"), 0);
  auto moved = server.handle({{"op", "move"}, {"session", "s1"}, {"point", Json::object()}});
  EXPECT_EQ(moved.at("state").at("cursor"), 1);
  moved = server.handle({{"op", "move"}, {"session", "s1"}, {"point", {{"u3", "1"}}}});
  EXPECT_EQ(moved.at("state").at("run").at("labels").at("Open"), 1);
  auto state = server.handle({{"op", "state"}, {"session", "s1"}});
  EXPECT_EQ(state.at("state"), moved.at("state"));
  auto exported = server.handle({{"op", "export"}, {"session", "s1"}});
  EXPECT_EQ(exported.at("json"), moved.at("state").at("run"));
  EXPECT_NE(exported.at("dot").get<std::string>().find("digraph"), std::string::npos);
  EXPECT_EQ(server.handle(closure_create()).at("session"), "s2");
}

TEST(Serve, ServeMatchesDirectSession) {
  GameServer server;
  server.handle(closure_create());
  server.handle({{"op", "move"}, {"session", "s1"}, {"point", Json::object()}});
  server.handle({{"op", "move"}, {"session", "s1"}, {"select", 2}});
  auto served = server.handle({{"op", "move"}, {"session", "s1"}, {"point", Json::object()}});
  GameSession s("s1", closure_phi(), closure_psi());
  s.play(origin());
  s.play(Move{Move::Kind::Select, {}, 2});
  s.play(origin());
  EXPECT_EQ(served.at("state").dump(), s.state().dump());
}

TEST(Serve, Errors) {
  GameServer server;
  auto code = [](const Json& j) { return j.at("error").at("code").get<std::string>(); };
  EXPECT_EQ(code(server.handle({{"op", "state"}, {"session", "s4"}})), "UnknownSession");
  EXPECT_EQ(code(server.handle({{"op", "move"}})), "UnknownSession");
  EXPECT_EQ(code(server.handle({{"nop", 1}})), "InvalidInput");
  EXPECT_EQ(code(Json::parse(server.handle_line("{not json"))), "InvalidInput");
  EXPECT_EQ(code(server.handle({{"op", "create"}, {"psi", "u1"}})), "InvalidInput");
  Json bad = closure_create();
  bad["morphism"]["A"] = Json::parse("[[1, -1, 0]]");
  EXPECT_EQ(code(server.handle(bad)), "DimensionMismatch");
  bad = closure_create();
  bad["psi"] = "u1 +* u2";
  EXPECT_TRUE(server.handle(bad).contains("error"));
  server.handle(closure_create());
  EXPECT_EQ(code(server.handle({{"op", "move"}, {"session", "s1"}, {"point", {{"zz", "1"}}}})), "InvalidPoint");
  EXPECT_EQ(code(server.handle({{"op", "move"}, {"session", "s1"}, {"point", {{"u2", 1.5}}}})), "InvalidPoint");
  EXPECT_EQ(code(server.handle({{"op", "move"}, {"session", "s1"}, {"point", {{"u1", "0"}}}})), "OnDivisorZero");
  EXPECT_EQ(code(server.handle({{"op", "move"}, {"session", "s1"}, {"select", -1}})), "InvalidPoint");
  EXPECT_EQ(code(server.handle({{"op", "frobnicate"}, {"session", "s1"}})), "InvalidInput");
}

TEST(Io, MorphismRoundTrip) {
  auto m = validate(MorphismData{2, 1, 1, 2, {{1, 2}}, {{1, 2}}, {oracle::frac(3, 2)}});
  auto back = morphism_from_json(Json::parse(morphism_to_json(m).dump()));
  EXPECT_EQ(morphism_to_json(back), morphism_to_json(m));
  EXPECT_EQ(back.xi.front(), oracle::frac(3, 2));
}

TEST(Io, MonomialIdealRoundTrip) {
  auto i = monomial_ideal_from_json(Json::parse(R"({"r":2,"gens":[[2,0],[1,1],[3,0]]})"));
  EXPECT_EQ(i.gens.size(), 2u);
  EXPECT_EQ(monomial_ideal_to_json(monomial_ideal_from_json(monomial_ideal_to_json(i))), monomial_ideal_to_json(i));
  expect_error(ErrorCode::InvalidInput, [] { monomial_ideal_from_json(Json::parse(R"({"r":2,"gens":[[1]]})")); });
}

TEST(Io, RationalsAndConfig) {
  EXPECT_EQ(rational_from_json(Json(-7)), Rational(-7));
  EXPECT_EQ(rational_from_json(Json("6/4")), oracle::frac(3, 2));
  expect_error(ErrorCode::InvalidInput, [] { rational_from_json(Json(0.5)); });
  expect_error(ErrorCode::InvalidInput, [] { rational_from_json(Json("1/")); });
  EngineConfig cfg;
  cfg.closure.degree_slack = 6;
  cfg.closure.mode = RingMode::Polynomial;
  cfg.depth_cap = 9;
  auto back = engine_config_from_json(engine_config_to_json(cfg));
  EXPECT_EQ(engine_config_to_json(back), engine_config_to_json(cfg));
  expect_error(ErrorCode::InvalidInput, [] { engine_config_from_json(Json::parse(R"({"ring":"global"})")); });
}

TEST(Io, DotEscapesLabels) {
  EXPECT_EQ(dot_escape("a\"b\\c"), "a\\\"b\\\\c");
  auto dot = run_to_dot(monomialize_partial(closure_phi(), closure_psi()));
  EXPECT_NE(dot.find("n0 -> n1;"), std::string::npos);
  EXPECT_NE(dot.find("\\nMonomial (k=1, nu=1)\"]"), std::string::npos);
}

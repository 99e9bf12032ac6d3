#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monoforge/charts.hpp"
#include "monoforge/closure.hpp"
#include "monoforge/depsolve.hpp"
#include "monoforge/error.hpp"
#include "monoforge/exactlin.hpp"
#include "monoforge/io.hpp"
#include "monoforge/logfit.hpp"
#include "monoforge/monideal.hpp"
#include "monoforge/monocore.hpp"
#include "monoforge/polynomial.hpp"

namespace monoforge {

inline ClosureConfig with_slack(long slack) {
  ClosureConfig c;
  c.degree_slack = slack;
  return c;
}

struct EngineConfig {
  ClosureConfig closure = with_slack(8);
  std::size_t search_bound = 8;
  std::size_t depth_cap = 64;
  std::size_t step_cap = 4096;
};

inline Json engine_config_to_json(const EngineConfig& cfg) {
  Json out = closure_config_to_json(cfg.closure);
  out["search_bound"] = cfg.search_bound;
  out["depth_cap"] = cfg.depth_cap;
  out["step_cap"] = cfg.step_cap;
  return out;
}

inline EngineConfig engine_config_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidInput, "config must be a JSON object");
  EngineConfig cfg;
  cfg.closure = closure_config_from_json(j, cfg.closure);
  if (j.contains("search_bound")) cfg.search_bound = size_field(j, "search_bound");
  if (j.contains("depth_cap")) cfg.depth_cap = size_field(j, "depth_cap");
  if (j.contains("step_cap")) cfg.step_cap = size_field(j, "step_cap");
  return cfg;
}

enum class LeafLabel { Live, Expanded, Monomial, PreMonomial, Principalized, Open };

inline std::string label_name(LeafLabel l) {
  switch (l) {
    case LeafLabel::Live: return "Live";
    case LeafLabel::Expanded: return "Expanded";
    case LeafLabel::Monomial: return "Monomial";
    case LeafLabel::PreMonomial: return "PreMonomial";
    case LeafLabel::Principalized: return "Principalized";
    case LeafLabel::Open: return "Open";
  }
  return "?";
}

// Invariants at a chart before the engine acts on it; (k, nu) ordered lexicographically.
struct TrailEntry {
  std::optional<std::size_t> k, nu, rho;
  std::size_t e = 0, i = 0;
  std::string action;
  Json detail = Json::object();
};

struct NodeOutcome {
  LeafLabel label = LeafLabel::Live;
  std::string reason;
  std::optional<TrailEntry> trail;
  std::vector<std::string> bookkeeping;
  std::optional<MonomialIdeal> ideal;  // Principalized leaves: the principal closure on the divisor
};

struct EngineRun {
  EngineConfig cfg;
  MonomialMorphism phi;
  Polynomial psi;
  ChartTree tree;
  std::vector<NodeOutcome> outcomes;
  std::size_t steps = 0;
};

inline std::string psi_name(const MonomialMorphism& phi) { return "z" + std::to_string(phi.s_prime + 1); }

inline EngineRun engine_start(const MonomialMorphism& phi, const Polynomial& psi, const EngineConfig& cfg = {}) {
  if (psi.nvars() != phi.source_dim()) fail(ErrorCode::DimensionMismatch, "psi does not live on the source ring");
  EngineRun run{cfg, phi, psi, {}, {}, 0};
  Polynomial p = psi;
  Rational c0 = p.constant_term();
  p -= Polynomial(p.nvars(), c0);
  ChartNode root = make_root(with_component(symbolic(phi), psi_name(phi), ComponentKind::Plain, p));
  root.target_shift.back() = c0;
  run.tree = ChartTree(std::move(root));
  run.outcomes.resize(1);
  return run;
}

inline std::optional<std::size_t> first_live(const EngineRun& run) {
  for (std::size_t i = 0; i < run.outcomes.size(); ++i)
    if (run.outcomes[i].label == LeafLabel::Live) return i;
  return std::nullopt;
}

namespace engine_detail {

inline SymbolicMorphism monomial_part(const SymbolicMorphism& s) {
  SymbolicMorphism out{s.source, s.comps};
  out.comps.pop_back();
  return out;
}

inline std::vector<LogVectorField> chart_fields(const NormalFormMatch& match, std::size_t n) {
  std::vector<LogVectorField> out;
  for (const auto& x : tangent_basis(match.m)) {
    LogVectorField f(n);
    for (std::size_t i = 0; i < match.source_order.size(); ++i) {
      f.log_coeffs[match.source_order[i]] = x.log_coeffs[i];
      f.plain_coeffs[match.source_order[i]] = x.plain_coeffs[i];
    }
    out.push_back(f);
  }
  return out;
}

inline bool monomial_status(const ChartNode& node) {
  return node.status == ChartStatus::NormalForm || node.status == ChartStatus::MonomialUpToUnits;
}

inline std::optional<std::size_t> unit_order(const SymbolicMorphism& s) {
  try {
    return fitting_unit_order(s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotDominant && e.code() != ErrorCode::NotAMorphism) throw;
    return std::nullopt;
  }
}

// g written through the monomial components: each term c u^beta with beta = lambda A.
struct RemainderInTarget {
  std::optional<std::string> text;  // lambda in N^p for every term
  std::optional<Polynomial> radical;  // h(y) with y_j^d = x_j, when lambda >= 0 and the scales are 1
  Ring radical_ring;
  unsigned d = 1;
};

inline RemainderInTarget remainder_in_target(const Polynomial& g, const NormalFormMatch& match,
                                             const SymbolicMorphism& s) {
  const MonomialMorphism& m = match.m;
  std::size_t p = m.p();
  RemainderInTarget out;
  auto rows = to_rational_rows(m.A);
  std::vector<std::pair<RatVector, Rational>> terms;
  Integer d = 1;
  bool nonnegative = true;
  for (const auto& [e, c] : g.terms()) {
    RatVector beta(m.r);
    for (std::size_t i = 0; i < match.source_order.size(); ++i) {
      int x = e[match.source_order[i]];
      if (i < m.r) beta[i] = x;
      else if (x != 0) return out;
    }
    auto lambda = solve_left(rows, beta);
    if (!lambda) return out;
    for (const auto& l : *lambda) nonnegative = nonnegative && sgn(l) >= 0;
    d = lcm(d, lcm_of_denominators(*lambda));
    terms.emplace_back(*lambda, c);
  }
  if (!nonnegative || !d.fits_uint_p()) return out;
  out.d = static_cast<unsigned>(d.get_ui());
  if (out.d == 1) {
    std::vector<Variable> vars;
    for (std::size_t j = 0; j < p; ++j) vars.push_back({s.comps[match.target_order[j]].name, VarClass::X});
    Polynomial h(p);
    for (const auto& [lambda, c] : terms) {
      Exponent ex(p);
      Rational coeff = c;
      for (std::size_t j = 0; j < p; ++j) {
        ex[j] = static_cast<int>(lambda[j].get_num().get_si());
        coeff /= pow(match.scale[j], ex[j]);
      }
      h.add_term(ex, coeff);
    }
    out.text = to_string(h, Ring(vars));
    return out;
  }
  for (const auto& c : match.scale)
    if (c != 1) return out;
  std::vector<Variable> vars;
  for (std::size_t j = 0; j < p; ++j) vars.push_back({"y" + std::to_string(j + 1), VarClass::Y});
  out.radical_ring = Ring(vars);
  Polynomial h(p);
  for (const auto& [lambda, c] : terms) {
    Exponent ex(p);
    for (std::size_t j = 0; j < p; ++j) ex[j] = static_cast<int>(Rational(lambda[j] * out.d).get_num().get_si());
    h.add_term(ex, c);
  }
  out.radical = h;
  return out;
}

inline void label(NodeOutcome& out, LeafLabel l, std::string reason = {}) {
  out.label = l;
  out.reason = std::move(reason);
}

inline void expand(EngineRun& run, std::size_t id, std::vector<ChartNode> kids) {
  if (run.tree.nodes[id].depth >= run.cfg.depth_cap)
    fail(ErrorCode::CutoffReached, "engine: depth cap " + std::to_string(run.cfg.depth_cap) + " reached at chart " +
                                       std::to_string(id));
  run.tree.attach(id, std::move(kids));
  run.outcomes.resize(run.tree.nodes.size());
  run.outcomes[id].label = LeafLabel::Expanded;
}

inline void close_if_monomial(EngineRun& run, std::size_t id, const std::string& failure) {
  ChartNode& node = run.tree.nodes[id];
  classify(node);
  if (monomial_status(node))
    label(run.outcomes[id], LeafLabel::Monomial);
  else
    label(run.outcomes[id], LeafLabel::Open, failure);
}

inline void premonomial_step(EngineRun& run, std::size_t id, const PremonomialResult& pre, const NormalFormMatch& match) {
  ChartNode& node = run.tree.nodes[id];
  NodeOutcome& out = run.outcomes[id];
  TrailEntry& entry = *out.trail;
  const Ring& ring = node.ring();
  std::size_t n = ring.size();
  auto& psi = node.state.comps.back();
  const std::string& z = psi.name;
  if (!pre.g.is_zero()) {
    auto h = remainder_in_target(pre.g, match, node.state);
    if (!h.text) {
      entry.action = "pre-monomial; remainder is not a polynomial in the monomial components";
      entry.detail["remainder"] = to_string(pre.g, ring);
      if (h.radical) {
        try {
          Relation rel = build_relation(*h.radical, h.radical_ring, h.radical->nvars(), h.d);
          entry.rho = relation_order(rel.r, rel.t_index, rel.extended, run.cfg.closure);
          entry.detail["radical"] = to_string(*h.radical, h.radical_ring);
          entry.detail["d"] = h.d;
          entry.detail["relation"] = to_string(rel.r, rel.ring);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InvalidInput) throw;
          entry.detail["relation"] = e.what();
        }
      }
      label(out, LeafLabel::PreMonomial,
            "remainder " + to_string(pre.g, ring) + " is not a polynomial in the monomial components; "
            "the relation-driven chart sequence is not automated");
      return;
    }
    out.bookkeeping.push_back(z + " -> " + z + " - (" + *h.text + ")");
    psi.poly -= pre.g;
  }
  switch (pre.form) {
    case NormalForm::Zero:
      entry.action = "pre-monomial; component is a function of the monomial part";
      close_if_monomial(run, id, "zero component does not give a normal form");
      return;
    case NormalForm::IndependentMonomial:
      entry.action = "pre-monomial; independent monomial times unit";
      psi.kind = ComponentKind::Divisor;
      out.bookkeeping.push_back(z + " joins the target divisor");
      close_if_monomial(run, id, "independent monomial did not give a monomial morphism");
      return;
    case NormalForm::FreeCoordinate:
    case NormalForm::DependentMonomialUnit: {
      std::size_t w = *pre.coordinate;
      out.bookkeeping.push_back(ring.name(w) + " -> " + to_string(pre.cofactor, ring));
      psi.poly = Polynomial::variable(n, w).shifted(pre.gamma);
      if (pre.form == NormalForm::FreeCoordinate) {
        entry.action = "pre-monomial; free coordinate";
        close_if_monomial(run, id, "free coordinate did not give a monomial morphism");
        return;
      }
      entry.action = "pre-monomial; monomial times free coordinate: codimension-one blowup of " + ring.name(w);
      classify(node);
      expand(run, id, {codim_one_blowup(node, w)});
      return;
    }
  }
}

}  // namespace engine_detail

// One engine action at a live leaf: a label, or a transform creating children.
inline void engine_step(EngineRun& run, std::size_t id) {
  using namespace engine_detail;
  if (id >= run.outcomes.size() || run.outcomes[id].label != LeafLabel::Live)
    fail(ErrorCode::InvalidInput, "engine step on a chart that is not a live leaf");
  if (run.steps++ >= run.cfg.step_cap)
    fail(ErrorCode::CutoffReached, "engine: step cap " + std::to_string(run.cfg.step_cap) + " reached at chart " +
                                       std::to_string(id));
  ChartNode& node = run.tree.nodes[id];
  NodeOutcome& out = run.outcomes[id];
  out.trail = TrailEntry{};
  TrailEntry& entry = *out.trail;
  const Ring& ring = node.ring();
  entry.k = unit_order(node.state);
  auto match = match_normal_form(monomial_part(node.state));
  if (match) {
    entry.e = match->m.p() + match->m.q();
    entry.i = match->m.p();
  }
  if (monomial_status(node)) {
    entry.action = "monomial";
    label(out, LeafLabel::Monomial);
    return;
  }
  if (!match) {
    entry.action = "monomial part is not in normal form";
    label(out, LeafLabel::Open, "monomial part is not in normal form");
    return;
  }
  auto delta = chart_fields(*match, ring.size());
  auto divisor = node.divisor();
  const Polynomial psi = node.state.comps.back().poly;
  auto pre = is_premonomial(delta, divisor, psi, run.cfg.closure);
  entry.nu = pre.report.nu;
  entry.detail["J1"] = poly_ideal_to_json(pre.report.j1, ring);
  entry.detail["closure"] = poly_ideal_to_json(pre.report.closure(), ring);
  entry.detail["degree_bound"] = pre.report.chain.degree_bound;
  if (pre.premonomial) {
    premonomial_step(run, id, pre, *match);
    return;
  }
  entry.detail["note"] = pre.note;
  MonomialIdeal hull = toroidal_hull(pre.report.j1.gens, divisor);
  entry.detail["hull"] = poly_ideal_to_json(make_ideal(ring.size(), ideal_polynomials(hull, divisor, ring.size())), ring);
  if (!is_principal(hull)) {
    auto choice = next_center(hull);
    std::vector<std::size_t> center;
    for (std::size_t c : choice->center) center.push_back(divisor[c]);
    auto kids = blowup_charts(node, center);
    entry.action = "principalize toroidal hull: " + describe(*kids.front().transform, ring);
    entry.action.erase(entry.action.rfind(" chart "));
    expand(run, id, std::move(kids));
    return;
  }
  auto gamma = principal_monomial(pre.report.closure(), divisor, pre.report.chain.degree_bound, run.cfg.closure.mode);
  if (!gamma) {
    entry.action = "closure is not principal monomial; toroidal hull is principal";
    label(out, LeafLabel::Open, "principalizing the closure needs centers outside the divisor");
    return;
  }
  Polynomial rest = psi - dependent_part(delta, psi);
  if (!rest.is_zero())
    for (std::size_t w : ring.indices(VarClass::W)) {
      auto ext = divisor;
      ext.push_back(w);
      std::sort(ext.begin(), ext.end());
      auto f = factor_monomial_unit(rest, ext);
      if (!f.unit_at_origin() || f.gamma[w] == 0) continue;
      entry.action = "Tschirnhausen form in " + ring.name(w) + ": codimension-one blowup";
      expand(run, id, {codim_one_blowup(node, w)});
      return;
    }
  Exponent g;
  for (std::size_t i : divisor) g.push_back((*gamma)[i]);
  out.ideal = minimalize(divisor.size(), {g});
  entry.action = "closure is principal monomial; " + pre.note;
  label(out, LeafLabel::Principalized, "closure is principal monomial; lowering " + pre.note + " needs centers outside the divisor");
}

// (k, nu) does not increase from a chart to a child produced by an engine transform.
inline bool trail_monotone(const EngineRun& run) {
  for (std::size_t id = 1; id < run.tree.nodes.size(); ++id) {
    const ChartNode& node = run.tree.nodes[id];
    if (!node.parent || std::holds_alternative<Recentre>(*node.transform)) continue;
    const auto& a = run.outcomes[*node.parent].trail;
    const auto& b = run.outcomes[id].trail;
    if (!a || !b || !a->k || !b->k || !a->nu || !b->nu) continue;
    if (std::make_pair(*b->k, *b->nu) > std::make_pair(*a->k, *a->nu)) return false;
  }
  return true;
}

inline void engine_finish(EngineRun& run) {
  while (auto id = first_live(run)) engine_step(run, *id);
  ensure(trail_monotone(run), "engine: (k, nu) increased along a transform; the membership oracle likely needs a larger "
                              "degree_slack");
}

inline EngineRun monomialize_partial(const MonomialMorphism& phi, const Polynomial& psi, const EngineConfig& cfg = {}) {
  EngineRun run = engine_start(phi, psi, cfg);
  engine_finish(run);
  return run;
}

inline Json trail_to_json(const TrailEntry& t) {
  auto opt = [](const std::optional<std::size_t>& x) { return x ? Json(*x) : Json(nullptr); };
  return Json{{"k", opt(t.k)}, {"nu", opt(t.nu)}, {"rho", opt(t.rho)}, {"e", t.e},
              {"i", t.i},      {"action", t.action}, {"detail", t.detail}};
}

inline Json outcome_to_json(const NodeOutcome& o) {
  Json out{{"label", label_name(o.label)}, {"reason", o.reason}};
  out["trail"] = o.trail ? trail_to_json(*o.trail) : Json(nullptr);
  out["bookkeeping"] = o.bookkeeping;
  out["ideal"] = o.ideal ? monomial_ideal_to_json(*o.ideal) : Json(nullptr);
  return out;
}

inline Json run_to_json(const EngineRun& run) {
  Json counts = Json::object();
  for (LeafLabel l : {LeafLabel::Live, LeafLabel::Monomial, LeafLabel::PreMonomial, LeafLabel::Principalized,
                      LeafLabel::Open}) {
    std::size_t c = 0;
    for (const auto& o : run.outcomes) c += o.label == l;
    counts[label_name(l)] = c;
  }
  Json out{{"config", engine_config_to_json(run.cfg)},
           {"input", {{"morphism", morphism_to_json(run.phi)},
                      {"psi", to_string(run.psi, source_ring(run.phi))}}},
           {"steps", run.steps},
           {"labels", counts},
           {"trail_monotone", trail_monotone(run)}};
  out["tree"] = chart_tree_to_json(run.tree, [&](std::size_t id, Json& n) { n["outcome"] = outcome_to_json(run.outcomes[id]); });
  return out;
}

inline std::string run_to_dot(const EngineRun& run) {
  return chart_tree_to_dot(run.tree, [&](std::size_t id) {
    const auto& o = run.outcomes[id];
    std::string s = label_name(o.label);
    if (o.trail && o.trail->k && o.trail->nu)
      s += " (k=" + std::to_string(*o.trail->k) + ", nu=" + std::to_string(*o.trail->nu) + ")";
    return s;
  });
}

// Each label re-verified on the leaf state.
inline bool labels_sound(const EngineRun& run) {
  for (std::size_t id = 0; id < run.outcomes.size(); ++id) {
    const auto& o = run.outcomes[id];
    const ChartNode& node = run.tree.nodes[id];
    if (o.label == LeafLabel::Monomial) {
      if (node.status == ChartStatus::NormalForm) continue;
      if (!is_monomial_at(node.state)) return false;
    } else if (o.label == LeafLabel::PreMonomial) {
      auto match = match_normal_form(engine_detail::monomial_part(node.state));
      if (!match) return false;
      auto delta = engine_detail::chart_fields(*match, node.ring().size());
      if (!is_premonomial(delta, node.divisor(), node.state.comps.back().poly, run.cfg.closure).premonomial) return false;
    } else if (o.label == LeafLabel::Principalized) {
      if (!o.ideal || !is_principal(*o.ideal)) return false;
    }
  }
  return true;
}

// Bob's moves: recentre at a point of the cursor chart, take the engine's step, or pick a chart.
struct Move {
  enum class Kind { Point, Select } kind = Kind::Point;
  std::vector<std::pair<std::string, std::string>> point;  // empty: the chart origin
  std::size_t leaf = 0;
};

inline Json move_to_json(const Move& m) {
  if (m.kind == Move::Kind::Select) return Json{{"select", m.leaf}};
  Json p = Json::object();
  for (const auto& [name, value] : m.point) p[name] = value;
  return Json{{"point", p}};
}

inline Move move_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidPoint, "move must be a JSON object");
  Move m;
  if (j.contains("select")) {
    if (!j.at("select").is_number_integer() || j.at("select").get<long long>() < 0)
      fail(ErrorCode::InvalidPoint, "select needs a chart id");
    m.kind = Move::Kind::Select;
    m.leaf = j.at("select").get<std::size_t>();
    return m;
  }
  if (!j.contains("point")) return m;
  const Json& p = j.at("point");
  if (!p.is_object()) fail(ErrorCode::InvalidPoint, "point must map variable names to rationals");
  for (const auto& [name, value] : p.items()) {
    if (value.is_number_integer()) m.point.emplace_back(name, std::to_string(value.get<long long>()));
    else if (value.is_string()) m.point.emplace_back(name, value.get<std::string>());
    else fail(ErrorCode::InvalidPoint, "coordinate of " + name + " must be a rational string");
  }
  return m;
}

class GameSession {
 public:
  GameSession(std::string id, const MonomialMorphism& phi, const Polynomial& psi, const EngineConfig& cfg = {})
      : id_(std::move(id)), run_(engine_start(phi, psi, cfg)) {
    cursor_ = first_live(run_);
  }

  const std::string& id() const { return id_; }
  const EngineRun& run() const { return run_; }
  std::optional<std::size_t> cursor() const { return cursor_; }
  const std::vector<Move>& moves() const { return moves_; }

  // Alice answers Bob: recentre when the point is off the origin, then one engine step.
  void play(const Move& move) {
    if (move.kind == Move::Kind::Select) {
      if (move.leaf >= run_.outcomes.size() || run_.outcomes[move.leaf].label != LeafLabel::Live)
        fail(ErrorCode::InvalidPoint, "chart " + std::to_string(move.leaf) + " is not a live leaf");
      cursor_ = move.leaf;
      moves_.push_back(move);
      return;
    }
    if (!cursor_) fail(ErrorCode::InvalidPoint, "the game is over: no live chart");
    std::size_t at = *cursor_;
    const Ring& ring = run_.tree.nodes[at].ring();
    std::vector<std::pair<std::size_t, Rational>> point;
    for (const auto& [name, text] : move.point) {
      auto idx = ring.find(name);
      if (!idx) fail(ErrorCode::InvalidPoint, "no variable '" + name + "' in chart " + std::to_string(at));
      Rational c;
      try {
        c = parse_rational(text);
      } catch (const Error&) {
        fail(ErrorCode::InvalidPoint, "coordinate of " + name + " is not a rational: '" + text + "'");
      }
      if (sgn(c) == 0) {
        if (ring.cls(*idx) == VarClass::U)
          fail(ErrorCode::OnDivisorZero, name + " = 0 is the divisor: pick the chart instead");
        continue;
      }
      point.emplace_back(*idx, c);
    }
    std::sort(point.begin(), point.end());
    if (!point.empty()) {
      ChartNode child = recentre(run_.tree.nodes[at], point);
      auto& out = run_.outcomes[at];
      out.trail = TrailEntry{};
      out.trail->action = "Bob recentres: " + describe(*child.transform, ring);
      engine_detail::expand(run_, at, {std::move(child)});
      at = run_.tree.nodes.size() - 1;
    }
    engine_step(run_, at);
    moves_.push_back(move);
    cursor_ = first_live(run_);
  }

  Json state() const {
    Json out{{"session", id_}, {"cursor", cursor_ ? Json(*cursor_) : Json(nullptr)}, {"finished", !cursor_.has_value()}};
    Json moves = Json::array();
    for (const auto& m : moves_) moves.push_back(move_to_json(m));
    out["moves"] = moves;
    out["run"] = run_to_json(run_);
    return out;
  }

 private:
  std::string id_;
  EngineRun run_;
  std::optional<std::size_t> cursor_;
  std::vector<Move> moves_;
};

inline GameSession replay(std::string id, const MonomialMorphism& phi, const Polynomial& psi, const EngineConfig& cfg,
                          const std::vector<Move>& moves) {
  GameSession s(std::move(id), phi, psi, cfg);
  for (const auto& m : moves) s.play(m);
  return s;
}

// Line-delimited JSON service: create, move, state, export.
class GameServer {
 public:
  Json handle(const Json& request) {
    try {
      if (!request.is_object() || !request.contains("op") || !request.at("op").is_string())
        fail(ErrorCode::InvalidInput, "request needs an 'op' string");
      std::string op = request.at("op").get<std::string>();
      if (op == "create") return create(request);
      GameSession& s = session(request);
      if (op == "move") {
        s.play(move_from_json(request));
        return Json{{"session", s.id()}, {"state", s.state()}};
      }
      if (op == "state") return Json{{"session", s.id()}, {"state", s.state()}};
      if (op == "export")
        return Json{{"session", s.id()}, {"json", run_to_json(s.run())}, {"dot", run_to_dot(s.run())}};
      fail(ErrorCode::InvalidInput, "unknown op '" + op + "'");
    } catch (const Error& e) {
      return error_json(e);
    } catch (const Json::exception& e) {
      return error_json(ErrorCode::InvalidInput, e.what());
    }
  }

  std::string handle_line(const std::string& line) {
    Json request;
    try {
      request = Json::parse(line);
    } catch (const Json::exception& e) {
      return error_json(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what()).dump();
    }
    return handle(request).dump();
  }

 private:
  Json create(const Json& request) {
    if (!request.contains("morphism")) fail(ErrorCode::InvalidInput, "create needs a morphism");
    MonomialMorphism phi = morphism_from_json(request.at("morphism"));
    if (!request.contains("psi")) fail(ErrorCode::InvalidInput, "create needs psi");
    Polynomial psi = polynomial_from_json(request.at("psi"), source_ring(phi));
    EngineConfig cfg = request.contains("config") ? engine_config_from_json(request.at("config")) : EngineConfig{};
    std::string id = "s" + std::to_string(++counter_);
    auto [it, ok] = sessions_.emplace(id, GameSession(id, phi, psi, cfg));
    return Json{{"session", id}, {"state", it->second.state()}};
  }

  GameSession& session(const Json& request) {
    if (!request.contains("session") || !request.at("session").is_string())
      fail(ErrorCode::UnknownSession, "request needs a session id");
    auto it = sessions_.find(request.at("session").get<std::string>());
    if (it == sessions_.end()) fail(ErrorCode::UnknownSession, "no session '" + request.at("session").get<std::string>() + "'");
    return it->second;
  }

  std::map<std::string, GameSession> sessions_;
  std::size_t counter_ = 0;
};

}  // namespace monoforge

#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "monoforge/charts.hpp"
#include "monoforge/closure.hpp"
#include "monoforge/depsolve.hpp"
#include "monoforge/engine.hpp"
#include "monoforge/exactlin.hpp"
#include "monoforge/io.hpp"
#include "monoforge/logfit.hpp"
#include "monoforge/monideal.hpp"
#include "monoforge/monocore.hpp"

using namespace monoforge;

namespace {

Json read_input(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), {});
  } else {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::InvalidInput, "cannot read '" + path + "'");
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::InvalidInput, std::string("missing field '") + key + "'");
  return j.at(key);
}

ClosureConfig closure_cfg(const Json& in) {
  return in.contains("config") ? closure_config_from_json(in.at("config")) : ClosureConfig{};
}

EngineConfig engine_cfg(const Json& in) {
  return in.contains("config") ? engine_config_from_json(in.at("config")) : EngineConfig{};
}

Ring ring_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidInput, "ring must be an array of variable names");
  std::vector<std::string> names;
  for (const auto& n : j) {
    if (!n.is_string()) fail(ErrorCode::InvalidInput, "variable names must be strings");
    names.push_back(n.get<std::string>());
  }
  return Ring::from_names(names);
}

Json names_of(const Ring& ring) {
  Json out = Json::array();
  for (const auto& v : ring.vars()) out.push_back(v.name);
  return out;
}

Json int_matrix_json(const IntMatrix& m) { return int_rows_to_json(m); }

IntMatrix int_matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorCode::InvalidInput, "matrix must be a non-empty array of rows");
  std::vector<IntVector> rows;
  for (const auto& r : j) rows.push_back(int_row_from_json(r));
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) fail(ErrorCode::InvalidInput, "matrix rows differ in length");
  IntMatrix m(0, rows.front().size());
  for (const auto& r : rows) m.append_row(r);
  return m;
}

SymbolicMorphism symbolic_input(const Json& in) {
  MonomialMorphism phi = morphism_from_json(field(in, "morphism"));
  SymbolicMorphism s = symbolic(phi);
  if (in.contains("psi"))
    s = with_component(s, psi_name(phi), ComponentKind::Plain, polynomial_from_json(in.at("psi"), source_ring(phi)));
  return s;
}

Json chain_json(const ChainReport& rep, const Ring& ring) {
  Json chain = Json::array();
  for (const auto& i : rep.chain) chain.push_back(poly_ideal_to_json(i, ring));
  return Json{{"chain", chain}, {"mu", rep.mu}, {"degree_bound", rep.degree_bound},
              {"closure", poly_ideal_to_json(rep.closure(), ring)}};
}

// Verbs.

Json check_monomial(const Json& in) {
  SymbolicMorphism s = symbolic_input(in);
  Json out{{"ring", names_of(s.source)}};
  auto jac = log_jacobian_at_origin(s);
  Json entries = Json::array();
  for (const auto& row : jac.entries) {
    Json r = Json::array();
    for (const auto& x : row) r.push_back(rational_to_json(x));
    entries.push_back(r);
  }
  out["log_jacobian"] = {{"rows", jac.rows}, {"cols", jac.cols}, {"entries", entries}};
  out["generic_rank"] = generic_rank(s);
  try {
    out["monomial"] = is_monomial_at(s);
    out["k"] = fitting_unit_order(s);
    Json fit = Json::array();
    for (std::size_t i = 0; i <= s.target_dim(); ++i) fit.push_back(fitting_ideal_is_unit(s, i));
    out["fitting_unit"] = fit;
    out["dominant"] = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotDominant) throw;
    out["monomial"] = nullptr;
    out["k"] = nullptr;
    out["dominant"] = false;
  }
  return out;
}

Json tangent(const Json& in) {
  MonomialMorphism phi = morphism_from_json(field(in, "morphism"));
  Json fields = Json::array();
  for (const auto& x : tangent_basis(phi)) fields.push_back(field_to_json(x));
  return Json{{"ring", names_of(source_ring(phi))}, {"fields", fields}};
}

Json principalization_json(const PrincipalizationTree& t) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    nodes.push_back({{"id", i},
                     {"parent", n.parent ? Json(*n.parent) : Json(nullptr)},
                     {"center", n.center},
                     {"chart", n.parent ? Json(n.chart) : Json(nullptr)},
                     {"depth", n.depth},
                     {"map", int_matrix_json(n.map)},
                     {"ideal", monomial_ideal_to_json(n.ideal)},
                     {"principal", is_principal(n.ideal).has_value()},
                     {"children", n.children}});
  }
  return Json{{"nodes", nodes}, {"leaves", t.leaves()}, {"depth", t.depth()}, {"blowups", t.blowups()}};
}

std::string principalization_dot(const PrincipalizationTree& t) {
  std::string out = "digraph principalize {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const auto& n = t.nodes[i];
    std::string text = std::to_string(i) + ": ";
    if (n.parent) {
      text += "blowup (";
      for (std::size_t k = 0; k < n.center.size(); ++k) text += (k ? "," : "") + std::to_string(n.center[k] + 1);
      text += ") chart " + std::to_string(n.chart + 1);
    } else {
      text += "root";
    }
    text = dot_escape(text) + "\\n" + dot_escape(monomial_ideal_to_json(n.ideal).at("gens").dump());
    out += "  n" + std::to_string(i) + " [label=\"" + text + "\"];\n";
  }
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    for (std::size_t c : t.nodes[i].children) out += "  n" + std::to_string(i) + " -> n" + std::to_string(c) + ";\n";
  return out + "}\n";
}

PrincipalizationTree principalize_input(const Json& in) {
  std::size_t cap = in.contains("depth_cap") ? size_field(in, "depth_cap") : 64;
  return principalize(monomial_ideal_from_json(field(in, "ideal")), cap);
}

Json closure_verb(const Json& in) {
  MonomialMorphism phi = morphism_from_json(field(in, "morphism"));
  Ring ring = source_ring(phi);
  const Json& gens = field(in, "ideal");
  if (!gens.is_array()) fail(ErrorCode::InvalidInput, "ideal must be an array of polynomials");
  std::vector<Polynomial> ps;
  for (const auto& g : gens) ps.push_back(polynomial_from_json(g, ring));
  ClosureConfig cfg = closure_cfg(in);
  Json out{{"config", closure_config_to_json(cfg)}, {"ring", names_of(ring)}};
  out.update(chain_json(delta_chain(make_ideal(ring.size(), ps), tangent_basis(phi), cfg), ring));
  return out;
}

Json nu_verb(const Json& in) {
  MonomialMorphism phi = morphism_from_json(field(in, "morphism"));
  Ring ring = source_ring(phi);
  Polynomial psi = polynomial_from_json(field(in, "psi"), ring);
  ClosureConfig cfg = closure_cfg(in);
  auto delta = tangent_basis(phi);
  std::vector<std::size_t> divisor(phi.r);
  for (std::size_t i = 0; i < phi.r; ++i) divisor[i] = i;
  auto pre = is_premonomial(delta, divisor, psi, cfg);
  Json out{{"config", closure_config_to_json(cfg)}, {"ring", names_of(ring)}, {"nu", pre.report.nu},
           {"J1", poly_ideal_to_json(pre.report.j1, ring)}};
  out.update(chain_json(pre.report.chain, ring));
  out["hull"] = monomial_ideal_to_json(toroidal_hull(pre.report.j1.gens, divisor));
  out["premonomial"] = pre.premonomial;
  out["form"] = pre.premonomial ? Json(normal_form_name(pre.form)) : Json(nullptr);
  out["note"] = pre.note;
  if (pre.premonomial) {
    out["g"] = to_string(pre.g, ring);
    out["phi"] = to_string(pre.phi, ring);
    out["gamma"] = pre.gamma;
  }
  return out;
}

Json rho_verb(const Json& in) {
  Ring ring = ring_from_json(field(in, "ring"));
  Polynomial r = polynomial_from_json(field(in, "relation"), ring);
  std::string t = in.contains("t") ? in.at("t").get<std::string>() : "t";
  auto idx = ring.find(t);
  if (!idx) fail(ErrorCode::InvalidInput, "no variable '" + t + "' in the ring");
  bool extended = in.contains("extended") ? in.at("extended").get<bool>() : true;
  ClosureConfig cfg = closure_cfg(in);
  return Json{{"rho", relation_order(r, *idx, extended, cfg)}, {"extended", extended},
              {"config", closure_config_to_json(cfg)}};
}

Json relation_verb(const Json& in) {
  Ring ring = ring_from_json(field(in, "ring"));
  Polynomial h = polynomial_from_json(field(in, "h"), ring);
  std::size_t p = size_field(in, "p");
  std::size_t d = size_field(in, "d");
  Relation rel = build_relation(h, ring, p, static_cast<unsigned>(d));
  ClosureConfig cfg = closure_cfg(in);
  return Json{{"relation", to_string(rel.r, rel.ring)},
              {"ring", names_of(rel.ring)},
              {"t", rel.ring.name(rel.t_index)},
              {"degree", rel.degree},
              {"rho", relation_order(rel.r, rel.t_index, true, cfg)},
              {"rho_induced", relation_order(rel.r, rel.t_index, false, cfg)},
              {"config", closure_config_to_json(cfg)}};
}

Json reduce_verb(const Json& in) {
  MonomialMorphism phi = morphism_from_json(field(in, "morphism"));
  Polynomial g = polynomial_from_json(field(in, "g"), source_ring(phi));
  std::vector<Variable> vars = target_ring(phi).vars();
  vars.push_back({"t", VarClass::T});
  Ring rring(vars);
  Relation rel{polynomial_from_json(field(in, "relation"), rring), rring, vars.size() - 1, true, 1, 0};
  rel.degree = static_cast<std::size_t>(rel.r.degree_in(rel.t_index));
  ClosureConfig cfg = closure_cfg(in);
  auto rep = reduce_extended_divisor(phi, g, rel, cfg);
  Json leaves = Json::array();
  for (const auto& l : rep.leaves) {
    const JointLeaf& jl = rep.tree.leaves[l.leaf];
    leaves.push_back({{"leaf", l.leaf},
                      {"source_chart", jl.node},
                      {"map", int_matrix_json(jl.map)},
                      {"t_dependent", l.t_dependent},
                      {"unit_absorption", l.unit_absorption},
                      {"relation_monomial", l.relation_monomial},
                      {"outcome", outcome_name(l.outcome)},
                      {"relation", to_string(l.relation, Ring::source(0, 0, l.relation.nvars()))}});
  }
  return Json{{"rho", rep.rho},
              {"control_shape", rep.control_shape},
              {"hull", monomial_ideal_to_json(rep.ideal)},
              {"source_tree", chart_tree_to_json(rep.tree.source)},
              {"leaves", leaves},
              {"config", closure_config_to_json(cfg)}};
}

Json semigroup_verb(const Json& in) {
  IntMatrix a = int_matrix_from_json(field(in, "A"));
  std::size_t bound = in.contains("search_bound") ? size_field(in, "search_bound") : 8;
  auto gens = semigroup_generators(a, bound);
  auto vec = [](const IntVector& v) {
    Json r = Json::array();
    for (const auto& x : v) r.push_back(x.get_si());
    return r;
  };
  Json g = Json::array(), certs = Json::array();
  for (const auto& v : gens.generators) g.push_back(vec(v));
  for (const auto& c : gens.certificates) certs.push_back(Json{{"gamma", vec(c.gamma)}, {"lambda", c.lambda}});
  return Json{{"search_bound", gens.search_bound}, {"generators", g}, {"certificates", certs}};
}

Json signed_map_json(const SignedMonomialMap& f) { return Json{{"E", int_matrix_json(f.E)}, {"sign", f.sign}}; }

Json factorize_verb(const Json& in) {
  MonomialMorphism phi = morphism_from_json(field(in, "morphism"));
  std::size_t cap = in.contains("depth_cap") ? size_field(in, "depth_cap") : 64;
  Json diagrams = Json::array();
  for (const auto& d : factorize_to_identity(phi, cap)) {
    Json steps = Json::array();
    for (const auto& s : d.steps)
      steps.push_back({{"kind", step_kind_name(s.kind)}, {"center", s.center}, {"chart", s.chart},
                       {"exponents", s.exponents}, {"signs", s.signs}, {"perm", s.perm}});
    diagrams.push_back({{"sigma", signed_map_json(d.sigma)}, {"tau", signed_map_json(d.tau)},
                        {"phi", int_matrix_json(d.phi)}, {"commutes", commutes(phi.A, d)}, {"steps", steps}});
  }
  return Json{{"diagrams", diagrams}};
}

std::vector<Move> moves_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidInput, "moves must be an array");
  std::vector<Move> out;
  for (const auto& m : j) out.push_back(move_from_json(m));
  return out;
}

EngineRun monomialize_input(const Json& in) {
  MonomialMorphism phi = morphism_from_json(field(in, "morphism"));
  Polynomial psi = polynomial_from_json(field(in, "psi"), source_ring(phi));
  EngineConfig cfg = engine_cfg(in);
  if (in.contains("moves")) return replay("s1", phi, psi, cfg, moves_from_json(in.at("moves"))).run();
  return monomialize_partial(phi, psi, cfg);
}

void serve_loop(std::istream& in, std::ostream& out) {
  GameServer server;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out << server.handle_line(line) << std::endl;
  }
}

void print_leaves(const GameSession& s, std::ostream& out) {
  const EngineRun& run = s.run();
  for (std::size_t id : run.tree.leaves()) {
    const auto& node = run.tree.nodes[id];
    const auto& o = run.outcomes[id];
    out << (s.cursor() == id ? "* " : "  ") << id << " [" << label_name(o.label) << "]";
    if (node.transform && node.parent) out << " " << describe(*node.transform, run.tree.nodes[*node.parent].ring());
    if (!o.reason.empty()) out << " (" << o.reason << ")";
    out << "\n";
  }
  if (s.cursor()) {
    const auto& node = run.tree.nodes[*s.cursor()];
    out << "chart " << *s.cursor() << ":";
    for (std::size_t j = 0; j < node.state.comps.size(); ++j) {
      const auto& c = node.state.comps[j];
      out << "  " << c.name << " = ";
      if (sgn(node.target_shift[j]) != 0) out << to_string(node.target_shift[j]) << " + ";
      out << to_string(c.poly, node.ring()) << ";";
    }
    out << "\n";
  } else {
    out << "no live chart left\n";
  }
}

void game_loop(const Json& input, std::istream& in, std::ostream& out) {
  MonomialMorphism phi = morphism_from_json(field(input, "morphism"));
  Polynomial psi = polynomial_from_json(field(input, "psi"), source_ring(phi));
  GameSession s("s1", phi, psi, engine_cfg(input));
  out << "commands: origin | point <var>=<rational> ... | select <id> | state | export | quit\n";
  print_leaves(s, out);
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    std::istringstream words(line);
    std::string cmd;
    if (!(words >> cmd)) continue;
    try {
      if (cmd == "quit" || cmd == "exit") break;
      if (cmd == "state") {
        print_leaves(s, out);
      } else if (cmd == "export") {
        out << s.state().dump(2) << "\n";
      } else if (cmd == "origin") {
        s.play(Move{});
        print_leaves(s, out);
      } else if (cmd == "point") {
        Move m;
        std::string kv;
        while (words >> kv) {
          auto eq = kv.find('=');
          if (eq == std::string::npos) fail(ErrorCode::InvalidPoint, "expected <var>=<rational>, got '" + kv + "'");
          m.point.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
        s.play(m);
        print_leaves(s, out);
      } else if (cmd == "select") {
        std::string id;
        words >> id;
        if (id.empty() || id.find_first_not_of("0123456789") != std::string::npos)
          fail(ErrorCode::InvalidPoint, "select needs a chart id");
        s.play(Move{Move::Kind::Select, {}, std::stoul(id)});
        print_leaves(s, out);
      } else {
        out << "unknown command '" << cmd << "'\n";
      }
    } catch (const Error& e) {
      out << e.name() << ": " << e.what() << "\n";
    }
  }
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact local monomialization toolkit"};
  app.require_subcommand(1);
  std::string path = "-";
  bool dot = false;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("file", path, "JSON input file, '-' for standard input");
    return sub;
  };
  std::function<void()> action;
  auto bind = [&](CLI::App* sub, std::function<Json(const Json&)> f) {
    sub->callback([&, f] { action = [&, f] { emit(f(read_input(path))); }; });
  };

  bind(add("check-monomial", "monomiality and Fitting data of a morphism at the origin"), check_monomial);
  bind(add("tangent-basis", "logarithmic tangent fields of a monomial morphism"), tangent);
  bind(add("closure", "closure chain of a polynomial ideal under the tangent fields"), closure_verb);
  bind(add("nu", "invariant nu and pre-monomial classification of an extra component"), nu_verb);
  bind(add("rho", "order of a relation in t"), rho_verb);
  bind(add("relation", "relation of a function of radicals of the target coordinates"), relation_verb);
  bind(add("reduce-divisor", "reduce an extended divisor with a relation"), reduce_verb);
  bind(add("semigroup", "generators of the semigroup of regular Laurent monomials"), semigroup_verb);
  bind(add("factorize", "factor a square monomial morphism to the identity"), factorize_verb);

  auto* pr = add("principalize", "principalize a monomial ideal by combinatorial blowups");
  pr->add_flag("--dot", dot, "emit DOT instead of JSON");
  pr->callback([&] {
    action = [&] {
      auto t = principalize_input(read_input(path));
      if (dot) std::cout << principalization_dot(t);
      else emit(principalization_json(t));
    };
  });

  auto* mono = add("monomialize", "run the engine on a morphism and an extra component");
  mono->add_flag("--dot", dot, "emit DOT instead of JSON");
  mono->callback([&] {
    action = [&] {
      EngineRun run = monomialize_input(read_input(path));
      if (dot) std::cout << run_to_dot(run);
      else emit(run_to_json(run));
    };
  });

  auto* serve = app.add_subcommand("serve", "line-delimited JSON game service on standard streams");
  serve->callback([&] { action = [&] { serve_loop(std::cin, std::cout); }; });

  auto* game = app.add_subcommand("game", "play Bob in the terminal");
  std::string game_path;
  game->add_option("file", game_path, "JSON input with morphism and psi")->required();
  game->callback([&] { action = [&] { game_loop(read_input(game_path), std::cin, std::cout); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    action();
    return 0;
  } catch (const Error& e) {
    std::cerr << error_json(e).dump() << "\n";
    return exit_status(e.code());
  } catch (const Json::exception& e) {
    std::cerr << error_json(ErrorCode::InvalidInput, e.what()).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << error_json(ErrorCode::InternalAssertion, e.what()).dump() << "\n";
    return 4;
  }
}

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoforge/charts.hpp"
#include "monoforge/closure.hpp"
#include "monoforge/error.hpp"
#include "monoforge/monideal.hpp"
#include "monoforge/monocore.hpp"
#include "monoforge/polynomial.hpp"

namespace monoforge {

using Json = nlohmann::ordered_json;

inline Json error_json(ErrorCode code, const std::string& message) {
  return Json{{"error", {{"code", std::string(error_name(code))}, {"message", message}}}};
}

inline Json error_json(const Error& e) { return error_json(e.code(), e.what()); }

// Parse failures and shape errors both surface as InvalidInput.
template <class F>
auto with_input_errors(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string(what) + ": " + e.what());
  }
}

inline Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(Integer(std::to_string(j.get<long long>())));
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const Error&) {
      fail(ErrorCode::InvalidInput, "malformed rational '" + j.get<std::string>() + "'");
    }
  }
  fail(ErrorCode::InvalidInput, "rational must be an integer or a string");
}

inline Json rational_to_json(const Rational& q) { return to_string(q); }

inline IntVector int_row_from_json(const Json& j) {
  if (!j.is_array()) fail(ErrorCode::InvalidInput, "exponent row must be an array");
  IntVector row;
  for (const auto& x : j) {
    if (!x.is_number_integer()) fail(ErrorCode::InvalidInput, "exponents must be integers");
    row.push_back(Integer(std::to_string(x.get<long long>())));
  }
  return row;
}

inline Json int_rows_to_json(const IntMatrix& m) {
  Json out = Json::array();
  for (const auto& row : m.row_list()) {
    Json r = Json::array();
    for (const auto& x : row) r.push_back(x.get_si());
    out.push_back(r);
  }
  return out;
}

inline std::size_t size_field(const Json& j, const char* key, std::optional<std::size_t> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(ErrorCode::InvalidInput, std::string("missing field '") + key + "'");
  }
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    fail(ErrorCode::InvalidInput, std::string("field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

inline MonomialMorphism morphism_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidInput, "morphism must be a JSON object");
  MorphismData d;
  d.r = size_field(j, "r");
  d.s = size_field(j, "s", 0);
  d.t = size_field(j, "t", 0);
  d.s_prime = size_field(j, "s_prime", d.s);
  if (j.contains("A"))
    for (const auto& row : j.at("A")) d.A.push_back(int_row_from_json(row));
  if (j.contains("B"))
    for (const auto& row : j.at("B")) d.B.push_back(int_row_from_json(row));
  if (j.contains("xi"))
    for (const auto& x : j.at("xi")) d.xi.push_back(rational_from_json(x));
  return validate(d);
}

inline Json morphism_to_json(const MonomialMorphism& m) {
  Json xi = Json::array();
  for (const auto& x : m.xi) xi.push_back(rational_to_json(x));
  return Json{{"r", m.r}, {"s", m.s}, {"t", m.t}, {"A", int_rows_to_json(m.A)}, {"B", int_rows_to_json(m.B)},
              {"xi", xi}, {"s_prime", m.s_prime}};
}

inline MonomialIdeal monomial_ideal_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::InvalidInput, "monomial ideal must be a JSON object");
  std::size_t r = size_field(j, "r");
  std::vector<Exponent> gens;
  if (j.contains("gens"))
    for (const auto& g : j.at("gens")) {
      IntVector row = int_row_from_json(g);
      if (row.size() != r) fail(ErrorCode::InvalidInput, "generator length differs from r");
      gens.push_back(exponent_of(row, r));
    }
  return minimalize(r, gens);
}

inline Json monomial_ideal_to_json(const MonomialIdeal& m) {
  Json gens = Json::array();
  for (const auto& g : m.gens) gens.push_back(g);
  return Json{{"r", m.r}, {"zero", m.zero}, {"gens", gens}};
}

inline Json ring_to_json(const Ring& ring) {
  Json out = Json::array();
  for (const auto& v : ring.vars()) out.push_back({{"name", v.name}, {"class", std::string(1, class_letter(v.cls))}});
  return out;
}

inline Json polys_to_json(const std::vector<Polynomial>& ps, const Ring& ring) {
  Json out = Json::array();
  for (const auto& p : ps) out.push_back(to_string(p, ring));
  return out;
}

inline Polynomial polynomial_from_json(const Json& j, const Ring& ring) {
  if (!j.is_string()) fail(ErrorCode::InvalidInput, "polynomial must be a string");
  return parse_polynomial(j.get<std::string>(), ring);
}

inline Json field_to_json(const LogVectorField& x) {
  Json log = Json::array(), plain = Json::array();
  for (const auto& c : x.log_coeffs) log.push_back(rational_to_json(c));
  for (const auto& c : x.plain_coeffs) plain.push_back(rational_to_json(c));
  return Json{{"log", log}, {"plain", plain}};
}

inline Json transform_to_json(const ChartTransform& t, const Ring& parent) {
  Json out;
  if (const auto* b = std::get_if<Blowup>(&t)) {
    Json center = Json::array();
    for (std::size_t i : b->center) center.push_back(parent.name(i));
    out = {{"kind", "blowup"}, {"center", center}, {"chart", parent.name(b->chart)}};
  } else if (const auto* p = std::get_if<PowerSubst>(&t)) {
    Json vars = Json::array();
    for (std::size_t i : p->vars) vars.push_back(parent.name(i));
    out = {{"kind", "power"}, {"vars", vars}, {"k", p->k}, {"eps", p->eps}};
  } else if (const auto* r = std::get_if<Recentre>(&t)) {
    Json point = Json::object();
    for (const auto& [i, c] : r->point) point[parent.name(i)] = rational_to_json(c);
    out = {{"kind", "recentre"}, {"point", point}};
  } else {
    out = {{"kind", "codim-one"}, {"variable", parent.name(std::get<CodimOneBlowup>(t).variable)}};
  }
  out["text"] = describe(t, parent);
  return out;
}

inline Json chart_node_to_json(const ChartTree& tree, std::size_t id) {
  const ChartNode& node = tree.nodes[id];
  const Ring& ring = node.ring();
  Json out{{"id", id}};
  out["parent"] = node.parent ? Json(*node.parent) : Json(nullptr);
  out["depth"] = node.depth;
  if (node.transform && node.parent)
    out["transform"] = transform_to_json(*node.transform, tree.nodes[*node.parent].ring());
  else
    out["transform"] = nullptr;
  out["ring"] = ring_to_json(ring);
  Json comps = Json::array();
  for (std::size_t j = 0; j < node.state.comps.size(); ++j) {
    const auto& c = node.state.comps[j];
    comps.push_back({{"name", c.name},
                     {"kind", c.kind == ComponentKind::Divisor ? "divisor" : "plain"},
                     {"poly", to_string(c.poly, ring)},
                     {"shift", rational_to_json(node.target_shift[j])}});
  }
  out["components"] = comps;
  out["edge"] = polys_to_json(node.edge, ring);
  out["to_root"] = polys_to_json(node.to_root, ring);
  out["status"] = status_name(node.status);
  out["normal_form"] = node.normal ? morphism_to_json(node.normal->m) : Json(nullptr);
  out["children"] = node.children;
  return out;
}

using NodeAnnotator = std::function<void(std::size_t, Json&)>;

inline Json chart_tree_to_json(const ChartTree& tree, const NodeAnnotator& annotate = {}) {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    Json n = chart_node_to_json(tree, i);
    if (annotate) annotate(i, n);
    nodes.push_back(n);
  }
  return Json{{"nodes", nodes}, {"leaves", tree.leaves()}};
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

using NodeLabeler = std::function<std::string(std::size_t)>;

inline std::string chart_tree_to_dot(const ChartTree& tree, const NodeLabeler& label = {}) {
  std::string out = "digraph charts {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const ChartNode& n = tree.nodes[i];
    std::string text = std::to_string(i) + ": ";
    if (n.transform && n.parent)
      text += describe(*n.transform, tree.nodes[*n.parent].ring());
    else
      text += "root";
    text = dot_escape(text) + "\\n" + dot_escape(label ? label(i) : status_name(n.status));
    out += "  n" + std::to_string(i) + " [label=\"" + text + "\"];\n";
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    for (std::size_t c : tree.nodes[i].children) out += "  n" + std::to_string(i) + " -> n" + std::to_string(c) + ";\n";
  out += "}\n";
  return out;
}

inline ClosureConfig closure_config_from_json(const Json& j, ClosureConfig cfg = {}) {
  if (j.contains("degree_slack")) cfg.degree_slack = static_cast<long>(size_field(j, "degree_slack"));
  if (j.contains("degree_bound") && j.at("degree_bound").is_null()) cfg.degree_bound.reset();
  else if (j.contains("degree_bound")) cfg.degree_bound = static_cast<long>(size_field(j, "degree_bound"));
  if (j.contains("chain_cap")) cfg.chain_cap = size_field(j, "chain_cap");
  if (j.contains("ring")) {
    if (!j.at("ring").is_string()) fail(ErrorCode::InvalidInput, "ring must be 'local' or 'polynomial'");
    std::string mode = j.at("ring").get<std::string>();
    if (mode == "local") cfg.mode = RingMode::Local;
    else if (mode == "polynomial") cfg.mode = RingMode::Polynomial;
    else fail(ErrorCode::InvalidInput, "ring must be 'local' or 'polynomial'");
  }
  return cfg;
}

inline Json closure_config_to_json(const ClosureConfig& cfg) {
  return Json{{"degree_slack", cfg.degree_slack},
              {"degree_bound", cfg.degree_bound ? Json(*cfg.degree_bound) : Json(nullptr)},
              {"chain_cap", cfg.chain_cap},
              {"ring", cfg.mode == RingMode::Local ? "local" : "polynomial"}};
}

inline Json poly_ideal_to_json(const PolyIdeal& i, const Ring& ring) { return polys_to_json(i.gens, ring); }

}  // namespace monoforge

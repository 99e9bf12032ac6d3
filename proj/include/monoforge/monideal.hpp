#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/exactlin.hpp"
#include "monoforge/polynomial.hpp"

namespace monoforge {

// Monomial ideal in r variables; gens is a lex-sorted antichain.
struct MonomialIdeal {
  std::size_t r = 0;
  bool zero = true;
  std::vector<Exponent> gens;

  static MonomialIdeal zero_ideal(std::size_t r) { return {r, true, {}}; }
  static MonomialIdeal unit(std::size_t r) { return {r, false, {Exponent(r, 0)}}; }

  bool contains(const Exponent& e) const {
    for (const auto& g : gens) {
      bool divides = true;
      for (std::size_t i = 0; i < r && divides; ++i) divides = g[i] <= e[i];
      if (divides) return true;
    }
    return false;
  }
  bool contains(const MonomialIdeal& o) const {
    if (o.zero) return true;
    if (zero) return false;
    for (const auto& g : o.gens)
      if (!contains(g)) return false;
    return true;
  }

  friend bool operator==(const MonomialIdeal&, const MonomialIdeal&) = default;
};

inline bool divides(const Exponent& a, const Exponent& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

inline MonomialIdeal minimalize(std::size_t r, std::vector<Exponent> vectors) {
  for (const auto& v : vectors) {
    if (v.size() != r) fail(ErrorCode::DimensionMismatch, "minimalize: exponent of wrong length");
    for (int x : v)
      if (x < 0) fail(ErrorCode::InvalidInput, "minimalize: negative exponent");
  }
  if (vectors.empty()) return MonomialIdeal::zero_ideal(r);
  std::sort(vectors.begin(), vectors.end(), GrlexLess{});
  vectors.erase(std::unique(vectors.begin(), vectors.end()), vectors.end());
  // Grlex order puts every divisor before its multiples.
  std::vector<Exponent> keep;
  for (const auto& v : vectors) {
    bool redundant = false;
    for (const auto& k : keep) redundant = redundant || divides(k, v);
    if (!redundant) keep.push_back(v);
  }
  std::sort(keep.begin(), keep.end());
  return {r, false, std::move(keep)};
}

inline std::optional<Exponent> is_principal(const MonomialIdeal& m) {
  if (m.zero || m.gens.size() != 1) return std::nullopt;
  return m.gens.front();
}

inline MonomialIdeal product(const MonomialIdeal& a, const MonomialIdeal& b) {
  if (a.r != b.r) fail(ErrorCode::DimensionMismatch, "product: ideals in different rings");
  if (a.zero || b.zero) return MonomialIdeal::zero_ideal(a.r);
  std::vector<Exponent> out;
  for (const auto& x : a.gens)
    for (const auto& y : b.gens) {
      Exponent z(a.r);
      for (std::size_t i = 0; i < a.r; ++i) z[i] = x[i] + y[i];
      out.push_back(z);
    }
  return minimalize(a.r, out);
}

inline MonomialIdeal sum(const MonomialIdeal& a, const MonomialIdeal& b) {
  if (a.r != b.r) fail(ErrorCode::DimensionMismatch, "sum: ideals in different rings");
  std::vector<Exponent> all = a.gens;
  all.insert(all.end(), b.gens.begin(), b.gens.end());
  return minimalize(a.r, all);
}

// images[i] is the exponent (in the new variables) that old variable i maps to.
inline Exponent pullback_exponent(const Exponent& e, const std::vector<Exponent>& images, std::size_t new_r) {
  Exponent out(new_r, 0);
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t k = 0; k < new_r; ++k) out[k] += e[i] * images[i][k];
  return out;
}

inline MonomialIdeal pullback(const MonomialIdeal& m, const std::vector<Exponent>& images, std::size_t new_r) {
  if (images.size() != m.r) fail(ErrorCode::DimensionMismatch, "pullback: wrong number of images");
  if (m.zero) return MonomialIdeal::zero_ideal(new_r);
  std::vector<Exponent> out;
  for (const auto& g : m.gens) out.push_back(pullback_exponent(g, images, new_r));
  return minimalize(new_r, out);
}

inline void check_center(std::size_t r, const std::vector<std::size_t>& center, std::size_t chart) {
  if (center.size() < 2) fail(ErrorCode::BadCenter, "a blowup center needs at least two divisor variables");
  for (std::size_t k = 0; k < center.size(); ++k) {
    if (center[k] >= r) fail(ErrorCode::BadCenter, "center index out of range");
    for (std::size_t j = 0; j < k; ++j)
      if (center[j] == center[k]) fail(ErrorCode::BadCenter, "repeated center index");
  }
  if (std::find(center.begin(), center.end(), chart) == center.end())
    fail(ErrorCode::BadCenter, "chart index must lie in the center");
}

// Chart `chart` of the blowup with the given center: u_i = u_chart * u_i for i in center, i != chart.
inline std::vector<Exponent> blowup_images(std::size_t r, const std::vector<std::size_t>& center, std::size_t chart) {
  check_center(r, center, chart);
  std::vector<Exponent> images(r, Exponent(r, 0));
  for (std::size_t i = 0; i < r; ++i) images[i][i] = 1;
  for (std::size_t i : center)
    if (i != chart) images[i][chart] = 1;
  return images;
}

// Pair of generators the strategy works on until one divides the other.
struct PairFocus {
  Exponent a, b;
  friend bool operator==(const PairFocus&, const PairFocus&) = default;
};

struct CenterChoice {
  std::vector<std::size_t> center;
  PairFocus focus;
};

inline bool is_minimal_generator(const MonomialIdeal& m, const Exponent& e) {
  return std::find(m.gens.begin(), m.gens.end(), e) != m.gens.end();
}

// Center for the focused pair: after removing the common factor, the support of
// the side of smaller degree s plus a smallest set S from the other side g with
// sum_S g >= |s|. In every chart (min(|s|,|g|), |s|+|g|) drops lexicographically.
inline std::vector<std::size_t> pair_center(const PairFocus& f) {
  std::size_t r = f.a.size();
  Exponent a(r), b(r);
  long na = 0, nb = 0;
  for (std::size_t i = 0; i < r; ++i) {
    int c = std::min(f.a[i], f.b[i]);
    a[i] = f.a[i] - c;
    b[i] = f.b[i] - c;
    na += a[i];
    nb += b[i];
  }
  const Exponent& s = nb < na ? b : a;
  const Exponent& g = nb < na ? a : b;
  long need = std::min(na, nb);
  std::vector<std::size_t> center;
  for (std::size_t i = 0; i < r; ++i)
    if (s[i] > 0) center.push_back(i);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < r; ++i)
    if (g[i] > 0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return g[x] > g[y]; });
  long got = 0;
  for (std::size_t i : order) {
    if (got >= need) break;
    center.push_back(i);
    got += g[i];
  }
  std::sort(center.begin(), center.end());
  return center;
}

// Next center of the principalization strategy, absent once principal. A focus
// that is no longer a pair of minimal generators is replaced by the two
// lexicographically smallest generators.
inline std::optional<CenterChoice> next_center(const MonomialIdeal& m, const std::optional<PairFocus>& focus = {}) {
  if (m.zero || m.gens.size() < 2) return std::nullopt;
  PairFocus f{m.gens[0], m.gens[1]};
  if (focus && focus->a != focus->b && is_minimal_generator(m, focus->a) && is_minimal_generator(m, focus->b))
    f = *focus;
  return CenterChoice{pair_center(f), f};
}

inline PairFocus pullback(const PairFocus& f, const std::vector<Exponent>& images, std::size_t new_r) {
  return {pullback_exponent(f.a, images, new_r), pullback_exponent(f.b, images, new_r)};
}

struct PrincipalizationNode {
  std::optional<std::size_t> parent;
  std::vector<std::size_t> center;  // blowup that produced this chart; empty at the root
  std::size_t chart = 0;
  std::size_t depth = 0;
  IntMatrix map;  // row i: exponents of root variable i in this chart
  MonomialIdeal ideal;
  std::optional<PairFocus> focus;
  std::vector<std::size_t> children;
};

struct PrincipalizationTree {
  std::vector<PrincipalizationNode> nodes;

  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].children.empty()) out.push_back(i);
    return out;
  }
  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
  }
  std::size_t blowups() const {
    std::size_t k = 0;
    for (const auto& n : nodes) k += n.children.empty() ? 0 : 1;
    return k;
  }
};

inline IntMatrix blowup_map(const IntMatrix& map, const std::vector<std::size_t>& center, std::size_t chart) {
  IntMatrix out = map;
  for (std::size_t i = 0; i < map.rows(); ++i)
    for (std::size_t k : center)
      if (k != chart) out(i, chart) += map(i, k);
  return out;
}

inline PrincipalizationTree principalize(const MonomialIdeal& m, std::size_t depth_cap = 64) {
  if (m.zero) fail(ErrorCode::InvalidInput, "principalize: zero ideal");
  PrincipalizationTree tree;
  tree.nodes.push_back({std::nullopt, {}, 0, 0, IntMatrix::identity(m.r), m, std::nullopt, {}});
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    std::size_t id = stack.back();
    stack.pop_back();
    auto choice = next_center(tree.nodes[id].ideal, tree.nodes[id].focus);
    if (!choice) continue;
    const auto& center = choice->center;
    if (tree.nodes[id].depth >= depth_cap)
      fail(ErrorCode::CutoffReached, "principalize: depth cap " + std::to_string(depth_cap) + " reached");
    std::vector<std::size_t> kids;
    for (std::size_t l : center) {
      auto images = blowup_images(m.r, center, l);
      PrincipalizationNode child;
      child.parent = id;
      child.center = center;
      child.chart = l;
      child.depth = tree.nodes[id].depth + 1;
      child.map = blowup_map(tree.nodes[id].map, center, l);
      child.ideal = pullback(tree.nodes[id].ideal, images, m.r);
      child.focus = pullback(choice->focus, images, m.r);
      kids.push_back(tree.nodes.size());
      tree.nodes.push_back(std::move(child));
    }
    tree.nodes[id].children = kids;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return tree;
}

// Monomial ideal of divisor-variable projections of the support of the generators.
inline MonomialIdeal toroidal_hull(const std::vector<Polynomial>& ideal, const std::vector<std::size_t>& divisor) {
  std::vector<Exponent> out;
  for (const auto& p : ideal)
    for (const auto& [e, c] : p.terms()) {
      Exponent proj;
      for (std::size_t i : divisor) proj.push_back(e[i]);
      out.push_back(proj);
    }
  return minimalize(divisor.size(), out);
}

// Generators as polynomials on a ring of nvars, placing variable k of m at index where[k].
inline std::vector<Polynomial> ideal_polynomials(const MonomialIdeal& m, const std::vector<std::size_t>& where,
                                                 std::size_t nvars) {
  std::vector<Polynomial> out;
  for (const auto& g : m.gens) {
    Exponent e(nvars, 0);
    for (std::size_t k = 0; k < m.r; ++k) e[where[k]] = g[k];
    out.push_back(make_monomial(nvars, e));
  }
  return out;
}

}  // namespace monoforge

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/monocore.hpp"
#include "monoforge/polynomial.hpp"

namespace monoforge {

enum class RingMode { Local, Polynomial };

struct ClosureConfig {
  long degree_slack = 4;
  std::optional<long> degree_bound;
  std::size_t chain_cap = 32;
  RingMode mode = RingMode::Local;
};

// Orders by terms from the top down; used to canonicalize generator lists.
inline bool poly_less(const Polynomial& a, const Polynomial& b) {
  auto ia = a.terms().rbegin(), ib = b.terms().rbegin();
  for (; ia != a.terms().rend() && ib != b.terms().rend(); ++ia, ++ib) {
    if (ia->first != ib->first) return GrlexLess{}(ia->first, ib->first);
    if (ia->second != ib->second) return ia->second < ib->second;
  }
  return ia == a.terms().rend() && ib != b.terms().rend();
}

inline Polynomial monic(const Polynomial& p) {
  if (p.is_zero()) return p;
  return p.scaled(1 / p.leading_term().second);
}

struct PolyIdeal {
  std::size_t nvars = 0;
  std::vector<Polynomial> gens;

  bool is_zero() const { return gens.empty(); }
  long degree() const {
    long d = 0;
    for (const auto& g : gens) d = std::max(d, g.degree());
    return d;
  }
  friend bool operator==(const PolyIdeal&, const PolyIdeal&) = default;
};

// Nonzero, monic, sorted, without repeats.
inline PolyIdeal make_ideal(std::size_t nvars, const std::vector<Polynomial>& gens) {
  PolyIdeal out{nvars, {}};
  for (const auto& g : gens) {
    if (g.nvars() != nvars) fail(ErrorCode::DimensionMismatch, "ideal generator on the wrong ring");
    if (!g.is_zero()) out.gens.push_back(monic(g));
  }
  std::sort(out.gens.begin(), out.gens.end(), poly_less);
  out.gens.erase(std::unique(out.gens.begin(), out.gens.end()), out.gens.end());
  return out;
}

inline void for_each_monomial(std::size_t n, long degree, const std::function<void(const Exponent&)>& f) {
  Exponent e(n, 0);
  std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
    if (i + 1 == n) {
      e[i] = static_cast<int>(left);
      f(e);
      return;
    }
    for (long k = left; k >= 0; --k) {
      e[i] = static_cast<int>(k);
      rec(i + 1, left - k);
    }
  };
  if (n == 0) {
    if (degree == 0) f(e);
    return;
  }
  rec(0, degree);
}

// Rows with distinct leading monomials; normal_form is the linear projection
// onto the span of the non-pivot monomials.
class Echelon {
 public:
  Polynomial normal_form(Polynomial p) const {
    Polynomial out(p.nvars());
    while (!p.is_zero()) {
      auto [e, c] = p.leading_term();
      auto it = rows_.find(e);
      if (it == rows_.end()) {
        out.add_term(e, c);
        p.add_term(e, -c);
      } else {
        p -= it->second.scaled(c);
      }
    }
    return out;
  }
  bool insert(const Polynomial& p) {
    Polynomial r = normal_form(p);
    if (r.is_zero()) return false;
    Exponent lead = r.leading_term().first;
    rows_.emplace(lead, monic(r));
    return true;
  }
  std::size_t size() const { return rows_.size(); }

 private:
  std::map<Exponent, Polynomial, GrlexLess> rows_;
};

// Bounded-degree membership in I (polynomial ring) or in I localized at the origin.
class IdealOracle {
 public:
  IdealOracle(const PolyIdeal& ideal, long degree_bound, RingMode mode)
      : n_(ideal.nvars), bound_(degree_bound), mode_(mode) {
    for (const auto& g : ideal.gens)
      if (!g.is_zero()) gens_.push_back(g);
    if (gens_.empty()) return;
    content_.assign(n_, 0);
    bool first = true;
    for (const auto& g : gens_)
      for (const auto& [e, c] : g.terms()) {
        for (std::size_t i = 0; i < n_; ++i) content_[i] = first ? e[i] : std::min(content_[i], e[i]);
        first = false;
      }
    Exponent neg(n_);
    for (std::size_t i = 0; i < n_; ++i) neg[i] = -content_[i];
    std::vector<bool> used(n_, false);
    for (auto& g : gens_) {
      g = g.shifted(neg);
      for (const auto& [e, c] : g.terms())
        for (std::size_t i = 0; i < n_; ++i) used[i] = used[i] || e[i] != 0;
    }
    where_.assign(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      if (used[i]) {
        where_[i] = used_.size();
        used_.push_back(i);
      }
    for (const auto& g : gens_) reduced_.push_back(project(g));
    bound_ -= total_degree(content_);
    for (const auto& g : reduced_) bound_ = std::max(bound_, g.degree());
  }

  long degree_bound() const { return bound_ + total_degree(content_); }

  bool contains(const Polynomial& p) {
    if (p.nvars() != n_) fail(ErrorCode::DimensionMismatch, "membership query on the wrong ring");
    if (p.is_zero()) return true;
    if (gens_.empty()) return false;
    // Split off the content monomial and the variables no generator uses.
    std::map<Exponent, Polynomial> parts;
    for (const auto& [e, c] : p.terms()) {
      Exponent rest(n_, 0), inner(used_.size(), 0);
      for (std::size_t i = 0; i < n_; ++i) {
        int k = e[i] - content_[i];
        if (k < 0) return false;
        if (where_[i] == n_)
          rest[i] = k;
        else
          inner[where_[i]] = k;
      }
      parts.try_emplace(rest, Polynomial(used_.size())).first->second.add_term(inner, c);
    }
    for (const auto& [rest, q] : parts)
      if (!contains_reduced(q)) return false;
    return true;
  }

  bool contains(const PolyIdeal& other) {
    for (const auto& g : other.gens)
      if (!contains(g)) return false;
    return true;
  }

 private:
  Polynomial project(const Polynomial& p) const {
    Polynomial out(used_.size());
    for (const auto& [e, c] : p.terms()) {
      Exponent f(used_.size());
      for (std::size_t k = 0; k < used_.size(); ++k) f[k] = e[used_[k]];
      out.add_term(f, c);
    }
    return out;
  }

  void build_span(long bound) {
    if (built_ >= bound) return;
    std::size_t m = used_.size();
    for (const auto& g : reduced_)
      for (long d = std::max(0L, built_ + 1 - g.degree()); g.degree() + d <= bound; ++d)
        for_each_monomial(m, d, [&](const Exponent& e) { span_.insert(g.shifted(e)); });
    built_ = bound;
  }

  bool contains_reduced(const Polynomial& q) {
    if (used_.empty()) return true;  // every generator is a nonzero constant
    build_span(bound_);
    Polynomial nf = span_.normal_form(q);
    if (nf.is_zero()) return true;
    if (mode_ == RingMode::Polynomial) return false;
    for (const auto& g : reduced_)
      if (sgn(g.constant_term()) != 0) return true;
    // q is in I localized iff q in I + m*q within the degree bound.
    Echelon local;
    std::size_t m = used_.size();
    for (long d = 1; q.degree() + d <= bound_; ++d) {
      for_each_monomial(m, d, [&](const Exponent& e) { local.insert(span_.normal_form(q.shifted(e))); });
      if (local.normal_form(nf).is_zero()) return true;
    }
    return false;
  }

  std::size_t n_;
  long bound_;
  RingMode mode_;
  std::vector<Polynomial> gens_, reduced_;
  Exponent content_;
  std::vector<std::size_t> used_, where_;
  Echelon span_;
  long built_ = -1;
};


inline long resolve_bound(const ClosureConfig& cfg, long input_degree) {
  long d = input_degree + cfg.degree_slack;
  if (cfg.degree_bound) d = std::max(*cfg.degree_bound, input_degree);
  return d;
}

inline bool member(const Polynomial& p, const PolyIdeal& ideal, const ClosureConfig& cfg = {}) {
  IdealOracle oracle(ideal, resolve_bound(cfg, std::max(ideal.degree(), p.degree())), cfg.mode);
  return oracle.contains(p);
}

inline bool ideals_equal(const PolyIdeal& a, const PolyIdeal& b, const ClosureConfig& cfg = {}) {
  long d = resolve_bound(cfg, std::max(a.degree(), b.degree()));
  IdealOracle oa(a, d, cfg.mode), ob(b, d, cfg.mode);
  return oa.contains(b) && ob.contains(a);
}

struct ChainReport {
  std::vector<PolyIdeal> chain;  // I_0, ..., I_mu
  std::size_t mu = 0;
  long degree_bound = 0;
  const PolyIdeal& closure() const { return chain.back(); }
};

// I_{k+1} = I_k + Delta(I_k); only generators new at step k need differentiating.
inline ChainReport delta_chain(const PolyIdeal& ideal, const std::vector<LogVectorField>& delta,
                               const ClosureConfig& cfg = {}) {
  ChainReport rep;
  PolyIdeal current = make_ideal(ideal.nvars, ideal.gens);
  rep.degree_bound = resolve_bound(cfg, current.degree());
  rep.chain.push_back(current);
  std::vector<Polynomial> fresh = current.gens;
  for (std::size_t k = 0;; ++k) {
    if (fresh.empty()) {
      rep.mu = k;
      return rep;
    }
    if (k >= cfg.chain_cap)
      fail(ErrorCode::CutoffReached, "delta_chain: no stabilization within " + std::to_string(cfg.chain_cap) + " steps");
    IdealOracle oracle(current, rep.degree_bound, cfg.mode);
    std::vector<Polynomial> added;
    for (const auto& g : fresh)
      for (const auto& x : delta) {
        Polynomial d = apply_field(x, g);
        if (!d.is_zero() && !oracle.contains(d)) added.push_back(d);
      }
    added = make_ideal(ideal.nvars, added).gens;
    if (added.empty()) {
      rep.mu = k;
      return rep;
    }
    std::vector<Polynomial> all = current.gens;
    all.insert(all.end(), added.begin(), added.end());
    current = make_ideal(ideal.nvars, all);
    rep.chain.push_back(current);
    fresh = added;
  }
}

inline std::vector<std::size_t> free_directions(const std::vector<LogVectorField>& delta) {
  std::vector<std::size_t> out;
  if (delta.empty()) return out;
  for (std::size_t i = 0; i < delta.front().size(); ++i)
    for (const auto& x : delta)
      if (sgn(x.plain_coeffs[i]) != 0) {
        out.push_back(i);
        break;
      }
  return out;
}

// Eigencomponents of the coefficients of the free-variable monomials of each generator.
inline PolyIdeal eigen_generators(const PolyIdeal& ideal, const std::vector<LogVectorField>& delta,
                                  const ClosureConfig& cfg = {}) {
  std::size_t n = ideal.nvars;
  auto free = free_directions(delta);
  std::vector<Polynomial> out;
  for (const auto& g : ideal.gens) {
    std::map<Exponent, Polynomial> coeffs;
    for (const auto& [e, c] : g.terms()) {
      Exponent key(free.size()), rest = e;
      for (std::size_t k = 0; k < free.size(); ++k) {
        key[k] = e[free[k]];
        rest[free[k]] = 0;
      }
      coeffs.try_emplace(key, Polynomial(n)).first->second.add_term(rest, c);
    }
    for (const auto& [key, coeff] : coeffs)
      for (const auto& [lambda, comp] : eigen_decompose(coeff, delta)) out.push_back(comp);
  }
  PolyIdeal gens = make_ideal(n, out);
  ChainReport closure = delta_chain(ideal, delta, cfg);
  ClosureConfig check = cfg;
  check.degree_bound = closure.degree_bound;
  ensure(ideals_equal(gens, closure.closure(), check), "eigen generators differ from the chain closure");
  return gens;
}

struct PartialReport {
  std::size_t nu = 1;
  PolyIdeal j1;
  ChainReport chain;
  const PolyIdeal& closure() const { return chain.closure(); }
};

// J_1 = Delta(psi); nu = mu(J_1) + 1.
inline PartialReport nu_partial(const std::vector<LogVectorField>& delta, const Polynomial& psi,
                                const ClosureConfig& cfg = {}) {
  std::vector<Polynomial> j1;
  for (const auto& x : delta) j1.push_back(apply_field(x, psi));
  PartialReport rep;
  rep.j1 = make_ideal(psi.nvars(), j1);
  ClosureConfig c = cfg;
  if (!c.degree_bound) c.degree_bound = psi.degree() + cfg.degree_slack;
  rep.chain = delta_chain(rep.j1, delta, c);
  rep.nu = rep.chain.mu + 1;
  return rep;
}

inline PartialReport nu_partial(const MonomialMorphism& phi, const Polynomial& psi, const ClosureConfig& cfg = {}) {
  return nu_partial(tangent_basis(phi), psi, cfg);
}

inline ChainReport nu_ideal(const PolyIdeal& ideal, const MonomialMorphism& phi, const ClosureConfig& cfg = {}) {
  return delta_chain(ideal, tangent_basis(phi), cfg);
}

// The divisor monomial generating the ideal, when it is principal monomial.
inline std::optional<Exponent> principal_monomial(const PolyIdeal& ideal, const std::vector<std::size_t>& divisor,
                                                  long degree_bound, RingMode mode = RingMode::Local) {
  if (ideal.is_zero()) return std::nullopt;
  std::size_t n = ideal.nvars;
  Exponent gamma(n, 0);
  bool first = true;
  for (const auto& g : ideal.gens)
    for (const auto& [e, c] : g.terms()) {
      for (std::size_t i : divisor) gamma[i] = first ? e[i] : std::min(gamma[i], e[i]);
      first = false;
    }
  IdealOracle oracle(ideal, std::max(degree_bound, total_degree(gamma)), mode);
  if (!oracle.contains(make_monomial(n, gamma))) return std::nullopt;
  return gamma;
}

enum class NormalForm { Zero, IndependentMonomial, DependentMonomialUnit, FreeCoordinate };

inline std::string normal_form_name(NormalForm f) {
  switch (f) {
    case NormalForm::Zero: return "zero";
    case NormalForm::IndependentMonomial: return "independent-monomial";
    case NormalForm::DependentMonomialUnit: return "dependent-monomial-unit";
    case NormalForm::FreeCoordinate: return "free-coordinate";
  }
  return "?";
}

struct PremonomialResult {
  bool premonomial = false;
  NormalForm form = NormalForm::Zero;
  Polynomial g, phi;           // psi = g + phi
  Exponent gamma;              // closure generator u^gamma
  Polynomial cofactor;         // phi = u^gamma * cofactor
  std::optional<std::size_t> coordinate;  // free variable replaced by the cofactor
  Rational eta = 0;
  std::string note;
  PartialReport report;
};

// Terms of psi free of the free variables and killed by every diagonal field.
inline Polynomial dependent_part(const std::vector<LogVectorField>& delta, const Polynomial& psi) {
  auto free = free_directions(delta);
  Polynomial g(psi.nvars());
  for (const auto& [e, c] : psi.terms()) {
    bool keep = true;
    for (std::size_t i : free) keep = keep && e[i] == 0;
    for (const auto& x : delta) {
      if (!keep || !x.is_diagonal()) continue;
      Rational w = 0;
      for (std::size_t i = 0; i < e.size(); ++i) w += x.log_coeffs[i] * e[i];
      keep = sgn(w) == 0;
    }
    if (keep) g.add_term(e, c);
  }
  return g;
}

inline bool killed_by_diagonal(const std::vector<LogVectorField>& delta, const Exponent& e) {
  for (const auto& x : delta) {
    if (!x.is_diagonal()) continue;
    Rational w = 0;
    for (std::size_t i = 0; i < e.size(); ++i) w += x.log_coeffs[i] * e[i];
    if (sgn(w) != 0) return false;
  }
  return true;
}

inline PremonomialResult is_premonomial(const std::vector<LogVectorField>& delta, const std::vector<std::size_t>& divisor,
                                        const Polynomial& psi, const ClosureConfig& cfg = {}) {
  PremonomialResult res;
  std::size_t n = psi.nvars();
  res.report = nu_partial(delta, psi, cfg);
  res.g = Polynomial(n);
  res.phi = Polynomial(n);
  res.cofactor = Polynomial(n);
  res.gamma.assign(n, 0);
  if (res.report.j1.is_zero()) {
    res.premonomial = true;
    res.form = NormalForm::Zero;
    res.g = psi;
    return res;
  }
  auto gamma = principal_monomial(res.report.closure(), divisor, res.report.chain.degree_bound, cfg.mode);
  if (!gamma) {
    res.note = "closure is not principal monomial";
    return res;
  }
  res.gamma = *gamma;
  if (res.report.nu != 1) {
    res.note = "nu = " + std::to_string(res.report.nu);
    return res;
  }
  res.g = dependent_part(delta, psi);
  res.phi = psi - res.g;
  auto cof = try_divide(res.phi, make_monomial(n, res.gamma));
  if (!cof) {
    res.note = "remainder not divisible by the closure generator";
    return res;
  }
  res.cofactor = *cof;
  bool dependent = killed_by_diagonal(delta, res.gamma);
  Rational c0 = cof->constant_term();
  if (sgn(c0) != 0) {
    if (dependent) {
      res.note = "dependent monomial times a unit left in the remainder";
      return res;
    }
    res.premonomial = true;
    res.form = NormalForm::IndependentMonomial;
    res.eta = c0;
    return res;
  }
  for (std::size_t l : free_directions(delta)) {
    if (sgn(cof->derivative(l).constant_term()) == 0) continue;
    res.premonomial = true;
    res.coordinate = l;
    bool trivial = std::all_of(res.gamma.begin(), res.gamma.end(), [](int x) { return x == 0; });
    res.form = trivial ? NormalForm::FreeCoordinate : NormalForm::DependentMonomialUnit;
    return res;
  }
  res.note = "no free coordinate absorbs the cofactor";
  return res;
}

// Order of a relation in t: mu of (R) under d/dt (induced) or t d/dt (extended).
inline std::size_t relation_order(const Polynomial& r, std::size_t t_index, bool extended, const ClosureConfig& cfg = {}) {
  if (r.is_zero()) fail(ErrorCode::InvalidInput, "relation_order of zero");
  if (sgn(r.constant_term()) != 0) fail(ErrorCode::InvalidInput, "relation must vanish at the point");
  LogVectorField x = extended ? LogVectorField(r.nvars()) : LogVectorField::plain(r.nvars(), t_index);
  if (extended) x.log_coeffs[t_index] = 1;
  return delta_chain(make_ideal(r.nvars(), {r}), {x}, cfg).mu;
}

}  // namespace monoforge

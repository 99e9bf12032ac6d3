#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library routine it is meant to check.

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "monoforge/exactlin.hpp"

namespace oracle {

using monoforge::Integer;
using monoforge::IntMatrix;
using monoforge::IntVector;
using monoforge::Rational;
using monoforge::RatVector;

inline IntMatrix random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols, long lo, long hi) {
  std::uniform_int_distribution<long> dist(lo, hi);
  IntMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

// Plain Gauss-Jordan over the rationals.
inline std::size_t rank_of_rows(std::vector<RatVector> rows) {
  std::size_t rank = 0;
  std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t p = rank;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[rank]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == rank || rows[i][c] == 0) continue;
      Rational f = rows[i][c] / rows[rank][c];
      for (std::size_t j = 0; j < cols; ++j) rows[i][j] -= f * rows[rank][j];
    }
    ++rank;
  }
  return rank;
}

inline std::vector<RatVector> rational_rows(const IntMatrix& m) {
  std::vector<RatVector> rows(m.rows(), RatVector(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  return rows;
}

inline std::size_t rank_by_rationals(const IntMatrix& m) { return rank_of_rows(rational_rows(m)); }

// Coefficients c with sum c_i rows_i = target, by brute elimination on the augmented system.
inline std::optional<RatVector> combination(const std::vector<RatVector>& rows, const RatVector& target) {
  std::size_t k = rows.size(), n = target.size();
  std::vector<RatVector> eq(n, RatVector(k + 1));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) eq[j][i] = rows[i][j];
    eq[j][k] = target[j];
  }
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < k && r < n; ++c) {
    std::size_t p = r;
    while (p < n && eq[p][c] == 0) ++p;
    if (p == n) continue;
    std::swap(eq[p], eq[r]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == r || eq[i][c] == 0) continue;
      Rational f = eq[i][c] / eq[r][c];
      for (std::size_t j = 0; j <= k; ++j) eq[i][j] -= f * eq[r][j];
    }
    piv.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < n; ++i)
    if (eq[i][k] != 0) return std::nullopt;
  RatVector x(k, Rational(0));
  for (std::size_t i = 0; i < piv.size(); ++i) x[piv[i]] = eq[i][k] / eq[i][piv[i]];
  return x;
}

inline bool integral(const RatVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& q) { return q.get_den() == 1; });
}

inline bool row_in_lattice(const IntMatrix& basis, const IntVector& v) {
  auto c = combination(rational_rows(basis), RatVector(v.begin(), v.end()));
  return c && integral(*c);
}

inline bool same_row_lattice(const IntMatrix& a, const IntMatrix& b) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    if (!row_in_lattice(b, a.row(i))) return false;
  for (std::size_t i = 0; i < b.rows(); ++i)
    if (!row_in_lattice(a, b.row(i))) return false;
  return true;
}

inline bool same_rational_span(const IntMatrix& a, const IntMatrix& b) {
  IntMatrix both = a;
  for (std::size_t i = 0; i < b.rows(); ++i) both.append_row(b.row(i));
  std::size_t ra = rank_by_rationals(a), rb = rank_by_rationals(b), r = rank_by_rationals(both);
  return ra == r && rb == r;
}

inline bool is_hermite(const IntMatrix& h) {
  long last_pivot = -1;
  bool zero_seen = false;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    std::size_t j = 0;
    while (j < h.cols() && h(i, j) == 0) ++j;
    if (j == h.cols()) {
      zero_seen = true;
      continue;
    }
    if (zero_seen) return false;
    if (static_cast<long>(j) <= last_pivot) return false;
    if (h(i, j) <= 0) return false;
    for (std::size_t k = 0; k < i; ++k)
      if (h(k, j) < 0 || h(k, j) >= h(i, j)) return false;
    for (std::size_t k = i + 1; k < h.rows(); ++k)
      if (h(k, j) != 0) return false;
    last_pivot = static_cast<long>(j);
  }
  return true;
}

inline IntVector cross(const IntVector& a, const IntVector& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Every small integer kernel vector must be an integer combination of k's rows.
inline bool kernel_is_saturated(const IntMatrix& a, const IntMatrix& k, long bound) {
  std::size_t r = a.cols();
  IntVector v(r);
  std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
    if (i == r) {
      for (std::size_t j = 0; j < a.rows(); ++j)
        if (monoforge::dot(a.row(j), v) != 0) return true;
      return row_in_lattice(k, v);
    }
    for (long x = -bound; x <= bound; ++x) {
      v[i] = x;
      if (!rec(i + 1)) return false;
    }
    return true;
  };
  return rec(0);
}

inline Integer det_cofactor(const std::vector<IntVector>& m) {
  std::size_t n = m.size();
  if (n == 0) return 1;
  if (n == 1) return m[0][0];
  Integer s = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (m[0][j] == 0) continue;
    std::vector<IntVector> minor;
    for (std::size_t i = 1; i < n; ++i) {
      IntVector row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(m[i][c]);
      minor.push_back(row);
    }
    Integer d = m[0][j] * det_cofactor(minor);
    s += (j % 2 ? -d : d);
  }
  return s;
}

inline Integer gcd_of_maximal_minors(const IntMatrix& a) {
  std::size_t p = a.rows(), r = a.cols();
  Integer g = 0;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (pick.size() == p) {
      std::vector<IntVector> sub(p);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t c : pick) sub[i].push_back(a(i, c));
      g = monoforge::gcd(g, det_cofactor(sub));
      return;
    }
    for (std::size_t c = start; c < r; ++c) {
      pick.push_back(c);
      rec(c + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return g;
}

inline Rational frac(long n, long d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

// lcm of denominators over all gamma in [0,1)^p with common denominator <= maxden
// and gamma*a integral.
inline Integer brute_denominator_bound(const IntMatrix& a, long maxden) {
  std::size_t p = a.rows();
  Integer d = 1;
  for (long k = 1; k <= maxden; ++k) {
    std::vector<long> num(p, 0);
    for (;;) {
      bool ok = true;
      for (std::size_t j = 0; j < a.cols() && ok; ++j) {
        Rational s = 0;
        for (std::size_t i = 0; i < p; ++i) s += frac(num[i], k) * Rational(a(i, j));
        if (s.get_den() != 1) ok = false;
      }
      if (ok)
        for (long n : num) d = monoforge::lcm(d, frac(n, k).get_den());
      std::size_t i = 0;
      while (i < p && ++num[i] == k) num[i++] = 0;
      if (i == p) break;
    }
  }
  return d;
}

}  // namespace oracle

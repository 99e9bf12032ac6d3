#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "monoforge/error.hpp"
#include "monoforge/rational.hpp"

namespace monoforge {

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::initializer_list<std::initializer_list<long>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) fail(ErrorCode::BadShape, "ragged matrix literal");
      for (long v : row) data_.emplace_back(v);
    }
  }
  static IntMatrix from_rows(const std::vector<IntVector>& rows, std::size_t cols) {
    IntMatrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) fail(ErrorCode::BadShape, "ragged matrix rows");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }
  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Integer& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Integer& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  IntVector row(std::size_t i) const {
    return IntVector(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }
  IntVector col(std::size_t j) const {
    IntVector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_row(std::size_t i, const IntVector& v) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
  }
  void append_row(const IntVector& v) {
    if (rows_ == 0 && cols_ == 0) cols_ = v.size();
    if (v.size() != cols_) fail(ErrorCode::BadShape, "appended row has wrong length");
    data_.insert(data_.end(), v.begin(), v.end());
    ++rows_;
  }
  std::vector<IntVector> row_list() const {
    std::vector<IntVector> out;
    for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
    return out;
  }

  IntMatrix transpose() const {
    IntMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }
  void swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
  }
  // row[dst] += f * row[src]
  void add_row(std::size_t dst, std::size_t src, const Integer& f) {
    if (f == 0) return;
    for (std::size_t j = 0; j < cols_; ++j) (*this)(dst, j) += f * (*this)(src, j);
  }
  void add_col(std::size_t dst, std::size_t src, const Integer& f) {
    if (f == 0) return;
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, dst) += f * (*this)(i, src);
  }
  void negate_row(std::size_t i) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = -(*this)(i, j);
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Integer& z) { return z == 0; });
  }

  friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols_ != b.rows_) fail(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    IntMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Integer& x = a(i, k);
        if (x == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += x * b(k, j);
      }
    return c;
  }

  friend std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
    os << '[';
    for (std::size_t i = 0; i < m.rows_; ++i) {
      os << (i ? ",[" : "[");
      for (std::size_t j = 0; j < m.cols_; ++j) os << (j ? "," : "") << m(i, j).get_str();
      os << ']';
    }
    return os << ']';
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Integer> data_;
};

inline Integer dot(const IntVector& a, const IntVector& b) {
  Integer s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline IntVector vec_mat(const IntVector& v, const IntMatrix& m) {
  IntVector out(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (v[i] != 0)
      for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * m(i, j);
  return out;
}

inline RatVector vec_mat(const RatVector& v, const IntMatrix& m) {
  RatVector out(m.cols(), Rational(0));
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (v[i] != 0)
      for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * Rational(m(i, j));
  return out;
}

// Rank over the rationals by fraction-free elimination.
inline std::size_t rank(IntMatrix m) {
  std::size_t r = 0;
  Integer prev = 1;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t piv = r;
    while (piv < m.rows() && m(piv, c) == 0) ++piv;
    if (piv == m.rows()) continue;
    m.swap_rows(piv, r);
    for (std::size_t i = r + 1; i < m.rows(); ++i) {
      for (std::size_t j = c + 1; j < m.cols(); ++j)
        m(i, j) = (m(r, c) * m(i, j) - m(i, c) * m(r, j)) / prev;
      m(i, c) = 0;
    }
    prev = m(r, c);
    ++r;
  }
  return r;
}

inline Integer determinant(IntMatrix m) {
  if (m.rows() != m.cols()) fail(ErrorCode::NotSquare, "determinant of a non-square matrix");
  std::size_t n = m.rows();
  Integer prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && m(piv, k) == 0) ++piv;
    if (piv == n) return 0;
    if (piv != k) {
      m.swap_rows(piv, k);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j)
        m(i, j) = (m(k, k) * m(i, j) - m(i, k) * m(k, j)) / prev;
      m(i, k) = 0;
    }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

struct HermiteResult {
  IntMatrix h;
  IntMatrix u;
  std::vector<std::size_t> pivots;  // pivot column of each nonzero row
};

// Row-style Hermite normal form: u*m = h, pivots positive, entries above a
// pivot reduced into [0, pivot).
inline HermiteResult hermite_normal_form(const IntMatrix& m) {
  IntMatrix h = m;
  IntMatrix u = IntMatrix::identity(m.rows());
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < h.cols() && row < h.rows(); ++col) {
    bool found = false;
    for (;;) {
      std::size_t best = h.rows();
      for (std::size_t i = row; i < h.rows(); ++i)
        if (h(i, col) != 0 && (best == h.rows() || abs(h(i, col)) < abs(h(best, col)))) best = i;
      if (best == h.rows()) break;
      found = true;
      h.swap_rows(best, row);
      u.swap_rows(best, row);
      bool clean = true;
      for (std::size_t i = row + 1; i < h.rows(); ++i) {
        if (h(i, col) == 0) continue;
        Integer q = h(i, col) / h(row, col);
        h.add_row(i, row, -q);
        u.add_row(i, row, -q);
        if (h(i, col) != 0) clean = false;
      }
      if (clean) break;
    }
    if (!found) continue;
    if (h(row, col) < 0) {
      h.negate_row(row);
      u.negate_row(row);
    }
    for (std::size_t i = 0; i < row; ++i) {
      Integer q = floor_div(h(i, col), h(row, col));
      h.add_row(i, row, -q);
      u.add_row(i, row, -q);
    }
    pivots.push_back(col);
    ++row;
  }
  return {std::move(h), std::move(u), std::move(pivots)};
}

struct SmithResult {
  IntMatrix s;
  IntMatrix u;
  IntMatrix v;
  IntVector invariant_factors;  // nonzero diagonal entries
};

// u*m*v = s, s diagonal with d_1 | d_2 | ... and nonnegative entries.
inline SmithResult smith_normal_form(const IntMatrix& m) {
  IntMatrix s = m;
  IntMatrix u = IntMatrix::identity(m.rows());
  IntMatrix v = IntMatrix::identity(m.cols());
  IntVector factors;
  std::size_t n = std::min(m.rows(), m.cols());
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t bi = s.rows(), bj = s.cols();
    for (std::size_t i = t; i < s.rows(); ++i)
      for (std::size_t j = t; j < s.cols(); ++j)
        if (s(i, j) != 0 && (bi == s.rows() || abs(s(i, j)) < abs(s(bi, bj)))) {
          bi = i;
          bj = j;
        }
    if (bi == s.rows()) break;
    s.swap_rows(t, bi);
    u.swap_rows(t, bi);
    s.swap_cols(t, bj);
    v.swap_cols(t, bj);
    for (;;) {
      for (std::size_t i = t + 1; i < s.rows(); ++i) {
        if (s(i, t) == 0) continue;
        Integer q = s(i, t) / s(t, t);
        s.add_row(i, t, -q);
        u.add_row(i, t, -q);
      }
      for (std::size_t j = t + 1; j < s.cols(); ++j) {
        if (s(t, j) == 0) continue;
        Integer q = s(t, j) / s(t, t);
        s.add_col(j, t, -q);
        v.add_col(j, t, -q);
      }
      std::size_t ri = s.rows(), cj = s.cols();
      for (std::size_t i = t + 1; i < s.rows(); ++i)
        if (s(i, t) != 0 && (ri == s.rows() || abs(s(i, t)) < abs(s(ri, t)))) ri = i;
      for (std::size_t j = t + 1; j < s.cols(); ++j)
        if (s(t, j) != 0 && (cj == s.cols() || abs(s(t, j)) < abs(s(t, cj)))) cj = j;
      if (ri != s.rows() || cj != s.cols()) {
        bool use_row = ri != s.rows() && (cj == s.cols() || abs(s(ri, t)) <= abs(s(t, cj)));
        if (use_row) {
          s.swap_rows(t, ri);
          u.swap_rows(t, ri);
        } else {
          s.swap_cols(t, cj);
          v.swap_cols(t, cj);
        }
        continue;
      }
      std::size_t bad = s.rows();
      for (std::size_t i = t + 1; i < s.rows() && bad == s.rows(); ++i)
        for (std::size_t j = t + 1; j < s.cols(); ++j)
          if (s(i, j) % s(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad == s.rows()) break;
      s.add_row(t, bad, 1);
      u.add_row(t, bad, 1);
    }
    if (s(t, t) < 0) {
      s.negate_row(t);
      u.negate_row(t);
    }
    factors.push_back(s(t, t));
  }
  return {std::move(s), std::move(u), std::move(v), std::move(factors)};
}

// Saturated lattice basis of {g : m*g = 0}, canonical (Hermite) form. Works for any m.
inline IntMatrix kernel_lattice(const IntMatrix& m) {
  std::size_t r = m.cols();
  if (m.rows() == 0) return IntMatrix::identity(r);
  HermiteResult hr = hermite_normal_form(m.transpose());
  IntMatrix basis(0, r);
  for (std::size_t i = hr.pivots.size(); i < hr.u.rows(); ++i) basis.append_row(hr.u.row(i));
  if (basis.rows() == 0) return IntMatrix(0, r);
  IntMatrix h = hermite_normal_form(basis).h;
  IntMatrix out(0, r);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    IntVector row = h.row(i);
    if (std::any_of(row.begin(), row.end(), [](const Integer& z) { return z != 0; }))
      out.append_row(row);
  }
  return out;
}

inline void require_independent_rows(const IntMatrix& a, const char* who) {
  if (rank(a) != a.rows())
    fail(ErrorCode::DependentRows, std::string(who) + ": rows are linearly dependent");
}

// Rows span the saturated integer kernel of a (one row per missing rank).
inline IntMatrix integer_kernel(const IntMatrix& a) {
  require_independent_rows(a, "integer_kernel");
  return kernel_lattice(a);
}

// Canonical saturated basis of the rational span of the given rows.
inline IntMatrix saturate_rows(const IntMatrix& rows) {
  if (rows.rows() == 0) return IntMatrix(0, rows.cols());
  return kernel_lattice(kernel_lattice(rows));
}

// Solves x*a = b over the rationals (a is k x n, b has length n).
inline std::optional<RatVector> solve_left(const std::vector<RatVector>& a, const RatVector& b) {
  std::size_t k = a.size();
  std::size_t n = b.size();
  // Work on the transposed system a^T x^T = b^T: n equations, k unknowns.
  std::vector<RatVector> aug(n, RatVector(k + 1));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) aug[j][i] = a[i][j];
    aug[j][k] = b[j];
  }
  std::vector<std::size_t> pivcol;
  std::size_t row = 0;
  for (std::size_t c = 0; c < k && row < n; ++c) {
    std::size_t p = row;
    while (p < n && aug[p][c] == 0) ++p;
    if (p == n) continue;
    std::swap(aug[p], aug[row]);
    Rational inv = 1 / aug[row][c];
    for (auto& x : aug[row]) x *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == row || aug[i][c] == 0) continue;
      Rational f = aug[i][c];
      for (std::size_t j = c; j <= k; ++j) aug[i][j] -= f * aug[row][j];
    }
    pivcol.push_back(c);
    ++row;
  }
  for (std::size_t i = row; i < n; ++i)
    if (aug[i][k] != 0) return std::nullopt;
  RatVector x(k, Rational(0));
  for (std::size_t i = 0; i < pivcol.size(); ++i) x[pivcol[i]] = aug[i][k];
  return x;
}

inline std::vector<RatVector> to_rational_rows(const IntMatrix& a) {
  std::vector<RatVector> rows(a.rows(), RatVector(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) rows[i][j] = a(i, j);
  return rows;
}

// gamma with gamma*a = b when b is in the rational row span of a.
inline std::optional<RatVector> rational_dependence(const IntMatrix& a, const IntVector& b) {
  if (b.size() != a.cols()) fail(ErrorCode::DimensionMismatch, "rational_dependence: length mismatch");
  RatVector rb(b.begin(), b.end());
  return solve_left(to_rational_rows(a), rb);
}

inline bool in_rational_span(const IntMatrix& a, const IntVector& b) {
  IntMatrix ext = a;
  ext.append_row(b);
  return rank(ext) == rank(a);
}

// Smallest d with d*gamma integral whenever gamma*a is integral.
inline Integer denominator_bound(const IntMatrix& a) {
  require_independent_rows(a, "denominator_bound");
  SmithResult sr = smith_normal_form(a);
  Integer d = 1;
  for (const auto& f : sr.invariant_factors) d = lcm(d, f);
  return d;
}

inline Integer lcm_of_denominators(const RatVector& v) {
  Integer d = 1;
  for (const auto& q : v) d = lcm(d, q.get_den());
  return d;
}

}  // namespace monoforge

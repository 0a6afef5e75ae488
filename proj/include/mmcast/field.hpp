#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmcast/error.hpp"

namespace mmcast {

using FieldValue = std::uint32_t;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Arithmetic in the prime field F_q. Moduli up to 2^31 keep products in 64 bits.
class PrimeField {
 public:
  explicit PrimeField(std::uint64_t q) : q_(static_cast<FieldValue>(q)) {
    if (q >= (std::uint64_t{1} << 31) || !is_prime(q))
      throw Error(ErrorCode::InvalidModulus, "field modulus must be a prime below 2^31",
                  std::to_string(q));
  }

  FieldValue modulus() const noexcept { return q_; }

  FieldValue reduce(std::int64_t v) const noexcept {
    auto r = v % static_cast<std::int64_t>(q_);
    return static_cast<FieldValue>(r < 0 ? r + q_ : r);
  }
  FieldValue add(FieldValue a, FieldValue b) const noexcept {
    std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<FieldValue>(s >= q_ ? s - q_ : s);
  }
  FieldValue sub(FieldValue a, FieldValue b) const noexcept {
    return a >= b ? a - b : static_cast<FieldValue>(std::uint64_t{a} + q_ - b);
  }
  FieldValue neg(FieldValue a) const noexcept { return a == 0 ? 0 : q_ - a; }
  FieldValue mul(FieldValue a, FieldValue b) const noexcept {
    return static_cast<FieldValue>(std::uint64_t{a} * b % q_);
  }
  FieldValue pow(FieldValue a, std::uint64_t e) const noexcept {
    FieldValue result = 1 % q_;
    while (e) {
      if (e & 1) result = mul(result, a);
      a = mul(a, a);
      e >>= 1;
    }
    return result;
  }
  FieldValue inv(FieldValue a) const {
    if (a % q_ == 0) throw Error(ErrorCode::DivisionByZero, "inverse of zero in F_q");
    return pow(a, q_ - 2);
  }
  FieldValue div(FieldValue a, FieldValue b) const { return mul(a, inv(b)); }

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  FieldValue q_;
};

// A single value tagged with its modulus; mixing moduli is an error.
class FieldElement {
 public:
  FieldElement(std::int64_t value, std::uint64_t modulus)
      : field_(modulus), value_(field_.reduce(value)) {}

  FieldValue value() const noexcept { return value_; }
  FieldValue modulus() const noexcept { return field_.modulus(); }

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    a.check(b);
    return {a.field_, a.field_.add(a.value_, b.value_)};
  }
  friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    a.check(b);
    return {a.field_, a.field_.sub(a.value_, b.value_)};
  }
  friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    a.check(b);
    return {a.field_, a.field_.mul(a.value_, b.value_)};
  }
  friend FieldElement operator/(const FieldElement& a, const FieldElement& b) {
    a.check(b);
    return {a.field_, a.field_.div(a.value_, b.value_)};
  }
  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.modulus() == b.modulus() && a.value_ == b.value_;
  }

 private:
  FieldElement(PrimeField f, FieldValue v) : field_(f), value_(v) {}
  void check(const FieldElement& other) const {
    if (other.modulus() != modulus())
      throw Error(ErrorCode::ModulusMismatch, "field elements have different moduli",
                  std::to_string(modulus()) + "," + std::to_string(other.modulus()));
  }

  PrimeField field_;
  FieldValue value_;
};

// Dense row-major matrix over F_q.
class FieldMatrix {
 public:
  FieldMatrix(std::size_t rows, std::size_t cols, const PrimeField& field)
      : rows_(rows), cols_(cols), field_(field), data_(rows * cols, 0) {}

  static FieldMatrix identity(std::size_t n, const PrimeField& field) {
    FieldMatrix m(n, n, field);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  // Entries are reduced mod q; rows must be of equal length.
  static FieldMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows,
                               const PrimeField& field, std::size_t cols_if_empty = 0) {
    std::size_t cols = rows.empty() ? cols_if_empty : rows.front().size();
    FieldMatrix m(rows.size(), cols, field);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols)
        throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows", std::to_string(i));
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = field.reduce(rows[i][j]);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const PrimeField& field() const noexcept { return field_; }

  FieldValue& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  FieldValue operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const FieldValue> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<std::vector<FieldValue>> to_rows() const {
    std::vector<std::vector<FieldValue>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  FieldMatrix transpose() const {
    FieldMatrix t(cols_, rows_, field_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  // Vertical concatenation [this; below].
  FieldMatrix stack(const FieldMatrix& below) const {
    check_field(below);
    if (below.cols_ != cols_)
      throw Error(ErrorCode::DimensionMismatch, "stacking matrices with different widths");
    FieldMatrix m(rows_ + below.rows_, cols_, field_);
    std::copy(data_.begin(), data_.end(), m.data_.begin());
    std::copy(below.data_.begin(), below.data_.end(),
              m.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
    return m;
  }

  FieldMatrix select_columns(std::span<const std::size_t> columns) const {
    FieldMatrix m(rows_, columns.size(), field_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < columns.size(); ++j) m(i, j) = (*this)(i, columns[j]);
    return m;
  }

  friend FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) {
    a.check_field(b);
    if (a.cols_ != b.rows_)
      throw Error(ErrorCode::DimensionMismatch, "matrix product dimension mismatch");
    const auto& f = a.field_;
    FieldMatrix c(a.rows_, b.cols_, f);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        FieldValue aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          c(i, j) = f.add(c(i, j), f.mul(aik, b(k, j)));
      }
    return c;
  }

  friend bool operator==(const FieldMatrix& a, const FieldMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.field_ == b.field_ && a.data_ == b.data_;
  }

  void check_field(const FieldMatrix& other) const {
    if (other.field_.modulus() != field_.modulus())
      throw Error(ErrorCode::ModulusMismatch, "matrices over different fields");
  }

 private:
  std::size_t rows_, cols_;
  PrimeField field_;
  std::vector<FieldValue> data_;
};

struct RowEchelon {
  FieldMatrix reduced;
  std::vector<std::size_t> pivot_columns;
};

// Reduced row echelon form by Gauss-Jordan elimination. Pivots are taken in
// column order, each from the first row at or below the current one with a
// nonzero entry, so the result is reproducible.
inline RowEchelon row_reduce(FieldMatrix m, std::size_t column_limit = SIZE_MAX) {
  const auto& f = m.field();
  const std::size_t limit = std::min(column_limit, m.cols());
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < limit && r < m.rows(); ++c) {
    std::size_t p = r;
    while (p < m.rows() && m(p, c) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != r)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    FieldValue inv = f.inv(m(r, c));
    for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) = f.mul(m(r, j), inv);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      FieldValue factor = m(i, c);
      for (std::size_t j = 0; j < m.cols(); ++j)
        m(i, j) = f.sub(m(i, j), f.mul(factor, m(r, j)));
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(m), std::move(pivots)};
}

inline std::size_t rank(const FieldMatrix& m) { return row_reduce(m).pivot_columns.size(); }

// Linearly independent rows spanning the row space of `m`, in reduced form.
inline FieldMatrix row_basis(const FieldMatrix& m) {
  auto ech = row_reduce(m);
  FieldMatrix basis(ech.pivot_columns.size(), m.cols(), m.field());
  for (std::size_t i = 0; i < basis.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) basis(i, j) = ech.reduced(i, j);
  return basis;
}

// Returns X with m * X = y. Requires full column rank of m (unique solution).
inline FieldMatrix solve_right(const FieldMatrix& m, const FieldMatrix& y) {
  m.check_field(y);
  if (m.rows() != y.rows())
    throw Error(ErrorCode::DimensionMismatch, "solve_right: row counts differ");
  FieldMatrix aug(m.rows(), m.cols() + y.cols(), m.field());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) aug(i, j) = m(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) aug(i, m.cols() + j) = y(i, j);
  }
  auto ech = row_reduce(std::move(aug), m.cols());
  const std::size_t r = ech.pivot_columns.size();
  if (r < m.cols())
    throw Error(ErrorCode::RankDeficient, "coefficient matrix lacks full column rank",
                std::to_string(r) + "/" + std::to_string(m.cols()));
  for (std::size_t i = r; i < m.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j)
      if (ech.reduced(i, m.cols() + j) != 0)
        throw Error(ErrorCode::Inconsistent, "linear system has no solution");
  FieldMatrix x(m.cols(), y.cols(), m.field());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) x(ech.pivot_columns[i], j) = ech.reduced(i, m.cols() + j);
  return x;
}

inline FieldMatrix inverse(const FieldMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "inverse of non-square matrix");
  return solve_right(m, FieldMatrix::identity(m.rows(), m.field()));
}

}  // namespace mmcast

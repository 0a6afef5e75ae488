#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mmcast/error.hpp"
#include "mmcast/rational.hpp"

namespace mmcast {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct LinearConstraint {
  std::vector<std::pair<std::size_t, Rational>> terms;  // (variable, coefficient)
  Relation relation = Relation::GreaterEqual;
  Rational rhs;
};

// Missing bound means unbounded in that direction.
struct VariableBounds {
  std::optional<Rational> lower = Rational(0);
  std::optional<Rational> upper;
};

// minimize objective . x subject to constraints and bounds.
struct LinearProgram {
  std::vector<Rational> objective;
  std::vector<VariableBounds> bounds;
  std::vector<LinearConstraint> constraints;

  std::size_t variable_count() const noexcept { return objective.size(); }

  std::size_t add_variable(Rational cost, VariableBounds b = {}) {
    objective.push_back(std::move(cost));
    bounds.push_back(std::move(b));
    return objective.size() - 1;
  }
  void add_constraint(LinearConstraint c) { constraints.push_back(std::move(c)); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Rational value;
  std::vector<Rational> x;
  std::size_t pivots = 0;
};

namespace detail {

// Dense tableau simplex over exact rationals with Bland's rule. Columns are
// nonnegative variables; every row starts with an identity basis column.
class Tableau {
 public:
  Tableau(std::vector<std::vector<Rational>> rows, std::vector<Rational> rhs, std::vector<std::size_t> basis)
      : a_(std::move(rows)), b_(std::move(rhs)), basis_(std::move(basis)) {}

  std::size_t rows() const { return a_.size(); }
  std::size_t cols() const { return a_.empty() ? 0 : a_.front().size(); }
  const std::vector<std::size_t>& basis() const { return basis_; }
  const Rational& rhs(std::size_t i) const { return b_[i]; }
  const Rational& at(std::size_t i, std::size_t j) const { return a_[i][j]; }
  std::size_t pivots() const { return pivots_; }

  // Minimizes cost over columns where `allowed` is true. Returns false if unbounded.
  bool minimize(const std::vector<Rational>& cost, const std::vector<bool>& allowed) {
    const std::size_t n = cols();
    std::vector<Rational> reduced(cost);
    for (std::size_t i = 0; i < rows(); ++i) {
      const Rational& cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (a_[i][j] != 0) reduced[j] -= cb * a_[i][j];
    }
    for (;;) {
      std::size_t enter = n;
      for (std::size_t j = 0; j < n; ++j)
        if (allowed[j] && reduced[j] < 0) {
          enter = j;
          break;
        }
      if (enter == n) return true;
      std::size_t leave = rows();
      Rational best_ratio;
      for (std::size_t i = 0; i < rows(); ++i) {
        if (a_[i][enter] <= 0) continue;
        Rational ratio = b_[i] / a_[i][enter];
        if (leave == rows() || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == rows()) return false;
      pivot(leave, enter);
      if (reduced[enter] != 0) {
        Rational factor = reduced[enter];
        for (std::size_t j = 0; j < n; ++j)
          if (a_[leave][j] != 0) reduced[j] -= factor * a_[leave][j];
      }
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    ++pivots_;
    const std::size_t n = cols();
    Rational inv = 1 / a_[r][c];
    for (std::size_t j = 0; j < n; ++j)
      if (a_[r][j] != 0) a_[r][j] *= inv;
    b_[r] *= inv;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (i == r || a_[i][c] == 0) continue;
      Rational factor = a_[i][c];
      for (std::size_t j = 0; j < n; ++j)
        if (a_[r][j] != 0) a_[i][j] -= factor * a_[r][j];
      b_[i] -= factor * b_[r];
    }
    basis_[r] = c;
  }

  void remove_row(std::size_t r) {
    a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r));
    b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

 private:
  std::vector<std::vector<Rational>> a_;
  std::vector<Rational> b_;
  std::vector<std::size_t> basis_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

// Two-phase simplex with Bland's rule. Deterministic for a given input order.
inline LpSolution solve_lp(const LinearProgram& lp) {
  const std::size_t nvars = lp.variable_count();
  if (lp.bounds.size() != nvars) throw Error(ErrorCode::DimensionMismatch, "bounds and objective differ in length");

  // Each original variable becomes offset + sum(sign * column).
  struct Mapping {
    Rational offset;
    std::vector<std::pair<std::size_t, int>> columns;
  };
  std::vector<Mapping> map(nvars);
  std::size_t structural = 0;
  struct Row {
    std::vector<std::pair<std::size_t, Rational>> terms;
    Relation relation;
    Rational rhs;
  };
  std::vector<Row> rows;
  for (std::size_t j = 0; j < nvars; ++j) {
    const auto& b = lp.bounds[j];
    if (b.lower && b.upper && *b.upper < *b.lower) return {LpStatus::Infeasible, 0, {}, 0};
    if (b.lower) {
      map[j] = {*b.lower, {{structural, 1}}};
      if (b.upper) rows.push_back({{{structural, Rational(1)}}, Relation::LessEqual, *b.upper - *b.lower});
      ++structural;
    } else if (b.upper) {
      map[j] = {*b.upper, {{structural++, -1}}};
    } else {
      map[j] = {0, {{structural, 1}, {structural + 1, -1}}};
      structural += 2;
    }
  }
  for (const auto& c : lp.constraints) {
    Row row{{}, c.relation, c.rhs};
    std::vector<Rational> dense(structural);
    for (const auto& [var, coeff] : c.terms) {
      if (var >= nvars) throw Error(ErrorCode::DimensionMismatch, "constraint refers to unknown variable");
      row.rhs -= coeff * map[var].offset;
      for (auto [col, sign] : map[var].columns) dense[col] += sign > 0 ? Rational(coeff) : Rational(-coeff);
    }
    for (std::size_t k = 0; k < structural; ++k)
      if (dense[k] != 0) row.terms.emplace_back(k, dense[k]);
    rows.push_back(std::move(row));
  }

  // Normalize to nonnegative right-hand sides.
  for (auto& row : rows) {
    if (row.rhs >= 0) continue;
    row.rhs = -row.rhs;
    for (auto& [k, v] : row.terms) v = -v;
    if (row.relation == Relation::LessEqual) row.relation = Relation::GreaterEqual;
    else if (row.relation == Relation::GreaterEqual) row.relation = Relation::LessEqual;
  }

  const std::size_t m = rows.size();
  std::size_t slack_count = 0, artificial_count = 0;
  for (const auto& row : rows) {
    if (row.relation != Relation::Equal) ++slack_count;
    if (row.relation != Relation::LessEqual) ++artificial_count;
  }
  const std::size_t first_slack = structural, first_artificial = structural + slack_count;
  const std::size_t ncols = first_artificial + artificial_count;

  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(ncols));
  std::vector<Rational> b(m);
  std::vector<std::size_t> basis(m);
  std::size_t next_slack = first_slack, next_art = first_artificial;
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [k, v] : rows[i].terms) a[i][k] = v;
    b[i] = rows[i].rhs;
    switch (rows[i].relation) {
      case Relation::LessEqual:
        a[i][next_slack] = 1;
        basis[i] = next_slack++;
        break;
      case Relation::GreaterEqual:
        a[i][next_slack++] = -1;
        a[i][next_art] = 1;
        basis[i] = next_art++;
        break;
      case Relation::Equal:
        a[i][next_art] = 1;
        basis[i] = next_art++;
        break;
    }
  }

  detail::Tableau tab(std::move(a), std::move(b), std::move(basis));
  std::vector<bool> allowed(ncols, true);
  if (artificial_count > 0) {
    std::vector<Rational> phase1(ncols);
    for (std::size_t j = first_artificial; j < ncols; ++j) phase1[j] = 1;
    tab.minimize(phase1, allowed);
    Rational infeasibility = 0;
    for (std::size_t i = 0; i < tab.rows(); ++i)
      if (tab.basis()[i] >= first_artificial) infeasibility += tab.rhs(i);
    if (infeasibility > 0) return {LpStatus::Infeasible, 0, {}, tab.pivots()};
    // Drive zero-level artificials out of the basis; rows that cannot be
    // pivoted are redundant.
    for (std::size_t i = tab.rows(); i-- > 0;) {
      if (tab.basis()[i] < first_artificial) continue;
      std::size_t col = first_artificial;
      for (std::size_t j = 0; j < first_artificial; ++j)
        if (tab.at(i, j) != 0) {
          col = j;
          break;
        }
      if (col == first_artificial) tab.remove_row(i);
      else tab.pivot(i, col);
    }
    for (std::size_t j = first_artificial; j < ncols; ++j) allowed[j] = false;
  }

  std::vector<Rational> cost(ncols);
  Rational constant = 0;
  for (std::size_t j = 0; j < nvars; ++j) {
    constant += lp.objective[j] * map[j].offset;
    for (auto [col, sign] : map[j].columns) cost[col] += sign > 0 ? lp.objective[j] : Rational(-lp.objective[j]);
  }
  if (!tab.minimize(cost, allowed)) return {LpStatus::Unbounded, 0, {}, tab.pivots()};

  std::vector<Rational> column_value(ncols);
  for (std::size_t i = 0; i < tab.rows(); ++i) column_value[tab.basis()[i]] = tab.rhs(i);
  LpSolution sol{LpStatus::Optimal, constant, std::vector<Rational>(nvars), tab.pivots()};
  for (std::size_t j = 0; j < nvars; ++j) {
    Rational v = map[j].offset;
    for (auto [col, sign] : map[j].columns) {
      if (sign > 0) v += column_value[col];
      else v -= column_value[col];
    }
    sol.value += lp.objective[j] * (v - map[j].offset);
    sol.x[j] = std::move(v);
  }
  return sol;
}

}  // namespace mmcast

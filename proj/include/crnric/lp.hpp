#pragma once

// Exact rational linear programming: a dense two-phase tableau simplex using
// Bland's rule, plus helpers for polyhedra given by mixed strict / non-strict
// constraints over free variables.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crnric/rational.hpp"

namespace crnric::lp {

enum class Status { optimal, infeasible, unbounded };

/// maximize objective . x  subject to  rows * x = rhs,  x >= 0.
/// An empty objective asks for any feasible point.
struct Problem {
  std::size_t num_vars = 0;
  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> rhs;
  std::vector<Rational> objective;

  void add_row(std::vector<Rational> coeffs, Rational value) {
    coeffs.resize(num_vars);
    rows.push_back(std::move(coeffs));
    rhs.push_back(std::move(value));
  }
};

struct Result {
  Status status = Status::infeasible;
  std::vector<Rational> x;
  Rational value;
};

namespace detail {

class Tableau {
 public:
  Tableau(const Problem& p) : n_(p.num_vars), m_(p.rows.size()) {
    if (p.rhs.size() != m_) throw std::invalid_argument("lp: rhs/rows size mismatch");
    cols_ = n_ + m_;
    t_.assign(m_, std::vector<Rational>(cols_));
    b_.resize(m_);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      if (p.rows[i].size() != n_) throw std::invalid_argument("lp: row width mismatch");
      const bool flip = p.rhs[i] < 0;
      for (std::size_t j = 0; j < n_; ++j) t_[i][j] = flip ? Rational(-p.rows[i][j]) : p.rows[i][j];
      b_[i] = flip ? Rational(-p.rhs[i]) : p.rhs[i];
      t_[i][n_ + i] = 1;
      basis_[i] = n_ + i;
    }
  }

  Result solve(const std::vector<Rational>& objective) {
    // Phase 1: minimize the sum of artificials.
    std::vector<Rational> cost(cols_);
    for (std::size_t j = n_; j < cols_; ++j) cost[j] = 1;
    load_costs(cost);
    run(cols_);
    if (objective_ != 0) return {Status::infeasible, {}, {}};
    drive_out_artificials();

    // Phase 2 over the original columns only (minimize -objective).
    std::fill(cost.begin(), cost.end(), Rational(0));
    for (std::size_t j = 0; j < n_ && j < objective.size(); ++j) cost[j] = -objective[j];
    load_costs(cost);
    if (!run(n_)) return {Status::unbounded, {}, {}};

    Result r;
    r.status = Status::optimal;
    r.x.assign(n_, Rational(0));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < n_) r.x[basis_[i]] = b_[i];
    r.value = 0;
    for (std::size_t j = 0; j < n_ && j < objective.size(); ++j) r.value += objective[j] * r.x[j];
    return r;
  }

 private:
  void load_costs(const std::vector<Rational>& cost) {
    d_ = cost;
    objective_ = 0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Rational& cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < cols_; ++j)
        if (t_[i][j] != 0) d_[j] -= cb * t_[i][j];
      objective_ += cb * b_[i];
    }
  }

  // Returns false when unbounded.
  bool run(std::size_t entering_limit) {
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < entering_limit; ++j)
        if (d_[j] < 0) {
          enter = j;
          break;
        }
      if (enter == cols_) return true;

      std::size_t leave = basis_.size();
      Rational best;
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (t_[i][enter] <= 0) continue;
        Rational ratio = b_[i] / t_[i][enter];
        if (leave == basis_.size() || ratio < best ||
            (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (leave == basis_.size()) return false;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const Rational piv = t_[row][col];
    for (std::size_t j = 0; j < cols_; ++j)
      if (t_[row][j] != 0) t_[row][j] /= piv;
    b_[row] /= piv;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (i == row || t_[i][col] == 0) continue;
      const Rational f = t_[i][col];
      for (std::size_t j = 0; j < cols_; ++j)
        if (t_[row][j] != 0) t_[i][j] -= f * t_[row][j];
      b_[i] -= f * b_[row];
    }
    if (d_[col] != 0) {
      const Rational f = d_[col];
      for (std::size_t j = 0; j < cols_; ++j)
        if (t_[row][j] != 0) d_[j] -= f * t_[row][j];
      objective_ += f * b_[row];
    }
    basis_[row] = col;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < basis_.size();) {
      if (basis_[i] < n_) {
        ++i;
        continue;
      }
      std::size_t col = n_;
      for (std::size_t j = 0; j < n_; ++j)
        if (t_[i][j] != 0) {
          col = j;
          break;
        }
      if (col < n_) {
        pivot(i, col);
        ++i;
      } else {
        // Redundant row.
        t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(i));
        b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  std::size_t n_, m_, cols_;
  std::vector<std::vector<Rational>> t_;
  std::vector<Rational> b_;
  std::vector<std::size_t> basis_;
  std::vector<Rational> d_;
  Rational objective_;
};

}  // namespace detail

inline Result solve(const Problem& p) {
  detail::Tableau tab(p);
  return tab.solve(p.objective);
}

// ---------------------------------------------------------------------------
// Polyhedra over free variables.

enum class Relation { ge, gt, eq };

/// coeffs . x  (>= | > | =)  rhs
struct Constraint {
  std::vector<Rational> coeffs;
  Relation rel = Relation::ge;
  Rational rhs;

  Rational lhs(const std::vector<Rational>& x) const {
    Rational s = 0;
    for (std::size_t i = 0; i < coeffs.size() && i < x.size(); ++i)
      if (coeffs[i] != 0) s += coeffs[i] * x[i];
    return s;
  }

  bool satisfied_by(const std::vector<Rational>& x) const {
    Rational v = lhs(x);
    switch (rel) {
      case Relation::ge: return v >= rhs;
      case Relation::gt: return v > rhs;
      case Relation::eq: return v == rhs;
    }
    return false;
  }

  Constraint relaxed() const {
    Constraint c = *this;
    if (c.rel == Relation::gt) c.rel = Relation::ge;
    return c;
  }
};

namespace detail {

// Variables: x = p - q (2n columns), one slack per inequality, then the
// interior margin t (last column) when `with_margin`.
inline Problem build(std::size_t n, const std::vector<Constraint>& cs, bool with_margin) {
  std::size_t ineq = 0;
  for (const auto& c : cs)
    if (c.rel != Relation::eq) ++ineq;
  Problem p;
  p.num_vars = 2 * n + ineq + (with_margin ? 1 : 0);
  std::size_t slack = 2 * n;
  const std::size_t margin = p.num_vars - 1;
  for (const auto& c : cs) {
    std::vector<Rational> row(p.num_vars);
    for (std::size_t i = 0; i < n && i < c.coeffs.size(); ++i) {
      row[i] = c.coeffs[i];
      row[n + i] = -c.coeffs[i];
    }
    if (c.rel != Relation::eq) {
      row[slack++] = -1;
      if (with_margin && c.rel == Relation::gt) row[margin] = -1;
    }
    p.add_row(std::move(row), c.rhs);
  }
  if (with_margin) {
    std::vector<Rational> row(p.num_vars);
    row[margin] = 1;
    // margin <= 1 : margin + s = 1 with a fresh slack column.
    p.num_vars += 1;
    for (auto& r : p.rows) r.resize(p.num_vars);
    row.resize(p.num_vars);
    row[p.num_vars - 1] = 1;
    p.add_row(std::move(row), 1);
  }
  return p;
}

inline std::vector<Rational> recover(std::size_t n, const std::vector<Rational>& sol) {
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = sol[i] - sol[n + i];
  return x;
}

}  // namespace detail

/// A point of the polyhedron. Strict constraints are satisfied with the
/// largest common margin (capped at 1), which places the point away from
/// the strict boundaries.
inline std::optional<std::vector<Rational>> find_point(std::size_t n,
                                                       const std::vector<Constraint>& cs) {
  bool any_strict = false;
  for (const auto& c : cs)
    if (c.rel == Relation::gt) any_strict = true;
  Problem p = detail::build(n, cs, any_strict);
  if (any_strict) {
    p.objective.assign(p.num_vars, Rational(0));
    p.objective[p.num_vars - 2] = 1;
  }
  Result r = solve(p);
  if (r.status != Status::optimal) return std::nullopt;
  if (any_strict && r.x[p.num_vars - 2] <= 0) return std::nullopt;
  return detail::recover(n, r.x);
}

/// max (or min) of objective . x over the closure (strict relaxed to non-strict).
/// nullopt: empty. Status::unbounded is reported through `unbounded`.
struct Extremum {
  bool feasible = false;
  bool unbounded = false;
  Rational value;
};

inline Extremum extremize(std::size_t n, const std::vector<Constraint>& cs,
                          const std::vector<Rational>& objective, bool maximize) {
  std::vector<Constraint> relaxed;
  relaxed.reserve(cs.size());
  for (const auto& c : cs) relaxed.push_back(c.relaxed());
  Problem p = detail::build(n, relaxed, false);
  p.objective.assign(p.num_vars, Rational(0));
  for (std::size_t i = 0; i < n && i < objective.size(); ++i) {
    p.objective[i] = maximize ? objective[i] : Rational(-objective[i]);
    p.objective[n + i] = -p.objective[i];
  }
  Result r = solve(p);
  Extremum e;
  if (r.status == Status::infeasible) return e;
  e.feasible = true;
  if (r.status == Status::unbounded) {
    e.unbounded = true;
    return e;
  }
  e.value = maximize ? r.value : Rational(-r.value);
  return e;
}

}  // namespace crnric::lp

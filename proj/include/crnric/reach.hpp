#pragma once

// Segment reachability: paths, the producible fixpoint, straight-line
// feasibility, the decision procedure with witnesses, path compression and
// rationalization of floating-point paths.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnric/core.hpp"
#include "crnric/lp.hpp"

namespace crnric {

using ReactionSet = std::vector<bool>;

class PathError : public std::runtime_error {
 public:
  PathError(std::size_t segment, const FluxCheck& why, const std::string& what)
      : std::runtime_error("segment " + std::to_string(segment + 1) + ": " + what),
        segment_(segment),
        why_(why) {}
  std::size_t segment() const noexcept { return segment_; }
  const FluxCheck& cause() const noexcept { return why_; }

 private:
  std::size_t segment_;
  FluxCheck why_;
};

inline State verify_path(const Crn& crn, const Path& p) {
  State x = p.x0;
  for (std::size_t k = 0; k < p.segments.size(); ++k) {
    try {
      x = apply_flux(crn, x, p.segments[k]);
    } catch (const InapplicableReaction& e) {
      throw PathError(k, {FluxCheck::inapplicable, e.reaction()}, e.what());
    } catch (const NegativeResult& e) {
      throw PathError(k, {FluxCheck::negative, e.species()}, e.what());
    }
  }
  return x;
}

/// All states x_0 .. x_L along a valid path.
inline std::vector<State> path_states(const Crn& crn, const Path& p) {
  std::vector<State> xs{p.x0};
  for (const auto& u : p.segments) xs.push_back(apply_flux(crn, xs.back(), u));
  return xs;
}

namespace reach_detail {

inline bool enabled_by(const Reaction& r, const SpeciesSet& present) {
  for (const auto& [s, n] : r.reactants)
    if (!present[s]) return false;
  return true;
}

struct Ramp {
  SpeciesSet present;
  ReactionSet fired;
  Path path;
  State end;
};

// Fires allowed reactions stage by stage, each once, with fluxes small enough
// that nothing present is used up. With `until` set, stops as soon as every
// reaction in `until` is applicable.
inline Ramp build_ramp(const Crn& crn, const State& c, const ReactionSet& allowed,
                       const ReactionSet* until = nullptr) {
  const std::size_t m = crn.num_reactions();
  Ramp ramp;
  ramp.present = support(c, crn.num_species());
  ramp.fired.assign(m, false);
  ramp.path.x0 = c;
  ramp.end = c;
  for (;;) {
    if (until) {
      bool done = true;
      for (ReactionIndex j = 0; j < m && done; ++j)
        if ((*until)[j] && !enabled_by(crn.reaction(j), ramp.present)) done = false;
      if (done) break;
    }
    std::vector<ReactionIndex> stage;
    int kappa = 1;
    for (ReactionIndex j = 0; j < m; ++j)
      if (allowed[j] && !ramp.fired[j] && enabled_by(crn.reaction(j), ramp.present)) {
        stage.push_back(j);
        kappa = std::max(kappa, crn.reaction(j).order());
      }
    if (stage.empty()) break;
    Rational minpos = 0;
    for (std::size_t i = 0; i < crn.num_species(); ++i) {
      const Rational& v = ramp.end.at(i);
      if (v > 0 && (minpos == 0 || v < minpos)) minpos = v;
    }
    Rational eps = minpos / (2 * kappa * static_cast<long>(stage.size()));
    FluxVector u(m);
    for (auto j : stage) {
      u.set(j, eps);
      ramp.fired[j] = true;
    }
    ramp.end = apply_flux(crn, ramp.end, u);
    ramp.path.segments.push_back(u);
    for (auto j : stage)
      for (const auto& [s, n] : crn.reaction(j).products) ramp.present[s] = true;
  }
  return ramp;
}

inline SpeciesSet fixpoint(const Crn& crn, const SpeciesSet& start, const ReactionSet& allowed) {
  SpeciesSet present = start;
  bool changed = true;
  while (changed) {
    changed = false;
    for (ReactionIndex j = 0; j < crn.num_reactions(); ++j) {
      if (!allowed[j] || !enabled_by(crn.reaction(j), present)) continue;
      for (const auto& [s, n] : crn.reaction(j).products)
        if (!present[s]) present[s] = changed = true;
    }
  }
  return present;
}

// Reactions of S that become applicable using only reactions of S.
inline ReactionSet self_firable_core(const Crn& crn, const State& c, const ReactionSet& s) {
  SpeciesSet present = fixpoint(crn, support(c, crn.num_species()), s);
  ReactionSet core(crn.num_reactions(), false);
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
    core[j] = s[j] && enabled_by(crn.reaction(j), present);
  return core;
}

inline lp::Problem flux_problem(const Crn& crn, const State& c, const State& d,
                                const std::vector<ReactionIndex>& cols) {
  lp::Problem p;
  p.num_vars = cols.size();
  for (SpeciesIndex i = 0; i < crn.num_species(); ++i) {
    std::vector<Rational> row(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) row[k] = crn.stoich(i, cols[k]);
    p.add_row(std::move(row), d.at(i) - c.at(i));
  }
  return p;
}

}  // namespace reach_detail

struct Producible {
  SpeciesSet species;
  Path ramp;
};

inline Producible producible(const Crn& crn, const State& c) {
  ReactionSet all(crn.num_reactions(), true);
  auto ramp = reach_detail::build_ramp(crn, c, all);
  return {ramp.present, ramp.path};
}

/// u >= 0 with c + M u = d, supp(u) within `allowed`, and u_j > 0 on
/// `require_positive`. With `check_applicability`, reactions not applicable
/// at c are dropped from `allowed` first. Among solutions, the one returned
/// has maximal support.
inline std::optional<FluxVector> straight_line_feasible(const Crn& crn, const State& c, const State& d,
                                                        ReactionSet allowed,
                                                        const ReactionSet& require_positive,
                                                        bool check_applicability = true) {
  const std::size_t m = crn.num_reactions();
  allowed.resize(m, false);
  if (check_applicability)
    for (ReactionIndex j = 0; j < m; ++j)
      if (allowed[j] && !applicable(crn, c, j)) allowed[j] = false;
  for (ReactionIndex j = 0; j < m && j < require_positive.size(); ++j)
    if (require_positive[j] && !allowed[j]) return std::nullopt;

  std::vector<ReactionIndex> cols;
  for (ReactionIndex j = 0; j < m; ++j)
    if (allowed[j]) cols.push_back(j);

  auto base = reach_detail::flux_problem(crn, c, d, cols);
  auto first = lp::solve(base);
  if (first.status != lp::Status::optimal) return std::nullopt;

  std::vector<std::vector<Rational>> points{first.x};
  std::vector<bool> positive(cols.size(), false);
  auto absorb = [&](const std::vector<Rational>& x) {
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (x[k] > 0) positive[k] = true;
  };
  absorb(first.x);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (positive[k]) continue;
    // maximize u_k subject to u_k <= 1
    lp::Problem p = base;
    p.num_vars += 1;
    for (auto& row : p.rows) row.resize(p.num_vars);
    std::vector<Rational> cap(p.num_vars);
    cap[k] = 1;
    cap[p.num_vars - 1] = 1;
    p.add_row(std::move(cap), 1);
    p.objective.assign(p.num_vars, Rational(0));
    p.objective[k] = 1;
    auto r = lp::solve(p);
    if (r.status != lp::Status::optimal || r.value <= 0) continue;
    r.x.resize(cols.size());
    absorb(r.x);
    points.push_back(std::move(r.x));
  }

  for (std::size_t k = 0; k < cols.size(); ++k)
    if (require_positive.size() > cols[k] && require_positive[cols[k]] && !positive[k]) return std::nullopt;

  FluxVector u(m);
  const Rational count = static_cast<long>(points.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    Rational s = 0;
    for (const auto& x : points) s += x[k];
    u.set(cols[k], s / count);
  }
  return u;
}

/// Witness from c along reactions T (self-firable from c) with total flux u,
/// supp(u) = T: a ramp that makes all of T applicable, scaled below u, then the
/// residual flux as one straight line.
inline Path witness_from_flux(const Crn& crn, const State& c, const FluxVector& u) {
  const std::size_t m = crn.num_reactions();
  ReactionSet t(m, false);
  bool any = false;
  for (ReactionIndex j = 0; j < m; ++j)
    if (u.at(j) > 0) t[j] = any = true;
  Path p;
  p.x0 = c;
  if (!any) return p;

  auto ramp = reach_detail::build_ramp(crn, c, t, &t);
  std::vector<Rational> sigma(m);
  for (const auto& seg : ramp.path.segments)
    for (ReactionIndex j = 0; j < m; ++j) sigma[j] += seg.at(j);
  Rational eps = 1;
  for (ReactionIndex j = 0; j < m; ++j)
    if (sigma[j] > 0) eps = std::min(eps, Rational(u.at(j) / (2 * sigma[j])));

  std::vector<Rational> residual(m);
  for (ReactionIndex j = 0; j < m; ++j) residual[j] = u.at(j);
  for (const auto& seg : ramp.path.segments) {
    FluxVector scaled(m);
    for (ReactionIndex j = 0; j < m; ++j)
      if (seg.at(j) != 0) {
        scaled.set(j, eps * seg.at(j));
        residual[j] -= eps * seg.at(j);
      }
    p.segments.push_back(std::move(scaled));
  }
  p.segments.push_back(FluxVector(std::move(residual)));
  return p;
}

struct ReachVerdict {
  bool reachable = false;
  std::optional<Path> witness;
};

namespace reach_detail {

inline ReachVerdict finish(const Crn& crn, const State& c, const State& d, const FluxVector& u) {
  Path w = witness_from_flux(crn, c, u);
  State end = verify_path(crn, w);
  if (!(end == d)) throw std::logic_error("reachability witness does not end at the target");
  return {true, std::move(w)};
}

}  // namespace reach_detail

inline ReachVerdict decide_reachable(const Crn& crn, const State& c, const State& d) {
  if (c == d) return {true, Path{c, {}}};
  const std::size_t m = crn.num_reactions();
  ReactionSet all(m, true);
  SpeciesSet p = reach_detail::fixpoint(crn, support(c, crn.num_species()), all);
  ReactionSet t(m, false);
  for (ReactionIndex j = 0; j < m; ++j) t[j] = reach_detail::enabled_by(crn.reaction(j), p);

  for (std::size_t iter = 0; iter <= m; ++iter) {
    auto u = straight_line_feasible(crn, c, d, t, {}, false);
    if (!u) return {};
    ReactionSet s(m, false);
    for (ReactionIndex j = 0; j < m; ++j) s[j] = u->at(j) > 0;
    ReactionSet core = reach_detail::self_firable_core(crn, c, s);
    if (core == s) return reach_detail::finish(crn, c, d, *u);
    t = core;
  }
  throw std::logic_error("support refinement did not stabilize");
}

/// Enumerates every support T; exponential, intended as a cross-check.
inline ReachVerdict decide_reachable_bruteforce(const Crn& crn, const State& c, const State& d) {
  const std::size_t m = crn.num_reactions();
  if (m > 20) throw std::invalid_argument("brute-force reachability is limited to 20 reactions");
  if (c == d) return {true, Path{c, {}}};
  for (unsigned long mask = 1; mask < (1ul << m); ++mask) {
    ReactionSet t(m, false);
    for (ReactionIndex j = 0; j < m; ++j) t[j] = (mask >> j) & 1;
    if (reach_detail::self_firable_core(crn, c, t) != t) continue;
    auto u = straight_line_feasible(crn, c, d, t, t, false);
    if (u) return reach_detail::finish(crn, c, d, *u);
  }
  return {};
}

/// Same endpoints, at most min(|R|, |species|) + 1 segments.
inline Path compress_path(const Crn& crn, const Path& p) {
  verify_path(crn, p);
  const std::size_t m = crn.num_reactions();
  std::vector<Rational> total(m);
  for (const auto& u : p.segments)
    for (ReactionIndex j = 0; j < m; ++j) total[j] += u.at(j);
  FluxVector f(std::move(total));
  if (f.is_zero()) return Path{p.x0, {}};
  bool direct = true;
  for (ReactionIndex j = 0; j < m; ++j)
    if (f.at(j) > 0 && !applicable(crn, p.x0, j)) direct = false;
  if (direct) return Path{p.x0, {f}};
  return witness_from_flux(crn, p.x0, f);
}

// ---------------------------------------------------------------------------
// Rationalization.

class SignInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floating-point prepath: initial state and per-segment fluxes.
struct ApproxPath {
  std::vector<double> x0;
  std::vector<std::vector<double>> segments;
};

struct RationalizeOptions {
  double tolerance = 1e-6;   // max-norm distance allowed from the input
  double zero_slack = 1e-9;  // |value| <= slack is declared zero
  std::optional<State> exact_x0;
};

namespace reach_detail {

struct AffineExpr {
  std::vector<Rational> coeffs;
  Rational constant;
};

// Row-reduces [A | b] in place; returns pivot columns, or nullopt if inconsistent.
inline std::optional<std::vector<std::size_t>> rref(std::vector<std::vector<Rational>>& a, std::size_t nvars) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < nvars && row < a.size(); ++col) {
    std::size_t sel = row;
    while (sel < a.size() && a[sel][col] == 0) ++sel;
    if (sel == a.size()) continue;
    std::swap(a[row], a[sel]);
    Rational piv = a[row][col];
    for (auto& v : a[row]) v /= piv;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == row || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t k = col; k <= nvars; ++k) a[r][k] -= f * a[row][k];
    }
    pivots.push_back(col);
    ++row;
  }
  for (std::size_t r = row; r < a.size(); ++r)
    if (a[r][nvars] != 0) return std::nullopt;
  return pivots;
}

}  // namespace reach_detail

/// Exact prepath with the sign pattern of `approx` (every coordinate of every
/// state and flux zero iff declared zero) and within the tolerance of it.
/// Applicability is not checked.
inline Path rationalize_prepath(const Crn& crn, const ApproxPath& approx, const RationalizeOptions& opt) {
  using reach_detail::AffineExpr;
  const std::size_t n = crn.num_species(), m = crn.num_reactions(), L = approx.segments.size();
  auto zero = [&](double v) { return std::fabs(v) <= opt.zero_slack; };

  // Variables: positive x0 coordinates (unless fixed), then positive fluxes.
  std::vector<double> guess;
  std::vector<AffineExpr> x0(n);
  std::vector<std::vector<AffineExpr>> flux(L, std::vector<AffineExpr>(m));
  std::vector<std::pair<std::size_t, std::size_t>> flux_vars;  // (segment, reaction)
  std::vector<std::size_t> x_vars;
  for (std::size_t i = 0; i < n; ++i) {
    double v = i < approx.x0.size() ? approx.x0[i] : 0.0;
    if (opt.exact_x0) {
      x0[i].constant = opt.exact_x0->at(i);
    } else if (!zero(v)) {
      x_vars.push_back(i);
      guess.push_back(v);
    }
  }
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t j = 0; j < m; ++j) {
      double v = j < approx.segments[l].size() ? approx.segments[l][j] : 0.0;
      if (!zero(v)) {
        flux_vars.emplace_back(l, j);
        guess.push_back(v);
      }
    }
  const std::size_t nv = guess.size();
  for (auto& e : x0) e.coeffs.assign(nv, Rational(0));
  for (std::size_t k = 0; k < x_vars.size(); ++k) x0[x_vars[k]].coeffs[k] = 1;
  for (auto& seg : flux)
    for (auto& e : seg) e.coeffs.assign(nv, Rational(0));
  for (std::size_t k = 0; k < flux_vars.size(); ++k)
    flux[flux_vars[k].first][flux_vars[k].second].coeffs[x_vars.size() + k] = 1;

  // Intermediate states as affine expressions, with their float values.
  std::vector<std::vector<AffineExpr>> xs{x0};
  std::vector<std::vector<double>> xs_approx{std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    xs_approx[0][i] = opt.exact_x0 ? to_double(opt.exact_x0->at(i)) : (i < approx.x0.size() ? approx.x0[i] : 0.0);
  }
  for (std::size_t l = 0; l < L; ++l) {
    auto next = xs.back();
    auto next_approx = xs_approx.back();
    for (std::size_t j = 0; j < m; ++j) {
      double fv = j < approx.segments[l].size() ? approx.segments[l][j] : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int mij = crn.stoich(i, j);
        if (mij == 0) continue;
        next_approx[i] += mij * fv;
        const auto& fe = flux[l][j];
        for (std::size_t k = 0; k < nv; ++k)
          if (fe.coeffs[k] != 0) next[i].coeffs[k] += mij * fe.coeffs[k];
      }
    }
    xs.push_back(std::move(next));
    xs_approx.push_back(std::move(next_approx));
  }

  // Declared-zero states give the equality system.
  std::vector<std::vector<Rational>> sys;
  for (std::size_t l = 1; l <= L; ++l)
    for (std::size_t i = 0; i < n; ++i)
      if (zero(xs_approx[l][i])) {
        std::vector<Rational> row = xs[l][i].coeffs;
        row.push_back(-xs[l][i].constant);
        sys.push_back(std::move(row));
      }
  auto pivots = reach_detail::rref(sys, nv);
  if (!pivots) throw SignInfeasible("declared zero pattern is inconsistent");
  std::vector<bool> is_pivot(nv, false);
  for (auto c : *pivots) is_pivot[c] = true;

  const Rational tol = exact_rational(opt.tolerance);
  auto eval = [&](const AffineExpr& e, const std::vector<Rational>& v) {
    Rational s = e.constant;
    for (std::size_t k = 0; k < nv; ++k)
      if (e.coeffs[k] != 0) s += e.coeffs[k] * v[k];
    return s;
  };
  double delta = opt.tolerance / 4;
  for (int attempt = 0; attempt < 14; ++attempt, delta /= 16) {
    std::vector<Rational> v(nv);
    for (std::size_t k = 0; k < nv; ++k)
      if (!is_pivot[k]) v[k] = nearest_simple_rational(guess[k], delta);
    for (std::size_t r = 0; r < pivots->size(); ++r) {
      std::size_t pc = (*pivots)[r];
      Rational s = sys[r][nv];
      for (std::size_t k = 0; k < nv; ++k)
        if (k != pc && sys[r][k] != 0) s -= sys[r][k] * v[k];
      v[pc] = s;
    }
    bool ok = true;
    for (std::size_t k = 0; k < nv && ok; ++k)
      ok = v[k] > 0 && rational_abs(v[k] - exact_rational(guess[k])) <= tol;
    for (std::size_t l = 0; l <= L && ok; ++l)
      for (std::size_t i = 0; i < n && ok; ++i) {
        Rational x = eval(xs[l][i], v);
        if (zero(xs_approx[l][i]) && l > 0)
          ok = x == 0;
        else if (l > 0 || !opt.exact_x0)
          ok = x > 0 || (zero(xs_approx[l][i]) && x == 0);
        else
          ok = x >= 0;
        if (ok) ok = rational_abs(x - exact_rational(xs_approx[l][i])) <= tol;
      }
    if (!ok) continue;
    Path p;
    std::vector<Rational> x0v(n);
    for (std::size_t i = 0; i < n; ++i) x0v[i] = eval(x0[i], v);
    p.x0 = State(std::move(x0v));
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<Rational> u(m);
      for (std::size_t j = 0; j < m; ++j) u[j] = eval(flux[l][j], v);
      p.segments.push_back(FluxVector(std::move(u)));
    }
    return p;
  }
  throw SignInfeasible("no rational path with the declared sign pattern within tolerance");
}

/// As rationalize_prepath, and the result must verify as a path.
inline Path rationalize_path(const Crn& crn, const ApproxPath& approx, const RationalizeOptions& opt) {
  Path p = rationalize_prepath(crn, approx, opt);
  try {
    verify_path(crn, p);
  } catch (const PathError& e) {
    throw SignInfeasible(std::string("rationalized path is not valid: ") + e.what());
  }
  return p;
}

}  // namespace crnric

#pragma once

// Mass-action kinetics: rate equations, an adaptive Dormand-Prince
// integrator that also accumulates per-reaction flux, convergence checks,
// and conversion of trajectories into exact reachability witnesses.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnric/core.hpp"
#include "crnric/reach.hpp"

namespace crnric {

struct RatedCrn {
  Crn crn;
  std::vector<double> rates;  // one positive constant per reaction

  void validate() const {
    if (rates.size() != crn.num_reactions()) throw std::invalid_argument("one rate constant per reaction required");
    for (double k : rates)
      if (!(k > 0) || !std::isfinite(k)) throw std::invalid_argument("rate constants must be positive");
  }
};

/// d[species]/dt = sum of coefficient * k_reaction * prod(reactant^count).
struct OdeTerm {
  int coefficient = 0;  // M(i, j)
  ReactionIndex reaction = 0;
};

struct SpeciesOde {
  SpeciesIndex species = 0;
  std::vector<OdeTerm> terms;
};

inline std::vector<SpeciesOde> derive_odes(const RatedCrn& r) {
  std::vector<SpeciesOde> out;
  for (SpeciesIndex i = 0; i < r.crn.num_species(); ++i) {
    SpeciesOde ode{i, {}};
    for (ReactionIndex j = 0; j < r.crn.num_reactions(); ++j)
      if (int m = r.crn.stoich(i, j); m != 0) ode.terms.push_back({m, j});
    out.push_back(std::move(ode));
  }
  return out;
}

inline std::string monomial(const Crn& crn, const Reaction& rx) {
  std::string out;
  for (const auto& [s, n] : rx.reactants) {
    out += " " + crn.name(s);
    if (n != 1) out += "^" + std::to_string(n);
  }
  return out;
}

/// One line per species, e.g. "dX/dt = -2 k1 X^2 - k2 C X".
inline std::string format_odes(const RatedCrn& r) {
  std::string out;
  for (const auto& ode : derive_odes(r)) {
    std::string rhs;
    for (const auto& t : ode.terms) {
      int mag = std::abs(t.coefficient);
      if (rhs.empty())
        rhs += t.coefficient < 0 ? "-" : "";
      else
        rhs += t.coefficient < 0 ? " - " : " + ";
      if (mag != 1) rhs += std::to_string(mag) + " ";
      rhs += "k" + std::to_string(t.reaction + 1) + monomial(r.crn, r.crn.reaction(t.reaction));
    }
    out += "d" + r.crn.name(ode.species) + "/dt = " + (rhs.empty() ? "0" : rhs) + "\n";
  }
  return out;
}

inline std::vector<double> reaction_rates(const RatedCrn& r, const std::vector<double>& x) {
  std::vector<double> v(r.crn.num_reactions());
  for (ReactionIndex j = 0; j < v.size(); ++j) {
    double p = r.rates[j];
    for (const auto& [s, n] : r.crn.reaction(j).reactants) {
      double c = std::max(x[s], 0.0);
      for (int e = 0; e < n; ++e) p *= c;
    }
    v[j] = p;
  }
  return v;
}

inline std::vector<double> derivative(const RatedCrn& r, const std::vector<double>& x) {
  auto rates = reaction_rates(r, x);
  std::vector<double> dx(r.crn.num_species(), 0.0);
  for (ReactionIndex j = 0; j < rates.size(); ++j) {
    if (rates[j] == 0) continue;
    const Reaction& rx = r.crn.reaction(j);
    for (const auto& [s, n] : rx.reactants) dx[s] -= n * rates[j];
    for (const auto& [s, n] : rx.products) dx[s] += n * rates[j];
  }
  return dx;
}

inline double max_norm(const std::vector<double>& v) {
  double m = 0;
  for (double a : v) m = std::max(m, std::fabs(a));
  return m;
}

class BlowUp : public std::runtime_error {
 public:
  BlowUp(double t, const std::string& species)
      : std::runtime_error("concentration of " + species + " diverges near t = " + std::to_string(t)), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

struct SimulationOptions {
  double horizon = 100;
  double rtol = 1e-9;
  double atol = 1e-12;
  double equilibrium_threshold = 1e-10;  // max-norm of dx/dt
  int equilibrium_steps = 3;             // consecutive accepted steps below threshold
  double blowup_bound = 1e12;
  std::size_t max_steps = 5'000'000;
  bool record = true;  // keep every accepted step (otherwise only the ends)
};

struct Trajectory {
  enum class Stop { horizon, equilibrium, step_limit };

  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> fluxes;  // cumulative flux per reaction at each time
  std::vector<double> flux_integrals;       // at the final time
  double final_derivative_norm = 0;
  std::vector<double> final_rates;
  std::size_t clip_events = 0;
  std::size_t steps = 0;
  Stop stop = Stop::horizon;

  const std::vector<double>& final_state() const { return states.back(); }
};

inline Trajectory simulate(const RatedCrn& r, const std::vector<double>& x0, const SimulationOptions& opt = {}) {
  r.validate();
  const std::size_t n = r.crn.num_species(), m = r.crn.num_reactions();
  if (x0.size() != n) throw std::invalid_argument("initial state has the wrong size");
  for (double v : x0)
    if (!(v >= 0) || !std::isfinite(v)) throw std::invalid_argument("initial state must be nonnegative");

  // Augmented state: species, then cumulative flux per reaction.
  auto f = [&](const std::vector<double>& y) {
    std::vector<double> x(y.begin(), y.begin() + n);
    auto rates = reaction_rates(r, x);
    std::vector<double> dy(n + m, 0.0);
    for (ReactionIndex j = 0; j < m; ++j) {
      if (rates[j] == 0) continue;
      const Reaction& rx = r.crn.reaction(j);
      for (const auto& [s, c] : rx.reactants) dy[s] -= c * rates[j];
      for (const auto& [s, c] : rx.products) dy[s] += c * rates[j];
      dy[n + j] = rates[j];
    }
    return dy;
  };

  // Dormand-Prince 5(4) tableau (autonomous system, so no c_i needed).
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trajectory tr;
  std::vector<double> y(n + m, 0.0);
  std::copy(x0.begin(), x0.end(), y.begin());
  double t = 0;
  auto push = [&] {
    tr.times.push_back(t);
    tr.states.emplace_back(y.begin(), y.begin() + n);
    tr.fluxes.emplace_back(y.begin() + n, y.end());
  };
  push();

  auto k1 = f(y);
  double scale0 = 0;
  for (std::size_t i = 0; i < n + m; ++i) scale0 = std::max(scale0, std::fabs(k1[i]) / (opt.atol + opt.rtol * std::fabs(y[i])));
  double h = scale0 > 0 ? std::min(opt.horizon, 0.01 / scale0) : opt.horizon;
  if (h <= 0) h = opt.horizon;
  int calm = 0;
  tr.stop = Trajectory::Stop::horizon;

  auto axpy = [&](std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
    std::vector<double> out = y;
    for (const auto& [a, v] : terms)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * a * (*v)[i];
    return out;
  };

  if (max_norm(std::vector<double>(k1.begin(), k1.begin() + n)) == 0 && n > 0) {
    // Nothing moves: constant trajectory.
    t = opt.horizon;
    tr.stop = Trajectory::Stop::equilibrium;
  }

  while (t < opt.horizon && tr.stop == Trajectory::Stop::horizon) {
    if (tr.steps >= opt.max_steps) {
      tr.stop = Trajectory::Stop::step_limit;
      break;
    }
    h = std::min(h, opt.horizon - t);
    auto k2 = f(axpy({{a21, &k1}}));
    auto k3 = f(axpy({{a31, &k1}, {a32, &k2}}));
    auto k4 = f(axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    auto k5 = f(axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    auto k6 = f(axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    auto y5 = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    auto k7 = f(y5);
    double err = 0;
    for (std::size_t i = 0; i < n + m; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      err = std::max(err, std::fabs(e) / sc);
    }
    if (!std::isfinite(err)) {
      h *= 0.1;
      if (h < 1e-300) throw BlowUp(t, "a species");
      continue;
    }
    if (err <= 1.0) {
      t += h;
      y = std::move(y5);
      bool clipped = false;
      for (std::size_t i = 0; i < n; ++i)
        if (y[i] < 0) {
          y[i] = 0;
          ++tr.clip_events;
          clipped = true;
        }
      for (std::size_t i = 0; i < n; ++i)
        if (y[i] > opt.blowup_bound) throw BlowUp(t, r.crn.name(i));
      ++tr.steps;
      k1 = clipped ? f(y) : std::move(k7);
      if (opt.record) push();
      double dnorm = max_norm(std::vector<double>(k1.begin(), k1.begin() + n));
      calm = dnorm < opt.equilibrium_threshold ? calm + 1 : 0;
      if (calm >= opt.equilibrium_steps) tr.stop = Trajectory::Stop::equilibrium;
    }
    double factor = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < 1e-300 || (t > 0 && h < t * 1e-15)) {
      // Step size collapsed: treat as divergence.
      std::size_t worst = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (y[i] > y[worst]) worst = i;
      throw BlowUp(t, n ? r.crn.name(worst) : "a species");
    }
  }
  if (!opt.record || tr.times.back() != t) push();
  std::vector<double> x(y.begin(), y.begin() + n);
  tr.flux_integrals.assign(y.begin() + n, y.end());
  tr.final_rates = reaction_rates(r, x);
  tr.final_derivative_norm = max_norm(derivative(r, x));
  return tr;
}

/// Floating-point view of an exact state.
inline std::vector<double> to_doubles(const State& c, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = to_double(c.at(i));
  return out;
}

struct ConvergenceReport {
  enum class Status { ok, not_converged, wrong_output };
  Status status = Status::ok;
  double output = 0;
  double max_rate = 0;
  double derivative_norm = 0;
};

inline const char* to_string(ConvergenceReport::Status s) {
  switch (s) {
    case ConvergenceReport::Status::ok: return "ok";
    case ConvergenceReport::Status::not_converged: return "not-converged";
    case ConvergenceReport::Status::wrong_output: return "wrong-output";
  }
  return "?";
}

/// Converged means a static equilibrium up to tol: every reaction rate at
/// most tol (a dynamic equilibrium with balanced nonzero rates fails).
inline ConvergenceReport check_convergence(const Crc& crc, const Trajectory& tr, double expected, double tol) {
  ConvergenceReport rep;
  const auto& x = tr.final_state();
  rep.output = x[crc.output_plus] - (crc.output_minus ? x[*crc.output_minus] : 0.0);
  rep.max_rate = max_norm(tr.final_rates);
  rep.derivative_norm = tr.final_derivative_norm;
  if (rep.max_rate > tol)
    rep.status = ConvergenceReport::Status::not_converged;
  else if (std::fabs(rep.output - expected) > tol)
    rep.status = ConvergenceReport::Status::wrong_output;
  return rep;
}

/// Exact witness from x0 to a rational state near the trajectory's last
/// sample: the flux integrals are rationalized with their sign pattern, then
/// realized as a ramp followed by one straight line.
inline Path trajectory_to_witness(const Crn& crn, const State& x0, const Trajectory& tr, double slack) {
  const std::size_t n = crn.num_species();
  ApproxPath approx;
  approx.x0 = to_doubles(x0, n);
  approx.segments.push_back(tr.flux_integrals);
  bool any = false;
  for (double v : tr.flux_integrals)
    if (v > slack) any = true;
  if (!any) return Path{x0, {}};

  RationalizeOptions opt;
  opt.tolerance = slack;
  opt.zero_slack = slack;
  opt.exact_x0 = x0;
  Path line = rationalize_prepath(crn, approx, opt);
  Path w = witness_from_flux(crn, x0, line.segments[0]);
  try {
    verify_path(crn, w);
  } catch (const PathError& e) {
    throw SignInfeasible(std::string("trajectory witness does not verify: ") + e.what());
  }
  return w;
}

}  // namespace crnric

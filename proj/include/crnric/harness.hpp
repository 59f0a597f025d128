#pragma once

// Adversarial checking of stable computation, and empirical probes of the
// linear / rational structure of what a network computes.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "crnric/analysis.hpp"
#include "crnric/compiler.hpp"
#include "crnric/dynamics.hpp"
#include "crnric/io.hpp"
#include "crnric/pwl.hpp"
#include "crnric/reach.hpp"

namespace crnric {

using Rng = std::mt19937_64;

/// Uniform rational in [lo, hi] with the given denominator.
inline Rational random_rational(Rng& rng, const Rational& lo, const Rational& hi, long denominator = 1000) {
  std::uniform_int_distribution<long> d(0, denominator);
  Rational q(d(rng), denominator);
  q.canonicalize();
  return lo + (hi - lo) * q;
}

struct AdversaryConfig {
  std::size_t max_prefix_segments = 20;
  Rational flux_scale = 1;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
};

/// Random valid path: each segment fires a random nonempty subset of the
/// applicable reactions with random fluxes, halved until the step is valid.
inline Path adversarial_prefix(const Crn& crn, const State& x0, std::size_t segments, const Rational& flux_scale,
                               Rng& rng) {
  Path p{x0, {}};
  State x = x0;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t s = 0; s < segments; ++s) {
    std::vector<ReactionIndex> live;
    for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
      if (applicable(crn, x, j)) live.push_back(j);
    if (live.empty()) break;
    std::vector<ReactionIndex> pick;
    for (auto j : live)
      if (coin(rng)) pick.push_back(j);
    if (pick.empty()) pick.push_back(live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)]);
    std::vector<Rational> u(crn.num_reactions());
    for (auto j : pick) {
      u[j] = random_rational(rng, 0, flux_scale);
      if (u[j] == 0) u[j] = flux_scale / 1000;
    }
    FluxVector flux(u);
    for (int halving = 0; halving < 200 && !check_flux(crn, x, flux); ++halving) {
      for (auto& v : u) v /= 2;
      flux = FluxVector(u);
    }
    if (!check_flux(crn, x, flux)) continue;
    x = apply_flux(crn, x, flux);
    p.segments.push_back(std::move(flux));
  }
  return p;
}

inline std::string path_digest(const Crn& crn, const Path& p) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_path(crn, p)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::to_string(p.segments.size()) + ":" + buf;
}

struct VerifyOptions {
  bool ode_track = false;
  double ode_tolerance = 1e-4;
  double ode_horizon = 1e15;
  double ode_equilibrium = 1e-20;
  double rate_lo = 0.1, rate_hi = 10;
  bool random_rail_split = true;
  unsigned jobs = 1;
};

struct TrialRecord {
  std::size_t index = 0;
  Point input;
  std::vector<Rational> rails;  // initial input species concentrations
  std::string prefix_digest;
  std::string finisher;
  Rational output;
  Rational expected;
  bool stable = false;
  bool pass = false;
  std::optional<double> ode_output;
  std::optional<bool> ode_pass;
  std::string message;
};

struct VerificationReport {
  std::vector<TrialRecord> trials;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t ode_passed = 0;
  std::size_t ode_failed = 0;

  bool all_passed() const { return failed == 0 && ode_failed == 0 && !trials.empty(); }
};

/// Input rail concentrations for x: direct passes x through; dual-rail uses
/// (max(x,0) + t, max(-x,0) + t) with a random shift t when requested.
inline std::vector<Rational> input_rails(const Crc& crc, const Point& x, Rng& rng, bool random_split) {
  std::vector<Rational> rails;
  if (crc.kind == Encoding::direct) {
    for (const auto& v : x) {
      if (v < 0) throw std::invalid_argument("direct encoding needs nonnegative inputs");
      rails.push_back(v);
    }
    return rails;
  }
  for (const auto& d : dualrail_encode(x)) {
    Rational t = random_split ? random_rational(rng, 0, 3, 64) : Rational(0);
    rails.push_back(d.plus + t);
    rails.push_back(d.minus + t);
  }
  return rails;
}

inline std::vector<double> random_rates(std::size_t m, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> k(m);
  for (auto& v : k) v = d(rng);
  return k;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, const Fn& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline TrialRecord run_trial(const CompiledCrc& cc, const PwlFunction& f, const Point& x, std::size_t index,
                             const AdversaryConfig& cfg, const VerifyOptions& opt) {
  const Crc& crc = cc.crc;
  Rng rng(cfg.seed + index);
  TrialRecord rec;
  rec.index = index;
  rec.input = x;
  rec.finisher = "schedule";
  try {
    rec.expected = f.eval(x);
    rec.rails = input_rails(crc, x, rng, opt.random_rail_split);
    State x0 = crc.initial_state(rec.rails);
    Path prefix = adversarial_prefix(crc.crn, x0, cfg.max_prefix_segments, cfg.flux_scale, rng);
    rec.prefix_digest = path_digest(crc.crn, prefix);
    State mid = verify_path(crc.crn, prefix);
    State end = finish_schedule(cc, mid);
    rec.output = crc.output_value(end);
    rec.stable = output_stable(crc, end);
    rec.pass = rec.stable && rec.output == rec.expected;
    if (!rec.stable) rec.message = "final state is not output stable";
    if (opt.ode_track) {
      RatedCrn rated{crc.crn, random_rates(crc.crn.num_reactions(), rng, opt.rate_lo, opt.rate_hi)};
      SimulationOptions so;
      so.horizon = opt.ode_horizon;
      so.equilibrium_threshold = opt.ode_equilibrium;
      so.record = false;
      auto tr = simulate(rated, to_doubles(mid, crc.crn.num_species()), so);
      auto conv = check_convergence(crc, tr, to_double(rec.expected), opt.ode_tolerance);
      rec.ode_output = conv.output;
      rec.ode_pass = conv.status == ConvergenceReport::Status::ok;
    }
  } catch (const std::exception& e) {
    rec.pass = false;
    rec.message = e.what();
    if (opt.ode_track) rec.ode_pass = false;
  }
  return rec;
}

/// Trials with the given inputs: rail split, adversarial prefix, then the
/// exact schedule finisher (and optionally a mass-action finisher).
inline VerificationReport verify_stable_computation(const CompiledCrc& cc, const PwlFunction& f,
                                                    const std::vector<Point>& inputs, const AdversaryConfig& cfg,
                                                    const VerifyOptions& opt = {}) {
  VerificationReport rep;
  rep.trials.resize(inputs.size());
  parallel_for(inputs.size(), opt.jobs,
               [&](std::size_t i) { rep.trials[i] = run_trial(cc, f, inputs[i], i, cfg, opt); });
  for (const auto& t : rep.trials) {
    (t.pass ? rep.passed : rep.failed)++;
    if (t.ode_pass) (*t.ode_pass ? rep.ode_passed : rep.ode_failed)++;
  }
  return rep;
}

/// Random rational inputs in f's domain (rejection sampling on a box).
inline std::vector<Point> random_inputs(const PwlFunction& f, std::size_t count, Rng& rng, const Rational& lo,
                                        const Rational& hi, long denominator = 100) {
  std::vector<Point> out;
  for (std::size_t attempts = 0; out.size() < count; ++attempts) {
    if (attempts > 1000 * count + 1000) throw std::runtime_error("could not sample points in the domain");
    Point x(f.arity);
    for (auto& v : x) v = random_rational(rng, lo, hi, denominator);
    if (f.in_domain(x)) out.push_back(std::move(x));
  }
  return out;
}

inline nlohmann::json to_json(const VerificationReport& rep) {
  using nlohmann::json;
  json trials = json::array();
  for (const auto& t : rep.trials) {
    json rec;
    rec["trial"] = t.index;
    json in = json::array();
    for (const auto& v : t.input) in.push_back(to_string(v));
    rec["input"] = in;
    json rails = json::array();
    for (const auto& v : t.rails) rails.push_back(to_string(v));
    rec["rails"] = rails;
    rec["prefix"] = t.prefix_digest;
    rec["finisher"] = t.finisher;
    rec["output"] = to_string(t.output);
    rec["expected"] = to_string(t.expected);
    rec["stable"] = t.stable;
    rec["pass"] = t.pass;
    if (t.ode_output) rec["ode_output"] = *t.ode_output;
    if (t.ode_pass) rec["ode_pass"] = *t.ode_pass;
    if (!t.message.empty()) rec["message"] = t.message;
    trials.push_back(rec);
  }
  json out;
  out["trials"] = trials;
  out["passed"] = rep.passed;
  out["failed"] = rep.failed;
  if (rep.ode_passed + rep.ode_failed) {
    out["ode_passed"] = rep.ode_passed;
    out["ode_failed"] = rep.ode_failed;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structure probes.

class InsufficientPoints : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProbePoint {
  std::vector<Rational> rails;  // input species concentrations
  Rational output;
  SpeciesSet drained;  // species not producible from the final state
};

/// Runs the exact finisher from each rail vector (no prefix).
inline std::vector<ProbePoint> probe_points(const CompiledCrc& cc, const std::vector<std::vector<Rational>>& rails) {
  std::vector<ProbePoint> out;
  for (const auto& r : rails) {
    State end = finish_schedule(cc, cc.crc.initial_state(r));
    if (!output_stable(cc.crc, end)) throw std::runtime_error("finisher did not reach an output-stable state");
    auto p = producible(cc.crc.crn, end).species;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = !p[i];
    out.push_back({r, cc.crc.output_value(end), std::move(p)});
  }
  return out;
}

struct LinearityReport {
  std::size_t points = 0;
  std::size_t rank = 0;                // rank of the affine system [x 1]
  bool on_hyperplane = false;          // one affine function fits every point
  bool through_origin = false;         // ... with intercept 0
  std::vector<Rational> coefficients;  // one per input species
  Rational intercept;
};

/// Exact affine fit y = a.x + b through the points whose final state is
/// zero on `siphon`.
inline LinearityReport linearity_probe(const Crc& crc, const std::vector<ProbePoint>& pts, const Siphon& siphon) {
  std::vector<const ProbePoint*> sel;
  for (const auto& p : pts) {
    bool in = true;
    for (auto s : siphon)
      if (!p.drained.at(s)) in = false;
    if (in) sel.push_back(&p);
  }
  const std::size_t dims = crc.inputs.size();
  if (sel.size() < 2) throw InsufficientPoints("fewer than two points drain the siphon");

  auto fit = [&](bool with_intercept) -> std::optional<std::pair<std::vector<Rational>, std::size_t>> {
    const std::size_t nv = dims + (with_intercept ? 1 : 0);
    std::vector<std::vector<Rational>> sys;
    for (const auto* p : sel) {
      std::vector<Rational> row(p->rails.begin(), p->rails.end());
      if (with_intercept) row.push_back(1);
      row.push_back(p->output);
      sys.push_back(std::move(row));
    }
    auto piv = reach_detail::rref(sys, nv);
    if (!piv) return std::nullopt;
    std::vector<Rational> sol(nv);
    for (std::size_t r = 0; r < piv->size(); ++r) sol[(*piv)[r]] = sys[r][nv];
    return std::make_pair(sol, piv->size());
  };

  LinearityReport rep;
  rep.points = sel.size();
  if (auto affine = fit(true)) {
    rep.on_hyperplane = true;
    rep.coefficients.assign(affine->first.begin(), affine->first.begin() + dims);
    rep.intercept = affine->first[dims];
    rep.rank = affine->second;
  }
  if (auto linear = fit(false)) {
    rep.through_origin = true;
    rep.coefficients = linear->first;
    rep.intercept = 0;
  }
  return rep;
}

struct SiphonClass {
  Siphon siphon;
  LinearityReport report;
};

/// Groups points by their drained set and fits each group with enough points.
inline std::vector<SiphonClass> linearity_by_drained_set(const CompiledCrc& cc, const std::vector<ProbePoint>& pts,
                                                         std::size_t min_points) {
  std::map<SpeciesSet, std::size_t> counts;
  for (const auto& p : pts) ++counts[p.drained];
  std::vector<SiphonClass> out;
  for (const auto& [set, n] : counts) {
    if (n < min_points) continue;
    Siphon s = to_list(set);
    std::vector<ProbePoint> exact;
    for (const auto& p : pts)
      if (p.drained == set) exact.push_back(p);
    out.push_back({s, linearity_probe(cc.crc, exact, s)});
  }
  return out;
}

/// Value coefficients from rail coefficients: for dual rails (a+, a-) the
/// value coefficient is a+ and a- must equal -a+.
inline std::optional<std::vector<Rational>> value_coefficients(const Crc& crc, const std::vector<Rational>& rails) {
  if (crc.kind == Encoding::direct) return rails;
  std::vector<Rational> out;
  for (std::size_t i = 0; i + 1 < rails.size(); i += 2) {
    if (rails[i + 1] != -rails[i]) return std::nullopt;
    out.push_back(rails[i]);
  }
  return out;
}

struct RationalityReport {
  bool outputs_rational = true;
  bool coefficients_match = true;
  std::vector<std::vector<Rational>> fitted;  // value coefficients per class
};

/// Every fitted class is linear with value coefficients among `expected`
/// (when given). Outputs are exact rationals by construction.
inline RationalityReport rationality_probe(const CompiledCrc& cc, const std::vector<ProbePoint>& pts,
                                           const std::vector<std::vector<Rational>>& expected,
                                           std::size_t min_points) {
  RationalityReport rep;
  for (const auto& p : pts)
    if (p.output.get_den() == 0) rep.outputs_rational = false;
  for (const auto& cls : linearity_by_drained_set(cc, pts, min_points)) {
    if (!cls.report.on_hyperplane || !cls.report.through_origin) {
      rep.coefficients_match = false;
      continue;
    }
    auto v = value_coefficients(cc.crc, cls.report.coefficients);
    if (!v) {
      rep.coefficients_match = false;
      continue;
    }
    rep.fitted.push_back(*v);
    if (!expected.empty() && std::find(expected.begin(), expected.end(), *v) == expected.end())
      rep.coefficients_match = false;
  }
  return rep;
}

}  // namespace crnric

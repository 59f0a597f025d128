// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace testing_support;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

const char* const all_fixtures[] = {"max.pwl", "min.pwl", "linear.pwl", "abs.pwl", "summin.pwl", "direct.pwl"};

bool is_direct(const std::string& name) { return name == "direct.pwl"; }

CompiledCrc compile_fixture(const std::string& name) {
  PwlFunction f = load_pwl(name);
  return is_direct(name) ? compile_direct(f) : compile_maxmin(f.to_maxmin());
}

std::vector<Point> fixture_inputs(const std::string& name, std::size_t count, Rng& rng) {
  PwlFunction f = load_pwl(name);
  if (!is_direct(name)) return random_inputs(f, count, rng, -10, 10);
  // Boundary points where x2 is absent, then the interior.
  std::vector<Point> pts = {{0, 0}, {2, 0}, {Q(7, 3), 0}, {0, Q(1, 7)}, {2, Q(1, 7)}};
  for (const auto& x : random_inputs(f, count - pts.size(), rng, 0, 10)) pts.push_back(x);
  return pts;
}

Outcome compiled_correctness() {
  auto start = Clock::now();
  std::size_t passed = 0, total = 0;
  Rng rng(1001);
  std::ostringstream fails;
  for (std::string name : all_fixtures) {
    auto cc = compile_fixture(name);
    auto rep = verify_stable_computation(cc, load_pwl(name), fixture_inputs(name, 100, rng), {20, 1, 1001, 100});
    passed += rep.passed;
    total += rep.trials.size();
    if (rep.failed) fails << " " << name << ":" << rep.failed;
  }
  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::ostringstream d;
  d << passed << "/" << total << " exact, " << secs << " s (limit 60 s)" << fails.str();
  return {passed == total && total == 600 && secs < 60, d.str()};
}

Outcome reachability_agreement() {
  Rng rng(1002);
  std::size_t agree = 0, witness_ok = 0, positive = 0;
  const std::size_t total = 1000;
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t n = 1 + t % 5, m = 1 + (t / 5) % 5;
    Crn crn = random_crn(rng, n, m);
    State c = random_state(rng, crn, 0.6);
    State d = t % 2 == 0 ? random_walk_endpoint(rng, crn, c, 1 + t % 4) : random_state(rng, crn, 0.6);
    auto fast = decide_reachable(crn, c, d);
    auto slow = decide_reachable_bruteforce(crn, c, d);
    if (fast.reachable == slow.reachable) ++agree;
    if (!fast.reachable) continue;
    ++positive;
    try {
      bool ends = verify_path(crn, *fast.witness) == d;
      if (ends && fast.witness->segments.size() <= std::min(crn.num_reactions(), crn.num_species()) + 1)
        ++witness_ok;
    } catch (const PathError&) {
    }
  }
  std::ostringstream d;
  d << agree << "/" << total << " agree, " << witness_ok << "/" << positive << " witnesses verified within bound";
  return {agree == total && witness_ok == positive && positive > 0, d.str()};
}

Outcome named_reachability() {
  Crn cat = catalysis_crn();
  auto a = decide_reachable(cat, parse_state(read_file(samples_path("catalysis_from.st")), cat),
                            parse_state(read_file(samples_path("catalysis_to.st")), cat));
  Crn lim = limit_crn();
  auto b = decide_reachable(lim, make_state(lim, {{"X", 1}}), make_state(lim, {{"Z", 1}}));
  bool ok = a.reachable && a.witness->segments.size() == 2 && !b.reachable;
  std::ostringstream d;
  d << "catalysis " << (a.reachable ? std::to_string(a.witness->segments.size()) + " segments" : "unreachable")
    << ", limit " << (b.reachable ? "reachable" : "unreachable");
  return {ok, d.str()};
}

Outcome siphon_stability() {
  Rng rng(1004);
  std::size_t agree = 0;
  const std::size_t total = 1000;
  for (std::size_t t = 0; t < total; ++t) {
    Crn crn = random_crn(rng, 2 + t % 5, 1 + t % 6);
    Crc crc = random_crc(rng, crn);
    State c = random_state(rng, crn, 0.5);
    if (output_stable(crc, c) == stable_by_siphons(output_stable_siphons(crc), c)) ++agree;
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " agree"};
}

Outcome equilibrium_formula() {
  Crn crn = parse_crn(read_file(samples_path("oscillating.crn")));
  std::ostringstream d;
  bool ok = true;
  d.precision(10);
  for (auto [k1, k2] : std::vector<std::pair<double, double>>{{1, 1}, {2, 1}, {1, 3}}) {
    SimulationOptions o;
    o.horizon = 1000;
    auto tr = simulate({crn, {k1, k2}}, {1, 0}, o);
    double x = tr.final_state()[crn.index_of("X")], want = k2 / (2 * k1 + k2);
    ok &= std::fabs(x - want) <= 1e-6;
    d << "x=" << x << " (want " << want << ") ";
  }
  return {ok, d.str() + "tol 1e-6"};
}

Outcome mass_action_convergence() {
  Rng rng(1006);
  std::size_t passed = 0, total = 0;
  double worst_err = 0, worst_norm = 0;
  for (std::string name : all_fixtures) {
    auto cc = compile_fixture(name);
    PwlFunction f = load_pwl(name);
    const Crc& crc = cc.crc;
    auto inputs = fixture_inputs(name, 20, rng);
    for (const auto& x : inputs) {
      ++total;
      State x0 = crc.initial_state(input_rails(crc, x, rng, true));
      State mid = verify_path(crc.crn, adversarial_prefix(crc.crn, x0, 20, Q(1), rng));
      RatedCrn rated{crc.crn, random_rates(crc.crn.num_reactions(), rng, 0.1, 10)};
      SimulationOptions so;
      so.horizon = 1e15;
      so.equilibrium_threshold = 1e-20;
      so.record = false;
      auto tr = simulate(rated, to_doubles(mid, crc.crn.num_species()), so);
      double want = to_double(f.eval(x));
      auto rep = check_convergence(crc, tr, want, 1e-4);
      double err = std::fabs(rep.output - want);
      worst_err = std::max(worst_err, err);
      worst_norm = std::max(worst_norm, rep.derivative_norm);
      if (err <= 1e-4 && rep.derivative_norm < 1e-8) ++passed;
    }
  }
  std::ostringstream d;
  d << passed << "/" << total << " within 1e-4 with |dx/dt| < 1e-8; worst error " << worst_err << ", worst norm "
    << worst_norm;
  return {passed == total, d.str()};
}

Outcome mass_action_reachable() {
  Rng rng(1007);
  std::size_t ok = 0, moving = 0;
  const std::size_t total = 100;
  std::ostringstream fails;
  for (std::size_t t = 0; t < total; ++t) {
    Crn crn = random_crn(rng, 2 + t % 4, 1 + t % 4, 2, true);
    State x0 = random_state(rng, crn, 0.7);
    RatedCrn rated{crn, random_rates(crn.num_reactions(), rng, 0.5, 2)};
    SimulationOptions so;
    so.horizon = 1 + 4 * std::uniform_real_distribution<double>(0, 1)(rng);
    so.equilibrium_threshold = 0;
    try {
      auto tr = simulate(rated, to_doubles(x0, crn.num_species()), so);
      Path w = trajectory_to_witness(crn, x0, tr, 1e-6);
      State end = verify_path(crn, w);
      if (!w.segments.empty()) ++moving;
      if (decide_reachable(crn, x0, end).reachable) ++ok;
      else
        fails << " #" << t << ":unreachable";
    } catch (const std::exception& e) {
      fails << " #" << t << ":" << e.what();
    }
  }
  std::ostringstream d;
  d << ok << "/" << total << " (need >= 99), " << moving << " with nonempty witnesses" << fails.str();
  return {ok >= 99, d.str()};
}

Outcome normalization() {
  Rng rng(1008);
  std::size_t agree = 0, total = 0;
  for (std::string name : all_fixtures) {
    PwlFunction f = load_pwl(name);
    MaxMinForm m = regional_to_maxmin(*f.regional);
    Rational lo = f.domain.empty() ? Rational(-10) : Rational(0);
    auto pts = random_inputs(f, 1000, rng, lo, 10, 97);
    for (const auto& x : pts) {
      ++total;
      auto want = f.regional->eval(x);
      if (want && m.eval(x) == *want) ++agree;
    }
  }
  return {agree == total && total == 6000, std::to_string(agree) + "/" + std::to_string(total) + " exact"};
}

Outcome structure_probes() {
  Rng rng(1009);
  std::ostringstream d;
  bool ok = true;
  auto rails = [&](std::size_t count, std::size_t width) {
    std::vector<std::vector<Rational>> out(count, std::vector<Rational>(width));
    for (auto& r : out)
      for (auto& v : r) v = rand_q(rng, 70, 7) + Q(1, 7);
    return out;
  };
  for (std::string name : all_fixtures) {
    auto cc = compile_fixture(name);
    std::vector<std::vector<Rational>> expected;
    for (const auto& g : load_pwl(name).to_maxmin().components) expected.push_back(g.coeffs);
    auto pts = probe_points(cc, rails(120, cc.crc.inputs.size()));
    auto rep = rationality_probe(cc, pts, expected, 3 * cc.crc.inputs.size());
    bool good = rep.outputs_rational && rep.coefficients_match && !rep.fitted.empty();
    ok &= good;
    d << name << ":" << (good ? "ok" : "bad") << " ";
  }
  CompiledCrc two = with_default_schedule(parse_crc(read_file(samples_path("two_siphons.crn"))));
  auto pts = probe_points(two, rails(60, 2));
  const Crn& crn = two.crc.crn;
  auto r1 = linearity_probe(two.crc, pts, {crn.index_of("X1")});
  auto r2 = linearity_probe(two.crc, pts, {crn.index_of("X2")});
  bool siphons = r1.through_origin && r1.coefficients == std::vector<Rational>{1, 0} && r2.through_origin &&
                 r2.coefficients == std::vector<Rational>{0, 1};
  ok &= siphons;
  d << "X1+X2->Y: drained {X1} gives " << (r1.coefficients == std::vector<Rational>{1, 0} ? "x1" : "?")
    << ", drained {X2} gives " << (r2.coefficients == std::vector<Rational>{0, 1} ? "x2" : "?");
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 compiled functions compute exactly under adversarial prefixes", compiled_correctness},
      {"2 reachability decision agrees with brute force", reachability_agreement},
      {"3 named reachability cases", named_reachability},
      {"4 output stability matches siphon characterization", siphon_stability},
      {"5 mass-action equilibrium formula", equilibrium_formula},
      {"6 mass-action convergence of compiled CRCs", mass_action_convergence},
      {"7 mass-action trajectories are segment reachable", mass_action_reachable},
      {"8 max-min normalization agrees with regions", normalization},
      {"9 structure probes", structure_probes},
  };
  int failed = 0;
  for (const auto& [label, run] : criteria) {
    auto start = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << label << "] " << o.detail << " [" << secs << " s]"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

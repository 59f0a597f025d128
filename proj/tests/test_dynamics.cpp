#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace testing_support;

namespace {

RatedCrn rated(const std::string& text, std::vector<double> k) { return {parse_crn(text), std::move(k)}; }

SimulationOptions until(double horizon) {
  SimulationOptions o;
  o.horizon = horizon;
  o.equilibrium_threshold = 0;
  return o;
}

double at(const Trajectory& tr, const Crn& crn, const char* name) { return tr.final_state()[crn.index_of(name)]; }

}  // namespace

TEST(Odes, Formatting) {
  auto r = rated("species: X C Y\nX + X -> Y\nC + X -> C + Y\n", {1, 1});
  EXPECT_EQ(format_odes(r), "dX/dt = -2 k1 X^2 - k2 X C\ndC/dt = 0\ndY/dt = k1 X^2 + k2 X C\n");
  auto osc = rated(read_file(samples_path("oscillating.crn")), {1, 1});
  EXPECT_EQ(format_odes(osc), "dX/dt = -2 k1 X^2 + k2 X Y\ndY/dt = 2 k1 X^2 - k2 X Y\n");
}

TEST(Odes, RateValidation) {
  EXPECT_THROW(simulate(rated("X -> Y\n", {0}), {1, 0}), std::invalid_argument);
  EXPECT_THROW(simulate(rated("X -> Y\n", {1, 2}), {1, 0}), std::invalid_argument);
  EXPECT_THROW(simulate(rated("X -> Y\n", {1}), {-1, 0}), std::invalid_argument);
}

TEST(Simulate, Decay) {
  auto r = rated("X -> Y\n", {1});
  auto tr = simulate(r, {1, 0}, until(1));
  EXPECT_NEAR(at(tr, r.crn, "X"), std::exp(-1.0), 1e-6);
  EXPECT_NEAR(at(tr, r.crn, "Y"), 1 - std::exp(-1.0), 1e-6);
  EXPECT_NEAR(tr.flux_integrals[0], 1 - std::exp(-1.0), 1e-6);
}

TEST(Simulate, ZeroStateIsConstant) {
  auto r = rated("X -> Y\nX + Y -> Z\n", {1, 1});
  auto tr = simulate(r, {0, 0, 0}, until(10));
  for (double v : tr.final_state()) EXPECT_EQ(v, 0.0);
  for (double v : tr.flux_integrals) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, FiniteTimeBlowUp) {
  auto r = rated("X + X -> X + X + X\n", {1});
  EXPECT_THROW(simulate(r, {1}, until(10)), BlowUp);
}

TEST(Simulate, DynamicEquilibrium) {
  auto r = rated(read_file(samples_path("oscillating.crn")), {1, 1});
  SimulationOptions o;
  o.horizon = 200;
  auto tr = simulate(r, {1, 0}, o);
  EXPECT_NEAR(at(tr, r.crn, "X"), 1.0 / 3, 1e-6);
  Crc crc = parse_crc("inputs: X\noutput: Y\nX + X -> Y + Y\nY + X -> X + X\n");
  auto rep = check_convergence(crc, tr, 2.0 / 3, 1e-6);
  EXPECT_EQ(rep.status, ConvergenceReport::Status::not_converged);
  EXPECT_GT(rep.max_rate, 0.1);
}

TEST(Simulate, CompiledMaxConverges) {
  auto cc = compile_maxmin(load_pwl("max.pwl").to_maxmin());
  RatedCrn r{cc.crc.crn, std::vector<double>(cc.crc.crn.num_reactions(), 1.0)};
  State c0 = cc.crc.initial_state({0, 1, 2, 0});
  SimulationOptions o;
  o.horizon = 1e6;
  o.equilibrium_threshold = 1e-14;
  auto tr = simulate(r, to_doubles(c0, cc.crc.crn.num_species()), o);
  auto rep = check_convergence(cc.crc, tr, 2, 1e-6);
  EXPECT_EQ(rep.status, ConvergenceReport::Status::ok) << rep.output;
}

TEST(Witness, CatalysisTrajectory) {
  Crn crn = catalysis_crn();
  State x0 = parse_state(read_file(samples_path("catalysis_from.st")), crn);
  RatedCrn r{crn, std::vector<double>(crn.num_reactions(), 1.0)};
  auto tr = simulate(r, to_doubles(x0, crn.num_species()), until(5));
  Path w = trajectory_to_witness(crn, x0, tr, 1e-6);
  State end = verify_path(crn, w);
  for (std::size_t i = 0; i < crn.num_species(); ++i) EXPECT_NEAR(to_double(end.at(i)), tr.final_state()[i], 1e-5);

  auto still = simulate(r, to_doubles(x0, crn.num_species()), until(0));
  EXPECT_TRUE(trajectory_to_witness(crn, x0, still, 1e-6).segments.empty());
}

// Properties.

TEST(DynamicsProperties, AnnihilationMatchesClosedForm) {
  // dx/dt = -2 k x^2  gives  x(t) = x0 / (1 + 2 k x0 t).
  for (double k : {0.5, 1.0, 3.0})
    for (double x0 : {0.25, 1.0, 4.0}) {
      auto r = rated("X + X ->\n", {k});
      auto tr = simulate(r, {x0}, until(2));
      EXPECT_NEAR(tr.final_state()[0], x0 / (1 + 2 * k * x0 * 2), 1e-7);
    }
}

TEST(DynamicsProperties, ConservationAlongTrajectories) {
  Rng rng(71);
  for (int t = 0; t < 40; ++t) {
    Crn crn = random_crn(rng, 4, 4, 2, true);
    // Pad every reaction to preserve molecule count exactly.
    Crn padded;
    for (std::size_t i = 0; i < crn.num_species(); ++i) padded.add_species(crn.name(i));
    SpeciesIndex waste = padded.add_species("W");
    for (const auto& rx : crn.reactions()) {
      Reaction r = rx;
      int diff = 0;
      for (const auto& [s, c] : r.reactants) diff += c;
      for (const auto& [s, c] : r.products) diff -= c;
      if (diff > 0) r.products[waste] += diff;
      padded.add_reaction(std::move(r));
    }
    std::uniform_real_distribution<double> kd(0.2, 5);
    RatedCrn r{padded, {}};
    for (std::size_t j = 0; j < padded.num_reactions(); ++j) r.rates.push_back(kd(rng));
    std::vector<double> x0(padded.num_species());
    std::uniform_real_distribution<double> xd(0, 3);
    for (std::size_t i = 0; i + 1 < x0.size(); ++i) x0[i] = xd(rng);
    auto tr = simulate(r, x0, until(3));
    double before = 0, after = 0;
    for (double v : x0) before += v;
    for (std::size_t s = 0; s < tr.states.size(); ++s) {
      after = 0;
      for (double v : tr.states[s]) {
        ASSERT_GE(v, 0.0);
        after += v;
      }
      ASSERT_NEAR(after, before, 1e-8 * (1 + before));
    }
  }
}

TEST(DynamicsProperties, FluxIntegralsExplainDisplacement) {
  Rng rng(72);
  for (int t = 0; t < 40; ++t) {
    Crn crn = random_crn(rng, 4, 4, 2, true);
    RatedCrn r{crn, std::vector<double>(crn.num_reactions(), 1.0)};
    std::vector<double> x0(crn.num_species());
    std::uniform_real_distribution<double> xd(0, 3);
    for (auto& v : x0) v = xd(rng);
    auto tr = simulate(r, x0, until(2));
    for (std::size_t i = 0; i < crn.num_species(); ++i) {
      double d = x0[i];
      for (std::size_t j = 0; j < crn.num_reactions(); ++j) d += crn.reaction(j).net(i) * tr.flux_integrals[j];
      ASSERT_NEAR(d, tr.final_state()[i], 1e-7);
    }
  }
}

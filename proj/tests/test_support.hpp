#pragma once

#include <random>
#include <string>
#include <vector>

#include "crnric/crnric.hpp"

namespace testing_support {

using namespace crnric;

inline Rational Q(long n, long d = 1) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

inline std::string samples_path(const std::string& name) { return std::string(CRNRIC_SAMPLES) + "/" + name; }

inline Rational rand_q(Rng& rng, long max_num, long den) {
  return Q(std::uniform_int_distribution<long>(0, max_num)(rng), den);
}

/// Random CRN with species S0..S{n-1}; coefficients 0..max_coeff, nonempty
/// reactant side. With `conservative` each reaction produces at most as
/// many molecules as it consumes.
inline Crn random_crn(Rng& rng, std::size_t n, std::size_t m, int max_coeff = 2, bool conservative = false) {
  Crn crn;
  for (std::size_t i = 0; i < n; ++i) crn.add_species("S" + std::to_string(i));
  std::uniform_int_distribution<int> coeff(0, max_coeff);
  std::bernoulli_distribution sparse(0.6);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t j = 0; j < m; ++j) {
    Reaction r;
    for (std::size_t i = 0; i < n; ++i) {
      if (sparse(rng)) continue;
      if (int c = coeff(rng)) r.reactants[i] = c;
    }
    if (r.reactants.empty()) r.reactants[pick(rng)] = 1;
    int in = 0;
    for (const auto& [s, c] : r.reactants) in += c;
    int out = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sparse(rng)) continue;
      int c = coeff(rng);
      if (conservative && out + c > in) c = in - out;
      if (c > 0) r.products[i] = c;
      out += c;
    }
    crn.add_reaction(std::move(r));
  }
  return crn;
}

/// Random state; each species present with probability `density`.
inline State random_state(Rng& rng, const Crn& crn, double density = 0.5, long max_num = 8, long den = 4) {
  std::bernoulli_distribution present(density);
  State c(crn.num_species());
  for (std::size_t i = 0; i < crn.num_species(); ++i)
    if (present(rng)) c.set(i, rand_q(rng, max_num, den) + Q(1, den));
  return c;
}

/// Endpoint of a random valid path of `segments` segments.
inline State random_walk_endpoint(Rng& rng, const Crn& crn, const State& c, std::size_t segments) {
  Path p = adversarial_prefix(crn, c, segments, Q(1), rng);
  return verify_path(crn, p);
}

/// Crc built from a CRN by choosing one output species and random inputs.
inline Crc random_crc(Rng& rng, const Crn& crn) {
  Crc crc;
  crc.crn = crn;
  crc.kind = Encoding::direct;
  crc.output_plus = std::uniform_int_distribution<std::size_t>(0, crn.num_species() - 1)(rng);
  for (std::size_t i = 0; i < crn.num_species(); ++i)
    if (i != crc.output_plus && std::bernoulli_distribution(0.4)(rng)) crc.inputs.push_back(i);
  return crc;
}

inline Crn catalysis_crn() {
  Crn crn;
  for (auto s : {"X", "Y", "C", "Z"}) crn.add_species(s);
  crn.add_reaction({{"X", 1}}, {{"C", 1}});
  crn.add_reaction({{"C", 1}, {"Y", 1}}, {{"C", 1}, {"Z", 1}});
  return crn;
}

inline Crn limit_crn() {
  Crn crn;
  for (auto s : {"X", "Y", "Z"}) crn.add_species(s);
  crn.add_reaction({{"X", 1}}, {{"Y", 1}});
  crn.add_reaction({{"X", 1}, {"Y", 1}}, {{"Z", 1}, {"Y", 1}});
  return crn;
}

inline PwlFunction load_pwl(const std::string& name) { return parse_pwl(read_file(samples_path(name))); }

}  // namespace testing_support

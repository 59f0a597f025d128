#pragma once

// Siphons, output stability and feedforward orderings.

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "crnric/core.hpp"
#include "crnric/reach.hpp"

namespace crnric {

/// Sorted species indices.
using Siphon = std::vector<SpeciesIndex>;

inline SpeciesSet to_set(const Siphon& s, std::size_t n) {
  SpeciesSet out(n, false);
  for (auto i : s) out.at(i) = true;
  return out;
}

inline Siphon to_list(const SpeciesSet& s) {
  Siphon out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) out.push_back(i);
  return out;
}

namespace analysis_detail {

// First reaction producing a member of omega without consuming one.
inline std::optional<ReactionIndex> siphon_violation(const Crn& crn, const SpeciesSet& omega) {
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j) {
    const Reaction& r = crn.reaction(j);
    bool produces = false;
    for (const auto& [s, n] : r.products)
      if (omega[s]) produces = true;
    if (!produces) continue;
    bool guarded = false;
    for (const auto& [s, n] : r.reactants)
      if (omega[s]) guarded = true;
    if (!guarded) return j;
  }
  return std::nullopt;
}

inline bool subset(const SpeciesSet& a, const SpeciesSet& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

// Minimal elements, sorted lexicographically by index list.
inline std::vector<Siphon> minimal_sorted(const std::vector<SpeciesSet>& found) {
  std::vector<Siphon> out;
  for (std::size_t a = 0; a < found.size(); ++a) {
    bool minimal = true;
    for (std::size_t b = 0; b < found.size() && minimal; ++b)
      if (a != b && found[a] != found[b] && subset(found[b], found[a])) minimal = false;
    if (minimal) out.push_back(to_list(found[a]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Depth-first growth of omega: `next_branch` returns the reaction whose
// reactants must be branched on, or nullopt when omega is accepted.
template <class Branch>
void grow(const Crn& crn, SpeciesSet omega, const Branch& next_branch, std::set<SpeciesSet>& seen,
          std::vector<SpeciesSet>& found) {
  if (!seen.insert(omega).second) return;
  for (const auto& f : found)
    if (subset(f, omega)) return;
  auto j = next_branch(omega);
  if (!j) {
    found.push_back(omega);
    return;
  }
  for (const auto& [s, n] : crn.reaction(*j).reactants) {
    if (omega[s]) continue;
    SpeciesSet next = omega;
    next[s] = true;
    grow(crn, std::move(next), next_branch, seen, found);
  }
}

}  // namespace analysis_detail

inline bool is_siphon(const Crn& crn, const SpeciesSet& omega) {
  SpeciesSet o = omega;
  o.resize(crn.num_species(), false);
  return !analysis_detail::siphon_violation(crn, o);
}

inline bool is_siphon(const Crn& crn, const Siphon& omega) {
  return is_siphon(crn, to_set(omega, crn.num_species()));
}

/// All inclusion-minimal nonempty siphons.
inline std::vector<Siphon> minimal_siphons(const Crn& crn) {
  const std::size_t n = crn.num_species();
  std::set<SpeciesSet> seen;
  std::vector<SpeciesSet> found;
  auto branch = [&](const SpeciesSet& omega) { return analysis_detail::siphon_violation(crn, omega); };
  for (SpeciesIndex s = 0; s < n; ++s) {
    SpeciesSet seed(n, false);
    seed[s] = true;
    analysis_detail::grow(crn, seed, branch, seen, found);
  }
  return analysis_detail::minimal_sorted(found);
}

inline bool static_equilibrium(const Crn& crn, const State& c) {
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
    if (applicable(crn, c, j)) return false;
  return true;
}

/// No reachable state changes the output: every output-changing reaction
/// needs a species that can never be produced from c.
inline bool output_stable(const Crc& crc, const State& c) {
  const Crn& crn = crc.crn;
  auto p = producible(crn, c).species;
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j) {
    if (!crc.changes_output(j)) continue;
    if (reach_detail::enabled_by(crn.reaction(j), p)) return false;
  }
  return true;
}

struct StableSiphons {
  bool all_states_stable = false;  // no reaction changes the output
  std::vector<Siphon> siphons;     // minimal siphons hitting every output-changing reaction
};

/// A state is output stable iff it is zero on one of the returned siphons
/// (or all_states_stable is set).
inline StableSiphons output_stable_siphons(const Crc& crc) {
  const Crn& crn = crc.crn;
  std::vector<ReactionIndex> changing;
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
    if (crc.changes_output(j)) changing.push_back(j);
  StableSiphons out;
  if (changing.empty()) {
    out.all_states_stable = true;
    return out;
  }
  auto branch = [&](const SpeciesSet& omega) -> std::optional<ReactionIndex> {
    for (auto j : changing) {
      bool hit = false;
      for (const auto& [s, n] : crn.reaction(j).reactants)
        if (omega[s]) hit = true;
      if (!hit) return j;
    }
    return analysis_detail::siphon_violation(crn, omega);
  };
  std::set<SpeciesSet> seen;
  std::vector<SpeciesSet> found;
  analysis_detail::grow(crn, SpeciesSet(crn.num_species(), false), branch, seen, found);
  out.siphons = analysis_detail::minimal_sorted(found);
  return out;
}

inline bool stable_by_siphons(const StableSiphons& ss, const State& c) {
  if (ss.all_states_stable) return true;
  for (const auto& omega : ss.siphons) {
    bool drained = true;
    for (auto s : omega)
      if (c.at(s) != 0) drained = false;
    if (drained) return true;
  }
  return false;
}

/// Checks the feedforward condition literally for a given order.
inline bool is_feedforward_order(const Crn& crn, const std::vector<SpeciesIndex>& order) {
  if (order.size() != crn.num_species()) return false;
  std::vector<std::size_t> pos(crn.num_species(), crn.num_species());
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (order[p] >= crn.num_species() || pos[order[p]] != crn.num_species()) return false;
    pos[order[p]] = p;
  }
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
    for (SpeciesIndex i = 0; i < crn.num_species(); ++i) {
      if (crn.stoich(i, j) <= 0) continue;
      bool earlier = false;
      for (SpeciesIndex k = 0; k < crn.num_species() && !earlier; ++k)
        earlier = crn.stoich(k, j) < 0 && pos[k] < pos[i];
      if (!earlier) return false;
    }
  return true;
}

/// Greedy: append any species whose net producers all net-consume an
/// already placed species.
inline std::optional<std::vector<SpeciesIndex>> feedforward_order(const Crn& crn) {
  const std::size_t n = crn.num_species();
  std::vector<SpeciesIndex> order;
  std::vector<bool> placed(n, false);
  while (order.size() < n) {
    bool progress = false;
    for (SpeciesIndex i = 0; i < n; ++i) {
      if (placed[i]) continue;
      bool ok = true;
      for (ReactionIndex j = 0; j < crn.num_reactions() && ok; ++j) {
        if (crn.stoich(i, j) <= 0) continue;
        bool consumes = false;
        for (SpeciesIndex k = 0; k < n && !consumes; ++k) consumes = placed[k] && crn.stoich(k, j) < 0;
        ok = consumes;
      }
      if (ok) {
        placed[i] = true;
        order.push_back(i);
        progress = true;
      }
    }
    if (!progress) return std::nullopt;
  }
  return order;
}

}  // namespace crnric

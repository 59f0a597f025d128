#pragma once

// Reaction networks, states, flux vectors and the straight-line step c + M u.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crnric/rational.hpp"

namespace crnric {

using SpeciesIndex = std::size_t;
using ReactionIndex = std::size_t;
using Stoichiometry = std::map<SpeciesIndex, int>;
using SpeciesSet = std::vector<bool>;

struct Reaction {
  Stoichiometry reactants;
  Stoichiometry products;

  int reactant_count(SpeciesIndex s) const {
    auto it = reactants.find(s);
    return it == reactants.end() ? 0 : it->second;
  }
  int product_count(SpeciesIndex s) const {
    auto it = products.find(s);
    return it == products.end() ? 0 : it->second;
  }
  int net(SpeciesIndex s) const { return product_count(s) - reactant_count(s); }
  int order() const {
    int n = 0;
    for (const auto& [s, c] : reactants) n += c;
    return n;
  }

  bool operator==(const Reaction&) const = default;
};

class Crn {
 public:
  SpeciesIndex add_species(const std::string& name) {
    if (!valid_species_name(name)) throw std::invalid_argument("invalid species name '" + name + "'");
    if (index_.count(name)) throw std::invalid_argument("duplicate species '" + name + "'");
    index_.emplace(name, names_.size());
    names_.push_back(name);
    stoich_.emplace_back(reactions_.size(), 0);
    return names_.size() - 1;
  }

  SpeciesIndex ensure_species(const std::string& name) {
    if (auto s = find(name)) return *s;
    return add_species(name);
  }

  ReactionIndex add_reaction(Reaction r) {
    if (r.reactants.empty()) throw std::invalid_argument("reaction has an empty reactant side");
    for (auto* side : {&r.reactants, &r.products}) {
      for (auto it = side->begin(); it != side->end();) {
        if (it->first >= names_.size()) throw std::out_of_range("reaction names an unknown species");
        if (it->second < 0) throw std::invalid_argument("negative stoichiometric coefficient");
        if (it->second == 0)
          it = side->erase(it);
        else
          ++it;
      }
    }
    if (r.reactants.empty()) throw std::invalid_argument("reaction has an empty reactant side");
    for (SpeciesIndex i = 0; i < names_.size(); ++i) stoich_[i].push_back(r.net(i));
    reactions_.push_back(std::move(r));
    return reactions_.size() - 1;
  }

  ReactionIndex add_reaction(const std::vector<std::pair<std::string, int>>& reactants,
                             const std::vector<std::pair<std::string, int>>& products) {
    Reaction r;
    for (const auto& [name, c] : reactants) r.reactants[ensure_species(name)] += c;
    for (const auto& [name, c] : products) r.products[ensure_species(name)] += c;
    return add_reaction(std::move(r));
  }

  std::optional<SpeciesIndex> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  SpeciesIndex index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown species '" + name + "'");
    return it->second;
  }

  const std::string& name(SpeciesIndex s) const { return names_.at(s); }
  const std::vector<std::string>& species() const { return names_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const Reaction& reaction(ReactionIndex j) const {
    if (j >= reactions_.size()) throw std::out_of_range("reaction index out of range");
    return reactions_[j];
  }
  std::size_t num_species() const { return names_.size(); }
  std::size_t num_reactions() const { return reactions_.size(); }

  /// M(i, j): net production of species i by reaction j.
  int stoich(SpeciesIndex i, ReactionIndex j) const {
    if (i >= names_.size() || j >= reactions_.size()) throw std::out_of_range("stoich index out of range");
    return stoich_[i][j];
  }

  bool operator==(const Crn& o) const { return names_ == o.names_ && reactions_ == o.reactions_; }

  static bool valid_species_name(const std::string& s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(s[0])) return false;
    std::size_t end = s.size();
    if (s.back() == '+' || s.back() == '-') --end;
    if (end == 0) return false;
    for (std::size_t i = 1; i < end; ++i)
      if (!alpha(s[i]) && !digit(s[i]) && s[i] != '.') return false;
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, SpeciesIndex> index_;
  std::vector<Reaction> reactions_;
  std::vector<std::vector<int>> stoich_;
};

// ---------------------------------------------------------------------------

/// Dense vector of exact nonnegative rationals. Writes are checked.
template <class Tag>
class NonnegVector {
 public:
  NonnegVector() = default;
  explicit NonnegVector(std::size_t n) : v_(n) {}
  explicit NonnegVector(std::vector<Rational> v) : v_(std::move(v)) {
    for (const auto& q : v_)
      if (q < 0) throw std::invalid_argument("negative entry in a nonnegative vector");
  }

  std::size_t size() const { return v_.size(); }
  const Rational& operator[](std::size_t i) const { return v_[i]; }
  Rational at(std::size_t i) const { return i < v_.size() ? v_[i] : Rational(0); }
  void set(std::size_t i, Rational q) {
    if (q < 0) throw std::invalid_argument("negative entry in a nonnegative vector");
    if (i >= v_.size()) v_.resize(i + 1);
    v_[i] = std::move(q);
  }
  const std::vector<Rational>& values() const { return v_; }

  bool is_zero() const {
    for (const auto& q : v_)
      if (q != 0) return false;
    return true;
  }

  bool operator==(const NonnegVector& o) const {
    const std::size_t n = std::max(v_.size(), o.v_.size());
    for (std::size_t i = 0; i < n; ++i)
      if (at(i) != o.at(i)) return false;
    return true;
  }

 private:
  std::vector<Rational> v_;
};

struct StateTag {};
struct FluxTag {};
using State = NonnegVector<StateTag>;
using FluxVector = NonnegVector<FluxTag>;

inline SpeciesSet support(const State& c, std::size_t num_species) {
  SpeciesSet s(num_species, false);
  for (std::size_t i = 0; i < num_species; ++i) s[i] = c.at(i) > 0;
  return s;
}

inline State make_state(const Crn& crn, const std::vector<std::pair<std::string, Rational>>& entries) {
  State c(crn.num_species());
  for (const auto& [name, q] : entries) c.set(crn.index_of(name), q);
  return c;
}

inline FluxVector make_flux(std::size_t num_reactions, const std::vector<Rational>& values) {
  std::vector<Rational> v = values;
  v.resize(num_reactions);
  return FluxVector(std::move(v));
}

// ---------------------------------------------------------------------------

class InapplicableReaction : public std::runtime_error {
 public:
  explicit InapplicableReaction(ReactionIndex j)
      : std::runtime_error("reaction " + std::to_string(j + 1) + " is not applicable"), reaction_(j) {}
  ReactionIndex reaction() const noexcept { return reaction_; }

 private:
  ReactionIndex reaction_;
};

class NegativeResult : public std::runtime_error {
 public:
  NegativeResult(SpeciesIndex s, const std::string& name)
      : std::runtime_error("species " + name + " would become negative"), species_(s) {}
  SpeciesIndex species() const noexcept { return species_; }

 private:
  SpeciesIndex species_;
};

inline bool applicable(const Crn& crn, const State& c, ReactionIndex j) {
  for (const auto& [s, n] : crn.reaction(j).reactants)
    if (c.at(s) <= 0) return false;
  return true;
}

struct FluxCheck {
  enum Kind { ok, inapplicable, negative } kind = ok;
  std::size_t index = 0;  // reaction or species, depending on kind
  explicit operator bool() const { return kind == ok; }
};

/// c + M u without validity checks (entries may be negative).
inline std::vector<Rational> displaced(const Crn& crn, const State& c, const FluxVector& u) {
  std::vector<Rational> d(crn.num_species());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = c.at(i);
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j) {
    const Rational& f = u.at(j);
    if (f == 0) continue;
    const Reaction& r = crn.reaction(j);
    for (const auto& [s, n] : r.reactants) d[s] -= f * n;
    for (const auto& [s, n] : r.products) d[s] += f * n;
  }
  return d;
}

inline FluxCheck check_flux(const Crn& crn, const State& c, const FluxVector& u) {
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
    if (u.at(j) > 0 && !applicable(crn, c, j)) return {FluxCheck::inapplicable, j};
  auto d = displaced(crn, c, u);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] < 0) return {FluxCheck::negative, i};
  return {};
}

inline State apply_flux(const Crn& crn, const State& c, const FluxVector& u) {
  if (u.size() > crn.num_reactions()) {
    for (std::size_t j = crn.num_reactions(); j < u.size(); ++j)
      if (u[j] != 0) throw std::out_of_range("flux names an unknown reaction");
  }
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
    if (u.at(j) > 0 && !applicable(crn, c, j)) throw InapplicableReaction(j);
  auto d = displaced(crn, c, u);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] < 0) throw NegativeResult(i, crn.name(i));
  return State(std::move(d));
}

/// Initial state plus a finite sequence of straight-line segments.
struct Path {
  State x0;
  std::vector<FluxVector> segments;
};

// ---------------------------------------------------------------------------

enum class Encoding { direct, dual };

struct Crc {
  Crn crn;
  std::vector<SpeciesIndex> inputs;  // dual: X1+, X1-, X2+, X2-, ...
  Encoding kind = Encoding::direct;
  SpeciesIndex output_plus = 0;
  std::optional<SpeciesIndex> output_minus;
  std::map<SpeciesIndex, Rational> context;

  std::size_t arity() const { return kind == Encoding::dual ? inputs.size() / 2 : inputs.size(); }

  bool is_output(SpeciesIndex s) const { return s == output_plus || (output_minus && s == *output_minus); }

  Rational output_value(const State& c) const {
    Rational y = c.at(output_plus);
    if (output_minus) y -= c.at(*output_minus);
    return y;
  }

  /// Reactions with nonzero net effect on an output species.
  bool changes_output(ReactionIndex j) const {
    const Reaction& r = crn.reaction(j);
    if (r.net(output_plus) != 0) return true;
    return output_minus && r.net(*output_minus) != 0;
  }

  /// Initial state for input values x (dual-rail: given as (plus, minus) pairs flattened).
  State initial_state(const std::vector<Rational>& rail_values) const {
    if (rail_values.size() != inputs.size()) throw std::invalid_argument("input size mismatch");
    State c(crn.num_species());
    for (std::size_t i = 0; i < inputs.size(); ++i) c.set(inputs[i], c.at(inputs[i]) + rail_values[i]);
    for (const auto& [s, q] : context) c.set(s, c.at(s) + q);
    return c;
  }

  void validate() const {
    const std::size_t n = crn.num_species();
    for (auto s : inputs)
      if (s >= n) throw std::invalid_argument("input species out of range");
    if (output_plus >= n || (output_minus && *output_minus >= n))
      throw std::invalid_argument("output species out of range");
    for (auto s : inputs)
      if (is_output(s)) throw std::invalid_argument("output species " + crn.name(s) + " is also an input");
    if (kind == Encoding::dual) {
      if (!output_minus) throw std::invalid_argument("dual-rail CRC needs two output rails");
      if (inputs.size() % 2) throw std::invalid_argument("dual-rail CRC needs input rail pairs");
    } else if (output_minus) {
      throw std::invalid_argument("direct CRC has a single output species");
    }
    for (const auto& [s, q] : context)
      if (s >= n || q <= 0) throw std::invalid_argument("initial context must be positive");
  }
};

}  // namespace crnric

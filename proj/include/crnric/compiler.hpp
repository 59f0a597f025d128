#pragma once

// Piecewise linear functions to reaction networks: linear, min and max
// gadgets composed along the max-min form (dual-rail), the indicator
// construction for direct encoding, and the canonical completion schedule.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crnric/analysis.hpp"
#include "crnric/core.hpp"
#include "crnric/io.hpp"
#include "crnric/pwl.hpp"
#include "crnric/reach.hpp"

namespace crnric {

struct CompiledCrc {
  Crc crc;
  std::vector<ReactionIndex> schedule;
  std::vector<std::string> provenance;  // gadget tag per reaction
  std::size_t passes = 1;
};

class NotPositiveContinuous : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompileOptions {
  // A component x_i feeding a min/max gadget is wired straight from the input.
  bool identity_passthrough = true;
};

namespace compiler_detail {

using Terms = std::vector<std::pair<std::string, int>>;

struct Wire {
  std::string plus, minus;
};

inline Wire wire(const std::string& base) { return {base + "+", base + "-"}; }

struct Builder {
  Crn crn;
  std::vector<std::string> tags;
  std::vector<ReactionIndex> schedule;
  std::map<std::string, Rational> context;

  std::optional<std::string> catalyst;
  std::optional<Wire> output;
  std::optional<Wire> tag_wire;

  ReactionIndex add(const std::string& tag, Terms lhs, Terms rhs) {
    if (catalyst) {
      lhs.emplace_back(*catalyst, 1);
      rhs.emplace_back(*catalyst, 1);
    }
    if (tag_wire && output) {
      Terms extra;
      for (const auto& [name, n] : rhs) {
        if (name == output->plus) extra.emplace_back(tag_wire->plus, n);
        if (name == output->minus) extra.emplace_back(tag_wire->minus, n);
      }
      rhs.insert(rhs.end(), extra.begin(), extra.end());
    }
    auto j = crn.add_reaction(lhs, rhs);
    tags.push_back(tag);
    return j;
  }

  void add_context(const std::string& species, const Rational& q) {
    if (q == 0) return;
    crn.ensure_species(species);
    context[species] += q;
  }
};

inline mpz_class lcm_of_denominators(const std::vector<Rational>& v) {
  mpz_class d = 1;
  for (const auto& q : v) mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), q.get_den_mpz_t());
  return d;
}

inline int to_int(const mpz_class& z) {
  if (!z.fits_sint_p()) throw std::overflow_error("stoichiometric coefficient too large");
  return static_cast<int>(z.get_si());
}

/// Linear gadget: X_i -> n_i W on matching rails (swapped for n_i < 0), d W -> Y.
inline void emit_linear(Builder& b, const std::string& tag, const AffineComponent& g,
                        const std::vector<std::optional<Wire>>& in, const Wire& w, const Wire& out) {
  mpz_class d = lcm_of_denominators(g.coeffs);
  bool any = false;
  for (std::size_t i = 0; i < g.coeffs.size(); ++i) {
    if (g.coeffs[i] == 0) continue;
    any = true;
    mpz_class n = g.coeffs[i].get_num() * (d / g.coeffs[i].get_den());
    const Wire& x = *in[i];
    int mag = to_int(abs(n));
    const std::string& pos = n > 0 ? w.plus : w.minus;
    const std::string& neg = n > 0 ? w.minus : w.plus;
    b.schedule.push_back(b.add(tag, {{x.plus, 1}}, {{pos, mag}}));
    b.schedule.push_back(b.add(tag, {{x.minus, 1}}, {{neg, mag}}));
  }
  if (!any) return;
  int dd = to_int(d);
  b.schedule.push_back(b.add(tag, {{w.plus, dd}}, {{out.plus, 1}}));
  b.schedule.push_back(b.add(tag, {{w.minus, dd}}, {{out.minus, 1}}));
}

/// min (or max, rails swapped) of two dual-rail wires.
inline void emit_minmax(Builder& b, const std::string& tag, bool is_max, const Wire& x1, const Wire& x2,
                        const Wire& y) {
  auto P = [&](const Wire& w) { return is_max ? w.minus : w.plus; };
  auto N = [&](const Wire& w) { return is_max ? w.plus : w.minus; };
  auto r1 = b.add(tag, {{P(x1), 1}, {P(x2), 1}}, {{P(y), 1}});
  auto r2 = b.add(tag, {{N(x1), 1}}, {{P(x2), 1}, {N(y), 1}});
  auto r3 = b.add(tag, {{N(x2), 1}}, {{P(x1), 1}, {N(y), 1}});
  b.schedule.insert(b.schedule.end(), {r2, r3, r1});
}

inline void emit_fanout(Builder& b, const std::string& tag, const Wire& src, const std::vector<Wire>& dst) {
  Terms plus, minus;
  for (const auto& w : dst) {
    plus.emplace_back(w.plus, 1);
    minus.emplace_back(w.minus, 1);
  }
  b.schedule.push_back(b.add(tag, {{src.plus, 1}}, plus));
  b.schedule.push_back(b.add(tag, {{src.minus, 1}}, minus));
}

struct Ports {
  std::vector<Wire> inputs;
  Wire output;
  std::string prefix;
};

/// Emits the gadget network for f into the builder.
inline void build_maxmin(Builder& b, const MaxMinForm& f, const Ports& ports, bool allow_offsets,
                         const CompileOptions& opt) {
  f.validate();
  const std::size_t k = f.arity;
  if (ports.inputs.size() != k) throw std::invalid_argument("port count does not match arity");
  for (const auto& g : f.components)
    if (!allow_offsets && g.offset != 0)
      throw std::invalid_argument("component " + to_string(g) + " has an offset; compile it as affine");

  // Plan the trees. A node is an occurrence (component used in a group) or a gadget.
  struct Node {
    bool gadget = false;
    std::size_t index = 0;  // occurrence index or gadget index
  };
  struct Gadget {
    bool is_max = false;
    std::string id;
    Node left, right;
  };
  std::vector<std::size_t> occ_comp;       // component of each occurrence
  std::vector<std::string> occ_consumer;   // consumer port base name
  std::vector<Gadget> gadgets;
  int min_count = 0, max_count = 0;

  auto make_tree = [&](auto&& self, std::vector<Node> items, bool is_max) -> Node {
    if (items.size() == 1) return items[0];
    std::size_t half = (items.size() + 1) / 2;
    Node l = self(self, std::vector<Node>(items.begin(), items.begin() + half), is_max);
    Node r = self(self, std::vector<Node>(items.begin() + half, items.end()), is_max);
    Gadget g;
    g.is_max = is_max;
    g.id = ports.prefix + (is_max ? "Max" + std::to_string(++max_count) : "Min" + std::to_string(++min_count));
    g.left = l;
    g.right = r;
    gadgets.push_back(g);
    return Node{true, gadgets.size() - 1};
  };

  std::vector<Node> group_nodes;
  for (const auto& s : f.groups) {
    std::vector<Node> leaves;
    for (auto c : s) {
      occ_comp.push_back(c);
      occ_consumer.push_back("");
      leaves.push_back(Node{false, occ_comp.size() - 1});
    }
    group_nodes.push_back(make_tree(make_tree, leaves, false));
  }
  // Max gadgets are numbered after all min gadgets.
  Node root = make_tree(make_tree, group_nodes, true);

  for (const auto& g : gadgets) {
    if (!g.left.gadget) occ_consumer[g.left.index] = g.id + ".A";
    if (!g.right.gadget) occ_consumer[g.right.index] = g.id + ".B";
  }
  const bool root_is_occurrence = !root.gadget;

  std::vector<bool> used(f.components.size(), false);
  std::vector<std::size_t> occurrences(f.components.size(), 0);
  for (auto c : occ_comp) {
    used[c] = true;
    ++occurrences[c];
  }
  std::vector<std::optional<std::size_t>> identity(f.components.size());
  if (opt.identity_passthrough && !root_is_occurrence)
    for (std::size_t c = 0; c < f.components.size(); ++c)
      if (used[c]) identity[c] = f.components[c].identity_index();

  auto lin_id = [&](std::size_t c) { return ports.prefix + "Lin" + std::to_string(c + 1); };

  // Consumers of every source wire: input i, or linear gadget c.
  std::vector<std::vector<std::string>> input_consumers(k);
  std::vector<std::vector<std::string>> lin_consumers(f.components.size());
  for (std::size_t c = 0; c < f.components.size(); ++c) {
    if (!used[c] || identity[c]) continue;
    for (std::size_t i = 0; i < k; ++i)
      if (f.components[c].coeffs[i] != 0) input_consumers[i].push_back(lin_id(c) + ".X" + std::to_string(i + 1));
  }
  for (std::size_t o = 0; o < occ_comp.size(); ++o) {
    auto c = occ_comp[o];
    if (identity[c])
      input_consumers[*identity[c]].push_back(occ_consumer[o]);
    else if (!root_is_occurrence)
      lin_consumers[c].push_back(occ_consumer[o]);
  }

  std::map<std::string, Wire> port_wire;  // consumer port -> wire it reads
  auto resolve = [&](const Wire& src, const std::vector<std::string>& consumers, const std::string& tag) {
    if (consumers.size() == 1) {
      port_wire[consumers[0]] = src;
    } else if (consumers.size() > 1) {
      std::vector<Wire> dst;
      for (const auto& name : consumers) {
        dst.push_back(wire(name));
        port_wire[name] = dst.back();
      }
      emit_fanout(b, tag, src, dst);
    }
  };

  for (std::size_t i = 0; i < k; ++i) resolve(ports.inputs[i], input_consumers[i], ports.prefix + "fanout");

  auto lin_out = [&](std::size_t c) { return root_is_occurrence ? ports.output : wire(lin_id(c) + ".Y"); };
  for (std::size_t c = 0; c < f.components.size(); ++c) {
    if (!used[c] || identity[c]) continue;
    std::vector<std::optional<Wire>> in(k);
    for (std::size_t i = 0; i < k; ++i)
      if (f.components[c].coeffs[i] != 0) in[i] = port_wire.at(lin_id(c) + ".X" + std::to_string(i + 1));
    Wire out = lin_out(c);
    emit_linear(b, lin_id(c), f.components[c], in, wire(lin_id(c) + ".W"), out);
    const Rational& off = f.components[c].offset;
    if (off > 0) b.add_context(out.plus, off);
    if (off < 0) b.add_context(out.minus, -off);
    // Keep the output rails declared even if the gadget has no reactions.
    b.crn.ensure_species(out.plus);
    b.crn.ensure_species(out.minus);
  }
  for (std::size_t c = 0; c < f.components.size(); ++c)
    if (used[c] && !identity[c]) resolve(lin_out(c), lin_consumers[c], lin_id(c) + ".fanout");

  auto node_wire = [&](const Node& n, const std::string& port) -> Wire {
    if (n.gadget) return wire(gadgets[n.index].id + ".Y");
    return port_wire.at(port);
  };
  for (std::size_t t = 0; t < gadgets.size(); ++t) {
    const Gadget& g = gadgets[t];
    bool is_root = root.gadget && root.index == t;
    Wire y = is_root ? ports.output : wire(g.id + ".Y");
    emit_minmax(b, g.id, g.is_max, node_wire(g.left, g.id + ".A"), node_wire(g.right, g.id + ".B"), y);
  }
}

inline CompiledCrc finish_dual(Builder& b, std::size_t k) {
  CompiledCrc out;
  out.crc.crn = b.crn;
  for (std::size_t i = 0; i < k; ++i) {
    out.crc.inputs.push_back(out.crc.crn.index_of("X" + std::to_string(i + 1) + "+"));
    out.crc.inputs.push_back(out.crc.crn.index_of("X" + std::to_string(i + 1) + "-"));
  }
  out.crc.kind = Encoding::dual;
  out.crc.output_plus = out.crc.crn.index_of("Y+");
  out.crc.output_minus = out.crc.crn.index_of("Y-");
  for (const auto& [name, q] : b.context) out.crc.context[out.crc.crn.index_of(name)] += q;
  out.schedule = b.schedule;
  out.provenance = b.tags;
  out.crc.validate();
  return out;
}

inline Builder dual_builder(std::size_t k, Ports& ports) {
  Builder b;
  for (std::size_t i = 0; i < k; ++i) {
    ports.inputs.push_back(wire("X" + std::to_string(i + 1)));
    b.crn.ensure_species(ports.inputs.back().plus);
    b.crn.ensure_species(ports.inputs.back().minus);
  }
  ports.output = wire("Y");
  b.crn.ensure_species("Y+");
  b.crn.ensure_species("Y-");
  return b;
}

}  // namespace compiler_detail

/// Dual-rail CRC for a linear function (offset must be 0).
inline CompiledCrc compile_linear(const AffineComponent& g) {
  using namespace compiler_detail;
  if (g.offset != 0) throw std::invalid_argument("compile_linear needs a linear component");
  Ports ports;
  auto b = dual_builder(g.coeffs.size(), ports);
  std::vector<std::optional<Wire>> in(ports.inputs.begin(), ports.inputs.end());
  emit_linear(b, "Lin1", g, in, wire("Lin1.W"), ports.output);
  return finish_dual(b, g.coeffs.size());
}

inline CompiledCrc compile_min2() {
  using namespace compiler_detail;
  Ports ports;
  auto b = dual_builder(2, ports);
  emit_minmax(b, "Min1", false, ports.inputs[0], ports.inputs[1], ports.output);
  return finish_dual(b, 2);
}

inline CompiledCrc compile_max2() {
  using namespace compiler_detail;
  Ports ports;
  auto b = dual_builder(2, ports);
  emit_minmax(b, "Max1", true, ports.inputs[0], ports.inputs[1], ports.output);
  return finish_dual(b, 2);
}

/// Dual-rail CRC for max_i min_{j in S_i} g_j with linear components.
inline CompiledCrc compile_maxmin(const MaxMinForm& f, const CompileOptions& opt = {}) {
  using namespace compiler_detail;
  MaxMinForm g = normalize(f);
  Ports ports;
  auto b = dual_builder(g.arity, ports);
  build_maxmin(b, g, ports, false, opt);
  return finish_dual(b, g.arity);
}

/// As compile_maxmin, with component offsets supplied as initial context
/// on the rails of the gadget computing that component.
inline CompiledCrc compile_affine(const MaxMinForm& f, const CompileOptions& opt = {}) {
  using namespace compiler_detail;
  MaxMinForm g = normalize(f);
  Ports ports;
  auto b = dual_builder(g.arity, ports);
  build_maxmin(b, g, ports, true, opt);
  return finish_dual(b, g.arity);
}

// ---------------------------------------------------------------------------
// Direct encoding over the nonnegative orthant.

namespace compiler_detail {

inline std::string subset_name(unsigned mask, std::size_t k) {
  std::string s;
  for (std::size_t i = 0; i < k; ++i)
    if ((mask >> i) & 1) s += std::to_string(i + 1);
  return s;
}

inline Polyhedron face_constraints(unsigned mask, std::size_t k) {
  Polyhedron out;
  for (std::size_t i = 0; i < k; ++i) {
    lp::Constraint c;
    c.coeffs.assign(k, Rational(0));
    c.coeffs[i] = 1;
    c.rel = (mask >> i) & 1 ? lp::Relation::gt : lp::Relation::eq;
    c.rhs = 0;
    out.push_back(c);
  }
  return out;
}

// f on the face D_U, with coefficients of coordinates outside U dropped.
inline MaxMinForm restrict_to_face(const PwlFunction& f, unsigned mask) {
  const std::size_t k = f.arity;
  MaxMinForm form;
  if (f.maxmin) {
    form = *f.maxmin;
  } else {
    RegionalPwl r = *f.regional;
    auto face = face_constraints(mask, k);
    r.domain.insert(r.domain.end(), face.begin(), face.end());
    form = regional_to_maxmin(r);
  }
  for (auto& g : form.components)
    for (std::size_t i = 0; i < k; ++i)
      if (!((mask >> i) & 1)) g.coeffs[i] = 0;
  return normalize(form);
}

// Drops reactions that can never fire from inputs (plus context), then
// drops species no longer mentioned.
inline CompiledCrc prune(const CompiledCrc& in) {
  const Crn& crn = in.crc.crn;
  SpeciesSet start(crn.num_species(), false);
  for (auto s : in.crc.inputs) start[s] = true;
  for (const auto& [s, q] : in.crc.context) start[s] = true;
  ReactionSet all(crn.num_reactions(), true);
  auto live = reach_detail::fixpoint(crn, start, all);

  std::vector<bool> keep_species(crn.num_species(), false);
  for (auto s : in.crc.inputs) keep_species[s] = true;
  keep_species[in.crc.output_plus] = true;
  if (in.crc.output_minus) keep_species[*in.crc.output_minus] = true;
  for (const auto& [s, q] : in.crc.context) keep_species[s] = true;
  std::vector<bool> keep(crn.num_reactions(), false);
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j) {
    keep[j] = reach_detail::enabled_by(crn.reaction(j), live);
    if (!keep[j]) continue;
    for (const auto& [s, n] : crn.reaction(j).reactants) keep_species[s] = true;
    for (const auto& [s, n] : crn.reaction(j).products) keep_species[s] = true;
  }

  CompiledCrc out;
  std::vector<SpeciesIndex> new_index(crn.num_species());
  for (SpeciesIndex s = 0; s < crn.num_species(); ++s)
    if (keep_species[s]) new_index[s] = out.crc.crn.add_species(crn.name(s));
  std::vector<ReactionIndex> new_rxn(crn.num_reactions());
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j) {
    if (!keep[j]) continue;
    Reaction r;
    for (const auto& [s, n] : crn.reaction(j).reactants) r.reactants[new_index[s]] = n;
    for (const auto& [s, n] : crn.reaction(j).products) r.products[new_index[s]] = n;
    new_rxn[j] = out.crc.crn.add_reaction(std::move(r));
    out.provenance.push_back(in.provenance[j]);
  }
  for (auto j : in.schedule)
    if (keep[j]) out.schedule.push_back(new_rxn[j]);
  for (auto s : in.crc.inputs) out.crc.inputs.push_back(new_index[s]);
  out.crc.kind = in.crc.kind;
  out.crc.output_plus = new_index[in.crc.output_plus];
  if (in.crc.output_minus) out.crc.output_minus = new_index[*in.crc.output_minus];
  for (const auto& [s, q] : in.crc.context) out.crc.context[new_index[s]] = q;
  out.passes = in.passes;
  return out;
}

}  // namespace compiler_detail

/// Direct-encoding CRC (inputs X1..Xk, output Y+) for a positive-continuous
/// piecewise linear f over the nonnegative orthant with f(0) = 0.
inline CompiledCrc compile_direct(const PwlFunction& f, const CompileOptions& opt = {}) {
  using namespace compiler_detail;
  const std::size_t k = f.arity;
  if (k == 0 || k > 4) throw std::invalid_argument("direct compilation supports 1 to 4 inputs");
  if (f.regional && !f.maxmin) {
    RegionalPwl r = *f.regional;
    Polyhedron orthant = face_constraints(0, k);
    for (auto& c : orthant) c.rel = lp::Relation::ge;
    r.domain.insert(r.domain.end(), orthant.begin(), orthant.end());
    if (!check_positive_continuous(r)) throw NotPositiveContinuous("function is not positive-continuous");
    for (const auto& p : r.pieces) {
      Polyhedron region = r.domain;
      region.insert(region.end(), p.region.begin(), p.region.end());
      auto e = lp::extremize(k, region, p.g.coeffs, false);
      if (e.feasible && (e.unbounded || e.value + p.g.offset < 0))
        throw std::invalid_argument("direct encoding needs a nonnegative function");
    }
  }
  if (f.eval(Point(k, Rational(0))) != 0) throw std::invalid_argument("direct encoding needs f(0) = 0");

  Builder b;
  for (std::size_t i = 0; i < k; ++i) b.crn.ensure_species("X" + std::to_string(i + 1));
  b.crn.ensure_species("Y+");
  b.crn.ensure_species("Y-");

  const unsigned full = (1u << k) - 1;
  std::vector<unsigned> subsets;
  for (unsigned u = 1; u <= full; ++u) subsets.push_back(u);
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](unsigned a, unsigned c) { return __builtin_popcount(a) < __builtin_popcount(c); });
  auto name = [&](unsigned u) { return subset_name(u, k); };
  auto copy_of = [&](unsigned u, std::size_t i) { return "U" + name(u) + ".X" + std::to_string(i + 1); };

  // Fanout: X_i -> I_{i} + X_i^{i} + sum over strict supersets U of (J_U + X_i^U).
  for (std::size_t i = 0; i < k; ++i) {
    const unsigned single = 1u << i;
    Terms rhs{{"I_" + name(single), 1}, {copy_of(single, i) + "+", 1}};
    for (auto u : subsets)
      if ((u & single) && u != single) {
        rhs.emplace_back("J_" + name(u), 1);
        rhs.emplace_back(copy_of(u, i) + "+", 1);
      }
    b.schedule.push_back(b.add("fanout", {{"X" + std::to_string(i + 1), 1}}, rhs));
  }
  // Indicator activation, by size of the union.
  for (auto w : subsets) {
    if (__builtin_popcount(w) < 2) continue;
    for (auto u : subsets)
      for (auto v : subsets)
        if (u < v && (u | v) == w)
          b.schedule.push_back(b.add("activate", {{"I_" + name(u), 1}, {"I_" + name(v), 1}, {"J_" + name(w), 1}},
                                     {{"I_" + name(u), 1}, {"I_" + name(v), 1}, {"I_" + name(w), 1}}));
  }
  // One dual-rail sub-network per face, catalysed by its indicator.
  for (auto u : subsets) {
    MaxMinForm fu = restrict_to_face(f, u);
    for (const auto& g : fu.components)
      if (g.offset != 0) throw std::invalid_argument("direct encoding needs linear pieces");
    Ports ports;
    for (std::size_t i = 0; i < k; ++i) ports.inputs.push_back(wire(copy_of(u, i)));
    ports.output = wire("Y");
    ports.prefix = "U" + name(u) + ".";
    b.catalyst = "I_" + name(u);
    b.output = ports.output;
    b.tag_wire = wire("Y_" + name(u));
    std::size_t first = b.tags.size();
    build_maxmin(b, fu, ports, false, opt);
    for (std::size_t j = first; j < b.tags.size(); ++j)
      if (b.tags[j].rfind(ports.prefix, 0) != 0) b.tags[j] = ports.prefix + b.tags[j];
    b.catalyst.reset();
    b.output.reset();
    b.tag_wire.reset();
  }
  // Larger indicators cancel the contributions of smaller faces.
  for (auto u : subsets)
    for (auto v : subsets)
      if (v != u && (v & u) == v) {
        std::string iu = "I_" + name(u);
        b.schedule.push_back(b.add("cancel", {{iu, 1}, {"Y_" + name(v) + "+", 1}}, {{iu, 1}, {"Y-", 1}}));
        b.schedule.push_back(b.add("cancel", {{iu, 1}, {"Y_" + name(v) + "-", 1}}, {{iu, 1}, {"Y+", 1}}));
      }
  b.schedule.push_back(b.add("annihilate", {{"Y+", 1}, {"Y-", 1}}, {}));

  CompiledCrc out;
  out.crc.crn = b.crn;
  for (std::size_t i = 0; i < k; ++i) out.crc.inputs.push_back(out.crc.crn.index_of("X" + std::to_string(i + 1)));
  out.crc.kind = Encoding::direct;
  out.crc.output_plus = out.crc.crn.index_of("Y+");
  out.schedule = b.schedule;
  out.provenance = b.tags;
  out.passes = 2;
  out = prune(out);
  out.crc.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Completion schedule.

/// Largest flux of reaction j from c that keeps every species nonnegative;
/// zero if j is not applicable or consumes nothing on net.
inline Rational completion_flux(const Crn& crn, const State& c, ReactionIndex j) {
  if (!applicable(crn, c, j)) return 0;
  std::optional<Rational> best;
  for (SpeciesIndex i = 0; i < crn.num_species(); ++i) {
    int m = crn.stoich(i, j);
    if (m >= 0) continue;
    Rational f = c.at(i) / (-m);
    if (!best || f < *best) best = f;
  }
  return best ? *best : Rational(0);
}

/// Runs each scheduled reaction to completion, in order, `passes` times.
/// Segments are appended to `record` when given.
inline State run_schedule(const Crn& crn, State c, const std::vector<ReactionIndex>& schedule, std::size_t passes,
                          Path* record = nullptr) {
  for (std::size_t p = 0; p < passes; ++p)
    for (auto j : schedule) {
      Rational f = completion_flux(crn, c, j);
      if (f == 0) continue;
      FluxVector u(crn.num_reactions());
      u.set(j, f);
      c = apply_flux(crn, c, u);
      if (record) record->segments.push_back(std::move(u));
    }
  return c;
}

/// The compiled schedule, then further passes until nothing changes.
inline State finish_schedule(const CompiledCrc& cc, const State& c, Path* record = nullptr,
                             std::size_t max_passes = 64) {
  State x = run_schedule(cc.crc.crn, c, cc.schedule, cc.passes, record);
  for (std::size_t p = 0; p < max_passes; ++p) {
    State next = run_schedule(cc.crc.crn, x, cc.schedule, 1, record);
    if (next == x) break;
    x = std::move(next);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Sidecar schedule file: one 1-based reaction index per line, '#' comments.

inline std::string serialize_schedule(const CompiledCrc& cc) {
  std::string out = "passes: " + std::to_string(cc.passes) + "\n";
  for (auto j : cc.schedule) {
    out += std::to_string(j + 1);
    if (j < cc.provenance.size()) out += "  # " + cc.provenance[j];
    out += "\n";
  }
  return out;
}

inline void parse_schedule(std::string_view text, CompiledCrc& cc) {
  using namespace io_detail;
  cc.schedule.clear();
  cc.passes = 1;
  auto ls = lines(text);
  for (std::size_t ln = 0; ln < ls.size(); ++ln) {
    auto s = strip_comment(ls[ln]);
    if (s.empty()) continue;
    if (s.rfind("passes:", 0) == 0) {
      auto v = trim(s.substr(7));
      if (!is_digits(v)) throw ParseError(ln + 1, "bad pass count");
      cc.passes = std::stoul(std::string(v));
      continue;
    }
    if (!is_digits(s)) throw ParseError(ln + 1, "expected a reaction index");
    std::size_t j = std::stoul(std::string(s));
    if (j == 0 || j > cc.crc.crn.num_reactions()) throw ParseError(ln + 1, "reaction index out of range");
    cc.schedule.push_back(j - 1);
  }
}

/// Default schedule for a CRC without a sidecar: all reactions in file order.
inline CompiledCrc with_default_schedule(const Crc& crc) {
  CompiledCrc cc;
  cc.crc = crc;
  cc.schedule.resize(crc.crn.num_reactions());
  std::iota(cc.schedule.begin(), cc.schedule.end(), ReactionIndex{0});
  cc.provenance.assign(crc.crn.num_reactions(), "");
  return cc;
}

// ---------------------------------------------------------------------------
// Composition by relabeling.

/// Feeds the outputs of `upstream[i]` (all over the same inputs) into input i
/// of the dual-rail `downstream`. Internal species are prefixed "A<i>." and
/// "B."; shared inputs keep their names.
inline CompiledCrc compose(const std::vector<CompiledCrc>& upstream, const CompiledCrc& downstream) {
  if (downstream.crc.kind != Encoding::dual || downstream.crc.arity() != upstream.size())
    throw std::invalid_argument("downstream arity does not match the number of upstream networks");
  if (upstream.empty()) throw std::invalid_argument("nothing to compose");
  const Crc& first = upstream[0].crc;
  for (const auto& u : upstream)
    if (u.crc.kind != Encoding::dual || u.crc.inputs.size() != first.inputs.size())
      throw std::invalid_argument("upstream networks must share dual-rail inputs");

  CompiledCrc out;
  Crn& crn = out.crc.crn;
  for (auto s : first.inputs) crn.add_species(first.crn.name(s));
  auto copy_in = [&](const CompiledCrc& part, const std::function<std::string(SpeciesIndex)>& rename) {
    const Crn& src = part.crc.crn;
    std::vector<SpeciesIndex> idx(src.num_species());
    for (SpeciesIndex s = 0; s < src.num_species(); ++s) idx[s] = crn.ensure_species(rename(s));
    const std::size_t offset = crn.num_reactions();
    for (ReactionIndex j = 0; j < src.num_reactions(); ++j) {
      Reaction r;
      for (const auto& [s, n] : src.reaction(j).reactants) r.reactants[idx[s]] += n;
      for (const auto& [s, n] : src.reaction(j).products) r.products[idx[s]] += n;
      crn.add_reaction(std::move(r));
      out.provenance.push_back(j < part.provenance.size() ? part.provenance[j] : "");
    }
    for (std::size_t p = 0; p < part.passes; ++p)
      for (auto j : part.schedule) out.schedule.push_back(offset + j);
    for (const auto& [s, q] : part.crc.context) out.crc.context[idx[s]] += q;
  };
  const bool shared = upstream.size() > 1;
  auto local = [&](std::size_t i, const std::string& name) { return "A" + std::to_string(i + 1) + "." + name; };
  if (shared) {
    // Each upstream network consumes its own copy of the inputs.
    for (std::size_t r = 0; r < first.inputs.size(); ++r) {
      const std::string& name = first.crn.name(first.inputs[r]);
      Reaction fan;
      fan.reactants[r] = 1;
      for (std::size_t i = 0; i < upstream.size(); ++i) fan.products[crn.ensure_species(local(i, name))] += 1;
      out.schedule.push_back(crn.num_reactions());
      crn.add_reaction(std::move(fan));
      out.provenance.push_back("fanout");
    }
  }
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    const Crc& u = upstream[i].crc;
    const Crc& d = downstream.crc;
    copy_in(upstream[i], [&, i](SpeciesIndex s) {
      for (std::size_t r = 0; r < u.inputs.size(); ++r)
        if (u.inputs[r] == s) return shared ? local(i, first.crn.name(first.inputs[r])) : first.crn.name(first.inputs[r]);
      if (s == u.output_plus) return "B." + d.crn.name(d.inputs[2 * i]);
      if (s == *u.output_minus) return "B." + d.crn.name(d.inputs[2 * i + 1]);
      return "A" + std::to_string(i + 1) + "." + u.crn.name(s);
    });
  }
  const Crc& d = downstream.crc;
  copy_in(downstream, [&](SpeciesIndex s) {
    if (s == d.output_plus || s == *d.output_minus) return d.crn.name(s);
    return "B." + d.crn.name(s);
  });
  out.crc.inputs = std::vector<SpeciesIndex>(first.inputs.size());
  for (std::size_t r = 0; r < first.inputs.size(); ++r) out.crc.inputs[r] = r;
  out.crc.kind = Encoding::dual;
  out.crc.output_plus = crn.index_of(d.crn.name(d.output_plus));
  out.crc.output_minus = crn.index_of(d.crn.name(*d.output_minus));
  out.crc.validate();
  return out;
}

}  // namespace crnric

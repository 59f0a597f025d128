#pragma once

// Piecewise rational affine functions: max-min form, region-annotated pieces,
// conversion between them, and the dual-rail value encoding.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crnric/io.hpp"
#include "crnric/lp.hpp"
#include "crnric/rational.hpp"

namespace crnric {

using Point = std::vector<Rational>;
using Polyhedron = std::vector<lp::Constraint>;

struct AffineComponent {
  std::vector<Rational> coeffs;
  Rational offset;

  Rational eval(const Point& x) const {
    if (x.size() != coeffs.size()) throw std::invalid_argument("arity mismatch");
    Rational s = offset;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      if (coeffs[i] != 0) s += coeffs[i] * x[i];
    return s;
  }

  bool is_linear() const { return offset == 0; }

  /// Unit vector e_i with no offset: index i, else nullopt.
  std::optional<std::size_t> identity_index() const {
    if (offset != 0) return std::nullopt;
    std::optional<std::size_t> idx;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] == 0) continue;
      if (coeffs[i] != 1 || idx) return std::nullopt;
      idx = i;
    }
    return idx;
  }

  bool operator==(const AffineComponent&) const = default;
  bool operator<(const AffineComponent& o) const {
    if (coeffs != o.coeffs) return coeffs < o.coeffs;
    return offset < o.offset;
  }
};

inline std::string to_string(const AffineComponent& g) {
  std::string out;
  for (std::size_t i = 0; i < g.coeffs.size(); ++i) {
    const Rational& a = g.coeffs[i];
    if (a == 0) continue;
    Rational mag = rational_abs(a);
    if (out.empty())
      out += a < 0 ? "-" : "";
    else
      out += a < 0 ? " - " : " + ";
    if (mag != 1) out += to_string(mag) + " ";
    out += "x" + std::to_string(i + 1);
  }
  if (g.offset != 0 || out.empty()) {
    if (out.empty())
      out = to_string(g.offset);
    else
      out += (g.offset < 0 ? " - " : " + ") + to_string(rational_abs(g.offset));
  }
  return out;
}

struct MaxMinForm {
  std::size_t arity = 0;
  std::vector<AffineComponent> components;
  std::vector<std::vector<std::size_t>> groups;  // 0-based component indices

  void validate() const {
    if (groups.empty()) throw std::invalid_argument("max-min form needs at least one group");
    for (const auto& g : components)
      if (g.coeffs.size() != arity) throw std::invalid_argument("component arity mismatch");
    for (const auto& s : groups) {
      if (s.empty()) throw std::invalid_argument("empty group in max-min form");
      for (auto i : s)
        if (i >= components.size()) throw std::invalid_argument("group names an unknown component");
    }
  }

  Rational eval(const Point& x) const {
    if (x.size() != arity) throw std::invalid_argument("arity mismatch");
    std::optional<Rational> best;
    for (const auto& s : groups) {
      std::optional<Rational> low;
      for (auto i : s) {
        Rational v = components.at(i).eval(x);
        if (!low || v < *low) low = v;
      }
      if (!best || *low > *best) best = *low;
    }
    if (!best) throw std::invalid_argument("max-min form needs at least one group");
    return *best;
  }
};

inline bool contains(const Polyhedron& p, const Point& x) {
  for (const auto& c : p)
    if (!c.satisfied_by(x)) return false;
  return true;
}

struct Piece {
  AffineComponent g;
  Polyhedron region;
};

struct RegionalPwl {
  std::size_t arity = 0;
  std::vector<Piece> pieces;
  Polyhedron domain;

  /// Value from the first piece whose region contains x; nullopt if none.
  std::optional<Rational> eval(const Point& x) const {
    if (x.size() != arity) throw std::invalid_argument("arity mismatch");
    for (const auto& p : pieces)
      if (contains(p.region, x)) return p.g.eval(x);
    return std::nullopt;
  }
};

class ContinuityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CoverageGap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CellLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace pwl_detail {

inline lp::Constraint difference_constraint(const AffineComponent& a, const AffineComponent& b, lp::Relation rel,
                                            bool flip) {
  // (a - b) rel 0, or (b - a) rel 0 when flipped
  lp::Constraint c;
  c.coeffs.resize(a.coeffs.size());
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) c.coeffs[i] = flip ? b.coeffs[i] - a.coeffs[i] : a.coeffs[i] - b.coeffs[i];
  c.rel = rel;
  c.rhs = flip ? a.offset - b.offset : b.offset - a.offset;
  return c;
}

// Drop groups that are supersets of other groups; sort for determinism.
inline std::vector<std::vector<std::size_t>> prune_groups(std::vector<std::vector<std::size_t>> groups) {
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    bool dominated = false;
    for (std::size_t b = 0; b < groups.size() && !dominated; ++b)
      if (a != b && std::includes(groups[a].begin(), groups[a].end(), groups[b].begin(), groups[b].end()))
        dominated = true;
    if (!dominated) out.push_back(groups[a]);
  }
  return out;
}

}  // namespace pwl_detail

/// Keeps only components used by some group and renumbers; merges duplicates.
inline MaxMinForm normalize(const MaxMinForm& f) {
  MaxMinForm out;
  out.arity = f.arity;
  std::map<AffineComponent, std::size_t> index;
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& s : f.groups) {
    std::vector<std::size_t> g;
    for (auto i : s) {
      const auto& comp = f.components.at(i);
      auto it = index.find(comp);
      if (it == index.end()) {
        it = index.emplace(comp, out.components.size()).first;
        out.components.push_back(comp);
      }
      g.push_back(it->second);
    }
    groups.push_back(std::move(g));
  }
  out.groups = pwl_detail::prune_groups(std::move(groups));
  return out;
}

/// Max-min form of a continuous piecewise affine function: one group
/// S_b = {i : g_i(b) >= f(b)} per cell of the arrangement of the hyperplanes
/// g_i = g_j inside the domain.
inline MaxMinForm regional_to_maxmin(const RegionalPwl& f, std::size_t cell_cap = 20000) {
  std::vector<AffineComponent> comps;
  for (const auto& p : f.pieces)
    if (std::find(comps.begin(), comps.end(), p.g) == comps.end()) comps.push_back(p.g);
  for (const auto& g : comps)
    if (g.coeffs.size() != f.arity) throw std::invalid_argument("component arity mismatch");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < comps.size(); ++a)
    for (std::size_t b = a + 1; b < comps.size(); ++b) pairs.emplace_back(a, b);

  std::vector<std::vector<std::size_t>> groups;
  std::size_t cells = 0;
  Polyhedron cons = f.domain;

  auto leaf = [&] {
    if (++cells > cell_cap) throw CellLimit("cell enumeration exceeded the cap of " + std::to_string(cell_cap));
    auto b = lp::find_point(f.arity, cons);
    if (!b) return;
    std::optional<Rational> fb;
    for (const auto& p : f.pieces) {
      if (!contains(p.region, *b)) continue;
      Rational v = p.g.eval(*b);
      if (fb && *fb != v) throw ContinuityViolation("pieces disagree at a shared point");
      fb = v;
    }
    if (!fb) throw CoverageGap("a cell of the domain is covered by no region");
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < comps.size(); ++i)
      if (comps[i].eval(*b) >= *fb) s.push_back(i);
    groups.push_back(std::move(s));
  };

  auto dfs = [&](auto&& self, std::size_t k) -> void {
    if (!lp::find_point(f.arity, cons)) return;
    if (k == pairs.size()) {
      leaf();
      return;
    }
    const auto& [a, b] = pairs[k];
    const std::pair<lp::Relation, bool> signs[] = {
        {lp::Relation::gt, true}, {lp::Relation::eq, false}, {lp::Relation::gt, false}};
    for (const auto& [rel, flip] : signs) {
      cons.push_back(pwl_detail::difference_constraint(comps[a], comps[b], rel, flip));
      self(self, k + 1);
      cons.pop_back();
    }
  };
  dfs(dfs, 0);
  if (groups.empty()) throw CoverageGap("the domain is empty");

  MaxMinForm out;
  out.arity = f.arity;
  out.components = comps;
  out.groups = std::move(groups);
  return normalize(out);
}

/// Whether f restricted to each face D_U of the nonnegative orthant is
/// continuous. Exact: for pieces A and B, on every point of D_U in R_B that
/// is a limit of points of R_A within D_U, g_A and g_B must agree.
inline bool check_positive_continuous(const RegionalPwl& f) {
  const std::size_t k = f.arity;
  if (k > 20) throw std::invalid_argument("too many inputs for face enumeration");
  for (unsigned long mask = 0; mask < (1ul << k); ++mask) {
    Polyhedron face = f.domain;
    for (std::size_t i = 0; i < k; ++i) {
      lp::Constraint c;
      c.coeffs.assign(k, Rational(0));
      c.coeffs[i] = 1;
      c.rel = (mask >> i) & 1 ? lp::Relation::gt : lp::Relation::eq;
      c.rhs = 0;
      face.push_back(c);
    }
    for (std::size_t a = 0; a < f.pieces.size(); ++a) {
      Polyhedron ra = face;
      ra.insert(ra.end(), f.pieces[a].region.begin(), f.pieces[a].region.end());
      if (!lp::find_point(k, ra)) continue;
      for (std::size_t b = 0; b < f.pieces.size(); ++b) {
        if (a == b || f.pieces[a].g == f.pieces[b].g) continue;
        Polyhedron q = face;
        q.insert(q.end(), f.pieces[b].region.begin(), f.pieces[b].region.end());
        for (const auto& c : ra) q.push_back(c.relaxed());
        if (!lp::find_point(k, q)) continue;
        std::vector<Rational> diff(k);
        for (std::size_t i = 0; i < k; ++i) diff[i] = f.pieces[a].g.coeffs[i] - f.pieces[b].g.coeffs[i];
        Rational off = f.pieces[a].g.offset - f.pieces[b].g.offset;
        for (bool maximize : {true, false}) {
          auto e = lp::extremize(k, q, diff, maximize);
          if (e.unbounded || e.value + off != 0) return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

struct DualRailValue {
  Rational plus;
  Rational minus;
  Rational value() const { return plus - minus; }
};

inline std::vector<DualRailValue> dualrail_encode(const Point& x) {
  std::vector<DualRailValue> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(v >= 0 ? DualRailValue{v, 0} : DualRailValue{0, -v});
  return out;
}

inline Point dualrail_decode(const std::vector<DualRailValue>& v) {
  Point out;
  out.reserve(v.size());
  for (const auto& d : v) out.push_back(d.value());
  return out;
}

// ---------------------------------------------------------------------------

/// A function given by a max-min form, by regional pieces, or both.
struct PwlFunction {
  std::size_t arity = 0;
  std::optional<MaxMinForm> maxmin;
  std::optional<RegionalPwl> regional;
  Polyhedron domain;

  Rational eval(const Point& x) const {
    if (maxmin) return maxmin->eval(x);
    if (regional) {
      auto v = regional->eval(x);
      if (!v) throw CoverageGap("point lies in no region");
      return *v;
    }
    throw std::logic_error("empty piecewise linear function");
  }

  bool in_domain(const Point& x) const { return contains(domain, x); }

  MaxMinForm to_maxmin() const {
    if (maxmin) return normalize(*maxmin);
    if (regional) return regional_to_maxmin(*regional);
    throw std::logic_error("empty piecewise linear function");
  }

  static PwlFunction from(MaxMinForm f) {
    PwlFunction p;
    p.arity = f.arity;
    p.maxmin = std::move(f);
    return p;
  }
  static PwlFunction from(RegionalPwl f) {
    PwlFunction p;
    p.arity = f.arity;
    p.domain = f.domain;
    p.regional = std::move(f);
    return p;
  }
};

// ---------------------------------------------------------------------------
// Text format:
//   arity: 2
//   component g1 = 2/5 x1 - 3/5 x2 + 0
//   region g1: x1 - x2 >= 0, x1 >= 0
//   maxmin: {1,3} {2}
//   domain: x1 >= 0, x2 >= 0

namespace pwl_detail {

inline AffineComponent parse_affine(std::string_view text, std::size_t arity, std::size_t line) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t' && c != '*') s += c;
  if (s.empty()) throw ParseError(line, "empty expression");
  AffineComponent g;
  g.coeffs.assign(arity, Rational(0));
  std::size_t i = 0;
  bool first = true;
  while (i < s.size()) {
    int sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    } else if (!first) {
      throw ParseError(line, "expected '+' or '-' in '" + std::string(text) + "'");
    }
    first = false;
    std::size_t start = i;
    while (i < s.size() && ((s[i] >= '0' && s[i] <= '9') || s[i] == '/' || s[i] == '.')) ++i;
    std::optional<Rational> num;
    if (i > start) num = parse_rational(s.substr(start, i - start), line);
    if (i < s.size() && s[i] == 'x') {
      ++i;
      std::size_t vstart = i;
      while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
      if (i == vstart) throw ParseError(line, "variable needs an index, as in x1");
      std::size_t v = std::stoul(s.substr(vstart, i - vstart));
      if (v == 0 || v > arity) throw ParseError(line, "variable x" + std::to_string(v) + " out of range");
      g.coeffs[v - 1] += sign * (num ? *num : Rational(1));
    } else {
      if (!num) throw ParseError(line, "malformed term in '" + std::string(text) + "'");
      g.offset += sign * *num;
    }
  }
  return g;
}

inline lp::Constraint parse_constraint(std::string_view text, std::size_t arity, std::size_t line) {
  struct Op {
    const char* tok;
    lp::Relation rel;
    bool flip;
  };
  static const Op ops[] = {{">=", lp::Relation::ge, false}, {"<=", lp::Relation::ge, true},
                           {"==", lp::Relation::eq, false}, {">", lp::Relation::gt, false},
                           {"<", lp::Relation::gt, true},   {"=", lp::Relation::eq, false}};
  for (const auto& op : ops) {
    auto pos = text.find(op.tok);
    if (pos == std::string_view::npos) continue;
    auto lhs = parse_affine(text.substr(0, pos), arity, line);
    auto rhs = parse_affine(text.substr(pos + std::string_view(op.tok).size()), arity, line);
    lp::Constraint c;
    c.rel = op.rel;
    c.coeffs.resize(arity);
    for (std::size_t i = 0; i < arity; ++i)
      c.coeffs[i] = op.flip ? rhs.coeffs[i] - lhs.coeffs[i] : lhs.coeffs[i] - rhs.coeffs[i];
    c.rhs = op.flip ? lhs.offset - rhs.offset : rhs.offset - lhs.offset;
    return c;
  }
  throw ParseError(line, "expected a comparison in '" + std::string(text) + "'");
}

inline Polyhedron parse_constraints(std::string_view text, std::size_t arity, std::size_t line) {
  Polyhedron out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto part = io_detail::trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!part.empty()) out.push_back(parse_constraint(part, arity, line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace pwl_detail

inline PwlFunction parse_pwl(std::string_view text) {
  using namespace io_detail;
  std::optional<std::size_t> arity;
  std::vector<std::string> names;
  std::vector<AffineComponent> comps;
  std::vector<Piece> pieces;
  std::optional<std::vector<std::vector<std::size_t>>> groups;
  Polyhedron domain;
  bool seen_domain = false;

  auto ls = lines(text);
  for (std::size_t ln = 0; ln < ls.size(); ++ln) {
    const std::size_t line = ln + 1;
    auto s = strip_comment(ls[ln]);
    if (s.empty()) continue;
    auto colon = s.find(':');
    auto head = trim(s.substr(0, std::min(colon, s.find('='))));
    auto need_arity = [&] {
      if (!arity) throw ParseError(line, "'arity:' must come first");
      return *arity;
    };
    if (head == "arity" && colon != std::string_view::npos) {
      if (arity) throw ParseError(line, "repeated 'arity:'");
      auto v = trim(s.substr(colon + 1));
      if (!is_digits(v)) throw ParseError(line, "bad arity");
      arity = std::stoul(std::string(v));
      continue;
    }
    if (head.substr(0, 10) == "component ") {
      auto eq = s.find('=');
      if (eq == std::string_view::npos) throw ParseError(line, "expected 'component <name> = <expr>'");
      std::string name(trim(head.substr(10)));
      if (name.empty() || std::find(names.begin(), names.end(), name) != names.end())
        throw ParseError(line, "missing or duplicate component name");
      names.push_back(name);
      comps.push_back(pwl_detail::parse_affine(s.substr(eq + 1), need_arity(), line));
      continue;
    }
    if (colon == std::string_view::npos) throw ParseError(line, "expected a header");
    auto key = trim(s.substr(0, colon));
    auto rest = trim(s.substr(colon + 1));
    if (key.substr(0, 7) == "region ") {
      std::string name(trim(key.substr(7)));
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw ParseError(line, "unknown component '" + name + "'");
      pieces.push_back({comps[it - names.begin()], pwl_detail::parse_constraints(rest, need_arity(), line)});
    } else if (key == "maxmin") {
      if (groups) throw ParseError(line, "repeated 'maxmin:'");
      groups.emplace();
      std::size_t i = 0;
      while (i < rest.size()) {
        if (rest[i] == ' ' || rest[i] == '\t') {
          ++i;
          continue;
        }
        if (rest[i] != '{') throw ParseError(line, "expected '{' in maxmin groups");
        auto close = rest.find('}', i);
        if (close == std::string_view::npos) throw ParseError(line, "unterminated group");
        std::vector<std::size_t> g;
        auto body = rest.substr(i + 1, close - i - 1);
        std::size_t start = 0;
        while (start <= body.size()) {
          auto comma = body.find(',', start);
          auto tok = trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
          if (tok.empty()) throw ParseError(line, "empty entry in group");
          if (is_digits(tok)) {
            std::size_t idx = std::stoul(std::string(tok));
            if (idx == 0 || idx > comps.size()) throw ParseError(line, "group index out of range");
            g.push_back(idx - 1);
          } else {
            auto it = std::find(names.begin(), names.end(), std::string(tok));
            if (it == names.end()) throw ParseError(line, "unknown component '" + std::string(tok) + "'");
            g.push_back(static_cast<std::size_t>(it - names.begin()));
          }
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
        groups->push_back(std::move(g));
        i = close + 1;
      }
      if (groups->empty()) throw ParseError(line, "maxmin needs at least one group");
    } else if (key == "domain") {
      if (seen_domain) throw ParseError(line, "repeated 'domain:'");
      seen_domain = true;
      domain = pwl_detail::parse_constraints(rest, need_arity(), line);
    } else {
      throw ParseError(line, "unknown header '" + std::string(key) + "'");
    }
  }
  if (!arity) throw ParseError(0, "missing 'arity:'");
  if (!groups && pieces.empty()) throw ParseError(0, "need 'region' lines or a 'maxmin:' line");

  PwlFunction f;
  f.arity = *arity;
  f.domain = domain;
  if (groups) {
    MaxMinForm m{*arity, comps, *groups};
    m.validate();
    f.maxmin = std::move(m);
  }
  if (!pieces.empty()) f.regional = RegionalPwl{*arity, std::move(pieces), domain};
  return f;
}

}  // namespace crnric

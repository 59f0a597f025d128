#pragma once

// Line-based text formats for networks, states and witness paths.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "crnric/core.hpp"

namespace crnric {

struct CrnDocument {
  Crn crn;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, Rational>> context;
};

namespace io_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::string_view strip_comment(std::string_view s) {
  if (auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
  return trim(s);
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

inline bool is_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

// "A", "2 A", "2A" terms separated by lone "+" tokens.
inline std::vector<std::pair<std::string, int>> parse_side(std::string_view side, std::size_t line) {
  std::vector<std::pair<std::string, int>> terms;
  auto toks = split_ws(side);
  bool expect_term = true;
  int pending = 0;
  for (const auto& tok : toks) {
    if (tok == "+") {
      if (expect_term) throw ParseError(line, "unexpected '+'");
      expect_term = true;
      continue;
    }
    if (!expect_term) throw ParseError(line, "expected '+' before '" + tok + "'");
    if (is_digits(tok)) {
      if (pending) throw ParseError(line, "two coefficients in a row");
      pending = std::stoi(tok);
      if (pending <= 0) throw ParseError(line, "coefficient must be positive");
      continue;
    }
    std::size_t k = 0;
    while (k < tok.size() && tok[k] >= '0' && tok[k] <= '9') ++k;
    int coeff = 1;
    if (k > 0) {
      if (pending) throw ParseError(line, "two coefficients in a row");
      coeff = std::stoi(tok.substr(0, k));
      if (coeff <= 0) throw ParseError(line, "coefficient must be positive");
    } else if (pending) {
      coeff = pending;
    }
    std::string name = tok.substr(k);
    if (!Crn::valid_species_name(name)) throw ParseError(line, "invalid species name '" + name + "'");
    terms.emplace_back(name, coeff);
    pending = 0;
    expect_term = false;
  }
  if (pending) throw ParseError(line, "coefficient without a species");
  if (expect_term && !terms.empty()) throw ParseError(line, "dangling '+'");
  return terms;
}

inline std::pair<std::string, Rational> parse_assignment(std::string_view s, std::size_t line) {
  auto eq = s.find('=');
  if (eq == std::string_view::npos) throw ParseError(line, "expected 'name = value'");
  std::string name(trim(s.substr(0, eq)));
  if (!Crn::valid_species_name(name)) throw ParseError(line, "invalid species name '" + name + "'");
  Rational q = parse_rational(trim(s.substr(eq + 1)), line);
  return {name, q};
}

}  // namespace io_detail

inline CrnDocument parse_crn_document(std::string_view text) {
  using namespace io_detail;
  CrnDocument doc;
  bool seen_species = false, seen_inputs = false, seen_output = false, seen_context = false;
  auto ls = lines(text);
  for (std::size_t ln = 0; ln < ls.size(); ++ln) {
    const std::size_t line = ln + 1;
    auto s = strip_comment(ls[ln]);
    if (s.empty()) continue;
    auto arrow = s.find("->");
    if (arrow == std::string_view::npos) {
      auto colon = s.find(':');
      if (colon == std::string_view::npos) throw ParseError(line, "expected a reaction or header");
      auto key = trim(s.substr(0, colon));
      auto rest = trim(s.substr(colon + 1));
      auto once = [&](bool& flag) {
        if (flag) throw ParseError(line, "repeated '" + std::string(key) + ":' header");
        flag = true;
      };
      try {
        if (key == "species") {
          once(seen_species);
          for (const auto& name : split_ws(rest)) {
            if (doc.crn.find(name)) throw ParseError(line, "duplicate species '" + name + "'");
            doc.crn.add_species(name);
          }
        } else if (key == "inputs") {
          once(seen_inputs);
          for (const auto& name : split_ws(rest)) {
            doc.crn.ensure_species(name);
            doc.inputs.push_back(name);
          }
        } else if (key == "output") {
          once(seen_output);
          doc.outputs = split_ws(rest);
          if (doc.outputs.empty() || doc.outputs.size() > 2)
            throw ParseError(line, "output takes one species or a rail pair");
          for (const auto& name : doc.outputs) doc.crn.ensure_species(name);
        } else if (key == "context") {
          once(seen_context);
          std::string norm;
          for (char c : rest) {
            if (c == '=') {
              while (!norm.empty() && norm.back() == ' ') norm.pop_back();
              norm += '=';
            } else if (!(c == ' ' && !norm.empty() && norm.back() == '=')) {
              norm += c;
            }
          }
          for (const auto& tok : split_ws(norm)) {
            auto a = parse_assignment(tok, line);
            if (a.second <= 0) throw ParseError(line, "context values must be positive");
            doc.crn.ensure_species(a.first);
            doc.context.push_back(a);
          }
        } else {
          throw ParseError(line, "unknown header '" + std::string(key) + "'");
        }
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
      }
      continue;
    }
    auto lhs = parse_side(s.substr(0, arrow), line);
    auto rhs = parse_side(s.substr(arrow + 2), line);
    if (lhs.empty()) throw ParseError(line, "empty reactant side");
    try {
      doc.crn.add_reaction(lhs, rhs);
    } catch (const std::exception& e) {
      throw ParseError(line, e.what());
    }
  }
  return doc;
}

inline Crn parse_crn(std::string_view text) { return parse_crn_document(text).crn; }

inline Crc crc_from_document(const CrnDocument& doc) {
  Crc crc;
  crc.crn = doc.crn;
  if (doc.outputs.empty()) throw ParseError(0, "missing 'output:' header");
  for (const auto& name : doc.inputs) crc.inputs.push_back(crc.crn.index_of(name));
  crc.output_plus = crc.crn.index_of(doc.outputs[0]);
  if (doc.outputs.size() == 2) {
    crc.kind = Encoding::dual;
    crc.output_minus = crc.crn.index_of(doc.outputs[1]);
  }
  for (const auto& [name, q] : doc.context) crc.context[crc.crn.index_of(name)] += q;
  try {
    crc.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
  return crc;
}

inline Crc parse_crc(std::string_view text) { return crc_from_document(parse_crn_document(text)); }

inline std::string format_side(const Crn& crn, const Stoichiometry& side) {
  std::string out;
  for (const auto& [s, n] : side) {
    if (!out.empty()) out += " + ";
    if (n != 1) out += std::to_string(n) + " ";
    out += crn.name(s);
  }
  return out;
}

inline std::string format_reaction(const Crn& crn, const Reaction& r) {
  std::string rhs = format_side(crn, r.products);
  return format_side(crn, r.reactants) + " ->" + (rhs.empty() ? "" : " " + rhs);
}

inline std::string serialize_crn(const Crn& crn) {
  std::string out = "species:";
  for (const auto& name : crn.species()) out += " " + name;
  out += "\n";
  for (const auto& r : crn.reactions()) out += format_reaction(crn, r) + "\n";
  return out;
}

inline std::string serialize_crc(const Crc& crc) {
  const Crn& crn = crc.crn;
  std::string out = "species:";
  for (const auto& name : crn.species()) out += " " + name;
  out += "\ninputs:";
  for (auto s : crc.inputs) out += " " + crn.name(s);
  out += "\noutput: " + crn.name(crc.output_plus);
  if (crc.output_minus) out += " " + crn.name(*crc.output_minus);
  out += "\n";
  if (!crc.context.empty()) {
    out += "context:";
    for (const auto& [s, q] : crc.context) out += " " + crn.name(s) + "=" + to_string(q);
    out += "\n";
  }
  for (const auto& r : crn.reactions()) out += format_reaction(crn, r) + "\n";
  return out;
}

inline State parse_state(std::string_view text, const Crn& crn) {
  using namespace io_detail;
  State c(crn.num_species());
  SpeciesSet seen(crn.num_species(), false);
  auto ls = lines(text);
  for (std::size_t ln = 0; ln < ls.size(); ++ln) {
    auto s = strip_comment(ls[ln]);
    if (s.empty()) continue;
    auto [name, q] = parse_assignment(s, ln + 1);
    auto idx = crn.find(name);
    if (!idx) throw ParseError(ln + 1, "unknown species '" + name + "'");
    if (seen[*idx]) throw ParseError(ln + 1, "species '" + name + "' assigned twice");
    if (q < 0) throw ParseError(ln + 1, "negative concentration");
    seen[*idx] = true;
    c.set(*idx, q);
  }
  return c;
}

inline std::string serialize_state(const Crn& crn, const State& c) {
  std::string out;
  for (SpeciesIndex i = 0; i < crn.num_species(); ++i)
    if (c.at(i) != 0) out += crn.name(i) + " = " + to_string(c.at(i)) + "\n";
  return out;
}

inline Path parse_path(std::string_view text, const Crn& crn) {
  using namespace io_detail;
  Path p;
  p.x0 = State(crn.num_species());
  bool in_segments = false;
  auto ls = lines(text);
  for (std::size_t ln = 0; ln < ls.size(); ++ln) {
    const std::size_t line = ln + 1;
    auto s = strip_comment(ls[ln]);
    if (s.empty()) continue;
    if (s == "segment:") {
      in_segments = true;
      p.segments.emplace_back(crn.num_reactions());
      continue;
    }
    if (!in_segments) {
      auto [name, q] = parse_assignment(s, line);
      auto idx = crn.find(name);
      if (!idx) throw ParseError(line, "unknown species '" + name + "'");
      if (q < 0) throw ParseError(line, "negative concentration");
      p.x0.set(*idx, q);
      continue;
    }
    auto toks = split_ws(s);
    if (toks.size() < 2 || toks[0] != "reaction") throw ParseError(line, "expected 'reaction <j> = value'");
    auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(line, "expected 'reaction <j> = value'");
    auto idx_text = trim(s.substr(8, eq - 8));
    if (!is_digits(idx_text)) throw ParseError(line, "bad reaction index");
    std::size_t j = std::stoul(std::string(idx_text));
    if (j == 0 || j > crn.num_reactions()) throw ParseError(line, "reaction index out of range");
    Rational q = parse_rational(trim(s.substr(eq + 1)), line);
    if (q < 0) throw ParseError(line, "negative flux");
    p.segments.back().set(j - 1, q);
  }
  return p;
}

inline std::string serialize_path(const Crn& crn, const Path& p) {
  std::string out = serialize_state(crn, p.x0);
  for (const auto& u : p.segments) {
    out += "segment:\n";
    for (ReactionIndex j = 0; j < crn.num_reactions(); ++j)
      if (u.at(j) != 0) out += "reaction " + std::to_string(j + 1) + " = " + to_string(u.at(j)) + "\n";
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

}  // namespace crnric

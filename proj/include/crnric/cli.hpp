#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain failure, 2 usage
// or parse error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crnric/analysis.hpp"
#include "crnric/compiler.hpp"
#include "crnric/dynamics.hpp"
#include "crnric/harness.hpp"
#include "crnric/io.hpp"
#include "crnric/pwl.hpp"
#include "crnric/reach.hpp"

namespace crnric {

/// Usage or input-format problem (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string subcommand;
  std::string crn_path, crc_path, spec_path, from_path, to_path, state_path;
  std::string output_path, witness_path, report_path, plot_path, schedule_path;
  std::string encoding = "dual";
  std::string expect;
  std::string rates;
  double horizon = 100;
  double rtol = 1e-9, atol = 1e-12, equilibrium = 1e-10;
  std::size_t trials = 100, prefix = 20;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::string flux_scale = "1";
  std::string input_range = "5";
  bool bruteforce = false;
  bool ode = false;
};

namespace cli_detail {

template <class Fn>
auto load(const std::string& path, const Fn& parse) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
}

inline std::string species_list(const Crn& crn, const std::vector<SpeciesIndex>& s) {
  std::string out;
  for (auto i : s) {
    if (!out.empty()) out += " ";
    out += crn.name(i);
  }
  return out;
}

// "1:2.5,2:1.0" -> rate per reaction (1-based); unspecified rates are 1.
inline std::vector<double> parse_rates(const std::string& text, std::size_t m) {
  std::vector<double> k(m, 1.0);
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("bad rate entry '" + item + "'");
    std::size_t j;
    double v;
    try {
      j = std::stoul(item.substr(0, colon));
      v = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("bad rate entry '" + item + "'");
    }
    if (j == 0 || j > m) throw UsageError("rate for unknown reaction " + std::to_string(j));
    if (!(v > 0)) throw UsageError("rates must be positive");
    k[j - 1] = v;
  }
  return k;
}

inline std::string trajectory_csv(const Crn& crn, const Trajectory& tr) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "t";
  for (SpeciesIndex i = 0; i < crn.num_species(); ++i) out << "," << crn.name(i);
  for (ReactionIndex j = 0; j < crn.num_reactions(); ++j) out << ",flux" << j + 1;
  out << "\n";
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    out << tr.times[s];
    for (double v : tr.states[s]) out << "," << v;
    for (double v : tr.fluxes[s]) out << "," << v;
    out << "\n";
  }
  return out.str();
}

inline std::string trajectory_svg(const Crn& crn, const Trajectory& tr) {
  const double w = 800, h = 500, pad = 50;
  double tmax = tr.times.empty() ? 1 : tr.times.back();
  double ymax = 0;
  for (const auto& s : tr.states)
    for (double v : s) ymax = std::max(ymax, v);
  if (tmax <= 0) tmax = 1;
  if (ymax <= 0) ymax = 1;
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream out;
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << w - pad << "\" y=\"" << h - pad + 20 << "\" text-anchor=\"end\">t = " << tmax
      << "</text>\n";
  out << "<text x=\"" << pad - 5 << "\" y=\"" << pad << "\" text-anchor=\"end\">" << ymax << "</text>\n";
  for (SpeciesIndex i = 0; i < crn.num_species(); ++i) {
    const char* color = colors[i % 10];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (std::size_t s = 0; s < tr.times.size(); ++s) {
      double x = pad + (w - 2 * pad) * tr.times[s] / tmax;
      double y = h - pad - (h - 2 * pad) * tr.states[s][i] / ymax;
      out << x << "," << y << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << w - pad + 5 << "\" y=\"" << pad + 15 * i << "\" fill=\"" << color << "\">"
        << crn.name(i) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline CompiledCrc load_compiled(const CliConfig& cfg) {
  Crc crc = load(cfg.crc_path, [](const std::string& t) {
    Crc c = parse_crc(t);
    c.validate();
    return c;
  });
  CompiledCrc cc = with_default_schedule(crc);
  std::string sidecar = cfg.schedule_path.empty() ? cfg.crc_path + ".schedule" : cfg.schedule_path;
  if (std::filesystem::exists(sidecar))
    load(sidecar, [&](const std::string& t) {
      parse_schedule(t, cc);
      return 0;
    });
  return cc;
}

inline int cmd_compile(const CliConfig& cfg, std::ostream& out) {
  PwlFunction f = load(cfg.spec_path, [](const std::string& t) { return parse_pwl(t); });
  CompiledCrc cc;
  if (cfg.encoding == "dual") {
    MaxMinForm m = f.to_maxmin();
    bool offsets = std::any_of(m.components.begin(), m.components.end(),
                               [](const AffineComponent& g) { return g.offset != 0; });
    cc = offsets ? compile_affine(m) : compile_maxmin(m);
  } else
    cc = compile_direct(f);
  std::string text = serialize_crc(cc.crc);
  if (cfg.output_path.empty()) {
    out << text;
  } else {
    write_file(cfg.output_path, text);
    write_file(cfg.output_path + ".schedule", serialize_schedule(cc));
    out << "compiled " << cc.crc.crn.num_species() << " species, " << cc.crc.crn.num_reactions()
        << " reactions\n";
  }
  return 0;
}

inline int cmd_reach(const CliConfig& cfg, std::ostream& out) {
  Crn crn = load(cfg.crn_path, [](const std::string& t) { return parse_crn(t); });
  State c = load(cfg.from_path, [&](const std::string& t) { return parse_state(t, crn); });
  State d = load(cfg.to_path, [&](const std::string& t) { return parse_state(t, crn); });
  ReachVerdict v = cfg.bruteforce ? decide_reachable_bruteforce(crn, c, d) : decide_reachable(crn, c, d);
  if (v.reachable) {
    out << "reachable (" << v.witness->segments.size() << " segments)\n";
    if (!cfg.witness_path.empty()) write_file(cfg.witness_path, serialize_path(crn, *v.witness));
  } else {
    out << "unreachable\n";
  }
  if (cfg.expect == "reachable" && !v.reachable) return 1;
  if (cfg.expect == "unreachable" && v.reachable) return 1;
  return 0;
}

inline int cmd_siphons(const CliConfig& cfg, std::ostream& out) {
  Crn crn = load(cfg.crn_path, [](const std::string& t) { return parse_crn(t); });
  for (const auto& s : minimal_siphons(crn)) out << species_list(crn, s) << "\n";
  return 0;
}

inline int cmd_stable(const CliConfig& cfg, std::ostream& out) {
  Crc crc = load(cfg.crc_path, [](const std::string& t) {
    Crc c = parse_crc(t);
    c.validate();
    return c;
  });
  auto ss = output_stable_siphons(crc);
  if (ss.all_states_stable) out << "all states output stable\n";
  for (const auto& s : ss.siphons) out << species_list(crc.crn, s) << "\n";
  if (!cfg.state_path.empty()) {
    State c = load(cfg.state_path, [&](const std::string& t) { return parse_state(t, crc.crn); });
    bool st = output_stable(crc, c);
    out << (st ? "state: output stable\n" : "state: not output stable\n");
    if (cfg.expect == "stable" && !st) return 1;
    if (cfg.expect == "unstable" && st) return 1;
  }
  return 0;
}

inline int cmd_feedforward(const CliConfig& cfg, std::ostream& out) {
  Crn crn = load(cfg.crn_path, [](const std::string& t) { return parse_crn(t); });
  auto order = feedforward_order(crn);
  if (!order) {
    out << "not feedforward\n";
    return 1;
  }
  for (auto i : *order) out << crn.name(i) << "\n";
  return 0;
}

inline int cmd_simulate(const CliConfig& cfg, std::ostream& out) {
  Crn crn = load(cfg.crn_path, [](const std::string& t) { return parse_crn(t); });
  State c = load(cfg.state_path, [&](const std::string& t) { return parse_state(t, crn); });
  RatedCrn rated{crn, parse_rates(cfg.rates, crn.num_reactions())};
  SimulationOptions so;
  so.horizon = cfg.horizon;
  so.rtol = cfg.rtol;
  so.atol = cfg.atol;
  so.equilibrium_threshold = cfg.equilibrium;
  Trajectory tr = simulate(rated, to_doubles(c, crn.num_species()), so);
  std::string csv = trajectory_csv(crn, tr);
  if (cfg.output_path.empty())
    out << csv;
  else
    write_file(cfg.output_path, csv);
  if (!cfg.plot_path.empty()) write_file(cfg.plot_path, trajectory_svg(crn, tr));
  if (!cfg.output_path.empty()) {
    out << std::setprecision(12) << "t = " << tr.times.back() << " (" << tr.steps << " steps, "
        << (tr.stop == Trajectory::Stop::equilibrium ? "equilibrium" : tr.stop == Trajectory::Stop::horizon
                                                                           ? "horizon"
                                                                           : "step limit")
        << ")\n";
    for (SpeciesIndex i = 0; i < crn.num_species(); ++i)
      out << crn.name(i) << " = " << tr.final_state()[i] << "\n";
  }
  return 0;
}

inline int cmd_verify(const CliConfig& cfg, std::ostream& out) {
  CompiledCrc cc = load_compiled(cfg);
  PwlFunction f = load(cfg.spec_path, [](const std::string& t) { return parse_pwl(t); });
  if (f.arity != cc.crc.arity()) throw UsageError("function arity does not match the CRC inputs");
  AdversaryConfig ac;
  ac.max_prefix_segments = cfg.prefix;
  ac.seed = cfg.seed;
  ac.trials = cfg.trials;
  Rational range;
  try {
    ac.flux_scale = parse_rational(cfg.flux_scale);
    range = parse_rational(cfg.input_range);
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
  VerifyOptions vo;
  vo.jobs = cfg.jobs;
  vo.ode_track = cfg.ode;
  Rng rng(cfg.seed);
  Rational lo = cc.crc.kind == Encoding::dual ? Rational(-range) : Rational(0);
  auto inputs = random_inputs(f, cfg.trials, rng, lo, range);
  auto rep = verify_stable_computation(cc, f, inputs, ac, vo);
  for (const auto& t : rep.trials)
    if (!t.pass || (t.ode_pass && !*t.ode_pass)) {
      out << "trial " << t.index << ": FAIL output " << to_string(t.output) << " expected " << to_string(t.expected);
      if (!t.message.empty()) out << " (" << t.message << ")";
      out << "\n";
    }
  out << rep.passed << "/" << rep.trials.size() << " trials passed";
  if (cfg.ode) out << ", ode " << rep.ode_passed << "/" << rep.trials.size();
  out << "\n";
  if (!cfg.report_path.empty()) write_file(cfg.report_path, to_json(rep).dump(2) + "\n");
  return rep.all_passed() ? 0 : 1;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CliConfig cfg;
  CLI::App app{"Compile, analyze, simulate and verify chemical reaction networks", "crnric"};
  app.require_subcommand(1);

  auto* compile = app.add_subcommand("compile", "Compile a piecewise linear function into a CRC");
  compile->add_option("--spec", cfg.spec_path, "Function file (.pwl)")->required();
  compile->add_option("--encoding", cfg.encoding, "dual or direct")
      ->check(CLI::IsMember({"dual", "direct"}));
  compile->add_option("-o,--output", cfg.output_path, "Output CRN file (schedule goes to <file>.schedule)");

  auto* reach = app.add_subcommand("reach", "Decide segment reachability between two states");
  reach->add_option("--crn", cfg.crn_path)->required();
  reach->add_option("--from", cfg.from_path)->required();
  reach->add_option("--to", cfg.to_path)->required();
  reach->add_option("--expect", cfg.expect)->check(CLI::IsMember({"reachable", "unreachable"}));
  reach->add_option("--witness", cfg.witness_path, "Write the witness path here");
  reach->add_flag("--bruteforce", cfg.bruteforce, "Enumerate reaction subsets instead");

  auto* siphons = app.add_subcommand("siphons", "List minimal siphons");
  siphons->add_option("--crn", cfg.crn_path)->required();

  auto* stable = app.add_subcommand("stable", "List output-stable siphons; optionally test a state");
  stable->add_option("--crc,--crn", cfg.crc_path)->required();
  stable->add_option("--state", cfg.state_path);
  stable->add_option("--expect", cfg.expect)->check(CLI::IsMember({"stable", "unstable"}));

  auto* ff = app.add_subcommand("feedforward", "Find a feedforward species order");
  ff->add_option("--crn", cfg.crn_path)->required();

  auto* sim = app.add_subcommand("simulate", "Integrate mass-action kinetics");
  sim->add_option("--crn", cfg.crn_path)->required();
  sim->add_option("--state", cfg.state_path)->required();
  sim->add_option("--rates", cfg.rates, "Rate constants as j:k pairs, e.g. 1:2.5,2:1.0");
  sim->add_option("--horizon", cfg.horizon)->check(CLI::PositiveNumber);
  sim->add_option("--rtol", cfg.rtol)->check(CLI::PositiveNumber);
  sim->add_option("--atol", cfg.atol)->check(CLI::PositiveNumber);
  sim->add_option("--equilibrium", cfg.equilibrium, "Stop once max |dx/dt| falls below this");
  sim->add_option("-o,--output", cfg.output_path, "CSV output");
  sim->add_option("--plot", cfg.plot_path, "SVG plot output");

  auto* verify = app.add_subcommand("verify", "Adversarially verify that a CRC stably computes a function");
  verify->add_option("--crc", cfg.crc_path)->required();
  verify->add_option("--spec", cfg.spec_path)->required();
  verify->add_option("--schedule", cfg.schedule_path, "Schedule file (default <crc>.schedule)");
  verify->add_option("--trials", cfg.trials);
  verify->add_option("--prefix", cfg.prefix, "Adversarial prefix segments");
  verify->add_option("--seed", cfg.seed);
  verify->add_option("--jobs", cfg.jobs)->check(CLI::Range(1u, 256u));
  verify->add_option("--flux-scale", cfg.flux_scale);
  verify->add_option("--range", cfg.input_range, "Inputs are drawn from [-r, r] (direct: [0, r])");
  verify->add_option("--report", cfg.report_path, "JSON report");
  verify->add_flag("--ode", cfg.ode, "Also finish each trial with mass-action kinetics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*compile) return cmd_compile(cfg, out);
    if (*reach) return cmd_reach(cfg, out);
    if (*siphons) return cmd_siphons(cfg, out);
    if (*stable) return cmd_stable(cfg, out);
    if (*ff) return cmd_feedforward(cfg, out);
    if (*sim) return cmd_simulate(cfg, out);
    if (*verify) return cmd_verify(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace crnric

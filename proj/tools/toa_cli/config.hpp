#pragma once

// Scenario configuration for the toa command-line tool: flag parsing, flat
// key=value config files, and validation.

#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "toa/dispersion.hpp"

namespace toa::cli {

/// Bad flags, bad values or violated config invariants (exit code 1).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output (exit code 4).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// --help was requested; carries the help text.
class HelpRequested : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Command { Toa, ToaNonrel, Ortho, AppendixDemo, TepEvolve, Crosscheck, Tunnel };

inline const std::vector<std::pair<std::string, Command>>& command_names() {
  static const std::vector<std::pair<std::string, Command>> names{
      {"toa", Command::Toa},
      {"toa-nonrel", Command::ToaNonrel},
      {"ortho", Command::Ortho},
      {"appendix-demo", Command::AppendixDemo},
      {"tep-evolve", Command::TepEvolve},
      {"crosscheck", Command::Crosscheck},
      {"tunnel", Command::Tunnel},
  };
  return names;
}

inline std::string to_string(Command c) {
  for (const auto& [name, cmd] : command_names())
    if (cmd == c) return name;
  return "?";
}

struct ScenarioConfig {
  Command command = Command::Toa;

  struct Physics {
    double mass = 1.0;
    Regime regime = Regime::Relativistic;
    EnergySign energy_sign = EnergySign::Positive;
    HalfLine branch = HalfLine::NonNegative;
  } physics;

  struct Grids {
    double p_min = 1e-3;
    double p_max = 12.0;
    std::size_t np = 4096;
    double t_min = 0.0;
    double t_max = 40.0;
    std::size_t nt = 2000;
    double x1 = 0.0;
    double x2 = 20.0;
  } grids;

  struct State {
    std::string kind = "gaussian";  // gaussian | eigenstate | file
    double p0 = 5.0;
    double sigma_p = 0.25;
    std::string path;
    std::string packet = "mixed";  // appendix-demo: mixed | positive
  } state;

  struct Output {
    std::string format = "auto";  // auto | csv | json
    std::string path;             // empty: stdout
  } output;

  struct Ortho {
    std::string check = "time";  // time | position | even
    bool control = false;
    double width = 1.0;
    double center = 0.0;
    std::vector<double> cutoffs{5.0, 10.0, 20.0, 40.0};
    std::size_t resolution = 4096;
  } ortho;

  struct Tep {
    double t2 = 10.0;
    double x_min = -40.0;
    double x_max = 80.0;
    std::size_t nx = 8192;
  } tep;

  struct Tunnel {
    std::string potential = "rect:V0=2,left=0,width=1";
    std::optional<double> energy;
    double e_min = 0.1;
    double e_max = 1.9;
    std::size_t ne = 19;
    std::optional<double> bracket_lo;
    std::optional<double> bracket_hi;
    bool exact = false;
  } tunnel;

  /// csv or json after resolving "auto" for the command.
  std::string resolved_format() const {
    if (output.format != "auto") return output.format;
    return (command == Command::Ortho || command == Command::AppendixDemo) ? "json" : "csv";
  }
};

/// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Full config as ordered key=value pairs, keys named like the flags.
inline std::vector<std::pair<std::string, std::string>> config_echo(const ScenarioConfig& c) {
  std::vector<std::pair<std::string, std::string>> e;
  auto num = [&](const char* k, double v) { e.emplace_back(k, format_number(v)); };
  auto str = [&](const char* k, std::string v) { e.emplace_back(k, std::move(v)); };
  str("command", to_string(c.command));
  num("mass", c.physics.mass);
  str("regime", to_string(c.physics.regime));
  str("energy-sign", to_string(c.physics.energy_sign));
  str("branch", to_string(c.physics.branch));
  num("p-min", c.grids.p_min);
  num("p-max", c.grids.p_max);
  str("np", std::to_string(c.grids.np));
  num("t-min", c.grids.t_min);
  num("t-max", c.grids.t_max);
  str("nt", std::to_string(c.grids.nt));
  num("x1", c.grids.x1);
  num("x2", c.grids.x2);
  str("state", c.state.kind);
  num("p0", c.state.p0);
  num("sigma-p", c.state.sigma_p);
  str("state-path", c.state.path);
  str("packet", c.state.packet);
  str("format", c.resolved_format());
  str("output", c.output.path);
  switch (c.command) {
    case Command::Ortho: {
      str("check", c.ortho.check);
      str("control", c.ortho.control ? "true" : "false");
      num("width", c.ortho.width);
      num("center", c.ortho.center);
      std::string cut;
      for (std::size_t i = 0; i < c.ortho.cutoffs.size(); ++i)
        cut += (i ? "," : "") + format_number(c.ortho.cutoffs[i]);
      str("cutoffs", cut);
      str("resolution", std::to_string(c.ortho.resolution));
      break;
    }
    case Command::TepEvolve:
      num("t2", c.tep.t2);
      [[fallthrough]];
    case Command::Crosscheck:
      num("x-min", c.tep.x_min);
      num("x-max", c.tep.x_max);
      str("nx", std::to_string(c.tep.nx));
      break;
    case Command::Tunnel:
      str("potential", c.tunnel.potential);
      if (c.tunnel.energy) num("energy", *c.tunnel.energy);
      num("e-min", c.tunnel.e_min);
      num("e-max", c.tunnel.e_max);
      str("ne", std::to_string(c.tunnel.ne));
      if (c.tunnel.bracket_lo) num("bracket-lo", *c.tunnel.bracket_lo);
      if (c.tunnel.bracket_hi) num("bracket-hi", *c.tunnel.bracket_hi);
      str("exact", c.tunnel.exact ? "true" : "false");
      break;
    default:
      break;
  }
  return e;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Flat key=value document -> "--key=value" tokens (command kept apart).
inline std::vector<std::string> config_text_to_args(const std::string& text, std::optional<std::string>& command) {
  std::vector<std::string> args;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (auto& ch : key)
      if (ch == '_') ch = '-';
    if (key == "command") {
      command = value;
      continue;
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

inline std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number in list: '" + item + "'");
    }
  }
  return out;
}

inline void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

}  // namespace detail

inline void validate(const ScenarioConfig& c) {
  using detail::require;
  const auto& g = c.grids;
  require(g.np >= 2, "np must be >= 2");
  require(g.nt >= 2, "nt must be >= 2");
  require(g.p_max > g.p_min, "p-max must exceed p-min");
  require(g.t_max > g.t_min, "t-max must exceed t-min");
  require(c.physics.mass >= 0.0, "mass must be >= 0");
  const bool nonrel = c.physics.regime == Regime::Nonrelativistic || c.command == Command::ToaNonrel;
  require(!nonrel || c.physics.mass > 0.0, "nonrelativistic runs need mass > 0");
  require(c.output.format == "auto" || c.output.format == "csv" || c.output.format == "json",
          "format must be csv or json");

  if (c.command != Command::AppendixDemo && c.command != Command::Tunnel) {
    if (c.physics.branch == HalfLine::NonNegative)
      require(g.p_min >= 0.0, "branch pos needs a nonnegative momentum grid (p-min >= 0)");
    else
      require(g.p_max <= 0.0, "branch neg needs a nonpositive momentum grid (p-max <= 0)");
  }
  if (c.command == Command::AppendixDemo) {
    require(g.p_max > 0.0, "appendix-demo uses the symmetric grid [-p-max, p-max]; p-max must be > 0");
    require(c.state.packet == "mixed" || c.state.packet == "positive", "packet must be mixed or positive");
  }

  const bool uses_state = c.command == Command::Toa || c.command == Command::ToaNonrel ||
                          c.command == Command::TepEvolve || c.command == Command::Crosscheck ||
                          c.command == Command::AppendixDemo;
  if (uses_state) {
    const auto& s = c.state;
    require(s.kind == "gaussian" || s.kind == "eigenstate" || s.kind == "file",
            "state must be gaussian, eigenstate or file");
    if (s.kind == "gaussian") require(s.sigma_p > 0.0, "sigma-p must be > 0 for a gaussian state");
    if (s.kind == "eigenstate") {
      require(s.p0 >= g.p_min && s.p0 <= g.p_max, "eigenstate p0 must lie inside [p-min, p-max]");
      require(c.command != Command::AppendixDemo, "appendix-demo needs a gaussian packet");
    }
    if (s.kind == "file") {
      require(!s.path.empty(), "state file needs --state-path");
      require(c.command != Command::AppendixDemo, "appendix-demo needs a gaussian packet");
    }
  }

  if (c.command == Command::Ortho) {
    const auto& o = c.ortho;
    require(o.check == "time" || o.check == "position" || o.check == "even", "check must be time, position or even");
    require(o.width > 0.0, "width must be > 0");
    require(!o.cutoffs.empty(), "cutoffs must not be empty");
    for (double x : o.cutoffs) require(x > 0.0, "cutoffs must be > 0");
    require(o.resolution >= 2, "resolution must be >= 2");
  }
  if (c.command == Command::TepEvolve || c.command == Command::Crosscheck) {
    require(c.tep.nx >= 3, "nx must be >= 3");
    require(c.tep.x_max > c.tep.x_min, "x-max must exceed x-min");
  }
  if (c.command == Command::TepEvolve) require(c.tep.t2 >= 0.0, "t2 must be >= 0 (the state is prepared at t = 0)");
  if (c.command == Command::Tunnel) {
    require(c.physics.mass > 0.0, "tunnel needs mass > 0");
    require(c.tunnel.ne >= 1, "ne must be >= 1");
    if (!c.tunnel.energy) require(c.tunnel.e_max >= c.tunnel.e_min, "e-max must be >= e-min");
    const auto& p = c.tunnel.potential;
    require(p.rfind("rect:", 0) == 0 || p.rfind("parab:", 0) == 0 || p.rfind("file:", 0) == 0,
            "potential must start with rect:, parab: or file:");
    if (c.tunnel.bracket_lo && c.tunnel.bracket_hi)
      require(*c.tunnel.bracket_hi > *c.tunnel.bracket_lo, "bracket-hi must exceed bracket-lo");
  }
}

/// Builds a config from command-line arguments (without argv[0]) and an
/// optional config file text. Flags override file values.
inline ScenarioConfig parse_config(const std::vector<std::string>& args,
                                   const std::optional<std::string>& config_text = std::nullopt) {
  ScenarioConfig c;
  CLI::App app{"Time-of-arrival, orthogonality and WKB tunneling scenarios", "toa_cli"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string command;
  std::vector<std::string> command_list;
  for (const auto& [name, cmd] : command_names()) command_list.push_back(name);
  app.add_option("command", command, "Scenario to run")->check(CLI::IsMember(command_list));
  std::string config_path;
  app.add_option("--config", config_path, "Flat key=value config file (read by the caller)");

  std::string regime = "rel", energy_sign = "pos", branch = "pos", cutoffs;
  app.add_option("--mass", c.physics.mass, "Particle mass (hbar = c = 1)");
  app.add_option("--regime", regime, "rel | nonrel")->check(CLI::IsMember({"rel", "nonrel"}));
  app.add_option("--energy-sign", energy_sign, "pos | neg")->check(CLI::IsMember({"pos", "neg"}));
  app.add_option("--branch", branch, "Momentum half-line: pos | neg")->check(CLI::IsMember({"pos", "neg"}));

  app.add_option("--p-min", c.grids.p_min);
  app.add_option("--p-max", c.grids.p_max);
  app.add_option("--np", c.grids.np);
  app.add_option("--t-min", c.grids.t_min);
  app.add_option("--t-max", c.grids.t_max);
  app.add_option("--nt", c.grids.nt);
  app.add_option("--x1", c.grids.x1, "Source position");
  app.add_option("--x2", c.grids.x2, "Detector position");

  app.add_option("--state", c.state.kind, "gaussian | eigenstate | file");
  app.add_option("--p0", c.state.p0);
  app.add_option("--sigma-p", c.state.sigma_p, "Std. deviation of |phi(p)|^2");
  app.add_option("--state-path", c.state.path, "CSV with columns p,re,im");
  app.add_option("--packet", c.state.packet, "appendix-demo packet: mixed | positive");

  app.add_option("--format", c.output.format, "csv | json (default depends on command)");
  app.add_option("-o,--output", c.output.path, "Output file (default stdout)");

  app.add_option("--check", c.ortho.check, "ortho: time | position | even");
  app.add_flag("--control", c.ortho.control, "ortho: unrestricted-range control");
  app.add_option("--width", c.ortho.width, "ortho: Gaussian test-function width");
  app.add_option("--center", c.ortho.center, "ortho: Gaussian test-function center");
  app.add_option("--cutoffs", cutoffs, "ortho: comma separated cutoff list");
  app.add_option("--resolution", c.ortho.resolution, "ortho: spectral nodes per cutoff");

  app.add_option("--t2", c.tep.t2, "tep-evolve: final time");
  app.add_option("--x-min", c.tep.x_min);
  app.add_option("--x-max", c.tep.x_max);
  app.add_option("--nx", c.tep.nx);

  app.add_option("--potential", c.tunnel.potential, "rect:V0=..,left=..,width=.. | parab:V0=..,k=..,center=.. | file:PATH");
  app.add_option("--energy", c.tunnel.energy);
  app.add_option("--e-min", c.tunnel.e_min);
  app.add_option("--e-max", c.tunnel.e_max);
  app.add_option("--ne", c.tunnel.ne);
  app.add_option("--bracket-lo", c.tunnel.bracket_lo);
  app.add_option("--bracket-hi", c.tunnel.bracket_hi);
  app.add_flag("--exact", c.tunnel.exact, "tunnel: add exact rectangular transmission");

  std::optional<std::string> file_command;
  std::vector<std::string> tokens;
  if (config_text) tokens = detail::config_text_to_args(*config_text, file_command);
  tokens.insert(tokens.end(), args.begin(), args.end());

  try {
    // CLI11 consumes the vector from the back.
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (command.empty() && file_command) command = *file_command;
  if (command.empty()) throw UsageError("missing command (toa, toa-nonrel, ortho, appendix-demo, tep-evolve, crosscheck, tunnel)");
  bool known = false;
  for (const auto& [name, cmd] : command_names())
    if (name == command) {
      c.command = cmd;
      known = true;
    }
  if (!known) throw UsageError("unknown command '" + command + "'");

  c.physics.regime = regime == "rel" ? Regime::Relativistic : Regime::Nonrelativistic;
  if (c.command == Command::ToaNonrel) c.physics.regime = Regime::Nonrelativistic;
  c.physics.energy_sign = energy_sign == "pos" ? EnergySign::Positive : EnergySign::Negative;
  c.physics.branch = branch == "pos" ? HalfLine::NonNegative : HalfLine::NonPositive;
  if (!cutoffs.empty()) c.ortho.cutoffs = detail::parse_number_list(cutoffs);

  validate(c);
  return c;
}

/// Path given with --config, if any, so the caller can read it first.
inline std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

}  // namespace toa::cli

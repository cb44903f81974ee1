#pragma once

// Scenario execution for the toa command-line tool. Every output is built
// in memory first so that identical configs give identical bytes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "toa/toa.hpp"

namespace toa::cli {

using Json = nlohmann::ordered_json;

struct OutputFile {
  std::string path;  // empty: stdout
  std::string contents;
};

struct RunRecord {
  std::vector<std::pair<std::string, std::string>> config;
  std::string version;
  double wall_seconds = 0.0;
  Json result;                     // summary payload
  std::vector<OutputFile> files;
};

namespace detail {

inline std::string csv_header(const ScenarioConfig& c) {
  std::string h = "# toa " + std::string(toa::version) + "\n";
  for (const auto& [k, v] : config_echo(c)) h += "# " + k + "=" + v + "\n";
  return h;
}

inline Json json_envelope(const ScenarioConfig& c, Json result) {
  Json config = Json::object();
  for (const auto& [k, v] : config_echo(c)) config[k] = v;
  Json doc;
  doc["version"] = toa::version;
  doc["config"] = std::move(config);
  doc["result"] = std::move(result);
  return doc;
}

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void row(std::initializer_list<double> values) {
    std::string line;
    bool first = true;
    for (double v : values) {
      if (!first) line += ',';
      line += format_number(v);
      first = false;
    }
    rows_.push_back(std::move(line));
  }

  std::string str(const std::string& header) const {
    std::string out = header;
    for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
    out += '\n';
    for (const auto& r : rows_) out += r + '\n';
    return out;
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
};

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Numeric rows of a CSV or whitespace table; comments and header lines skipped.
inline std::vector<std::vector<double>> read_numeric_table(const std::string& path, std::size_t columns) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    std::string token;
    bool numeric = true;
    while (ls >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (row.empty() && numeric) continue;
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw IoError("'" + path + "': non-numeric row");
    }
    if (row.size() < columns) throw IoError("'" + path + "': expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("'" + path + "' holds no data rows");
  return rows;
}

inline MomentumWavefunction build_state(const ScenarioConfig& c) {
  const auto& g = c.grids;
  const auto& s = c.state;
  if (s.kind == "eigenstate") {
    const double spacing = (g.p_max - g.p_min) / static_cast<double>(g.np - 1);
    return eigenstate(s.p0, spacing, c.physics.branch);
  }
  if (s.kind == "file") {
    const auto rows = read_numeric_table(s.path, 3);
    std::vector<double> p;
    std::vector<complex> amp;
    for (const auto& r : rows) {
      p.push_back(r[0]);
      amp.emplace_back(r[1], r[2]);
    }
    return {MomentumGrid::from_nodes(std::move(p), c.physics.branch), std::move(amp)};
  }
  return gaussian_state(MomentumGrid::uniform(g.p_min, g.p_max, g.np, c.physics.branch), s.p0, s.sigma_p);
}

/// parse "rect:V0=2,left=0,width=1" style parameter lists.
inline double named_parameter(const std::string& body, const std::string& key) {
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("potential parameter '" + item + "' lacks '='");
    if (detail::trim(item.substr(0, eq)) == key) {
      const auto values = parse_number_list(item.substr(eq + 1));
      if (values.size() != 1) throw UsageError("potential parameter " + key + " needs one number");
      return values.front();
    }
  }
  throw UsageError("potential is missing parameter " + key);
}

inline PotentialSpec build_potential(const std::string& text) {
  if (text.rfind("rect:", 0) == 0) {
    const auto body = text.substr(5);
    return RectangularBarrier{named_parameter(body, "V0"), named_parameter(body, "left"), named_parameter(body, "width")};
  }
  if (text.rfind("parab:", 0) == 0) {
    const auto body = text.substr(6);
    return ParabolicBarrier{named_parameter(body, "V0"), named_parameter(body, "k"), named_parameter(body, "center")};
  }
  if (text.rfind("file:", 0) == 0) {
    TabulatedBarrier t;
    for (const auto& r : read_numeric_table(text.substr(5), 2)) t.points.emplace_back(r[0], r[1]);
    return t;
  }
  throw UsageError("unknown potential '" + text + "'");
}

/// Default bracket holding the whole forbidden region for every energy >= e_low.
inline std::pair<double, double> default_bracket(const PotentialSpec& v, double e_low) {
  return std::visit(
      [e_low](const auto& k) -> std::pair<double, double> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, RectangularBarrier>) {
          return {k.left - k.width, k.left + 2.0 * k.width};
        } else if constexpr (std::is_same_v<T, ParabolicBarrier>) {
          const double reach = std::sqrt(2.0 * std::max(k.height - e_low, 0.0) / k.curvature);
          const double r = 2.0 * reach + 1.0;
          return {k.center - r, k.center + r};
        } else {
          return {k.points.front().first, k.points.back().first};
        }
      },
      v.kind());
}

inline Dispersion dispersion_of(const ScenarioConfig& c) { return Dispersion(c.physics.mass, c.physics.regime); }

inline BranchConfig branch_of(const ScenarioConfig& c) { return {c.physics.energy_sign, c.physics.branch}; }

inline std::string sibling_path(const std::string& output, const std::string& suffix) {
  return output.empty() ? std::string{} : output + suffix;
}

inline void run_arrival(const ScenarioConfig& c, Execution ex, RunRecord& rec) {
  const auto state = build_state(c);
  const auto times = toa::detail::linspace(c.grids.t_min, c.grids.t_max, c.grids.nt);
  const auto d = dispersion_of(c);
  const auto amp = arrival_amplitude(state, c.grids.x1, c.grids.x2, times, d, branch_of(c), ex);
  const auto dist = arrival_distribution(amp);

  rec.result["peak_t"] = peak_time(dist);
  rec.result["total_mass"] = dist.total_mass;
  rec.result["momentum_mass"] = state.mass();

  if (c.resolved_format() == "json") {
    Json t = Json::array(), re = Json::array(), im = Json::array(), prob = Json::array();
    for (std::size_t i = 0; i < times.size(); ++i) {
      t.push_back(times[i]);
      re.push_back(amp.amplitudes[i].real());
      im.push_back(amp.amplitudes[i].imag());
      prob.push_back(dist.density[i]);
    }
    Json result = rec.result;
    result["t"] = std::move(t);
    result["re"] = std::move(re);
    result["im"] = std::move(im);
    result["prob"] = std::move(prob);
    rec.files.push_back({c.output.path, json_envelope(c, std::move(result)).dump(2) + "\n"});
    return;
  }
  CsvTable table({"t", "re", "im", "prob"});
  for (std::size_t i = 0; i < times.size(); ++i)
    table.row({times[i], amp.amplitudes[i].real(), amp.amplitudes[i].imag(), dist.density[i]});
  rec.files.push_back({c.output.path, table.str(csv_header(c))});
  rec.files.push_back({sibling_path(c.output.path, ".summary.json"), json_envelope(c, rec.result).dump(2) + "\n"});
}

inline void run_ortho(const ScenarioConfig& c, Execution ex, RunRecord& rec) {
  const auto d = dispersion_of(c);
  const SmearingTest s{{c.ortho.center, c.ortho.width}, c.ortho.cutoffs, c.ortho.resolution};
  OrthogonalityReport r;
  if (c.ortho.check == "time")
    r = c.ortho.control ? check_time_orthogonality_unrestricted(d, s, ex) : check_time_orthogonality(d, branch_of(c), s, ex);
  else if (c.ortho.check == "position")
    r = c.ortho.control ? check_position_orthogonality_unrestricted(d, s, ex)
                        : check_position_orthogonality(d, branch_of(c), s, ex);
  else
    r = check_even_kernel_orthogonality(d, s, ex);

  rec.result["check"] = r.check;
  rec.result["branch"] = r.branch;
  rec.result["cutoffs"] = r.cutoffs();
  rec.result["errors"] = r.errors();
  rec.result["reproduction_error"] = r.reproduction_error;
  rec.result["monotone"] = is_monotone_nonincreasing(r);

  if (c.resolved_format() == "json") {
    rec.files.push_back({c.output.path, json_envelope(c, rec.result).dump(2) + "\n"});
    return;
  }
  CsvTable table({"cutoff", "error"});
  for (const auto& e : r.cutoff_sequence) table.row({e.cutoff, e.error});
  rec.files.push_back({c.output.path, table.str(csv_header(c))});
}

inline void run_appendix(const ScenarioConfig& c, Execution ex, RunRecord& rec) {
  const double p0 = std::abs(c.state.p0);
  const double sigma = c.state.sigma_p;
  const bool mixed = c.state.packet == "mixed";
  auto bump = [sigma](double u) { return std::exp(-u * u / (4.0 * sigma * sigma)); };
  auto raw = FullLineWavefunction::sample(c.grids.p_max, c.grids.np, [&](double p) -> complex {
    return mixed ? bump(p - p0) + bump(p + p0) : bump(p - p0);
  });
  double norm = 0.0;
  for (const auto& a : raw.amplitudes()) norm += std::norm(a);
  norm = std::sqrt(norm * raw.spacing());
  std::vector<complex> amp(raw.amplitudes().begin(), raw.amplitudes().end());
  for (auto& a : amp) a /= norm;
  const FullLineWavefunction state(std::vector<double>(raw.nodes().begin(), raw.nodes().end()), std::move(amp));

  const auto times = toa::detail::linspace(c.grids.t_min, c.grids.t_max, c.grids.nt);
  const auto routes = even_kernel_arrival_routes(state, c.grids.x1, c.grids.x2, times, dispersion_of(c),
                                                 c.physics.energy_sign, ex);
  rec.result["packet"] = c.state.packet;
  rec.result["l2_discrepancy"] = routes.l2_discrepancy;

  if (c.resolved_format() == "json") {
    rec.files.push_back({c.output.path, json_envelope(c, rec.result).dump(2) + "\n"});
    return;
  }
  CsvTable table({"t", "re_direct", "im_direct", "re_collapsed", "im_collapsed"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto a = routes.route_direct.amplitudes[i];
    const auto b = routes.route_collapsed.amplitudes[i];
    table.row({times[i], a.real(), a.imag(), b.real(), b.imag()});
  }
  rec.files.push_back({c.output.path, table.str(csv_header(c))});
  rec.files.push_back({sibling_path(c.output.path, ".summary.json"), json_envelope(c, rec.result).dump(2) + "\n"});
}

inline void run_tep_evolve(const ScenarioConfig& c, Execution ex, RunRecord& rec) {
  const auto state = build_state(c);
  const auto d = dispersion_of(c);
  const auto positions = toa::detail::linspace(c.tep.x_min, c.tep.x_max, c.tep.nx);
  const auto psi0 = position_state_from_momentum(state, positions, c.grids.x1, 0.0, ex);
  const auto psi = evolve_tep(psi0, c.tep.t2, d, branch_of(c));

  double mean_x = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) mean_x += positions[i] * std::norm(psi.amplitudes()[i]);
  mean_x *= psi.spacing() / psi.norm();
  rec.result["norm_initial"] = psi0.norm();
  rec.result["norm_final"] = psi.norm();
  rec.result["mean_position"] = mean_x;

  if (c.resolved_format() == "json") {
    Json x = Json::array(), re = Json::array(), im = Json::array();
    for (std::size_t i = 0; i < positions.size(); ++i) {
      x.push_back(positions[i]);
      re.push_back(psi.amplitudes()[i].real());
      im.push_back(psi.amplitudes()[i].imag());
    }
    Json result = rec.result;
    result["x"] = std::move(x);
    result["re"] = std::move(re);
    result["im"] = std::move(im);
    rec.files.push_back({c.output.path, json_envelope(c, std::move(result)).dump(2) + "\n"});
    return;
  }
  CsvTable table({"x", "re", "im", "prob"});
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto a = psi.amplitudes()[i];
    table.row({positions[i], a.real(), a.imag(), std::norm(a)});
  }
  rec.files.push_back({c.output.path, table.str(csv_header(c))});
  rec.files.push_back({sibling_path(c.output.path, ".summary.json"), json_envelope(c, rec.result).dump(2) + "\n"});
}

inline void run_crosscheck(const ScenarioConfig& c, Execution ex, RunRecord& rec) {
  const auto state = build_state(c);
  const auto times = toa::detail::linspace(c.grids.t_min, c.grids.t_max, c.grids.nt);
  const auto r = crosscheck_arrival_vs_current(state, c.grids.x1, c.grids.x2, times, dispersion_of(c), ex);
  rec.result["l1_distance"] = r.l1_distance;
  rec.result["current_integral"] = r.raw_current_integral;
  rec.result["sigma_ratio"] = r.sigma_ratio;

  if (c.resolved_format() == "json") {
    Json result = rec.result;
    result["t"] = r.times;
    result["J"] = r.current;
    result["prob"] = r.arrival_density;
    rec.files.push_back({c.output.path, json_envelope(c, std::move(result)).dump(2) + "\n"});
    return;
  }
  CsvTable table({"t", "J", "prob"});
  for (std::size_t i = 0; i < r.times.size(); ++i) table.row({r.times[i], r.current[i], r.arrival_density[i]});
  rec.files.push_back({c.output.path, table.str(csv_header(c))});
  rec.files.push_back({sibling_path(c.output.path, ".summary.json"), json_envelope(c, rec.result).dump(2) + "\n"});
}

inline void run_tunnel(const ScenarioConfig& c, RunRecord& rec) {
  const auto v = build_potential(c.tunnel.potential);
  std::vector<double> energies;
  if (c.tunnel.energy) energies.push_back(*c.tunnel.energy);
  else if (c.tunnel.ne == 1) energies.push_back(c.tunnel.e_min);
  else energies = toa::detail::linspace(c.tunnel.e_min, c.tunnel.e_max, c.tunnel.ne);

  const auto* rect = std::get_if<RectangularBarrier>(&v.kind());
  if (c.tunnel.exact && !rect) throw UsageError("--exact needs a rect: potential");
  const bool exact = c.tunnel.exact;

  auto bracket = default_bracket(v, *std::min_element(energies.begin(), energies.end()));
  if (c.tunnel.bracket_lo) bracket.first = *c.tunnel.bracket_lo;
  if (c.tunnel.bracket_hi) bracket.second = *c.tunnel.bracket_hi;

  std::vector<std::string> columns{"E", "a", "b", "imW", "P_wkb"};
  if (exact) columns.push_back("T_exact");
  CsvTable table(columns);
  Json rows = Json::array();
  for (double e : energies) {
    const auto r = tunneling_probability(v, e, c.physics.mass, bracket);
    Json row;
    row["E"] = e;
    row["a"] = r.turning_points.a;
    row["b"] = r.turning_points.b;
    row["imW"] = r.im_w;
    row["P_wkb"] = r.probability;
    if (exact) {
      const double t = exact_rectangular_transmission(rect->height, rect->width, e, c.physics.mass);
      row["T_exact"] = t;
      table.row({e, r.turning_points.a, r.turning_points.b, r.im_w, r.probability, t});
    } else {
      table.row({e, r.turning_points.a, r.turning_points.b, r.im_w, r.probability});
    }
    rows.push_back(std::move(row));
  }
  rec.result["rows"] = rows;
  if (c.resolved_format() == "json") {
    rec.files.push_back({c.output.path, json_envelope(c, rec.result).dump(2) + "\n"});
    return;
  }
  rec.files.push_back({c.output.path, table.str(csv_header(c))});
}

}  // namespace detail

/// Runs one scenario; output contents are returned, not written.
inline RunRecord run(const ScenarioConfig& c, Execution ex = {}) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.config = config_echo(c);
  rec.version = toa::version;
  rec.result = Json::object();
  switch (c.command) {
    case Command::Toa:
    case Command::ToaNonrel: detail::run_arrival(c, ex, rec); break;
    case Command::Ortho: detail::run_ortho(c, ex, rec); break;
    case Command::AppendixDemo: detail::run_appendix(c, ex, rec); break;
    case Command::TepEvolve: detail::run_tep_evolve(c, ex, rec); break;
    case Command::Crosscheck: detail::run_crosscheck(c, ex, rec); break;
    case Command::Tunnel: detail::run_tunnel(c, rec); break;
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

/// Writes files with paths. Pathless files go to `primary` (the first one)
/// or `secondary` (summaries that follow it).
inline void write_outputs(const RunRecord& rec, std::ostream& primary, std::ostream& secondary) {
  bool primary_used = false;
  for (const auto& f : rec.files) {
    if (f.path.empty()) {
      (primary_used ? secondary : primary) << f.contents;
      primary_used = true;
      continue;
    }
    std::ofstream out(f.path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + f.path + "'");
    out << f.contents;
    if (!out) throw IoError("write failed for '" + f.path + "'");
  }
}

}  // namespace toa::cli

#pragma once

// Position as evolution parameter: time-of-arrival amplitudes at a detector
// position x2 from a momentum-space state prepared at a source position x1.
//
//   phi2(t) = (1/sqrt(2 pi)) Int sqrt(|p|/E_p) exp(-/+ i E_p t + i p (x2 - x1)) phi1(p) dp
//
// with p on one half-line. Every quadrature is a fixed-order trapezoid over
// the momentum grid, evaluated independently per time node.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "toa/detail/numeric.hpp"
#include "toa/dispersion.hpp"
#include "toa/errors.hpp"

namespace toa {

/// Uniform momentum grid on one half-line.
class MomentumGrid {
public:
  /// `n` uniform nodes on [p_min, p_max].
  static MomentumGrid uniform(double p_min, double p_max, std::size_t n, HalfLine half_line) {
    if (n < 2) throw DomainError("a uniform momentum grid needs >= 2 nodes");
    if (!(p_max > p_min)) throw DomainError("p_max must exceed p_min");
    auto nodes = detail::linspace(p_min, p_max, n);
    const double spacing = (p_max - p_min) / static_cast<double>(n - 1);
    return MomentumGrid(std::move(nodes), spacing, half_line);
  }

  /// Single node standing in for a delta-normalized momentum eigenstate.
  static MomentumGrid collocated(double p, double spacing, HalfLine half_line) {
    if (!(spacing > 0.0)) throw DomainError("collocation spacing must be > 0");
    return MomentumGrid({p}, spacing, half_line);
  }

  /// Adopts explicit nodes; they must be uniform to 1e-12 relative.
  static MomentumGrid from_nodes(std::vector<double> nodes, HalfLine half_line) {
    if (nodes.size() < 2) throw DomainError("explicit momentum grid needs >= 2 nodes");
    const double spacing = (nodes.back() - nodes.front()) / static_cast<double>(nodes.size() - 1);
    if (!(spacing > 0.0)) throw DomainError("momentum nodes must ascend");
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (std::abs((nodes[i] - nodes[i - 1]) - spacing) > 1e-12 * std::max(spacing, std::abs(nodes[i])))
        throw DomainError("momentum nodes are not uniformly spaced");
    }
    return MomentumGrid(std::move(nodes), spacing, half_line);
  }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double spacing() const noexcept { return spacing_; }
  HalfLine half_line() const noexcept { return half_line_; }

  /// Trapezoid weights (full spacing for a single node).
  std::vector<double> weights() const { return detail::trapezoid_weights(nodes_.size(), spacing_); }

private:
  MomentumGrid(std::vector<double> nodes, double spacing, HalfLine half_line)
      : nodes_(std::move(nodes)), spacing_(spacing), half_line_(half_line) {
    const BranchConfig probe{EnergySign::Positive, half_line};
    for (double p : nodes_) {
      if (!std::isfinite(p)) throw DomainError("momentum nodes must be finite");
      if (!probe.contains(p)) throw ContractViolation("momentum node off the grid's half-line");
    }
  }

  std::vector<double> nodes_;
  double spacing_;
  HalfLine half_line_;
};

/// phi1(p) sampled on a single-sign momentum grid.
class MomentumWavefunction {
public:
  MomentumWavefunction(MomentumGrid grid, std::vector<complex> amplitudes)
      : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != grid_.size()) throw DomainError("amplitude count does not match the grid");
  }

  const MomentumGrid& grid() const noexcept { return grid_; }
  std::span<const complex> amplitudes() const noexcept { return amplitudes_; }

  /// Sum |phi|^2 dp (rectangle rule).
  double norm() const noexcept {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s * grid_.spacing();
  }

  /// Int |phi|^2 dp with the same trapezoid weights the arrival quadrature uses.
  double mass() const {
    const auto w = grid_.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::norm(amplitudes_[i]);
    return s;
  }

  bool is_normalized(double tol = 1e-6) const noexcept { return std::abs(norm() - 1.0) <= tol; }

  /// Spectral-leakage guard: |phi| at the outermost node small against the peak.
  bool boundary_decayed(double ratio = 1e-6) const noexcept {
    if (amplitudes_.size() < 2) return true;
    double peak = 0.0;
    for (const auto& a : amplitudes_) peak = std::max(peak, std::abs(a));
    const double edge = std::max(std::abs(amplitudes_.front()), std::abs(amplitudes_.back()));
    return edge <= ratio * peak;
  }

  /// Mean and standard deviation of |phi|^2 over p.
  std::pair<double, double> momentum_moments() const {
    const auto w = grid_.weights();
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double rho = w[i] * std::norm(amplitudes_[i]);
      const double p = grid_.nodes()[i];
      m0 += rho;
      m1 += rho * p;
      m2 += rho * p * p;
    }
    if (m0 == 0.0) return {0.0, 0.0};
    const double mean = m1 / m0;
    return {mean, std::sqrt(std::max(0.0, m2 / m0 - mean * mean))};
  }

private:
  MomentumGrid grid_;
  std::vector<complex> amplitudes_;
};

/// Normalized Gaussian with |phi|^2 of standard deviation sigma_p around p0.
inline MomentumWavefunction gaussian_state(const MomentumGrid& grid, double p0, double sigma_p) {
  if (!(sigma_p > 0.0)) throw DomainError("sigma_p must be > 0");
  std::vector<complex> amp;
  amp.reserve(grid.size());
  for (double p : grid.nodes()) {
    const double u = (p - p0) / sigma_p;
    amp.emplace_back(std::exp(-0.25 * u * u), 0.0);
  }
  MomentumWavefunction raw(grid, amp);
  const double n = raw.norm();
  if (n == 0.0) throw DomainError("Gaussian has no weight on the grid");
  const double scale = 1.0 / std::sqrt(n);
  for (auto& a : amp) a *= scale;
  return {grid, std::move(amp)};
}

/// Momentum eigenstate collocated on one node with amplitude 1/sqrt(dp).
inline MomentumWavefunction eigenstate(double p, double spacing, HalfLine half_line) {
  auto grid = MomentumGrid::collocated(p, spacing, half_line);
  return {grid, {complex{1.0 / std::sqrt(spacing), 0.0}}};
}

/// phi2(t) at a detector position.
struct ArrivalAmplitude {
  double detector_position;
  double source_position;
  std::vector<double> times;
  std::vector<complex> amplitudes;
  BranchConfig branch;
};

struct ArrivalDistribution {
  std::vector<double> times;
  std::vector<double> density;
  double total_mass = 0.0;
};

inline ArrivalDistribution arrival_distribution(const ArrivalAmplitude& a) {
  ArrivalDistribution out;
  out.times = a.times;
  out.density.reserve(a.amplitudes.size());
  for (const auto& v : a.amplitudes) out.density.push_back(std::norm(v));
  out.total_mass = out.times.size() >= 2 ? detail::trapezoid(out.times, out.density) : 0.0;
  return out;
}

/// Time of the largest density sample (first one on ties).
inline double peak_time(const ArrivalDistribution& d) {
  if (d.density.empty()) throw DomainError("empty distribution");
  const auto it = std::max_element(d.density.begin(), d.density.end());
  return d.times[static_cast<std::size_t>(it - d.density.begin())];
}

/// phi1 sampled on a grid symmetric about p = 0 (both momentum signs).
class FullLineWavefunction {
public:
  FullLineWavefunction(std::vector<double> nodes, std::vector<complex> amplitudes)
      : nodes_(std::move(nodes)), amplitudes_(std::move(amplitudes)) {
    if (nodes_.size() < 2 || nodes_.size() != amplitudes_.size())
      throw DomainError("full-line state needs >= 2 nodes and matching amplitudes");
    spacing_ = (nodes_.back() - nodes_.front()) / static_cast<double>(nodes_.size() - 1);
    if (!(spacing_ > 0.0)) throw DomainError("momentum nodes must ascend");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double mirror = nodes_[nodes_.size() - 1 - i];
      if (std::abs(nodes_[i] + mirror) > 1e-12 * std::max(1.0, std::abs(mirror)))
        throw ContractViolation("full-line grid must be symmetric about p = 0");
      if (i > 0 && std::abs((nodes_[i] - nodes_[i - 1]) - spacing_) > 1e-9 * spacing_)
        throw DomainError("full-line grid must be uniform");
    }
  }

  static FullLineWavefunction sample(double p_max, std::size_t n, auto&& phi) {
    auto nodes = detail::linspace(-p_max, p_max, n);
    std::vector<complex> amp;
    amp.reserve(n);
    for (double p : nodes) amp.push_back(phi(p));
    return {std::move(nodes), std::move(amp)};
  }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const complex> amplitudes() const noexcept { return amplitudes_; }
  double spacing() const noexcept { return spacing_; }

private:
  std::vector<double> nodes_;
  std::vector<complex> amplitudes_;
  double spacing_ = 0.0;
};

namespace detail {

inline void check_times(std::span<const double> times) {
  if (times.empty()) throw DomainError("no time nodes requested");
  if (!strictly_ascending(times)) throw ContractViolation("times must be strictly ascending");
}

/// Nyquist guards for the momentum quadrature and the time sampling.
/// Single-node (collocated) states have no momentum aliasing to guard.
inline void check_arrival_resolution(std::span<const double> nodes, double spacing,
                                     std::span<const double> times, double separation, const Dispersion& d) {
  if (nodes.size() < 2) return;
  double v_max = 0.0, e_min = std::numeric_limits<double>::infinity(), e_max = 0.0;
  for (double p : nodes) {
    v_max = std::max(v_max, d.speed(p));
    const double e = d.energy(p).value();
    e_min = std::min(e_min, e);
    e_max = std::max(e_max, e);
  }
  const double t_abs = std::max(std::abs(times.front()), std::abs(times.back()));
  if (spacing * (std::abs(separation) + t_abs * v_max) > std::numbers::pi)
    throw ResolutionError("Nyquist violation: momentum spacing too coarse for |x2-x1| + v t");
  double dt_max = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) dt_max = std::max(dt_max, times[i] - times[i - 1]);
  if (dt_max * (e_max - e_min) > std::numbers::pi)
    throw ResolutionError("Nyquist violation: time spacing too coarse for the energy bandwidth");
}

inline void check_state_branch(const MomentumWavefunction& state, BranchConfig b) {
  if (state.grid().half_line() != b.momentum_half_line)
    throw ContractViolation("state half-line does not match the branch");
}

/// Shared driver: phi2(t_i) = sum_k term(k, t_i), one independent reduction
/// per time node in ascending k.
template <typename Term>
std::vector<complex> sum_per_time(std::span<const double> times, std::size_t n_nodes, Execution ex, Term&& term) {
  std::vector<complex> out(times.size());
  parallel_for(times.size(), ex, [&](std::size_t i) {
    complex acc{};
    for (std::size_t k = 0; k < n_nodes; ++k) acc += term(k, times[i]);
    out[i] = acc;
  });
  return out;
}

}  // namespace detail

/// Direct route: phi2(t) = Int <t|p> e^{ip(x2-x1)} phi1(p) dp.
inline ArrivalAmplitude arrival_amplitude(const MomentumWavefunction& state, double x1, double x2,
                                          std::span<const double> times, const Dispersion& d, BranchConfig b,
                                          Execution ex = {}) {
  detail::check_state_branch(state, b);
  detail::check_times(times);
  const double separation = x2 - x1;
  const auto nodes = state.grid().nodes();
  detail::check_arrival_resolution(nodes, state.grid().spacing(), times, separation, d);

  const auto w = state.grid().weights();
  std::vector<complex> coeff(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k)
    coeff[k] = w[k] * std::polar(1.0, nodes[k] * separation) * state.amplitudes()[k];

  auto amps = detail::sum_per_time(times, nodes.size(), ex, [&](std::size_t k, double t) {
    return std::conj(kernel_p_t(nodes[k], t, d, b)) * coeff[k];
  });
  return {x2, x1, {times.begin(), times.end()}, std::move(amps), b};
}

/// Same amplitude through the time basis at x1: inserting |t1,x1><t1,x1| and
/// integrating t1 gives 2 pi delta(E_pm - E_pn); the delta is collapsed
/// analytically with dE_pm = (p_m/E_pm) dp_m, p_m recovered on the branch
/// half-line from E_pn.
inline ArrivalAmplitude arrival_amplitude_via_time_basis(const MomentumWavefunction& state, double x1, double x2,
                                                         std::span<const double> times, const Dispersion& d,
                                                         BranchConfig b, Execution ex = {}) {
  detail::check_state_branch(state, b);
  detail::check_times(times);
  const double separation = x2 - x1;
  const auto nodes = state.grid().nodes();
  detail::check_arrival_resolution(nodes, state.grid().spacing(), times, separation, d);

  const auto w = state.grid().weights();
  std::vector<double> p_m(nodes.size());
  std::vector<complex> coeff(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const double p_n = nodes[n];
    if (p_n == 0.0) continue;  // integrand vanishes as sqrt(p)
    p_m[n] = signum(b.momentum_half_line) * d.momentum(d.energy(p_n));
    // Int dt1 <p_m|t1><t1|p_n> = 2 pi |<p_m|0>| |<p_n|0>| delta(E_m - E_n),
    // and Int dp_m delta(E_m - E_n) = 1 / v(p_m).
    const double overlap = two_pi * std::abs(kernel_p_t(p_m[n], 0.0, d, b)) * std::abs(kernel_p_t(p_n, 0.0, d, b));
    const double collapse = overlap / d.speed(p_m[n]);
    coeff[n] = w[n] * collapse * std::polar(1.0, p_m[n] * separation) * state.amplitudes()[n];
  }

  auto amps = detail::sum_per_time(times, nodes.size(), ex, [&](std::size_t n, double t) -> complex {
    if (p_m[n] == 0.0) return {};
    return std::conj(kernel_p_t(p_m[n], t, d, b)) * coeff[n];
  });
  return {x2, x1, {times.begin(), times.end()}, std::move(amps), b};
}

/// Nonrelativistic limit, E_p -> p^2/2m, kernel sqrt(|p|/m).
inline ArrivalAmplitude nonrel_arrival_amplitude(const MomentumWavefunction& state, double x1, double x2,
                                                 std::span<const double> times, double mass,
                                                 EnergySign sign = EnergySign::Positive, Execution ex = {}) {
  const auto d = Dispersion::nonrelativistic(mass);
  return arrival_amplitude(state, x1, x2, times, d, BranchConfig{sign, state.grid().half_line()}, ex);
}

struct EvenKernelRoutes {
  ArrivalAmplitude route_direct;
  ArrivalAmplitude route_collapsed;
  double l2_discrepancy;
};

/// Both routes for the even kernel sqrt(|p|/2E_p) over the whole p line.
/// Direct: Int <t|p>_even e^{ip(x2-x1)} phi1(p) dp over all p.
/// Collapsed: through the time basis; after the delta collapse the two p_m
/// half-lines (weights +1/2 and -1/2 with reversed orientation) merge into
/// the p_m >= 0 sheet, so each p_n propagates with e^{i|p_n|(x2-x1)}.
inline EvenKernelRoutes even_kernel_arrival_routes(const FullLineWavefunction& state, double x1, double x2,
                                                   std::span<const double> times, const Dispersion& d,
                                                   EnergySign sign = EnergySign::Positive, Execution ex = {}) {
  detail::check_times(times);
  const double separation = x2 - x1;
  const auto nodes = state.nodes();
  detail::check_arrival_resolution(nodes, state.spacing(), times, separation, d);
  const auto w = detail::trapezoid_weights(nodes.size(), state.spacing());
  const BranchConfig label{sign, HalfLine::NonNegative};

  std::vector<complex> direct_coeff(nodes.size()), collapsed_coeff(nodes.size());
  std::vector<double> p_m(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const double p_n = nodes[n];
    direct_coeff[n] = w[n] * std::polar(1.0, p_n * separation) * state.amplitudes()[n];
    if (p_n == 0.0) continue;
    p_m[n] = d.momentum(d.energy(p_n));
    const double ratio = std::abs(kernel_p_t_even(p_n, 0.0, d, sign)) / std::abs(kernel_p_t_even(p_m[n], 0.0, d, sign));
    collapsed_coeff[n] = w[n] * ratio * std::polar(1.0, p_m[n] * separation) * state.amplitudes()[n];
  }

  auto direct = detail::sum_per_time(times, nodes.size(), ex, [&](std::size_t k, double t) {
    return std::conj(kernel_p_t_even(nodes[k], t, d, sign)) * direct_coeff[k];
  });
  auto collapsed = detail::sum_per_time(times, nodes.size(), ex, [&](std::size_t k, double t) -> complex {
    if (p_m[k] == 0.0) return {};
    return std::conj(kernel_p_t_even(p_m[k], t, d, sign)) * collapsed_coeff[k];
  });
  const double disc = detail::relative_l2(times, direct, collapsed);
  std::vector<double> t(times.begin(), times.end());
  return {{x2, x1, t, std::move(direct), label}, {x2, x1, t, std::move(collapsed), label}, disc};
}

/// Relative L2 distance between two amplitudes on the same time grid.
inline double relative_l2_distance(const ArrivalAmplitude& reference, const ArrivalAmplitude& other) {
  if (reference.times != other.times) throw DomainError("amplitudes live on different time grids");
  return detail::relative_l2(reference.times, reference.amplitudes, other.amplitudes);
}

}  // namespace toa

#pragma once

// Conventional time evolution (time as evolution parameter) as a cross-check
// for the arrival distributions: exact free evolution in the momentum
// representation of a periodic position grid, and the probability current
// at a detector.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "toa/detail/numeric.hpp"
#include "toa/dispersion.hpp"
#include "toa/errors.hpp"
#include "toa/pep.hpp"

namespace toa {

class PositionWavefunction {
public:
  PositionWavefunction(std::vector<double> positions, std::vector<complex> amplitudes, double timestamp)
      : positions_(std::move(positions)), amplitudes_(std::move(amplitudes)), timestamp_(timestamp) {
    if (positions_.size() < 3) throw DomainError("position grid needs >= 3 nodes");
    if (positions_.size() != amplitudes_.size()) throw DomainError("amplitude count does not match the grid");
    spacing_ = (positions_.back() - positions_.front()) / static_cast<double>(positions_.size() - 1);
    if (!(spacing_ > 0.0)) throw DomainError("positions must ascend");
    for (std::size_t i = 1; i < positions_.size(); ++i) {
      if (std::abs((positions_[i] - positions_[i - 1]) - spacing_) > 1e-9 * spacing_)
        throw DomainError("positions must be uniformly spaced");
    }
  }

  std::span<const double> positions() const noexcept { return positions_; }
  std::span<const complex> amplitudes() const noexcept { return amplitudes_; }
  double timestamp() const noexcept { return timestamp_; }
  double spacing() const noexcept { return spacing_; }

  double norm() const noexcept {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s * spacing_;
  }

  bool is_normalized(double tol = 1e-6) const noexcept { return std::abs(norm() - 1.0) <= tol; }

  /// <p> = Int Im(psi* dpsi/dx) dx / Int |psi|^2 dx, centered differences.
  double mean_momentum() const noexcept {
    double num = 0.0;
    for (std::size_t i = 1; i + 1 < amplitudes_.size(); ++i) {
      const complex grad = (amplitudes_[i + 1] - amplitudes_[i - 1]) / (2.0 * spacing_);
      num += std::imag(std::conj(amplitudes_[i]) * grad);
    }
    const double n = norm();
    return n == 0.0 ? 0.0 : num * spacing_ / n;
  }

private:
  std::vector<double> positions_;
  std::vector<complex> amplitudes_;
  double timestamp_;
  double spacing_ = 0.0;
};

/// psi(x) = (1/sqrt(2 pi)) Int e^{ip(x - x1)} phi1(p) dp on the given grid.
inline PositionWavefunction position_state_from_momentum(const MomentumWavefunction& state,
                                                         std::vector<double> positions, double x1,
                                                         double timestamp = 0.0, Execution ex = {}) {
  const auto nodes = state.grid().nodes();
  const auto w = state.grid().weights();
  std::vector<complex> coeff(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) coeff[k] = w[k] * inv_sqrt_two_pi * state.amplitudes()[k];
  std::vector<complex> amp(positions.size());
  detail::parallel_for(positions.size(), ex, [&](std::size_t i) {
    complex acc{};
    for (std::size_t k = 0; k < nodes.size(); ++k) acc += std::polar(1.0, nodes[k] * (positions[i] - x1)) * coeff[k];
    amp[i] = acc;
  });
  return {std::move(positions), std::move(amp), timestamp};
}

namespace detail {

inline void check_leakage(std::span<const complex> amp, const char* when) {
  double peak = 0.0;
  for (const auto& a : amp) peak = std::max(peak, std::norm(a));
  const double edge = std::max(std::norm(amp.front()), std::norm(amp.back()));
  if (edge > 1e-6 * peak)
    throw LeakageError(std::string("wave packet reaches the grid boundary ") + when);
}

}  // namespace detail

/// Free evolution to t2 >= timestamp on the branch's energy sign. Both
/// momentum directions of the periodic grid evolve; the half-line of `b`
/// plays no role here.
inline PositionWavefunction evolve_tep(const PositionWavefunction& state, double t2, const Dispersion& d,
                                       BranchConfig b) {
  if (t2 < state.timestamp()) throw ContractViolation("evolve_tep runs forward: t2 < timestamp");
  detail::check_leakage(state.amplitudes(), "before evolution");
  if (t2 == state.timestamp()) return state;

  const std::size_t n = state.amplitudes().size();
  std::vector<complex> input(state.amplitudes().begin(), state.amplitudes().end());
  std::vector<complex> spectrum;
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, input);

  const double dt = t2 - state.timestamp();
  const double dk = two_pi / (static_cast<double>(n) * state.spacing());
  const double sign = signum(b.energy_sign);
  for (std::size_t j = 0; j < n; ++j) {
    const double index = j < (n + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
    const double k = index * dk;
    spectrum[j] *= std::polar(1.0, -sign * d.energy(k).value() * dt);
  }

  std::vector<complex> output;
  fft.inv(output, spectrum);
  detail::check_leakage(output, "after evolution");
  return {std::vector<double>(state.positions().begin(), state.positions().end()), std::move(output), t2};
}

/// J(x) = Im(psi* dpsi/dx) / M with centered differences, linearly
/// interpolated between nodes. M = m (nonrelativistic) or E at the state's
/// mean momentum (relativistic, quasi-monochromatic approximation).
inline double probability_current(const PositionWavefunction& state, double x, const Dispersion& d) {
  const auto pos = state.positions();
  const auto amp = state.amplitudes();
  const std::size_t n = pos.size();
  if (!(x >= pos[1] && x <= pos[n - 2])) throw DomainError("current requested outside the grid interior");

  const double inertia =
      d.regime() == Regime::Nonrelativistic ? d.mass() : d.energy(state.mean_momentum()).value();
  if (!(inertia > 0.0)) throw DomainError("current needs a nonzero energy scale");

  auto node_current = [&](std::size_t i) {
    const complex grad = (amp[i + 1] - amp[i - 1]) / (2.0 * state.spacing());
    return std::imag(std::conj(amp[i]) * grad) / inertia;
  };
  auto i = static_cast<std::size_t>(std::floor((x - pos[0]) / state.spacing()));
  i = std::clamp<std::size_t>(i, 1, n - 3);
  const double frac = (x - pos[i]) / state.spacing();
  if (frac == 0.0) return node_current(i);
  return (1.0 - frac) * node_current(i) + frac * node_current(i + 1);
}

struct CrosscheckReport {
  std::vector<double> times;
  std::vector<double> arrival_density;  ///< normalized |phi2|^2
  std::vector<double> current;          ///< normalized J(x2, t)
  double l1_distance = 0.0;
  double raw_current_integral = 0.0;  ///< Int J dt before normalization
  double sigma_ratio = 0.0;           ///< sigma_p / p0 of the input state
};

/// Position grid for a crosscheck: wide enough to hold the packet over the
/// whole window, fine enough for centered differences at the top momentum.
inline std::vector<double> crosscheck_position_grid(const MomentumWavefunction& state, double x1,
                                                    std::span<const double> window, const Dispersion& d) {
  const auto [p0, sigma_p] = state.momentum_moments();
  const auto nodes = state.grid().nodes();
  const double p_top = std::max(std::abs(nodes.front()), std::abs(nodes.back()));
  double v_min = d.speed(p0), v_max = d.speed(p0);
  for (double p : {p0 - 8.0 * sigma_p, p0 + 8.0 * sigma_p}) {
    v_min = std::min(v_min, d.speed(p));
    v_max = std::max(v_max, d.speed(p));
  }
  const double t_max = std::max(std::abs(window.front()), std::abs(window.back()));
  const double sigma_x = 1.0 / (2.0 * sigma_p) + (v_max - v_min) * t_max;
  const double lo = x1 - 14.0 * sigma_x;
  const double hi = x1 + v_max * t_max + 14.0 * sigma_x;
  const double dx_target = std::min(std::numbers::pi / (8.0 * p_top), sigma_x / 8.0);
  std::size_t n = 256;
  while ((hi - lo) / static_cast<double>(n - 1) > dx_target) n *= 2;
  return detail::linspace(lo, hi, n);
}

/// Builds the TEP packet from the same phi1(p), records J(x2, t) over the
/// window, normalizes it and the PEP arrival density to unit mass and
/// returns their L1 distance.
inline CrosscheckReport crosscheck_arrival_vs_current(const MomentumWavefunction& state, double x1, double x2,
                                                      std::span<const double> window, const Dispersion& d,
                                                      Execution ex = {}) {
  if (state.grid().size() < 2) throw ContractViolation("crosscheck needs a normalizable wave packet, not an eigenstate");
  if (state.grid().half_line() != HalfLine::NonNegative) throw ContractViolation("crosscheck needs a right-moving state");
  if (!(x2 > x1)) throw ContractViolation("crosscheck needs the detector downstream: x2 > x1");
  const auto [p0, sigma_p] = state.momentum_moments();
  if (!(p0 > 0.0) || sigma_p / p0 > 0.1) throw ContractViolation("crosscheck needs sigma_p / p0 <= 0.1");
  detail::check_times(window);
  if (window.size() < 2 || window.front() < 0.0) throw ContractViolation("crosscheck window must start at t >= 0");

  const BranchConfig branch{EnergySign::Positive, HalfLine::NonNegative};
  const auto pep = arrival_distribution(arrival_amplitude(state, x1, x2, window, d, branch, ex));

  const auto psi0 = position_state_from_momentum(state, crosscheck_position_grid(state, x1, window, d), x1, 0.0, ex);
  std::vector<double> current(window.size());
  detail::parallel_for(window.size(), ex, [&](std::size_t i) {
    current[i] = probability_current(evolve_tep(psi0, window[i], d, branch), x2, d);
  });

  CrosscheckReport r;
  r.times.assign(window.begin(), window.end());
  r.sigma_ratio = sigma_p / p0;
  r.raw_current_integral = detail::trapezoid(r.times, current);
  if (!(pep.total_mass > 0.0) || !(r.raw_current_integral > 0.0))
    throw ResolutionError("window holds no arrival mass; widen it");
  r.arrival_density = pep.density;
  r.current = current;
  std::vector<double> gap(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    r.arrival_density[i] /= pep.total_mass;
    r.current[i] /= r.raw_current_integral;
    gap[i] = std::abs(r.arrival_density[i] - r.current[i]);
  }
  r.l1_distance = detail::trapezoid(r.times, gap);
  return r;
}

}  // namespace toa

#pragma once

// Smeared-delta validation of <t|t'> = delta(t - t') and <x|x'> = delta(x - x').
//
// A distributional identity K = delta is checked by applying K to a smooth
// Gaussian test function f and measuring ||K f - f|| / ||f|| as the spectral
// cutoff grows. The spectral integral is a uniform trapezoid in E (time check)
// or p_E (position check); in those variables the Jacobian cancels the
// sqrt(p/E_p) and sqrt(E/p_E) factors, so the threshold node stays finite.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "toa/detail/numeric.hpp"
#include "toa/dispersion.hpp"
#include "toa/errors.hpp"

namespace toa {

struct GaussianTestFunction {
  double center = 0.0;
  double width = 1.0;

  double operator()(double t) const noexcept {
    const double u = (t - center) / width;
    return std::exp(-0.5 * u * u);
  }
};

struct SmearingTest {
  GaussianTestFunction gaussian;
  std::vector<double> cutoffs;
  std::size_t resolution = 4096;  ///< spectral quadrature nodes per cutoff
};

struct CutoffError {
  double cutoff;
  double error;
};

struct OrthogonalityReport {
  std::string check;
  std::string branch;  ///< "E<sign>/p<sign>", or a control label
  std::vector<CutoffError> cutoff_sequence;  ///< ascending in cutoff
  double reproduction_error = 0.0;           ///< error at the largest cutoff

  std::vector<double> cutoffs() const {
    std::vector<double> out;
    for (const auto& c : cutoff_sequence) out.push_back(c.cutoff);
    return out;
  }
  std::vector<double> errors() const {
    std::vector<double> out;
    for (const auto& c : cutoff_sequence) out.push_back(c.error);
    return out;
  }
};

/// Errors non-increasing along the cutoff sequence, up to a relative jitter.
/// Values below `floor` count as converged to rounding level and compare equal.
inline bool is_monotone_nonincreasing(const OrthogonalityReport& r, double jitter = 0.05,
                                      double floor = 1e-12) {
  for (std::size_t i = 1; i < r.cutoff_sequence.size(); ++i) {
    const double prev = std::max(r.cutoff_sequence[i - 1].error, floor);
    const double cur = std::max(r.cutoff_sequence[i].error, floor);
    if (cur > prev * (1.0 + jitter)) return false;
  }
  return true;
}

namespace detail {

inline constexpr double smearing_half_window = 12.0;  // in Gaussian widths

inline void validate(const SmearingTest& s) {
  if (!(s.gaussian.width > 0.0) || !std::isfinite(s.gaussian.width) || !std::isfinite(s.gaussian.center))
    throw ResolutionError("test function width must be positive and finite");
  if (s.cutoffs.empty()) throw DomainError("at least one cutoff is required");
  if (s.resolution < 2) throw ResolutionError("spectral resolution must be >= 2 nodes");
  for (double c : s.cutoffs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("cutoffs must be positive and finite");
    if (c * s.gaussian.width < 1.0)
      throw ResolutionError("under-resolved smearing test: cutoff * width < 1");
  }
}

/// One branch of a spectral integral: `amplitude(k, t)` is the kernel at
/// spectral node k in the measure of the integration variable, and
/// `orientation` is +1 or -1 from how the branch maps onto that variable.
struct Sheet {
  std::vector<double> momenta;   // p at each node (signed)
  std::vector<double> energies;  // E at each node (signed)
  double orientation = 1.0;
};

template <typename Amplitude>
std::vector<complex> apply_spectral_kernel(std::span<const double> t, std::span<const double> f,
                                           std::span<const double> weights,
                                           const std::vector<Sheet>& sheets, Amplitude&& amplitude) {
  const double dt = t.size() >= 2 ? t[1] - t[0] : 1.0;
  std::vector<complex> g(t.size(), complex{});
  std::vector<complex> a(t.size());
  for (const Sheet& sheet : sheets) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      complex projection{};
      for (std::size_t j = 0; j < t.size(); ++j) {
        a[j] = amplitude(sheet, k, t[j]);
        projection += a[j] * (f[j] * dt);
      }
      const complex scaled = projection * (weights[k] * sheet.orientation);
      for (std::size_t i = 0; i < t.size(); ++i) g[i] += std::conj(a[i]) * scaled;
    }
  }
  return g;
}

struct SampledTestFunction {
  std::vector<double> t;
  std::vector<double> f;
};

inline SampledTestFunction sample_test_function(const GaussianTestFunction& g, double max_frequency) {
  const double half = smearing_half_window * g.width;
  const double h = std::min(std::numbers::pi / (2.0 * max_frequency), g.width / 4.0);
  const auto half_nodes = static_cast<std::size_t>(std::ceil(half / h));
  SampledTestFunction out;
  const std::size_t n = 2 * half_nodes + 1;
  out.t.resize(n);
  out.f.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.t[j] = g.center + (static_cast<double>(j) - static_cast<double>(half_nodes)) * h;
    out.f[j] = g(out.t[j]);
  }
  return out;
}

inline double relative_error(std::span<const double> f, std::span<const complex> g) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += std::norm(g[i] - f[i]);
    den += f[i] * f[i];
  }
  return std::sqrt(num / den);
}

inline void check_nyquist(double spectral_step, std::span<const double> t) {
  const double span = t.back() - t.front();
  if (spectral_step * span > std::numbers::pi)
    throw ResolutionError("Nyquist violation: spectral step * window > pi; raise the resolution");
}

enum class TimeKernel { Restricted, SignedFullLine, EvenFullLine };

inline double time_reproduction_error(const Dispersion& d, BranchConfig b, const SmearingTest& s,
                                      double cutoff, TimeKernel kind) {
  const double e_lo = d.threshold();
  const double e_hi = d.energy(cutoff).value();
  const auto energies = linspace(e_lo, e_hi, s.resolution);
  const double step = energies[1] - energies[0];
  const auto sampled = sample_test_function(s.gaussian, e_hi);
  check_nyquist(step, sampled.t);
  const auto weights = trapezoid_weights(s.resolution, step);

  auto make_sheet = [&](HalfLine h, double orientation) {
    Sheet sheet;
    sheet.orientation = orientation;
    for (double e : energies) {
      sheet.momenta.push_back(signum(h) * d.momentum(e));
      sheet.energies.push_back(e);
    }
    return sheet;
  };

  std::vector<Sheet> half_lines;
  switch (kind) {
    case TimeKernel::Restricted:
      half_lines.push_back(make_sheet(b.momentum_half_line, 1.0));
      break;
    case TimeKernel::SignedFullLine:
      // p/E_p carries the sign of p, so the p < 0 half enters with -1.
      half_lines.push_back(make_sheet(HalfLine::NonNegative, 1.0));
      half_lines.push_back(make_sheet(HalfLine::NonPositive, -1.0));
      break;
    case TimeKernel::EvenFullLine:
      half_lines.push_back(make_sheet(HalfLine::NonNegative, 1.0));
      half_lines.push_back(make_sheet(HalfLine::NonPositive, 1.0));
      break;
  }

  // Both energy signs of every momentum contribute (the sign of p does not
  // fix the sign of E_p); the branch's own sign goes first.
  std::vector<complex> g(sampled.t.size(), complex{});
  for (EnergySign sign : {b.energy_sign, flipped(b.energy_sign)}) {
    const BranchConfig positive_p{sign, HalfLine::NonNegative};
    const BranchConfig negative_p{sign, HalfLine::NonPositive};
    auto amplitude = [&](const Sheet& sheet, std::size_t k, double t) -> complex {
      const double p = sheet.momenta[k];
      const double full = kind == TimeKernel::EvenFullLine ? std::sqrt(0.5) : 1.0;
      if (p == 0.0) return std::polar(inv_sqrt_two_pi * full, signum(sign) * sheet.energies[k] * t);
      const double sqrt_jacobian = 1.0 / std::sqrt(d.speed(p));
      if (kind == TimeKernel::EvenFullLine) return kernel_p_t_even(p, t, d, sign) * sqrt_jacobian;
      return kernel_p_t(p, t, d, p > 0.0 ? positive_p : negative_p) * sqrt_jacobian;
    };
    const auto part = apply_spectral_kernel(sampled.t, sampled.f, weights, half_lines, amplitude);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += part[i];
  }
  return relative_error(sampled.f, g);
}

inline double position_reproduction_error(const Dispersion& d, BranchConfig b, const SmearingTest& s,
                                          double cutoff, bool unrestricted) {
  if (!(cutoff > d.threshold())) throw DomainError("energy cutoff must exceed the threshold energy");
  const double p_hi = d.momentum(cutoff);
  const auto momenta = linspace(0.0, p_hi, s.resolution);
  const double step = momenta[1] - momenta[0];
  const auto sampled = sample_test_function(s.gaussian, p_hi);
  check_nyquist(step, sampled.t);
  const auto weights = trapezoid_weights(s.resolution, step);

  auto make_sheet = [&](EnergySign sign, double orientation) {
    Sheet sheet;
    sheet.orientation = orientation;
    for (double p : momenta) {
      sheet.momenta.push_back(p);
      sheet.energies.push_back(signum(sign) * d.energy(p).value());
    }
    return sheet;
  };

  std::vector<Sheet> energy_sheets;
  energy_sheets.push_back(make_sheet(b.energy_sign, 1.0));
  if (unrestricted) {
    // E/p_E is odd in E: the opposite energy sign enters with -1.
    energy_sheets.push_back(make_sheet(flipped(b.energy_sign), -1.0));
  }

  // Both momentum directions belong to every energy (the sign of E does
  // not fix the sign of p_E); the branch's own direction goes first.
  std::vector<complex> g(sampled.t.size(), complex{});
  for (HalfLine direction : {b.momentum_half_line, flipped(b.momentum_half_line)}) {
    auto amplitude = [&](const Sheet& sheet, std::size_t k, double x) -> complex {
      const double p = sheet.momenta[k];
      const double e = sheet.energies[k];
      if (p == 0.0 || std::abs(e) <= d.threshold()) return {inv_sqrt_two_pi, 0.0};
      const BranchConfig branch{e > 0.0 ? EnergySign::Positive : EnergySign::Negative, direction};
      // <E|x> in the p_E measure.
      return std::conj(kernel_x_E(x, e, d, branch)) * std::sqrt(d.speed(p));
    };
    const auto part = apply_spectral_kernel(sampled.t, sampled.f, weights, energy_sheets, amplitude);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += part[i];
  }
  return relative_error(sampled.f, g);
}

inline std::string branch_label(BranchConfig b) {
  return "E" + to_string(b.energy_sign) + "/p" + to_string(b.momentum_half_line);
}

template <typename PerCutoff>
OrthogonalityReport run_cutoff_sequence(std::string check, std::string branch, const SmearingTest& s,
                                        Execution ex, PerCutoff&& per_cutoff) {
  validate(s);
  std::vector<double> cutoffs = s.cutoffs;
  std::sort(cutoffs.begin(), cutoffs.end());
  std::vector<double> errors(cutoffs.size());
  parallel_for(cutoffs.size(), ex, [&](std::size_t i) { errors[i] = per_cutoff(cutoffs[i]); });
  OrthogonalityReport report{std::move(check), std::move(branch), {}, errors.back()};
  for (std::size_t i = 0; i < cutoffs.size(); ++i) report.cutoff_sequence.push_back({cutoffs[i], errors[i]});
  return report;
}

}  // namespace detail

/// <t|t'> from <p|t> on the branch's momentum half-line, cutoff in |p|.
inline OrthogonalityReport check_time_orthogonality(const Dispersion& d, BranchConfig b, const SmearingTest& s,
                                                    Execution ex = {}) {
  return detail::run_cutoff_sequence("time", detail::branch_label(b), s, ex, [&](double cutoff) {
    return detail::time_reproduction_error(d, b, s, cutoff, detail::TimeKernel::Restricted);
  });
}

/// Control: <p|t> integrated over both momentum half-lines with the signed
/// weight p/E_p. The halves cancel, so this must not converge.
inline OrthogonalityReport check_time_orthogonality_unrestricted(const Dispersion& d, const SmearingTest& s,
                                                                 Execution ex = {}) {
  const BranchConfig b{EnergySign::Positive, HalfLine::NonNegative};
  return detail::run_cutoff_sequence("time", "unrestricted-p", s, ex, [&](double cutoff) {
    return detail::time_reproduction_error(d, b, s, cutoff, detail::TimeKernel::SignedFullLine);
  });
}

/// <x|x'> from <x|E> on the branch's energy sign, cutoff in |E|.
inline OrthogonalityReport check_position_orthogonality(const Dispersion& d, BranchConfig b,
                                                        const SmearingTest& s, Execution ex = {}) {
  return detail::run_cutoff_sequence("position", detail::branch_label(b), s, ex, [&](double cutoff) {
    return detail::position_reproduction_error(d, b, s, cutoff, false);
  });
}

/// Control: <x|E> integrated over both energy signs with the signed weight
/// E/p_E. Must not converge.
inline OrthogonalityReport check_position_orthogonality_unrestricted(const Dispersion& d, const SmearingTest& s,
                                                                     Execution ex = {}) {
  const BranchConfig b{EnergySign::Positive, HalfLine::NonNegative};
  return detail::run_cutoff_sequence("position", "unrestricted-E", s, ex, [&](double cutoff) {
    return detail::position_reproduction_error(d, b, s, cutoff, true);
  });
}

/// <t|t'> from the even kernel sqrt(|p|/2E_p) over the whole momentum line.
inline OrthogonalityReport check_even_kernel_orthogonality(const Dispersion& d, const SmearingTest& s,
                                                           Execution ex = {}) {
  const BranchConfig b{EnergySign::Positive, HalfLine::NonNegative};
  return detail::run_cutoff_sequence("even-kernel", "full-line", s, ex, [&](double cutoff) {
    return detail::time_reproduction_error(d, b, s, cutoff, detail::TimeKernel::EvenFullLine);
  });
}

}  // namespace toa

#pragma once

// On-shell dispersion relations and the elementary transition kernels
// <p|t>, <x|E> and the even-in-p variant of <p|t>.
//
// Natural units throughout: hbar = c = 1.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "toa/detail/numeric.hpp"
#include "toa/errors.hpp"

namespace toa {

enum class Regime { Relativistic, Nonrelativistic };
enum class EnergySign { Positive, Negative };
enum class HalfLine { NonNegative, NonPositive };

constexpr double signum(EnergySign s) noexcept { return s == EnergySign::Positive ? 1.0 : -1.0; }
constexpr double signum(HalfLine h) noexcept { return h == HalfLine::NonNegative ? 1.0 : -1.0; }

constexpr EnergySign flipped(EnergySign s) noexcept {
  return s == EnergySign::Positive ? EnergySign::Negative : EnergySign::Positive;
}
constexpr HalfLine flipped(HalfLine h) noexcept {
  return h == HalfLine::NonNegative ? HalfLine::NonPositive : HalfLine::NonNegative;
}

inline std::string to_string(EnergySign s) { return s == EnergySign::Positive ? "pos" : "neg"; }
inline std::string to_string(HalfLine h) { return h == HalfLine::NonNegative ? "pos" : "neg"; }
inline std::string to_string(Regime r) { return r == Regime::Relativistic ? "rel" : "nonrel"; }

/// Energy-sign branch and momentum half-line. There is deliberately no
/// default: every kernel evaluation names its branch.
struct BranchConfig {
  constexpr BranchConfig(EnergySign energy, HalfLine momentum) noexcept
      : energy_sign(energy), momentum_half_line(momentum) {}

  EnergySign energy_sign;
  HalfLine momentum_half_line;

  /// True if `p` lies on the momentum half-line (zero belongs to both).
  constexpr bool contains(double p) const noexcept {
    return momentum_half_line == HalfLine::NonNegative ? p >= 0.0 : p <= 0.0;
  }

  friend constexpr bool operator==(const BranchConfig&, const BranchConfig&) = default;
};

/// An on-shell energy that also remembers its kinetic part |E| - rest energy.
/// Converting back to a momentum through the kinetic part keeps the round
/// trip exact to a few ulps even when p << m, where E itself has already
/// rounded p away.
class Energy {
public:
  constexpr Energy(double total, double kinetic) noexcept : total_(total), kinetic_(kinetic) {}

  constexpr double value() const noexcept { return total_; }
  constexpr double kinetic() const noexcept { return kinetic_; }
  constexpr operator double() const noexcept { return total_; }

private:
  double total_;
  double kinetic_;
};

class Dispersion {
public:
  explicit Dispersion(double mass, Regime regime = Regime::Relativistic) : mass_(mass), regime_(regime) {
    if (!std::isfinite(mass) || mass < 0.0) throw DomainError("mass must be finite and >= 0");
    if (regime == Regime::Nonrelativistic && mass == 0.0)
      throw DomainError("nonrelativistic dispersion needs mass > 0");
  }

  static Dispersion relativistic(double mass) { return Dispersion(mass, Regime::Relativistic); }
  static Dispersion nonrelativistic(double mass) { return Dispersion(mass, Regime::Nonrelativistic); }

  double mass() const noexcept { return mass_; }
  Regime regime() const noexcept { return regime_; }

  /// Lowest |E| reachable on shell: m (relativistic) or 0 (nonrelativistic,
  /// rest energy removed).
  double threshold() const noexcept { return regime_ == Regime::Relativistic ? mass_ : 0.0; }

  Energy energy(double p) const noexcept {
    if (regime_ == Regime::Nonrelativistic) {
      const double e = p * p / (2.0 * mass_);
      return {e, e};
    }
    const double total = std::hypot(p, mass_);
    const double kinetic = total == 0.0 ? 0.0 : p * p / (total + mass_);
    return {total, kinetic};
  }

  /// |p| for a bare energy value. Relativistic energies may carry either
  /// sign; |E| inside the gap (-m, m) is rejected.
  double momentum(double e) const {
    if (regime_ == Regime::Nonrelativistic) {
      if (e < 0.0) throw DomainError("nonrelativistic energy must be >= 0");
      return std::sqrt(2.0 * mass_ * e);
    }
    const double a = std::abs(e);
    if (a < mass_) throw DomainError("energy inside the forbidden gap (-m, m)");
    return std::sqrt((a - mass_) * (a + mass_));
  }

  double momentum(Energy e) const {
    const double t = e.kinetic();
    if (t < 0.0) throw DomainError("negative kinetic energy");
    if (regime_ == Regime::Nonrelativistic) return std::sqrt(2.0 * mass_ * t);
    return std::sqrt(t * (t + 2.0 * mass_));
  }

  /// Group speed |dE/dp|. Zero at p = 0 (also for m = 0, matching the
  /// vanishing of the <p|t> kernel there).
  double speed(double p) const noexcept {
    if (p == 0.0) return 0.0;
    if (regime_ == Regime::Nonrelativistic) return std::abs(p) / mass_;
    return std::abs(p) / std::hypot(p, mass_);
  }

private:
  double mass_;
  Regime regime_;
};

inline Energy energy_of_momentum(double p, const Dispersion& d) noexcept { return d.energy(p); }
inline double momentum_of_energy(double e, const Dispersion& d) { return d.momentum(e); }
inline double momentum_of_energy(Energy e, const Dispersion& d) { return d.momentum(e); }

/// <p|t> = (1/sqrt(2 pi)) sqrt(|p|/E_p) exp(+/- i E_p t), sign from the
/// energy branch. Nonrelativistic: sqrt(|p|/m) exp(+/- i p^2 t / 2m).
inline complex kernel_p_t(double p, double t, const Dispersion& d, BranchConfig b) {
  if (!b.contains(p)) throw ContractViolation("momentum not on the branch half-line");
  if (p == 0.0) return {0.0, 0.0};
  const double modulus = std::sqrt(d.speed(p)) * inv_sqrt_two_pi;
  return std::polar(modulus, signum(b.energy_sign) * d.energy(p).value() * t);
}

/// <x|E> = (1/sqrt(2 pi)) sqrt(|E|/p_E) exp(+/- i p_E x), sign from the
/// momentum branch. Diverges at the threshold, which is reported rather
/// than returned.
inline complex kernel_x_E(double x, double e, const Dispersion& d, BranchConfig b) {
  const double a = std::abs(e);
  if (!(a > d.threshold())) throw DomainError("|E| must exceed the threshold energy");
  if ((e > 0.0) != (b.energy_sign == EnergySign::Positive))
    throw ContractViolation("energy sign does not match the branch");
  const double p = d.momentum(a);
  const double modulus = inv_sqrt_two_pi / std::sqrt(d.speed(p));
  return std::polar(modulus, signum(b.momentum_half_line) * p * x);
}

/// Even-in-p alternative (1/sqrt(2 pi)) sqrt(|p|/2E_p) exp(+/- i E_p t),
/// defined on the whole momentum line.
inline complex kernel_p_t_even(double p, double t, const Dispersion& d, EnergySign sign) noexcept {
  if (p == 0.0) return {0.0, 0.0};
  const double modulus = std::sqrt(0.5 * d.speed(p)) * inv_sqrt_two_pi;
  return std::polar(modulus, signum(sign) * d.energy(p).value() * t);
}

struct KernelSample {
  complex value;
  double argument;
};

/// <p|t> tabulated over a set of times.
inline std::vector<KernelSample> sample_kernel_p_t(double p, std::span<const double> times,
                                                   const Dispersion& d, BranchConfig b) {
  std::vector<KernelSample> out;
  out.reserve(times.size());
  for (double t : times) out.push_back({kernel_p_t(p, t, d, b), t});
  return out;
}

/// <x|E> tabulated over a set of positions.
inline std::vector<KernelSample> sample_kernel_x_E(double e, std::span<const double> positions,
                                                   const Dispersion& d, BranchConfig b) {
  std::vector<KernelSample> out;
  out.reserve(positions.size());
  for (double x : positions) out.push_back({kernel_x_E(x, e, d, b), x});
  return out;
}

}  // namespace toa

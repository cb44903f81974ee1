#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "toa/dispersion.hpp"

using namespace toa;
using Catch::Approx;

namespace {

const BranchConfig pos_pos{EnergySign::Positive, HalfLine::NonNegative};
const BranchConfig neg_pos{EnergySign::Negative, HalfLine::NonNegative};
const BranchConfig pos_neg{EnergySign::Positive, HalfLine::NonPositive};

const double inv_root_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double wrap(double phase) { return std::remainder(phase, 2.0 * std::numbers::pi); }

}  // namespace

TEST_CASE("energy of momentum on closed-form points", "[dispersion]") {
  CHECK(energy_of_momentum(0.0, Dispersion::relativistic(1.0)).value() == 1.0);
  CHECK(energy_of_momentum(3.0, Dispersion::relativistic(4.0)).value() == Approx(5.0).epsilon(1e-15));
  CHECK(energy_of_momentum(2.0, Dispersion::nonrelativistic(1.0)).value() == Approx(2.0).epsilon(1e-15));
  CHECK(energy_of_momentum(0.0, Dispersion::nonrelativistic(3.0)).value() == 0.0);
}

TEST_CASE("momentum of energy on closed-form points", "[dispersion]") {
  const auto d1 = Dispersion::relativistic(1.0);
  CHECK(momentum_of_energy(1.0, d1) == 0.0);
  CHECK(momentum_of_energy(5.0, Dispersion::relativistic(4.0)) == Approx(3.0).epsilon(1e-15));
  CHECK(momentum_of_energy(-5.0, Dispersion::relativistic(4.0)) == Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(momentum_of_energy(0.5, d1), DomainError);
  CHECK_THROWS_AS(momentum_of_energy(-0.5, d1), DomainError);
}

TEST_CASE("dispersion rejects unphysical masses", "[dispersion]") {
  CHECK_THROWS_AS(Dispersion::relativistic(-1.0), DomainError);
  CHECK_THROWS_AS(Dispersion::nonrelativistic(0.0), DomainError);
  CHECK_NOTHROW(Dispersion::relativistic(0.0));
}

TEST_CASE("energy is even and strictly increasing in |p|", "[dispersion][property]") {
  for (double m : {0.0, 1.0, 10.0}) {
    const auto d = Dispersion::relativistic(m);
    double prev = -1.0;
    for (double p = 0.0; p < 50.0; p += 0.37) {
      const double e = d.energy(p).value();
      CHECK(e == d.energy(-p).value());
      CHECK(e > prev);
      prev = e;
    }
  }
}

TEST_CASE("momentum -> energy -> momentum round trip", "[dispersion][property]") {
  for (double m : {0.0, 1.0, 10.0}) {
    for (const auto regime : {Regime::Relativistic, Regime::Nonrelativistic}) {
      if (regime == Regime::Nonrelativistic && m == 0.0) continue;
      const Dispersion d(m, regime);
      for (int k = 0; k <= 90; ++k) {
        const double p = std::pow(10.0, -6.0 + 9.0 * k / 90.0);
        INFO("m=" << m << " p=" << p << " regime=" << to_string(regime));
        CHECK(momentum_of_energy(energy_of_momentum(p, d), d) == Approx(p).epsilon(1e-12));
        CHECK(momentum_of_energy(energy_of_momentum(-p, d), d) == Approx(p).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("branch config is explicit and compares by value", "[dispersion]") {
  CHECK(pos_pos == BranchConfig(EnergySign::Positive, HalfLine::NonNegative));
  CHECK_FALSE(pos_pos == neg_pos);
  CHECK(pos_pos.contains(0.0));
  CHECK(pos_neg.contains(0.0));
  CHECK_FALSE(pos_pos.contains(-1e-300));
  CHECK_FALSE(pos_neg.contains(1e-300));
}

TEST_CASE("<p|t> closed-form values", "[dispersion][kernel]") {
  CHECK(kernel_p_t(0.0, 3.7, Dispersion::relativistic(1.0), pos_pos) == complex{0.0, 0.0});

  const auto k = kernel_p_t(1.0, 0.0, Dispersion::relativistic(0.0), pos_pos);
  CHECK(k.real() == Approx(inv_root_2pi).epsilon(1e-14));
  CHECK(k.imag() == 0.0);
  CHECK(inv_root_2pi == Approx(0.39894).margin(5e-6));

  const auto d = Dispersion::relativistic(4.0);
  const double modulus = std::sqrt(3.0 / 5.0) * inv_root_2pi;
  CHECK(modulus == Approx(0.30902).margin(5e-6));
  const auto up = kernel_p_t(3.0, 0.7, d, pos_pos);
  const auto down = kernel_p_t(3.0, 0.7, d, neg_pos);
  CHECK(std::abs(up) == Approx(modulus).epsilon(1e-12));
  CHECK(std::abs(down) == Approx(modulus).epsilon(1e-12));
  CHECK(wrap(std::arg(up) - 3.5) == Approx(0.0).margin(1e-12));
  CHECK(wrap(std::arg(down) + 3.5) == Approx(0.0).margin(1e-12));
}

TEST_CASE("<p|t> rejects momenta off the half-line", "[dispersion][kernel]") {
  const auto d = Dispersion::relativistic(1.0);
  CHECK_THROWS_AS(kernel_p_t(-1.0, 0.0, d, pos_pos), ContractViolation);
  CHECK_THROWS_AS(kernel_p_t(1.0, 0.0, d, pos_neg), ContractViolation);
  CHECK_NOTHROW(kernel_p_t(-1.0, 0.0, d, pos_neg));
}

TEST_CASE("<x|E> closed-form values", "[dispersion][kernel]") {
  const auto d = Dispersion::relativistic(4.0);
  const auto k = kernel_x_E(0.0, 5.0, d, pos_pos);
  const double expected = std::sqrt(5.0 / 3.0) * inv_root_2pi;
  CHECK(expected == Approx(0.51503).margin(5e-6));
  CHECK(k.real() == Approx(expected).epsilon(1e-12));
  CHECK(k.imag() == 0.0);

  const auto massless = Dispersion::relativistic(0.0);
  for (double x : {-7.0, 0.3, 11.0})
    CHECK(std::abs(kernel_x_E(x, 5.0, massless, pos_pos)) == Approx(inv_root_2pi).epsilon(1e-14));

  CHECK_THROWS_AS(kernel_x_E(0.0, 4.0, d, pos_pos), DomainError);
  CHECK_THROWS_AS(kernel_x_E(0.0, 3.0, d, pos_pos), DomainError);
  CHECK_THROWS_AS(kernel_x_E(0.0, 5.0, d, neg_pos), ContractViolation);
  CHECK_NOTHROW(kernel_x_E(0.0, -5.0, d, neg_pos));
}

TEST_CASE("<x|E> phase follows the momentum half-line", "[dispersion][kernel]") {
  const auto d = Dispersion::relativistic(4.0);
  const auto right = kernel_x_E(0.9, 5.0, d, pos_pos);
  const auto left = kernel_x_E(0.9, 5.0, d, pos_neg);
  CHECK(wrap(std::arg(right) - 2.7) == Approx(0.0).margin(1e-12));
  CHECK(wrap(std::arg(left) + 2.7) == Approx(0.0).margin(1e-12));
}

TEST_CASE("even kernel closed-form values", "[dispersion][kernel]") {
  const auto d = Dispersion::relativistic(4.0);
  CHECK(kernel_p_t_even(0.0, 2.0, d, EnergySign::Positive) == complex{0.0, 0.0});
  const double half_root_pi = 0.5 / std::sqrt(std::numbers::pi);
  for (double p : {-1.0, 1.0})
    CHECK(std::abs(kernel_p_t_even(p, 0.0, Dispersion::relativistic(0.0), EnergySign::Positive)) ==
          Approx(half_root_pi).epsilon(1e-14));
  const double expected = std::sqrt(3.0 / 10.0) * inv_root_2pi;
  CHECK(expected == Approx(0.21851).margin(5e-6));
  CHECK(kernel_p_t_even(3.0, 0.0, d, EnergySign::Positive).real() == Approx(expected).epsilon(1e-12));
}

TEST_CASE("kernel modulus law and conjugation", "[dispersion][kernel][property]") {
  for (double m : {0.0, 1.0, 10.0}) {
    const auto d = Dispersion::relativistic(m);
    for (double p = 0.01; p < 30.0; p *= 1.7) {
      for (double t : {-40.0, -1.3, 0.0, 0.25, 17.0}) {
        const auto k = kernel_p_t(p, t, d, pos_pos);
        CHECK(std::norm(k) * 2.0 * std::numbers::pi * d.energy(p).value() / p == Approx(1.0).epsilon(1e-12));
        CHECK(kernel_p_t(p, -t, d, pos_pos) == std::conj(k));
        CHECK(kernel_p_t_even(-p, t, d, EnergySign::Positive) == kernel_p_t_even(p, t, d, EnergySign::Positive));
      }
    }
  }
}

TEST_CASE("nonrelativistic kernel is the low-momentum limit", "[dispersion][kernel][property]") {
  const double m = 1.0, p = 1e-3;
  const auto rel = Dispersion::relativistic(m);
  const auto nonrel = Dispersion::nonrelativistic(m);
  for (double t : {1.0, 10.0, 100.0, 1000.0}) {
    const complex rest = std::polar(1.0, -m * t);
    const auto a = kernel_p_t(p, t, rel, pos_pos) * rest;
    const auto b = kernel_p_t(p, t, nonrel, pos_pos);
    const double phase_gap = std::abs(wrap(std::arg(a) - std::arg(b)));
    INFO("t=" << t);
    CHECK(phase_gap <= std::pow(p / m, 4) * m * t + 1e-12);
  }
}

TEST_CASE("kernel tables carry their arguments", "[dispersion][kernel]") {
  const auto d = Dispersion::relativistic(1.0);
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto table = sample_kernel_p_t(2.0, times, d, pos_pos);
  REQUIRE(table.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(table[i].argument == times[i]);
    CHECK(table[i].value == kernel_p_t(2.0, times[i], d, pos_pos));
  }
  const auto xs = sample_kernel_x_E(2.0, times, d, pos_pos);
  CHECK(xs.back().value == kernel_x_E(1.0, 2.0, d, pos_pos));
}

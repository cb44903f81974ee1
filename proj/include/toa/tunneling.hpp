#pragma once

// WKB tunneling from the Jacobi action W = Int p dx. In a classically
// forbidden interval p is imaginary and P ~ exp(-2 Im W) (hbar = 1), with
// p(x) = sqrt(2 m (E - V(x))) as the generalized momentum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <variant>
#include <vector>

#include "toa/detail/numeric.hpp"
#include "toa/errors.hpp"

namespace toa {

struct RectangularBarrier {
  double height;  // V0 > 0
  double left;
  double width;   // > 0
};

/// V(x) = V0 - curvature (x - center)^2 / 2.
struct ParabolicBarrier {
  double height;
  double curvature;  // > 0
  double center;
};

/// Piecewise-linear V through ascending (x, V) samples; constant beyond the ends.
struct TabulatedBarrier {
  std::vector<std::pair<double, double>> points;
};

class PotentialSpec {
public:
  using Kind = std::variant<RectangularBarrier, ParabolicBarrier, TabulatedBarrier>;

  PotentialSpec(RectangularBarrier r) : kind_(r) {
    if (!(r.height > 0.0)) throw DomainError("rectangular barrier height must be > 0");
    if (!(r.width > 0.0)) throw DomainError("rectangular barrier width must be > 0");
  }
  PotentialSpec(ParabolicBarrier p) : kind_(p) {
    if (!(p.curvature > 0.0)) throw DomainError("parabolic barrier curvature must be > 0");
  }
  PotentialSpec(TabulatedBarrier t) : kind_(std::move(t)) {
    const auto& pts = std::get<TabulatedBarrier>(kind_).points;
    if (pts.size() < 2) throw DomainError("tabulated potential needs >= 2 points");
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i].first > pts[i - 1].first)) throw DomainError("tabulated x must be strictly ascending");
  }

  const Kind& kind() const noexcept { return kind_; }

  double operator()(double x) const {
    return std::visit(
        [x](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, RectangularBarrier>) {
            return (x >= k.left && x <= k.left + k.width) ? k.height : 0.0;
          } else if constexpr (std::is_same_v<T, ParabolicBarrier>) {
            const double u = x - k.center;
            return k.height - 0.5 * k.curvature * u * u;
          } else {
            const auto& pts = k.points;
            if (x <= pts.front().first) return pts.front().second;
            if (x >= pts.back().first) return pts.back().second;
            const auto it = std::upper_bound(pts.begin(), pts.end(), x,
                                             [](double v, const auto& p) { return v < p.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double f = (x - lo.first) / (hi.first - lo.first);
            return lo.second + f * (hi.second - lo.second);
          }
        },
        kind_);
  }

  /// Scale used for root tolerances: max(1, peak |V|).
  double scale() const {
    return std::visit(
        [](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, TabulatedBarrier>) {
            double m = 1.0;
            for (const auto& p : k.points) m = std::max(m, std::abs(p.second));
            return m;
          } else {
            return std::max(1.0, std::abs(k.height));
          }
        },
        kind_);
  }

private:
  Kind kind_;
};

struct TurningPoints {
  double a;
  double b;
};

struct TunnelingResult {
  double energy;
  TurningPoints turning_points;
  double im_w;
  double probability;
};

namespace detail {

inline constexpr std::size_t turning_point_scan_nodes = 4097;
inline constexpr std::size_t chebyshev_nodes = 256;

/// Bisection for V(x) = E on [lo, hi] with the sign change given.
inline double bisect_crossing(const PotentialSpec& v, double e, double lo, double hi, double tol) {
  const bool lo_forbidden = v(lo) > e;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double h = v(mid) - e;
    if (std::abs(h) <= tol) return mid;
    if ((h > 0.0) == lo_forbidden) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Roots of V(x) = E delimiting the single forbidden interval in `bracket`.
inline TurningPoints find_turning_points(const PotentialSpec& v, double e, std::pair<double, double> bracket) {
  auto [lo, hi] = bracket;
  if (!(hi > lo)) throw DomainError("bracket must satisfy lo < hi");

  if (const auto* r = std::get_if<RectangularBarrier>(&v.kind())) {
    if (e >= r->height) throw NoTunnelingError("energy at or above the barrier top");
    if (e < 0.0) throw DomainError("energy below the asymptotic potential: forbidden region is unbounded");
    const double a = r->left, b = r->left + r->width;
    if (a <= lo || b >= hi) throw DomainError("barrier edges fall outside the bracket");
    return {a, b};
  }

  std::vector<double> xs;
  if (const auto* t = std::get_if<TabulatedBarrier>(&v.kind())) {
    xs.push_back(lo);
    for (const auto& p : t->points)
      if (p.first > lo && p.first < hi) xs.push_back(p.first);
    xs.push_back(hi);
  } else {
    xs = detail::linspace(lo, hi, detail::turning_point_scan_nodes);
  }

  std::vector<std::pair<std::size_t, std::size_t>> runs;  // [first, last] forbidden sample indices
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (v(xs[i]) > e) {
      if (!runs.empty() && runs.back().second + 1 == i) runs.back().second = i;
      else runs.push_back({i, i});
    }
  }
  if (runs.empty()) throw NoTunnelingError("energy at or above the barrier top within the bracket");
  if (runs.size() > 1) throw AmbiguityError("more than one forbidden interval in the bracket");
  const auto [first, last] = runs.front();
  if (first == 0 || last == xs.size() - 1)
    throw DomainError("forbidden region is not closed inside the bracket");

  const double tol = 1e-12 * v.scale();
  const double a = detail::bisect_crossing(v, e, xs[first - 1], xs[first], tol);
  const double b = detail::bisect_crossing(v, e, xs[last], xs[last + 1], tol);
  return {a, b};
}

/// Im W = Int_a^b sqrt(2 m (V(x) - E)) dx.
///
/// Smooth barriers: Gauss-Chebyshev (second kind) nodes on [a, b], which
/// carry the sqrt((x-a)(b-x)) endpoint behaviour in the weight.
/// Rectangular and tabulated barriers are piecewise constant / linear and
/// are integrated exactly piece by piece.
inline double jacobi_action_im(const PotentialSpec& v, double e, double m, double a, double b) {
  if (!(m > 0.0)) throw DomainError("mass must be > 0");
  if (b < a) throw DomainError("turning points must satisfy a <= b");
  if (a == b) return 0.0;
  const double tol = 1e-9 * v.scale();
  auto excess = [&](double x) {
    const double u = v(x) - e;
    if (u < -tol) throw DomainError("integrand negative inside [a, b]: V < E");
    return std::max(u, 0.0);
  };

  if (const auto* r = std::get_if<RectangularBarrier>(&v.kind())) {
    // Exact edges: V0 on the step, 0 elsewhere.
    const double inside = std::max(0.0, std::min(b, r->left + r->width) - std::max(a, r->left));
    const double outside = (b - a) - inside;
    double sum = 0.0;
    if (inside > 0.0) sum += std::sqrt(2.0 * m * excess(std::max(a, r->left))) * inside;
    if (outside > 0.0) {
      if (-e < -tol) throw DomainError("integrand negative inside [a, b]: V < E");
      sum += std::sqrt(2.0 * m * std::max(0.0, -e)) * outside;
    }
    return sum;
  }

  if (const auto* t = std::get_if<TabulatedBarrier>(&v.kind())) {
    std::vector<double> cuts{a};
    for (const auto& p : t->points)
      if (p.first > a && p.first < b) cuts.push_back(p.first);
    cuts.push_back(b);
    double sum = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      const double x0 = cuts[i - 1], x1 = cuts[i];
      const double u0 = excess(x0), u1 = excess(x1);
      const double dx = x1 - x0;
      // Int sqrt(2m u) dx with u linear in x.
      if (std::abs(u1 - u0) <= 1e-15 * std::max(u0, u1)) {
        sum += std::sqrt(2.0 * m * 0.5 * (u0 + u1)) * dx;
      } else {
        sum += std::sqrt(2.0 * m) * (2.0 / 3.0) * (std::pow(u1, 1.5) - std::pow(u0, 1.5)) * dx / (u1 - u0);
      }
    }
    return sum;
  }

  // x = mid + half cos(theta_i): weight pi/(n+1) sin^2(theta_i) against
  // sqrt(1-u^2) g(u), with g absorbing the endpoint square root.
  const std::size_t n = detail::chebyshev_nodes;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double theta = static_cast<double>(i) * std::numbers::pi / static_cast<double>(n + 1);
    const double s = std::sin(theta);
    sum += s * std::sqrt(2.0 * m * excess(mid + half * std::cos(theta)));
  }
  return half * std::numbers::pi / static_cast<double>(n + 1) * sum;
}

/// P = exp(-2 Im W), the WKB exponent without prefactor.
inline TunnelingResult tunneling_probability(const PotentialSpec& v, double e, double m,
                                             std::pair<double, double> bracket) {
  const auto tp = find_turning_points(v, e, bracket);
  const double im_w = jacobi_action_im(v, e, m, tp.a, tp.b);
  return {e, tp, im_w, std::exp(-2.0 * im_w)};
}

/// Exact transmission through a rectangular barrier for 0 < E < V0:
/// T = [1 + V0^2 sinh^2(kappa L) / (4 E (V0 - E))]^-1, kappa = sqrt(2 m (V0 - E)).
inline double exact_rectangular_transmission(double v0, double length, double e, double m) {
  if (!(e > 0.0 && e < v0)) throw DomainError("exact transmission needs 0 < E < V0");
  if (!(length > 0.0) || !(m > 0.0)) throw DomainError("length and mass must be > 0");
  const double kappa = std::sqrt(2.0 * m * (v0 - e));
  const double s = std::sinh(kappa * length);
  return 1.0 / (1.0 + v0 * v0 * s * s / (4.0 * e * (v0 - e)));
}

}  // namespace toa

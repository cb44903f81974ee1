#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

namespace toa {

using complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline const double inv_sqrt_two_pi = 1.0 / std::sqrt(two_pi);

/// Execution hints. `threads == 0` means serial, which is the default and the
/// reference for bit-reproducibility.
struct Execution {
  unsigned threads = 0;
};

namespace detail {

/// Runs `body(i)` for i in [0, n). Every index is processed by exactly one
/// worker, so results are identical for any thread count as long as `body`
/// writes only to slot i.
template <typename Body>
void parallel_for(std::size_t n, Execution ex, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(ex.threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
}

/// Trapezoid weights for a uniform grid. A single node carries the full
/// spacing (collocated delta stand-in).
inline std::vector<double> trapezoid_weights(std::size_t n, double spacing) {
  std::vector<double> w(n, spacing);
  if (n >= 2) {
    w.front() *= 0.5;
    w.back() *= 0.5;
  }
  return w;
}

/// Trapezoid rule on an arbitrary ascending abscissa.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

/// Relative L2 distance ||a - b|| / ||a|| under trapezoid weights on `x`.
/// Falls back to the absolute distance when ||a|| vanishes.
inline double relative_l2(std::span<const double> x, std::span<const complex> a,
                          std::span<const complex> b) {
  std::vector<double> diff(x.size()), ref(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff[i] = std::norm(a[i] - b[i]);
    ref[i] = std::norm(a[i]);
  }
  const double num = x.size() >= 2 ? trapezoid(x, diff) : (diff.empty() ? 0.0 : diff[0]);
  const double den = x.size() >= 2 ? trapezoid(x, ref) : (ref.empty() ? 0.0 : ref[0]);
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

inline bool strictly_ascending(std::span<const double> x) {
  return std::adjacent_find(x.begin(), x.end(), std::greater_equal<>{}) == x.end();
}

}  // namespace detail
}  // namespace toa

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "hpcwb/error.hpp"

namespace hpcwb {

using Clock = std::chrono::steady_clock;

/// Smallest observable positive tick of the monotonic clock, in seconds.
/// Measured once per process.
inline double clock_resolution() {
  static const double resolution = [] {
    double best = 1.0;
    for (int i = 0; i < 200; ++i) {
      auto t0 = Clock::now();
      auto t1 = Clock::now();
      while (t1 == t0) t1 = Clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  }();
  return resolution;
}

/// Timed regions shorter than this many clock ticks are not trusted.
inline constexpr double kMinResolutionTicks = 100.0;

inline double min_timeable_seconds() { return kMinResolutionTicks * clock_resolution(); }

template <typename F>
double time_once(F&& f) {
  auto t0 = Clock::now();
  f();
  auto t1 = Clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

inline double best_of(std::span<const double> times) {
  detail::require(!times.empty(), "best_of: no samples");
  return *std::min_element(times.begin(), times.end());
}

/// Median; the mean of the two middle samples for an even count.
inline double median_of(std::span<const double> times) {
  detail::require(!times.empty(), "median_of: no samples");
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[mid];
  return 0.5 * (sorted[mid - 1] + sorted[mid]);
}

/// Keeps `value` observable so the computation producing it is not elided.
template <typename T>
inline void do_not_optimize(const T& value) {
  asm volatile("" : : "r,m"(value) : "memory");
}

/// Process-wide lock serialising every timed benchmark and calibration.
inline std::mutex& benchmark_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace hpcwb

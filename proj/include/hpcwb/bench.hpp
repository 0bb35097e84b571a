#pragma once

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/kernels.hpp"
#include "hpcwb/numeric.hpp"
#include "hpcwb/machine.hpp"
#include "hpcwb/results.hpp"
#include "hpcwb/roofline.hpp"
#include "hpcwb/timing.hpp"

namespace hpcwb {

struct BenchOptions {
  int reps = 11;
  int warmup = 2;
  std::uint64_t seed = kDefaultSeed;
  /// Lower bound on one timed sample; raised to 100 clock ticks if smaller.
  double min_sample_seconds = 1e-4;
};

/// Calls `f.template operator()<T>()` with T matching the precision.
template <typename F>
decltype(auto) with_precision(Precision p, F&& f) {
  if (p == Precision::f32) return f.template operator()<float>();
  return f.template operator()<double>();
}

/// Times `variant` at size n. Operands are restored before every sample so
/// each sample computes the same result; the checksum of that result is
/// consumed before the next timed region starts.
inline Measurement measure(const Variant& variant, std::uint64_t n, const BenchOptions& opts = {}) {
  detail::require(opts.reps >= 3, "measure needs reps >= 3");
  detail::require(opts.warmup >= 1, "measure needs warmup >= 1");
  detail::require(n >= 1, "measure needs n >= 1");
  const KernelSpec& spec = variant.spec;

  return with_precision(spec.precision, [&]<typename T>() {
    const auto inputs = make_inputs<T>(spec, n, {opts.seed, 0});
    PreparedKernel<T> kernel(spec, *variant.backend, inputs, 0);

    std::lock_guard lock(benchmark_mutex());
    auto sample = [&](std::uint64_t inner) {
      kernel.reset();
      do_not_optimize(kernel.checksum());
      return time_once([&] {
        for (std::uint64_t i = 0; i < inner; ++i) kernel.execute();
      });
    };

    for (int w = 0; w < opts.warmup; ++w) sample(1);

    const double target = std::max(opts.min_sample_seconds, min_timeable_seconds());
    std::uint64_t inner = 1;
    for (int guard = 0; guard < 40; ++guard) {
      double t = sample(inner);
      if (t >= target) break;
      double grow = t > 0 ? std::clamp(1.2 * target / t, 2.0, 16.0) : 16.0;
      inner = static_cast<std::uint64_t>(static_cast<double>(inner) * grow) + 1;
    }

    Measurement m;
    m.kernel_id = spec.id;
    m.backend = std::string(variant.backend->name());
    m.precision = spec.precision;
    m.layout = spec.layout;
    m.n = n;
    m.shape = inputs.shape(spec.operation);
    m.reps = opts.reps;
    m.inner = inner;
    std::optional<double> checksum;
    double best_sample = 0.0;
    for (int r = 0; r < opts.reps; ++r) {
      double t = sample(inner);
      best_sample = r == 0 ? t : std::min(best_sample, t);
      m.times.push_back(t / static_cast<double>(inner));
      double c = kernel.checksum();
      if (checksum && !bitwise_equal(*checksum, c))
        throw Error("checksum of " + variant.label() + " changed between repetitions");
      checksum = c;
    }
    if (best_sample < min_timeable_seconds())
      throw RejectedTiming(variant.label() + " n=" + std::to_string(n) + " is below clock resolution");
    m.best_time = best_of(m.times);
    m.median_time = median_of(m.times);
    m.checksum = *checksum;
    return m;
  });
}

/// Which bandwidth level assessments use: a fixed name, or per-size selection
/// by footprint when unset.
struct LevelPolicy {
  std::optional<std::string> forced_level;
};

/// Measures `variant` at every size and attaches realistic and idealized
/// assessments. Sizes that fail are recorded in `failures`.
inline ResultSet sweep(const Variant& variant, std::span<const std::uint64_t> sizes, const MachineModel& model,
                       const LevelPolicy& policy = {}, const BenchOptions& opts = {}) {
  detail::require(!sizes.empty(), "sweep needs at least one size");
  detail::require(std::is_sorted(sizes.begin(), sizes.end()), "sweep sizes must be ascending");
  ResultSet rs;
  rs.machine = model.name;
  rs.model_name = model.name;
  rs.created = iso8601_now();
  rs.seed = opts.seed;
  for (auto n : sizes) {
    try {
      Measurement m = measure(variant, n, opts);
      auto real = assess(m, variant.spec, model, TrafficModel::realistic, policy.forced_level);
      auto ideal = assess(m, variant.spec, model, TrafficModel::idealized, policy.forced_level);
      if (ideal.efficiency_eta > real.efficiency_eta)
        throw InvariantError("eta.ordering", variant.label() + ": idealized eta exceeds realistic eta");
      rs.results.push_back(make_row(m, real, ideal));
    } catch (const PreconditionError&) {
      throw;
    } catch (const std::exception& e) {
      rs.failures.push_back({variant.spec.id, std::string(variant.backend->name()), n, e.what()});
    }
  }
  return rs;
}

/// Concatenates per-variant sweeps into one result set.
inline void append(ResultSet& into, const ResultSet& from) {
  into.results.insert(into.results.end(), from.results.begin(), from.results.end());
  into.failures.insert(into.failures.end(), from.failures.begin(), from.failures.end());
}

}  // namespace hpcwb

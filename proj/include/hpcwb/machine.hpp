#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hpcwb/aligned_buffer.hpp"
#include "hpcwb/error.hpp"
#include "hpcwb/timing.hpp"
#include "hpcwb/types.hpp"
#include "json.hpp"

namespace hpcwb {

enum class LevelKind { cache, memory, network_reserved };

constexpr std::string_view to_string(LevelKind k) noexcept {
  switch (k) {
    case LevelKind::cache: return "cache";
    case LevelKind::memory: return "memory";
    case LevelKind::network_reserved: break;
  }
  return "network-reserved";
}

inline std::optional<LevelKind> parse_level_kind(std::string_view s) {
  if (s == "cache") return LevelKind::cache;
  if (s == "memory") return LevelKind::memory;
  if (s == "network-reserved") return LevelKind::network_reserved;
  return std::nullopt;
}

struct BandwidthLevel {
  std::string name;
  std::uint64_t working_set_bytes = 0;
  double bandwidth_bytes_per_s = 0.0;
  LevelKind kind = LevelKind::cache;

  bool operator==(const BandwidthLevel&) const = default;
};

/// Calibrated capabilities of one machine: achievable peak flop rates and the
/// streaming bandwidth observed at a ladder of working-set sizes.
struct MachineModel {
  std::string name;
  std::string created;
  std::map<Precision, double> peaks;
  std::vector<BandwidthLevel> levels;
  std::string notes;

  bool operator==(const MachineModel&) const = default;

  /// Throws InvariantError naming the first violated rule.
  void validate() const {
    auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    for (auto p : kAllPrecisions)
      if (!peaks.contains(p))
        throw InvariantError("peaks.required", "missing peak for " + std::string(to_string(p)));
    for (const auto& [p, v] : peaks)
      if (!finite_positive(v))
        throw InvariantError("peaks.positive", "peak " + std::string(to_string(p)) + " must be positive and finite");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& l = levels[i];
      if (l.working_set_bytes == 0)
        throw InvariantError("levels.working_set_positive", "level " + l.name + " has a zero working set");
      if (!finite_positive(l.bandwidth_bytes_per_s))
        throw InvariantError("levels.bandwidth_positive",
                             "level " + l.name + " bandwidth must be positive and finite");
      if (i > 0 && levels[i - 1].working_set_bytes >= l.working_set_bytes)
        throw InvariantError("levels.ordered", "levels must have strictly increasing working_set_bytes");
    }
    std::set<std::string> names;
    for (const auto& l : levels)
      if (!names.insert(l.name).second) throw InvariantError("levels.unique_names", "duplicate level " + l.name);
  }

  double peak(Precision p) const {
    auto it = peaks.find(p);
    if (it == peaks.end()) throw UnknownPrecision("no peak for " + std::string(to_string(p)));
    return it->second;
  }

  const BandwidthLevel& level(std::string_view level_name) const {
    for (const auto& l : levels)
      if (l.name == level_name) return l;
    throw UnknownLevel("no bandwidth level named " + std::string(level_name));
  }
};

/// Current UTC time as ISO-8601, e.g. 2026-10-17T09:30:00Z.
inline std::string iso8601_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

namespace detail {

using Json = nlohmann::ordered_json;

inline void expect_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  for (auto k : keys)
    if (!j.contains(k)) throw SchemaError(path + "/" + std::string(k), "missing key");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (auto allowed : keys) known = known || k == allowed;
    if (!known) throw SchemaError(path + "/" + k, "unknown key");
  }
}

inline std::string get_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

inline double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

inline std::uint64_t get_unsigned(const Json& j, const std::string& path) {
  // values written from signed fields parse back as signed integers
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw SchemaError(path, "expected a non-negative integer");
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const MachineModel& m) {
  nlohmann::ordered_json j;
  j["name"] = m.name;
  j["created"] = m.created;
  j["peaks"] = {{"f32", m.peak(Precision::f32)}, {"f64", m.peak(Precision::f64)}};
  j["levels"] = nlohmann::ordered_json::array();
  for (const auto& l : m.levels)
    j["levels"].push_back({{"name", l.name},
                           {"working_set_bytes", l.working_set_bytes},
                           {"bandwidth_bytes_per_s", l.bandwidth_bytes_per_s},
                           {"kind", std::string(to_string(l.kind))}});
  j["notes"] = m.notes;
  return j;
}

/// Parses and validates. SchemaError for structure, InvariantError for values.
inline MachineModel machine_model_from_json(const nlohmann::ordered_json& j) {
  using detail::get_number;
  using detail::get_string;
  detail::expect_keys(j, "", {"name", "created", "peaks", "levels", "notes"});
  MachineModel m;
  m.name = get_string(j["name"], "/name");
  m.created = get_string(j["created"], "/created");
  m.notes = get_string(j["notes"], "/notes");
  detail::expect_keys(j["peaks"], "/peaks", {"f32", "f64"});
  m.peaks[Precision::f32] = get_number(j["peaks"]["f32"], "/peaks/f32");
  m.peaks[Precision::f64] = get_number(j["peaks"]["f64"], "/peaks/f64");
  if (!j["levels"].is_array()) throw SchemaError("/levels", "expected an array");
  for (std::size_t i = 0; i < j["levels"].size(); ++i) {
    const auto& lj = j["levels"][i];
    const std::string path = "/levels/" + std::to_string(i);
    detail::expect_keys(lj, path, {"name", "working_set_bytes", "bandwidth_bytes_per_s", "kind"});
    BandwidthLevel l;
    l.name = get_string(lj["name"], path + "/name");
    l.working_set_bytes = detail::get_unsigned(lj["working_set_bytes"], path + "/working_set_bytes");
    l.bandwidth_bytes_per_s = get_number(lj["bandwidth_bytes_per_s"], path + "/bandwidth_bytes_per_s");
    auto kind = parse_level_kind(get_string(lj["kind"], path + "/kind"));
    if (!kind) throw SchemaError(path + "/kind", "expected cache, memory or network-reserved");
    l.kind = *kind;
    m.levels.push_back(std::move(l));
  }
  m.validate();
  return m;
}

inline void save_model(const MachineModel& m, const std::string& path) {
  m.validate();
  const auto j = to_json(m);
  machine_model_from_json(j);  // self-check against the schema
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path);
}

inline nlohmann::ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
}

inline MachineModel load_model(const std::string& path) { return machine_model_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kMinWorkingSetBytes = 4 * 1024;
inline constexpr int kMinCalibrationReps = 3;
/// Working sets used when the caller supplies none: 16 KiB, 256 KiB, 8 MiB, 512 MiB.
inline constexpr std::array<std::uint64_t, 4> kDefaultWorkingSets{16ull << 10, 256ull << 10, 8ull << 20,
                                                                  512ull << 20};

/// Bytes counted for n triad iterations a[i] = b[i] + s*c[i]: read b, read c,
/// write a, and the write-allocate read of a.
constexpr std::uint64_t triad_counted_bytes(std::uint64_t n, std::size_t elem_bytes) noexcept {
  return 4 * elem_bytes * n;
}

inline double bandwidth_from(std::uint64_t counted_bytes, double best_time_s) {
  if (!(best_time_s > 0.0)) throw NonPositiveTime("bandwidth needs a positive time");
  return static_cast<double>(counted_bytes) / best_time_s;
}

/// Two flops per multiply-add.
inline double flops_rate(double multiply_adds, double seconds) {
  if (!(seconds > 0.0)) throw NonPositiveTime("flop rate needs a positive time");
  return 2.0 * multiply_adds / seconds;
}

struct TriadSample {
  std::uint64_t working_set_bytes = 0;
  std::uint64_t elements = 0;
  std::uint64_t inner = 1;
  /// Bytes per timed sample (all inner passes).
  std::uint64_t counted_bytes = 0;
  double best_time = 0.0;
  double median_time = 0.0;
  double bandwidth() const { return bandwidth_from(counted_bytes, best_time); }
};

namespace detail {

/// Grows `inner` until one timed sample of `run(inner)` lasts at least `target`.
template <typename Run>
std::uint64_t scale_inner(Run&& run, double target) {
  std::uint64_t inner = 1;
  for (int guard = 0; guard < 40; ++guard) {
    double t = time_once([&] { run(inner); });
    if (t >= target) return inner;
    double grow = t > 0 ? std::min(16.0, std::max(2.0, 1.2 * target / t)) : 16.0;
    inner = static_cast<std::uint64_t>(std::ceil(static_cast<double>(inner) * grow));
  }
  return inner;
}

inline constexpr double kCalibrationSampleSeconds = 2e-3;

}  // namespace detail

/// Streams a triad over three double arrays filling `working_set_bytes`.
inline TriadSample measure_triad(std::uint64_t working_set_bytes, int reps) {
  detail::require(working_set_bytes >= kMinWorkingSetBytes, "working set must be >= 4 KiB");
  detail::require(reps >= kMinCalibrationReps, "calibration needs reps >= 3");
  const std::uint64_t n = working_set_bytes / (3 * sizeof(double));
  AlignedBuffer<double> a(n), b(n), c(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    b[i] = 1.0 + static_cast<double>(i % 7);
    c[i] = 0.5;
  }
  const double s = 3.0;
  double* pa = a.data();
  const double* pb = b.data();
  const double* pc = c.data();
  auto run = [&](std::uint64_t inner) {
    for (std::uint64_t r = 0; r < inner; ++r) {
      for (std::uint64_t i = 0; i < n; ++i) pa[i] = pb[i] + s * pc[i];
      do_not_optimize(pa);
    }
  };

  std::lock_guard lock(benchmark_mutex());
  run(1);  // first touch
  TriadSample out;
  out.working_set_bytes = working_set_bytes;
  out.elements = n;
  out.inner = detail::scale_inner(run, std::max(detail::kCalibrationSampleSeconds, min_timeable_seconds()));
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) times.push_back(time_once([&] { run(out.inner); }));
  out.best_time = best_of(times);
  out.median_time = median_of(times);
  out.counted_bytes = out.inner * triad_counted_bytes(n, sizeof(double));
  if (out.best_time < min_timeable_seconds())
    throw ClockResolutionError("triad at " + std::to_string(working_set_bytes) + " bytes is below clock resolution");
  return out;
}

/// Positional level names: L1, L2, ... for all but the largest, which is MEM.
inline std::string level_name_for(std::size_t index, std::size_t count) {
  return index + 1 == count ? "MEM" : "L" + std::to_string(index + 1);
}

inline std::vector<BandwidthLevel> calibrate_bandwidth(std::span<const std::uint64_t> working_sets, int reps) {
  detail::require(!working_sets.empty(), "no working-set sizes given");
  detail::require(reps >= kMinCalibrationReps, "calibration needs reps >= 3");
  for (std::size_t i = 0; i < working_sets.size(); ++i) {
    detail::require(working_sets[i] >= kMinWorkingSetBytes, "working set must be >= 4 KiB");
    detail::require(i == 0 || working_sets[i - 1] < working_sets[i], "working-set sizes must be strictly increasing");
  }
  std::vector<BandwidthLevel> levels;
  for (std::size_t i = 0; i < working_sets.size(); ++i) {
    TriadSample s = measure_triad(working_sets[i], reps);
    levels.push_back({level_name_for(i, working_sets.size()), working_sets[i], s.bandwidth(),
                      i + 1 == working_sets.size() ? LevelKind::memory : LevelKind::cache});
  }
  return levels;
}

inline constexpr int kMinFmaChains = 8;

namespace detail {

template <typename T, int K>
double fma_chain_rate(int reps) {
  std::array<T, K> acc;
  for (int k = 0; k < K; ++k) acc[k] = static_cast<T>(1.0 + 0.01 * k);
  // Fixed point of x*m + a is a/(1-m) = 1; values stay normal.
  const T m = static_cast<T>(0.999);
  const T a = static_cast<T>(0.001);
  auto run = [&](std::uint64_t iters) {
    for (std::uint64_t it = 0; it < iters; ++it) {
      for (int k = 0; k < K; ++k) acc[k] = acc[k] * m + a;
    }
    for (int k = 0; k < K; ++k) do_not_optimize(acc[k]);
  };
  std::lock_guard lock(benchmark_mutex());
  const std::uint64_t iters = scale_inner(run, std::max(5 * kCalibrationSampleSeconds, min_timeable_seconds()));
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) times.push_back(time_once([&] { run(iters); }));
  const double best = best_of(times);
  if (best < min_timeable_seconds()) throw ClockResolutionError("flop loop is below clock resolution");
  return flops_rate(static_cast<double>(iters) * K, best);
}

}  // namespace detail

/// Achievable multiply-add throughput of one core from `chains` independent
/// register-resident dependency chains. Usually below the vendor peak.
inline double calibrate_peak_flops(Precision p, int reps = 5, int chains = 16) {
  detail::require(chains >= kMinFmaChains, "peak calibration needs at least 8 independent chains");
  detail::require(reps >= kMinCalibrationReps, "calibration needs reps >= 3");
  auto dispatch = [&]<typename T>() {
    switch (chains) {
      case 8: return detail::fma_chain_rate<T, 8>(reps);
      case 16: return detail::fma_chain_rate<T, 16>(reps);
      case 32: return detail::fma_chain_rate<T, 32>(reps);
      default: throw PreconditionError("supported chain counts are 8, 16 and 32");
    }
  };
  return p == Precision::f32 ? dispatch.template operator()<float>() : dispatch.template operator()<double>();
}

enum class BandwidthSanity { ok, warning, violation };

/// Cache levels should be at least as fast as memory. A slower first level
/// is a warning (noise happens); memory more than 2x faster than the first
/// level means the calibration is broken.
inline BandwidthSanity check_bandwidth_sanity(std::span<const BandwidthLevel> levels) {
  std::vector<const BandwidthLevel*> used;
  for (const auto& l : levels)
    if (l.kind != LevelKind::network_reserved) used.push_back(&l);
  if (used.size() < 2) return BandwidthSanity::ok;
  const double first = used.front()->bandwidth_bytes_per_s;
  const double last = used.back()->bandwidth_bytes_per_s;
  if (last > 2.0 * first) return BandwidthSanity::violation;
  if (last > first) return BandwidthSanity::warning;
  return BandwidthSanity::ok;
}

struct CalibrationOptions {
  std::string name = "machine";
  std::vector<std::uint64_t> working_sets{kDefaultWorkingSets.begin(), kDefaultWorkingSets.end()};
  int reps = 11;
  std::optional<double> peak_f32_override;
  std::optional<double> peak_f64_override;
};

/// Full calibration: both peaks and every bandwidth level.
inline MachineModel calibrate_machine(const CalibrationOptions& opts) {
  MachineModel m;
  m.name = opts.name;
  m.created = iso8601_now();
  m.levels = calibrate_bandwidth(opts.working_sets, opts.reps);
  std::ostringstream notes;
  notes << "triad bandwidth counts 4 accesses per element (write-allocate included); best of " << opts.reps
        << " reps; peaks are measured achievable single-core rates";
  m.peaks[Precision::f32] = opts.peak_f32_override ? *opts.peak_f32_override : calibrate_peak_flops(Precision::f32, opts.reps);
  m.peaks[Precision::f64] = opts.peak_f64_override ? *opts.peak_f64_override : calibrate_peak_flops(Precision::f64, opts.reps);
  if (opts.peak_f32_override || opts.peak_f64_override) notes << "; peak overridden by user";
  m.notes = notes.str();
  m.validate();
  return m;
}

}  // namespace hpcwb

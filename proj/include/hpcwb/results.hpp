#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/kernels/spec.hpp"
#include "hpcwb/machine.hpp"
#include "hpcwb/types.hpp"
#include "json.hpp"

namespace hpcwb {

enum class Bound { memory, compute };

constexpr std::string_view to_string(Bound b) noexcept { return b == Bound::memory ? "memory" : "compute"; }

inline std::optional<Bound> parse_bound(std::string_view s) {
  if (s == "memory") return Bound::memory;
  if (s == "compute") return Bound::compute;
  return std::nullopt;
}

/// Timing of one kernel variant at one size. Times are per kernel call.
struct Measurement {
  std::string kernel_id;
  std::string backend;
  Precision precision = Precision::f64;
  Layout layout = Layout::none;
  std::uint64_t n = 0;
  ProblemShape shape;
  int reps = 0;
  /// Kernel calls per timed sample; raised until a sample is clock-resolvable.
  std::uint64_t inner = 1;
  std::vector<double> times;
  double best_time = 0.0;
  double median_time = 0.0;
  double checksum = 0.0;
};

struct RooflineAssessment {
  std::string kernel_id;
  std::string backend;
  Precision precision = Precision::f64;
  Layout layout = Layout::none;
  std::uint64_t n = 0;
  TrafficModel traffic_model = TrafficModel::realistic;
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
  double intensity = 0.0;
  double attainable_flops_per_s = 0.0;
  double measured_flops_per_s = 0.0;
  double efficiency_eta = 0.0;
  Bound bound = Bound::memory;
  std::string level_name;
};

/// Efficiencies above this are reported as suspicious (never clamped).
inline constexpr double kEtaFlagThreshold = 1.05;

/// One measurement with both traffic-model assessments. `bound` is the bound
/// under realistic traffic.
struct ResultRow {
  std::string kernel;
  std::string backend;
  Precision precision = Precision::f64;
  Layout layout = Layout::none;
  std::uint64_t n = 0;
  int reps = 0;
  double time_best_s = 0.0;
  double time_median_s = 0.0;
  std::uint64_t flops = 0;
  std::uint64_t bytes_realistic = 0;
  std::uint64_t bytes_idealized = 0;
  double perf_flops_per_s = 0.0;
  double eta_realistic = 0.0;
  double eta_idealized = 0.0;
  Bound bound = Bound::memory;
  std::string level;

  bool operator==(const ResultRow&) const = default;

  double eta(TrafficModel t) const { return t == TrafficModel::realistic ? eta_realistic : eta_idealized; }
  std::uint64_t bytes(TrafficModel t) const {
    return t == TrafficModel::realistic ? bytes_realistic : bytes_idealized;
  }
  double intensity(TrafficModel t) const { return static_cast<double>(flops) / static_cast<double>(bytes(t)); }
  bool flagged() const { return eta_realistic > kEtaFlagThreshold || eta_idealized > kEtaFlagThreshold; }
};

/// A size that could not be measured during a sweep.
struct SweepFailure {
  std::string kernel;
  std::string backend;
  std::uint64_t n = 0;
  std::string reason;
};

struct ResultSet {
  std::string machine;
  std::string model_name;
  std::string created;
  std::uint64_t seed = 0;
  std::vector<ResultRow> results;
  /// In-memory only; not part of the file format.
  std::vector<SweepFailure> failures;
};

inline ResultRow make_row(const Measurement& m, const RooflineAssessment& realistic,
                          const RooflineAssessment& idealized) {
  if (realistic.traffic_model != TrafficModel::realistic || idealized.traffic_model != TrafficModel::idealized)
    throw PreconditionError("make_row needs one realistic and one idealized assessment");
  ResultRow r;
  r.kernel = m.kernel_id;
  r.backend = m.backend;
  r.precision = m.precision;
  r.layout = m.layout;
  r.n = m.n;
  r.reps = m.reps;
  r.time_best_s = m.best_time;
  r.time_median_s = m.median_time;
  r.flops = realistic.flops;
  r.bytes_realistic = realistic.bytes;
  r.bytes_idealized = idealized.bytes;
  r.perf_flops_per_s = realistic.measured_flops_per_s;
  r.eta_realistic = realistic.efficiency_eta;
  r.eta_idealized = idealized.efficiency_eta;
  r.bound = realistic.bound;
  r.level = realistic.level_name;
  return r;
}

inline nlohmann::ordered_json to_json(const ResultSet& rs) {
  nlohmann::ordered_json j;
  j["machine"] = rs.machine;
  j["model_name"] = rs.model_name;
  j["created"] = rs.created;
  j["seed"] = rs.seed;
  j["results"] = nlohmann::ordered_json::array();
  for (const auto& r : rs.results)
    j["results"].push_back({{"kernel", r.kernel},
                            {"backend", r.backend},
                            {"precision", std::string(to_string(r.precision))},
                            {"layout", std::string(to_string(r.layout))},
                            {"n", r.n},
                            {"reps", r.reps},
                            {"time_best_s", r.time_best_s},
                            {"time_median_s", r.time_median_s},
                            {"flops", r.flops},
                            {"bytes_realistic", r.bytes_realistic},
                            {"bytes_idealized", r.bytes_idealized},
                            {"perf_flops_per_s", r.perf_flops_per_s},
                            {"eta_realistic", r.eta_realistic},
                            {"eta_idealized", r.eta_idealized},
                            {"bound", std::string(to_string(r.bound))},
                            {"level", r.level}});
  return j;
}

inline ResultSet result_set_from_json(const nlohmann::ordered_json& j) {
  using detail::get_number;
  using detail::get_string;
  using detail::get_unsigned;
  detail::expect_keys(j, "", {"machine", "model_name", "created", "seed", "results"});
  ResultSet rs;
  rs.machine = get_string(j["machine"], "/machine");
  rs.model_name = get_string(j["model_name"], "/model_name");
  rs.created = get_string(j["created"], "/created");
  rs.seed = get_unsigned(j["seed"], "/seed");
  if (!j["results"].is_array()) throw SchemaError("/results", "expected an array");
  for (std::size_t i = 0; i < j["results"].size(); ++i) {
    const auto& e = j["results"][i];
    const std::string p = "/results/" + std::to_string(i);
    detail::expect_keys(e, p,
                        {"kernel", "backend", "precision", "layout", "n", "reps", "time_best_s", "time_median_s",
                         "flops", "bytes_realistic", "bytes_idealized", "perf_flops_per_s", "eta_realistic",
                         "eta_idealized", "bound", "level"});
    ResultRow r;
    r.kernel = get_string(e["kernel"], p + "/kernel");
    r.backend = get_string(e["backend"], p + "/backend");
    auto prec = parse_precision(get_string(e["precision"], p + "/precision"));
    if (!prec) throw SchemaError(p + "/precision", "expected f32 or f64");
    r.precision = *prec;
    auto layout = parse_layout(get_string(e["layout"], p + "/layout"));
    if (!layout) throw SchemaError(p + "/layout", "expected none, row_major or col_major");
    r.layout = *layout;
    r.n = get_unsigned(e["n"], p + "/n");
    r.reps = static_cast<int>(get_unsigned(e["reps"], p + "/reps"));
    r.time_best_s = get_number(e["time_best_s"], p + "/time_best_s");
    r.time_median_s = get_number(e["time_median_s"], p + "/time_median_s");
    r.flops = get_unsigned(e["flops"], p + "/flops");
    r.bytes_realistic = get_unsigned(e["bytes_realistic"], p + "/bytes_realistic");
    r.bytes_idealized = get_unsigned(e["bytes_idealized"], p + "/bytes_idealized");
    r.perf_flops_per_s = get_number(e["perf_flops_per_s"], p + "/perf_flops_per_s");
    r.eta_realistic = get_number(e["eta_realistic"], p + "/eta_realistic");
    r.eta_idealized = get_number(e["eta_idealized"], p + "/eta_idealized");
    auto bound = parse_bound(get_string(e["bound"], p + "/bound"));
    if (!bound) throw SchemaError(p + "/bound", "expected memory or compute");
    r.bound = *bound;
    r.level = get_string(e["level"], p + "/level");
    if (r.bytes_idealized == 0 || r.bytes_realistic == 0)
      throw InvariantError("results.bytes_positive", p + ": byte counts must be positive");
    if (r.bytes_idealized > r.bytes_realistic)
      throw InvariantError("results.traffic_order", p + ": bytes_idealized exceeds bytes_realistic");
    rs.results.push_back(std::move(r));
  }
  return rs;
}

inline void save_result_set(const ResultSet& rs, const std::string& path) {
  const auto j = to_json(rs);
  result_set_from_json(j);  // self-check against the schema
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path);
}

inline ResultSet load_result_set(const std::string& path) { return result_set_from_json(read_json_file(path)); }

}  // namespace hpcwb

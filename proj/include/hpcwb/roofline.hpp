#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/kernels/spec.hpp"
#include "hpcwb/machine.hpp"
#include "hpcwb/results.hpp"
#include "json.hpp"

namespace hpcwb {

struct Attainable {
  double flops_per_s = 0.0;
  Bound bound = Bound::memory;
};

/// Roofline bound min(peak, bandwidth * intensity). Compute-bound iff the
/// peak is the smaller side (ties go to compute).
inline Attainable attainable(double peak, double bandwidth, double intensity) {
  detail::require(intensity > 0.0 && std::isfinite(intensity), "intensity must be positive and finite");
  detail::require(peak > 0.0 && bandwidth > 0.0, "peak and bandwidth must be positive");
  const double memory_roof = bandwidth * intensity;
  if (peak <= memory_roof) return {peak, Bound::compute};
  return {memory_roof, Bound::memory};
}

inline Attainable attainable(const MachineModel& model, Precision p, double intensity, std::string_view level_name) {
  detail::require(intensity > 0.0, "intensity must be positive");
  const auto& level = model.level(level_name);
  if (level.kind == LevelKind::network_reserved)
    throw UnknownLevel("level " + level.name + " is reserved for network bandwidth and cannot be assessed");
  return attainable(model.peak(p), level.bandwidth_bytes_per_s, intensity);
}

/// Intensity at which the memory roof meets the compute roof.
inline double ridge_point(double peak, double bandwidth) { return peak / bandwidth; }

/// Smallest level whose working set holds `resident_bytes`; the largest level
/// when none does. Network-reserved levels are never chosen.
inline const BandwidthLevel& select_level(const MachineModel& model, std::uint64_t resident_bytes) {
  const BandwidthLevel* largest = nullptr;
  for (const auto& l : model.levels) {
    if (l.kind == LevelKind::network_reserved) continue;
    if (l.working_set_bytes >= resident_bytes) return l;
    largest = &l;
  }
  if (largest == nullptr) throw UnknownLevel("machine model has no assessable bandwidth level");
  return *largest;
}

/// Rates a measurement against the roofline under one traffic model. Uses
/// `level_name` when given, otherwise select_level on the kernel's footprint.
inline RooflineAssessment assess(const Measurement& m, const KernelSpec& spec, const MachineModel& model,
                                 TrafficModel traffic, std::optional<std::string> level_name = std::nullopt) {
  if (m.kernel_id != spec.id) throw MismatchedKernel("measurement of " + m.kernel_id + " assessed as " + spec.id);
  if (!(m.best_time > 0.0)) throw NonPositiveTime("best time must be positive");
  const ProblemShape shape = m.shape.rows != 0 ? m.shape : shape_for(spec.operation, m.n);
  const KernelCost c = cost(spec, shape);
  const BandwidthLevel& level = level_name ? model.level(*level_name) : select_level(model, c.footprint);

  RooflineAssessment a;
  a.kernel_id = spec.id;
  a.backend = m.backend;
  a.precision = spec.precision;
  a.layout = spec.layout;
  a.n = m.n;
  a.traffic_model = traffic;
  a.flops = c.flops;
  a.bytes = c.bytes(traffic);
  a.intensity = static_cast<double>(a.flops) / static_cast<double>(a.bytes);
  const Attainable roof = attainable(model, spec.precision, a.intensity, level.name);
  a.attainable_flops_per_s = roof.flops_per_s;
  a.bound = roof.bound;
  a.level_name = level.name;
  a.measured_flops_per_s = static_cast<double>(a.flops) / m.best_time;
  a.efficiency_eta = a.measured_flops_per_s / a.attainable_flops_per_s;
  return a;
}

// ---------------------------------------------------------------------------
// Cross-machine comparison
// ---------------------------------------------------------------------------

struct ComparisonKey {
  std::string kernel;
  Precision precision = Precision::f64;
  Layout layout = Layout::none;
  std::string backend;
  std::uint64_t n = 0;
  TrafficModel traffic_model = TrafficModel::realistic;

  auto tie() const { return std::tie(kernel, precision, layout, backend, n, traffic_model); }
  bool operator<(const ComparisonKey& o) const { return tie() < o.tie(); }
  bool operator==(const ComparisonKey& o) const { return tie() == o.tie(); }
};

struct ComparisonCell {
  double eta = 0.0;
  double perf_flops_per_s = 0.0;
};

struct ComparisonRow {
  ComparisonKey key;
  /// One entry per machine column; nullopt where that machine lacks the row.
  std::vector<std::optional<ComparisonCell>> cells;
  /// Column indices of present cells, highest eta first (ties by column).
  std::vector<std::size_t> ranking;
};

struct ComparisonTable {
  std::vector<std::string> machines;
  std::vector<ComparisonRow> rows;
  /// Unweighted geometric mean of eta per machine over its present rows, per
  /// traffic model. A convenience summary only.
  std::map<TrafficModel, std::vector<std::optional<double>>> geomean_eta;
};

/// Joins result sets on (kernel, precision, layout, backend, n, traffic model).
inline ComparisonTable compare(const std::vector<ResultSet>& sets) {
  if (sets.size() < 2) throw EmptyInput("compare needs at least two result sets");
  ComparisonTable t;
  std::map<std::string, int> seen;
  for (const auto& s : sets) {
    int k = ++seen[s.machine];
    t.machines.push_back(k == 1 ? s.machine : s.machine + "#" + std::to_string(k));
  }

  std::map<ComparisonKey, std::vector<std::optional<ComparisonCell>>> grid;
  for (std::size_t col = 0; col < sets.size(); ++col) {
    for (const auto& r : sets[col].results) {
      for (auto tm : kAllTrafficModels) {
        ComparisonKey key{r.kernel, r.precision, r.layout, r.backend, r.n, tm};
        auto& cells = grid[key];
        cells.resize(sets.size());
        cells[col] = ComparisonCell{r.eta(tm), r.perf_flops_per_s};
      }
    }
  }

  for (auto& [key, cells] : grid) {
    ComparisonRow row{key, cells, {}};
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (cells[c]) row.ranking.push_back(c);
    std::stable_sort(row.ranking.begin(), row.ranking.end(),
                     [&](std::size_t a, std::size_t b) { return cells[a]->eta > cells[b]->eta; });
    t.rows.push_back(std::move(row));
  }

  for (auto tm : kAllTrafficModels) {
    auto& means = t.geomean_eta[tm];
    for (std::size_t c = 0; c < sets.size(); ++c) {
      double log_sum = 0.0;
      std::size_t count = 0;
      for (const auto& row : t.rows)
        if (row.key.traffic_model == tm && row.cells[c] && row.cells[c]->eta > 0.0) {
          log_sum += std::log(row.cells[c]->eta);
          ++count;
        }
      means.push_back(count ? std::optional<double>(std::exp(log_sum / static_cast<double>(count))) : std::nullopt);
    }
  }
  return t;
}

enum class CompareView { by_kernel, by_machine };

namespace detail {

inline std::string fmt_double(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

inline std::string fmt_sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

inline std::string row_label(const ComparisonKey& k) {
  return k.kernel + " " + k.backend + " n=" + std::to_string(k.n) + " " + std::string(to_string(k.traffic_model));
}

}  // namespace detail

/// Aligned text. by_kernel: one line per row with a column per machine.
/// by_machine: one block per machine listing its rows.
inline std::string render_text(const ComparisonTable& t, CompareView view = CompareView::by_kernel) {
  std::ostringstream os;
  std::size_t label_w = 10;
  for (const auto& r : t.rows) label_w = std::max(label_w, detail::row_label(r.key).size());

  auto eta_cell = [](const std::optional<ComparisonCell>& c) {
    if (!c) return std::string("absent");
    std::string s = detail::fmt_double(c->eta) + " (" + detail::fmt_sci(c->perf_flops_per_s) + ")";
    if (c->eta > kEtaFlagThreshold) s += " !";
    return s;
  };

  if (view == CompareView::by_kernel) {
    const std::size_t col_w = 26;
    os << std::left << std::setw(static_cast<int>(label_w) + 2) << "row";
    for (const auto& m : t.machines) os << std::setw(col_w) << m;
    os << "best\n";
    for (const auto& r : t.rows) {
      os << std::setw(static_cast<int>(label_w) + 2) << detail::row_label(r.key);
      for (const auto& c : r.cells) os << std::setw(col_w) << eta_cell(c);
      os << (r.ranking.empty() ? "-" : t.machines[r.ranking.front()]) << '\n';
    }
  } else {
    for (std::size_t m = 0; m < t.machines.size(); ++m) {
      os << "== " << t.machines[m] << " ==\n";
      for (const auto& r : t.rows)
        os << "  " << std::left << std::setw(static_cast<int>(label_w) + 2) << detail::row_label(r.key)
           << eta_cell(r.cells[m]) << '\n';
    }
  }
  os << "geometric-mean eta (convenience aggregate):\n";
  for (auto tm : kAllTrafficModels) {
    os << "  " << std::left << std::setw(10) << to_string(tm);
    for (std::size_t m = 0; m < t.machines.size(); ++m) {
      const auto& g = t.geomean_eta.at(tm)[m];
      os << "  " << t.machines[m] << "=" << (g ? detail::fmt_double(*g) : std::string("n/a"));
    }
    os << '\n';
  }
  os << "eta values marked ! exceed " << kEtaFlagThreshold << " (model or calibration error)\n";
  return os.str();
}

/// JSON array: one {"kind":"row"} object per row, then one {"kind":"aggregate"}
/// object per traffic model carrying the geometric means.
inline nlohmann::ordered_json to_json(const ComparisonTable& t) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json row;
    row["kind"] = "row";
    row["kernel"] = r.key.kernel;
    row["precision"] = std::string(to_string(r.key.precision));
    row["layout"] = std::string(to_string(r.key.layout));
    row["backend"] = r.key.backend;
    row["n"] = r.key.n;
    row["traffic_model"] = std::string(to_string(r.key.traffic_model));
    row["columns"] = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < t.machines.size(); ++c) {
      nlohmann::ordered_json cell{{"machine", t.machines[c]}, {"present", r.cells[c].has_value()}};
      if (r.cells[c]) {
        cell["eta"] = r.cells[c]->eta;
        cell["perf_flops_per_s"] = r.cells[c]->perf_flops_per_s;
        cell["flagged"] = r.cells[c]->eta > kEtaFlagThreshold;
      }
      row["columns"].push_back(cell);
    }
    row["ranking"] = nlohmann::ordered_json::array();
    for (auto c : r.ranking) row["ranking"].push_back(t.machines[c]);
    out.push_back(row);
  }
  for (auto tm : kAllTrafficModels) {
    nlohmann::ordered_json agg{{"kind", "aggregate"}, {"statistic", "geomean_eta"},
                               {"traffic_model", std::string(to_string(tm))}};
    agg["values"] = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < t.machines.size(); ++c) {
      const auto& g = t.geomean_eta.at(tm)[c];
      agg["values"][t.machines[c]] = g ? nlohmann::ordered_json(*g) : nlohmann::ordered_json(nullptr);
    }
    out.push_back(agg);
  }
  return out;
}

}  // namespace hpcwb

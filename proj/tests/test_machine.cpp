#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "hpcwb/machine.hpp"
#include "hpcwb/timing.hpp"

using namespace hpcwb;

namespace {

MachineModel three_level() {
  MachineModel m;
  m.name = "synthetic";
  m.created = "2026-01-01T00:00:00Z";
  m.peaks = {{Precision::f32, 8e9}, {Precision::f64, 4e9}};
  m.levels = {{"L1", 32768, 1e11, LevelKind::cache},
              {"MEM", 1u << 30, 1e10, LevelKind::memory},
              {"NET", 1ull << 40, 1e9, LevelKind::network_reserved}};
  m.notes = "hand-written";
  return m;
}

std::string temp_path(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / ("hpcwb_" + stem + "_" + std::to_string(::getpid()) + ".json")).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

const char* kValidModel = R"({
  "name": "m", "created": "2026-01-01T00:00:00Z",
  "peaks": {"f32": 8e9, "f64": 4e9},
  "levels": [{"name": "L1", "working_set_bytes": 16384, "bandwidth_bytes_per_s": 1e11, "kind": "cache"},
             {"name": "MEM", "working_set_bytes": 536870912, "bandwidth_bytes_per_s": 1e10, "kind": "memory"}],
  "notes": ""
})";

}  // namespace

TEST(Counting, TriadBytesIncludeWriteAllocate) {
  EXPECT_EQ(triad_counted_bytes(1000, 8), 32000u);
  EXPECT_DOUBLE_EQ(bandwidth_from(32000, 1e-5), 3.2e9);
  EXPECT_DOUBLE_EQ(flops_rate(1e9, 0.5), 4e9);
  EXPECT_THROW(bandwidth_from(32000, 0.0), NonPositiveTime);
  EXPECT_THROW(flops_rate(1.0, -1.0), NonPositiveTime);
}

TEST(Calibration, RejectsBadArguments) {
  EXPECT_THROW(measure_triad(1 << 20, 2), PreconditionError);
  EXPECT_THROW(measure_triad(1024, 3), PreconditionError);
  std::vector<std::uint64_t> unordered{1 << 20, 1 << 16};
  EXPECT_THROW(calibrate_bandwidth(unordered, 3), PreconditionError);
  EXPECT_THROW(calibrate_peak_flops(Precision::f64, 3, 1), PreconditionError);
  EXPECT_THROW(calibrate_peak_flops(Precision::f64, 2), PreconditionError);
}

TEST(Calibration, MeasuresPositiveRates) {
  for (auto p : kAllPrecisions) {
    double peak = calibrate_peak_flops(p, 3);
    EXPECT_TRUE(std::isfinite(peak) && peak > 0.0);
  }
  std::vector<std::uint64_t> sizes{16384, 1 << 20};
  auto levels = calibrate_bandwidth(sizes, 3);
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_EQ(levels[0].name, "L1");
  EXPECT_EQ(levels[0].kind, LevelKind::cache);
  EXPECT_EQ(levels[1].name, "MEM");
  EXPECT_EQ(levels[1].kind, LevelKind::memory);
  for (const auto& l : levels) EXPECT_GT(l.bandwidth_bytes_per_s, 0.0);
}

TEST(Calibration, TriadSampleCountsFromSizeOnly) {
  auto s = measure_triad(24000, 3);
  EXPECT_EQ(s.elements, 1000u);
  EXPECT_EQ(s.counted_bytes, s.inner * 32000u);
  EXPECT_LE(s.best_time, s.median_time);
}

TEST(Calibration, FullModelWithPeakOverride) {
  CalibrationOptions o;
  o.name = "quick";
  o.working_sets = {16384, 262144};
  o.reps = 3;
  o.peak_f32_override = 1e12;
  o.peak_f64_override = 5e11;
  auto m = calibrate_machine(o);
  EXPECT_EQ(m.peak(Precision::f32), 1e12);
  EXPECT_EQ(m.peak(Precision::f64), 5e11);
  EXPECT_EQ(m.levels.size(), 2u);
  EXPECT_NO_THROW(m.validate());
}

TEST(Model, RoundTripIsLossless) {
  auto m = three_level();
  auto path = temp_path("roundtrip");
  save_model(m, path);
  auto back = load_model(path);
  EXPECT_EQ(back, m);
  std::remove(path.c_str());
}

TEST(Model, LookupErrors) {
  auto m = three_level();
  EXPECT_THROW(m.level("L7"), UnknownLevel);
  m.peaks.erase(Precision::f32);
  EXPECT_THROW(m.peak(Precision::f32), UnknownPrecision);
}

TEST(Model, InvariantViolations) {
  auto rule_of = [](const MachineModel& m) {
    try {
      m.validate();
    } catch (const InvariantError& e) {
      return e.rule();
    }
    return std::string();
  };
  auto m = three_level();
  m.levels[1].bandwidth_bytes_per_s = 0.0;
  EXPECT_EQ(rule_of(m), "levels.bandwidth_positive");
  m = three_level();
  std::swap(m.levels[0], m.levels[1]);
  EXPECT_EQ(rule_of(m), "levels.ordered");
  m = three_level();
  m.peaks[Precision::f64] = std::nan("");
  EXPECT_EQ(rule_of(m), "peaks.positive");
}

TEST(ModelFile, ZeroBandwidthRejected) {
  auto j = nlohmann::ordered_json::parse(kValidModel);
  EXPECT_NO_THROW(machine_model_from_json(j));
  j["levels"][0]["bandwidth_bytes_per_s"] = 0;
  EXPECT_THROW(machine_model_from_json(j), InvariantError);
}

TEST(ModelFile, OutOfOrderLevelsRejected) {
  auto j = nlohmann::ordered_json::parse(kValidModel);
  std::swap(j["levels"][0], j["levels"][1]);
  EXPECT_THROW(machine_model_from_json(j), InvariantError);
}

TEST(ModelFile, SchemaErrorsNameTheField) {
  auto field_of = [](const nlohmann::ordered_json& j) {
    try {
      machine_model_from_json(j);
    } catch (const SchemaError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  auto j = nlohmann::ordered_json::parse(kValidModel);
  j["extra"] = 1;
  EXPECT_EQ(field_of(j), "/extra");
  j = nlohmann::ordered_json::parse(kValidModel);
  j["levels"][1].erase("kind");
  EXPECT_EQ(field_of(j), "/levels/1/kind");
  j = nlohmann::ordered_json::parse(kValidModel);
  j["levels"][0]["kind"] = "disk";
  EXPECT_EQ(field_of(j), "/levels/0/kind");
  j = nlohmann::ordered_json::parse(kValidModel);
  j["peaks"]["f64"] = "fast";
  EXPECT_EQ(field_of(j), "/peaks/f64");

  auto path = temp_path("broken");
  write_file(path, "{ not json");
  EXPECT_THROW(load_model(path), SchemaError);
  std::remove(path.c_str());
}

TEST(ModelFile, NetworkLevelIsStored) {
  auto m = three_level();
  auto j = to_json(m);
  EXPECT_EQ(j["levels"][2]["kind"], "network-reserved");
  EXPECT_EQ(machine_model_from_json(j).levels[2].kind, LevelKind::network_reserved);
}

TEST(Sanity, WarningOnlyUnlessMemoryFarFaster) {
  std::vector<BandwidthLevel> ok{{"L1", 4096, 10, LevelKind::cache}, {"MEM", 8192, 5, LevelKind::memory}};
  EXPECT_EQ(check_bandwidth_sanity(ok), BandwidthSanity::ok);
  std::vector<BandwidthLevel> noisy{{"L1", 4096, 10, LevelKind::cache}, {"MEM", 8192, 15, LevelKind::memory}};
  EXPECT_EQ(check_bandwidth_sanity(noisy), BandwidthSanity::warning);
  std::vector<BandwidthLevel> broken{{"L1", 4096, 10, LevelKind::cache}, {"MEM", 8192, 25, LevelKind::memory}};
  EXPECT_EQ(check_bandwidth_sanity(broken), BandwidthSanity::violation);
}

TEST(Timing, OrderStatistics) {
  std::vector<double> t{3e-3, 2e-3, 4e-3};
  EXPECT_EQ(best_of(t), 2e-3);
  EXPECT_EQ(median_of(t), 3e-3);
  std::vector<double> even{1.0, 4.0, 2.0, 3.0};
  EXPECT_EQ(median_of(even), 2.5);
}

TEST(Timing, ClockResolutionIsPositive) {
  EXPECT_GT(clock_resolution(), 0.0);
  EXPECT_DOUBLE_EQ(min_timeable_seconds(), 100.0 * clock_resolution());
}

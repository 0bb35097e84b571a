#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hpcwb/kernels.hpp"
#include "hpcwb/roofline.hpp"

using namespace hpcwb;

namespace {

MachineModel simple_model(double peak = 4e9, double bw = 1e10) {
  MachineModel m;
  m.name = "simple";
  m.created = "2026-01-01T00:00:00Z";
  m.peaks = {{Precision::f32, 2 * peak}, {Precision::f64, peak}};
  m.levels = {{"L2", 1 << 20, 4 * bw, LevelKind::cache},
              {"MEM", 1ull << 34, bw, LevelKind::memory},
              {"NET", 1ull << 40, bw / 10, LevelKind::network_reserved}};
  return m;
}

Measurement axpy_measurement(double best) {
  Measurement m;
  m.kernel_id = "axpy_f64";
  m.backend = "reference";
  m.precision = Precision::f64;
  m.n = 1000;
  m.reps = 3;
  m.times = {best, best, best};
  m.best_time = m.median_time = best;
  return m;
}

ResultRow row(const std::string& kernel, std::uint64_t n, double eta_real, double eta_ideal, double perf) {
  ResultRow r;
  r.kernel = kernel;
  r.backend = "reference";
  r.precision = Precision::f64;
  r.n = n;
  r.reps = 3;
  r.time_best_s = 1e-3;
  r.time_median_s = 1e-3;
  r.flops = 2 * n;
  r.bytes_realistic = 32 * n;
  r.bytes_idealized = 24 * n;
  r.perf_flops_per_s = perf;
  r.eta_realistic = eta_real;
  r.eta_idealized = eta_ideal;
  r.level = "MEM";
  return r;
}

ResultSet set_of(const std::string& machine, std::vector<ResultRow> rows) {
  ResultSet s;
  s.machine = s.model_name = machine;
  s.created = "2026-01-01T00:00:00Z";
  s.seed = 42;
  s.results = std::move(rows);
  return s;
}

}  // namespace

TEST(Attainable, MemoryBoundAxpyExample) {
  auto a = attainable(4e9, 1e10, 1.0 / 12.0);
  EXPECT_NEAR(a.flops_per_s, 1e10 / 12.0, 1e-12 * 1e10 / 12.0);
  EXPECT_EQ(a.bound, Bound::memory);
}

TEST(Attainable, ComputeBoundAtUnitIntensity) {
  auto a = attainable(4e9, 1e10, 1.0);
  EXPECT_EQ(a.flops_per_s, 4e9);
  EXPECT_EQ(a.bound, Bound::compute);
}

TEST(Attainable, ZeroIntensityRejected) {
  EXPECT_THROW(attainable(4e9, 1e10, 0.0), PreconditionError);
  EXPECT_THROW(attainable(simple_model(), Precision::f64, 0.0, "MEM"), PreconditionError);
}

TEST(Attainable, BoundFlipsExactlyAtRidge) {
  const double peak = 4e9, bw = 1e10;
  const double ridge = ridge_point(peak, bw);
  EXPECT_EQ(attainable(peak, bw, ridge).bound, Bound::compute);
  EXPECT_EQ(attainable(peak, bw, std::nextafter(ridge, 0.0)).bound, Bound::memory);
  EXPECT_EQ(attainable(peak, bw, std::nextafter(ridge, 1.0)).bound, Bound::compute);
}

TEST(Attainable, MinFormAndMonotonicity) {
  for (double i : {0.01, 0.1, 0.4, 1.0, 10.0}) {
    auto a = attainable(4e9, 1e10, i);
    EXPECT_LE(a.flops_per_s, 4e9);
    EXPECT_LE(a.flops_per_s, 1e10 * i);
    EXPECT_LE(a.flops_per_s, attainable(4e9, 1e10, i * 2).flops_per_s);
    EXPECT_LE(a.flops_per_s, attainable(8e9, 1e10, i).flops_per_s);
    EXPECT_LE(a.flops_per_s, attainable(4e9, 2e10, i).flops_per_s);
  }
}

TEST(Attainable, LevelAndPrecisionLookup) {
  auto m = simple_model();
  EXPECT_THROW(attainable(m, Precision::f64, 0.1, "NET"), UnknownLevel);
  EXPECT_THROW(attainable(m, Precision::f64, 0.1, "L9"), UnknownLevel);
  m.peaks.erase(Precision::f32);
  EXPECT_THROW(attainable(m, Precision::f32, 0.1, "MEM"), UnknownPrecision);
}

TEST(LevelSelection, SmallestHoldingLevelThenLargest) {
  auto m = simple_model();
  EXPECT_EQ(select_level(m, 100).name, "L2");
  EXPECT_EQ(select_level(m, 1 << 20).name, "L2");
  EXPECT_EQ(select_level(m, (1 << 20) + 1).name, "MEM");
  EXPECT_EQ(select_level(m, 1ull << 38).name, "MEM");  // NET is never chosen
}

TEST(Assess, IdealizedAxpyExample) {
  auto a = assess(axpy_measurement(1e-5), KernelSpec::make(Operation::axpy, Precision::f64), simple_model(),
                  TrafficModel::idealized, "MEM");
  EXPECT_EQ(a.flops, 2000u);
  EXPECT_EQ(a.bytes, 24000u);
  EXPECT_DOUBLE_EQ(a.intensity, 1.0 / 12.0);
  EXPECT_NEAR(a.attainable_flops_per_s, 8.333333333333e8, 1e-3);
  EXPECT_DOUBLE_EQ(a.measured_flops_per_s, 2e8);
  EXPECT_NEAR(a.efficiency_eta, 0.24, 1e-12);
  EXPECT_EQ(a.bound, Bound::memory);
  EXPECT_EQ(a.level_name, "MEM");
}

TEST(Assess, RealisticAxpyExample) {
  auto a = assess(axpy_measurement(1e-5), KernelSpec::make(Operation::axpy, Precision::f64), simple_model(),
                  TrafficModel::realistic, "MEM");
  EXPECT_EQ(a.bytes, 32000u);
  EXPECT_DOUBLE_EQ(a.intensity, 1.0 / 16.0);
  EXPECT_NEAR(a.attainable_flops_per_s, 6.25e8, 1e-3);
  EXPECT_NEAR(a.efficiency_eta, 0.32, 1e-12);
}

TEST(Assess, DefaultLevelFromFootprint) {
  auto a = assess(axpy_measurement(1e-5), KernelSpec::make(Operation::axpy, Precision::f64), simple_model(),
                  TrafficModel::realistic);
  EXPECT_EQ(a.level_name, "L2");  // 16 KB of x and y fit the first level
}

TEST(Assess, Errors) {
  const auto spec = KernelSpec::make(Operation::dot, Precision::f64);
  EXPECT_THROW(assess(axpy_measurement(1e-5), spec, simple_model(), TrafficModel::realistic), MismatchedKernel);
  EXPECT_THROW(assess(axpy_measurement(0.0), KernelSpec::make(Operation::axpy, Precision::f64), simple_model(),
                      TrafficModel::realistic),
               NonPositiveTime);
}

TEST(Assess, IdealizedNeverAboveRealistic) {
  auto model = simple_model();
  for (const auto& s : Registry::standard_specs())
    for (std::uint64_t n : {1u, 10u, 1000u, 100000u}) {
      Measurement m = axpy_measurement(1e-4);
      m.kernel_id = s.id;
      m.precision = s.precision;
      m.layout = s.layout;
      m.n = n;
      auto r = assess(m, s, model, TrafficModel::realistic, "MEM");
      auto i = assess(m, s, model, TrafficModel::idealized, "MEM");
      EXPECT_LE(i.efficiency_eta, r.efficiency_eta) << s.id << " n=" << n;
    }
}

TEST(Assess, ScaleInvariance) {
  const auto spec = KernelSpec::make(Operation::axpy, Precision::f64);
  for (double best : {1e-5, 1e-7}) {
    auto base = assess(axpy_measurement(best), spec, simple_model(), TrafficModel::realistic, "MEM");
    for (double c : {0.5, 3.0, 10.0}) {
      auto scaled = assess(axpy_measurement(best / c), spec, simple_model(4e9 * c, 1e10 * c), TrafficModel::realistic, "MEM");
      EXPECT_NEAR(scaled.efficiency_eta / base.efficiency_eta, 1.0, 1e-12);
    }
  }
}

TEST(Compare, RanksHigherEtaFirst) {
  auto a = set_of("A", {row("axpy_f64", 1000, 0.8, 0.6, 8e8)});
  auto b = set_of("B", {row("axpy_f64", 1000, 0.4, 0.3, 4e8)});
  auto t = compare({b, a});
  ASSERT_EQ(t.machines, (std::vector<std::string>{"B", "A"}));
  for (const auto& r : t.rows) {
    ASSERT_EQ(r.ranking.size(), 2u);
    EXPECT_EQ(t.machines[r.ranking.front()], "A");
  }
  EXPECT_EQ(t.rows.size(), 2u);  // one row per traffic model
  EXPECT_DOUBLE_EQ(t.rows[0].key.traffic_model == TrafficModel::realistic ? t.rows[0].cells[1]->eta : t.rows[1].cells[1]->eta, 0.8);
}

TEST(Compare, IdenticalSetsGiveEqualColumns) {
  auto a = set_of("A", {row("axpy_f64", 1000, 0.8, 0.6, 8e8), row("dot_f64", 10, 0.5, 0.5, 1e8)});
  auto t = compare({a, a});
  EXPECT_EQ(t.machines, (std::vector<std::string>{"A", "A#2"}));
  for (const auto& r : t.rows) EXPECT_EQ(r.cells[0]->eta, r.cells[1]->eta);
}

TEST(Compare, AbsentRowsAreKept) {
  auto a = set_of("A", {row("axpy_f64", 1000, 0.8, 0.6, 8e8), row("dot_f64", 10, 0.5, 0.5, 1e8)});
  auto b = set_of("B", {row("axpy_f64", 1000, 0.4, 0.3, 4e8)});
  auto t = compare({a, b});
  EXPECT_EQ(t.rows.size(), 4u);
  int absent = 0;
  for (const auto& r : t.rows)
    if (!r.cells[1]) ++absent;
  EXPECT_EQ(absent, 2);
  auto text = render_text(t);
  EXPECT_NE(text.find("absent"), std::string::npos);
}

TEST(Compare, NeedsTwoSets) {
  EXPECT_THROW(compare({set_of("A", {})}), EmptyInput);
  EXPECT_THROW(compare({}), EmptyInput);
}

TEST(Compare, GeometricMeanAndJson) {
  auto a = set_of("A", {row("axpy_f64", 1000, 0.5, 0.25, 1), row("dot_f64", 10, 2.0, 1.0, 1)});
  auto b = set_of("B", {row("axpy_f64", 1000, 0.4, 0.3, 1)});
  auto t = compare({a, b});
  EXPECT_NEAR(*t.geomean_eta[TrafficModel::realistic][0], 1.0, 1e-15);
  EXPECT_NEAR(*t.geomean_eta[TrafficModel::idealized][0], 0.5, 1e-15);
  auto j = to_json(t);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.size(), t.rows.size() + 2);
  EXPECT_EQ(j[0]["kind"], "row");
  EXPECT_EQ(j[0]["columns"].size(), 2u);
  EXPECT_EQ(j.back()["kind"], "aggregate");
  EXPECT_EQ(j.back()["statistic"], "geomean_eta");
}

TEST(Compare, FlagsSuspiciousEta) {
  auto a = set_of("A", {row("axpy_f64", 1000, 1.1, 0.9, 1)});
  auto t = compare({a, a});
  auto text = render_text(t, CompareView::by_machine);
  EXPECT_NE(text.find("1.1 ("), std::string::npos);
  EXPECT_NE(text.find(" !"), std::string::npos);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "hpcwb/plot.hpp"
#include "xml_check.hpp"

using namespace hpcwb;

namespace {

MachineModel model() {
  MachineModel m;
  m.name = "box";
  m.created = "2026-01-01T00:00:00Z";
  m.peaks = {{Precision::f32, 8e9}, {Precision::f64, 4e9}};
  m.levels = {{"L1", 32768, 1e11, LevelKind::cache},
              {"MEM", 1ull << 32, 1e10, LevelKind::memory},
              {"NET", 1ull << 40, 1e9, LevelKind::network_reserved}};
  return m;
}

ResultRow axpy_row(Precision p, double perf, double eta_real = 0.5, double eta_ideal = 0.4) {
  ResultRow r;
  r.kernel = p == Precision::f64 ? "axpy_f64" : "axpy_f32";
  r.backend = "optimized";
  r.precision = p;
  r.n = 1 << 20;
  r.reps = 5;
  r.time_best_s = r.time_median_s = 1e-3;
  r.flops = 2 * r.n;
  const std::uint64_t e = p == Precision::f64 ? 8 : 4;
  r.bytes_realistic = 4 * e * r.n;
  r.bytes_idealized = 3 * e * r.n;
  r.perf_flops_per_s = perf;
  r.eta_realistic = eta_real;
  r.eta_idealized = eta_ideal;
  r.level = "MEM";
  return r;
}

ResultSet results(std::vector<ResultRow> rows) {
  ResultSet s;
  s.machine = s.model_name = "box";
  s.created = "2026-01-01T00:00:00Z";
  s.results = std::move(rows);
  return s;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Chart, RejectsResultsOfAnotherModel) {
  auto rs = results({axpy_row(Precision::f64, 1e8)});
  rs.model_name = "other";
  EXPECT_THROW(build_chart(rs, model()), ModelMismatch);
}

TEST(Chart, CeilingsPeaksAndRidges) {
  auto c = build_chart(results({axpy_row(Precision::f64, 1e8)}), model());
  ASSERT_EQ(c.ceilings.size(), 2u);  // network level is not drawn
  EXPECT_EQ(c.ceilings[0].level, "L1");
  EXPECT_EQ(c.ceilings[1].level, "MEM");
  ASSERT_EQ(c.peaks.size(), 1u);
  EXPECT_EQ(c.peaks[0].precision, Precision::f64);
  ASSERT_EQ(c.ridges.size(), 2u);
  EXPECT_DOUBLE_EQ(c.ridges[0].intensity, 4e9 / 1e11);
  EXPECT_DOUBLE_EQ(c.ridges[1].intensity, 4e9 / 1e10);
  EXPECT_EQ(c.points.size(), 2u);
  EXPECT_LE(c.axes.x_min, 1.0 / 16.0);
  EXPECT_GE(c.axes.y_max, 4e9);
}

TEST(Chart, OnePeakLinePerPrecisionInUse) {
  auto both = build_chart(results({axpy_row(Precision::f64, 1e8), axpy_row(Precision::f32, 2e8)}), model());
  EXPECT_EQ(both.peaks.size(), 2u);
  EXPECT_EQ(both.ridges.size(), 4u);
  auto svg = render_svg(both);
  EXPECT_EQ(count_of(svg, "class=\"peak\""), 2u);
  auto svg_one = render_svg(build_chart(results({axpy_row(Precision::f32, 2e8)}), model()));
  EXPECT_EQ(count_of(svg_one, "class=\"peak\""), 1u);
  EXPECT_EQ(count_of(svg_one, "class=\"ceiling\""), 2u);
}

TEST(Ascii, MinimumSizeAndGlyphs) {
  auto c = build_chart(results({axpy_row(Precision::f64, 1e8)}), model());
  for (auto [w, h] : {std::pair{72, 24}, std::pair{10, 5}}) {
    auto text = render_ascii(c, w, h);
    auto lines = lines_of(text);
    std::size_t grid_rows = std::count_if(lines.begin(), lines.end(), [](const std::string& l) {
      return l.size() > 8 && l[8] == '|';
    });
    EXPECT_GE(grid_rows, 20u);
    std::size_t widest = 0;
    for (const auto& l : lines)
      if (l.size() > 8 && l[8] == '|') widest = std::max(widest, l.size() - 9);
    EXPECT_GE(widest, 60u);
  }
  auto text = render_ascii(c);
  EXPECT_NE(text.find('o'), std::string::npos);
  EXPECT_NE(text.find('x'), std::string::npos);
  EXPECT_NE(text.find("ridge points"), std::string::npos);
}

TEST(Ascii, PointSitsBelowItsCeiling) {
  const double perf = 2e8;
  auto rs = results({axpy_row(Precision::f64, perf)});
  auto c = build_chart(rs, model());
  const int w = 72, h = 24;
  const double intensity = rs.results[0].intensity(TrafficModel::realistic);
  const double roof = std::min(4e9, 1e10 * intensity);
  auto pt = ascii_cell(c.axes, intensity, perf, w, h);
  auto top = ascii_cell(c.axes, intensity, roof, w, h);
  EXPECT_EQ(pt.col, top.col);
  EXPECT_GT(pt.row, top.row);  // rows count from the top

  auto lines = lines_of(render_ascii(c, w, h));
  ASSERT_GT(lines.size(), static_cast<std::size_t>(pt.row + 1));
  const auto& line = lines[static_cast<std::size_t>(pt.row) + 1];  // first line is the title
  EXPECT_EQ(line[9 + static_cast<std::size_t>(pt.col)], 'o');
}

TEST(Ascii, FlaggedPointsAreMarked) {
  auto c = build_chart(results({axpy_row(Precision::f64, 1e8, 1.3, 1.0)}), model());
  EXPECT_NE(render_ascii(c).find('!'), std::string::npos);
}

TEST(Svg, WellFormed) {
  auto rs = results({axpy_row(Precision::f64, 1e8), axpy_row(Precision::f32, 2e8, 1.2, 0.9)});
  rs.results[0].kernel = "a<b&c";
  auto svg = render_svg(build_chart(rs, model()));
  EXPECT_EQ(xml_problem(svg), "");
  EXPECT_EQ(count_of(svg, "class=\"point\""), 4u);
}

TEST(Svg, EmptyResultSetStillDraws) {
  auto svg = render_svg(build_chart(results({}), model()));
  EXPECT_EQ(xml_problem(svg), "");
  EXPECT_EQ(count_of(svg, "class=\"peak\""), 1u);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/machine.hpp"
#include "hpcwb/results.hpp"

namespace hpcwb {

/// Sloped roof y = bandwidth * I of one level.
struct Ceiling {
  std::string level;
  double bandwidth = 0.0;
  char glyph = '/';
};

/// Horizontal roof of one precision.
struct PeakLine {
  Precision precision = Precision::f64;
  double peak = 0.0;
  char glyph = '-';
};

/// Where a level's slope meets a peak: intensity peak / bandwidth.
struct RidgePoint {
  std::string level;
  Precision precision = Precision::f64;
  double intensity = 0.0;
  double flops_per_s = 0.0;
};

struct ChartPoint {
  std::string label;
  double intensity = 0.0;
  double flops_per_s = 0.0;
  TrafficModel traffic = TrafficModel::realistic;
  bool flagged = false;
};

/// Log-log axes; bounds are whole decades.
struct ChartAxes {
  double x_min = 0.01, x_max = 100.0;
  double y_min = 1e6, y_max = 1e12;

  double fx(double intensity) const { return (std::log10(intensity) - std::log10(x_min)) / decades_x(); }
  double fy(double flops) const { return (std::log10(flops) - std::log10(y_min)) / decades_y(); }
  double decades_x() const { return std::log10(x_max) - std::log10(x_min); }
  double decades_y() const { return std::log10(y_max) - std::log10(y_min); }
  double x_at(double fraction) const { return x_min * std::pow(10.0, fraction * decades_x()); }
};

struct RooflineChart {
  std::string title;
  ChartAxes axes;
  std::vector<Ceiling> ceilings;
  std::vector<PeakLine> peaks;
  std::vector<RidgePoint> ridges;
  std::vector<ChartPoint> points;

  double max_peak() const {
    double m = 0.0;
    for (const auto& p : peaks) m = std::max(m, p.peak);
    return m;
  }
};

/// One sloped ceiling per assessable level, one peak line per precision that
/// occurs in `results`, and a point for each of the two assessments of every
/// row. Throws ModelMismatch if the results name a different model.
inline RooflineChart build_chart(const ResultSet& results, const MachineModel& model) {
  if (results.model_name != model.name)
    throw ModelMismatch("results were assessed against model '" + results.model_name + "', not '" + model.name + "'");
  RooflineChart c;
  c.title = "roofline: " + model.name;

  std::set<Precision> used;
  for (const auto& r : results.results) used.insert(r.precision);
  if (used.empty()) used.insert(Precision::f64);
  const char peak_glyphs[] = {'-', '='};
  for (auto p : used) c.peaks.push_back({p, model.peak(p), peak_glyphs[static_cast<int>(p) % 2]});

  const std::string slope_glyphs = "/\\|:;";
  for (const auto& l : model.levels) {
    if (l.kind == LevelKind::network_reserved) continue;
    c.ceilings.push_back({l.name, l.bandwidth_bytes_per_s, slope_glyphs[c.ceilings.size() % slope_glyphs.size()]});
    for (const auto& pk : c.peaks) c.ridges.push_back({l.name, pk.precision, pk.peak / l.bandwidth_bytes_per_s, pk.peak});
  }

  for (const auto& r : results.results)
    for (auto tm : kAllTrafficModels)
      c.points.push_back({r.kernel + " " + r.backend + " n=" + std::to_string(r.n), r.intensity(tm), r.perf_flops_per_s,
                          tm, r.eta(tm) > kEtaFlagThreshold});

  double xlo = std::numeric_limits<double>::max(), xhi = 0.0;
  double ylo = std::numeric_limits<double>::max(), yhi = c.max_peak();
  for (const auto& rp : c.ridges) {
    xlo = std::min(xlo, rp.intensity);
    xhi = std::max(xhi, rp.intensity);
  }
  for (const auto& p : c.points) {
    if (!(p.intensity > 0.0) || !(p.flops_per_s > 0.0)) continue;
    xlo = std::min(xlo, p.intensity);
    xhi = std::max(xhi, p.intensity);
    ylo = std::min(ylo, p.flops_per_s);
    yhi = std::max(yhi, p.flops_per_s);
  }
  if (xhi == 0.0) xlo = xhi = 1.0;
  c.axes.x_min = std::pow(10.0, std::floor(std::log10(xlo)) - 1);
  c.axes.x_max = std::pow(10.0, std::ceil(std::log10(xhi)) + 1);
  for (const auto& cl : c.ceilings) ylo = std::min(ylo, cl.bandwidth * c.axes.x_min);
  if (ylo == std::numeric_limits<double>::max()) ylo = yhi / 1e3;
  c.axes.y_min = std::pow(10.0, std::floor(std::log10(ylo)));
  c.axes.y_max = std::pow(10.0, std::ceil(std::log10(yhi * 1.0001)));
  if (c.axes.y_max <= c.axes.y_min) c.axes.y_max = c.axes.y_min * 10.0;
  return c;
}

inline constexpr int kMinAsciiWidth = 60;
inline constexpr int kMinAsciiHeight = 20;

namespace detail {

inline std::string sci(double v, int digits = 3) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(digits) << v;
  return os.str();
}

inline std::string decade_label(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(std::log10(v))));
  return buf;
}

}  // namespace detail

/// Grid position of a value: column from the left, row from the top.
struct AsciiCell {
  int col = 0;
  int row = 0;
};

inline AsciiCell ascii_cell(const ChartAxes& axes, double intensity, double flops, int width, int height) {
  const double fx = axes.fx(intensity), fy = axes.fy(flops);
  return {static_cast<int>(std::lround(fx * (width - 1))), height - 1 - static_cast<int>(std::lround(fy * (height - 1)))};
}

/// Character chart with at least 60x20 plot cells. Points: o realistic,
/// x idealized, ! eta above the flag threshold.
inline std::string render_ascii(const RooflineChart& c, int width = 72, int height = 24) {
  width = std::max(width, kMinAsciiWidth);
  height = std::max(height, kMinAsciiHeight);
  std::vector<std::string> grid(static_cast<std::size_t>(height), std::string(static_cast<std::size_t>(width), ' '));
  auto put = [&](AsciiCell cell, char ch) {
    if (cell.col < 0 || cell.col >= width || cell.row < 0 || cell.row >= height) return;
    grid[static_cast<std::size_t>(cell.row)][static_cast<std::size_t>(cell.col)] = ch;
  };
  const double roof = c.max_peak();
  double first_ridge = std::numeric_limits<double>::max();
  for (const auto& r : c.ridges) first_ridge = std::min(first_ridge, r.intensity);

  for (const auto& pk : c.peaks)
    for (int col = 0; col < width; ++col) {
      const double x = c.axes.x_at(static_cast<double>(col) / (width - 1));
      if (x >= first_ridge * (1 - 1e-12) || pk.peak < roof) put(ascii_cell(c.axes, x, pk.peak, width, height), pk.glyph);
    }
  for (const auto& cl : c.ceilings) {
    // sample finely so steep slopes leave no gaps
    const int steps = width * 8;
    for (int s = 0; s <= steps; ++s) {
      const double x = c.axes.x_at(static_cast<double>(s) / steps);
      const double y = cl.bandwidth * x;
      if (y > roof || y < c.axes.y_min) continue;
      put(ascii_cell(c.axes, x, y, width, height), cl.glyph);
    }
  }
  for (const auto& p : c.points) {
    if (!(p.intensity > 0.0) || !(p.flops_per_s > 0.0)) continue;
    put(ascii_cell(c.axes, p.intensity, p.flops_per_s, width, height),
        p.flagged ? '!' : (p.traffic == TrafficModel::realistic ? 'o' : 'x'));
  }

  std::ostringstream os;
  os << c.title << "  (log-log; x: intensity [flop/byte], y: performance [flop/s])\n";
  const int label_w = 7;
  for (int row = 0; row < height; ++row) {
    std::string label;
    for (double d = c.axes.y_min; d <= c.axes.y_max * 1.0001; d *= 10.0)
      if (ascii_cell(c.axes, 1.0, d, width, height).row == row) label = detail::decade_label(d);
    os << std::setw(label_w) << label << " |" << grid[static_cast<std::size_t>(row)] << '\n';
  }
  os << std::string(label_w, ' ') << " +" << std::string(static_cast<std::size_t>(width), '-') << '\n';
  std::string ticks(static_cast<std::size_t>(width) + 12, ' ');
  for (double d = c.axes.x_min; d <= c.axes.x_max * 1.0001; d *= 10.0) {
    const int col = ascii_cell(c.axes, d, c.axes.y_min, width, height).col;
    const std::string lab = detail::decade_label(d);
    for (std::size_t k = 0; k < lab.size(); ++k) ticks[static_cast<std::size_t>(col) + k] = lab[k];
  }
  os << std::string(label_w + 2, ' ') << ticks << '\n';
  os << "legend:\n";
  for (const auto& cl : c.ceilings) os << "  " << cl.glyph << "  " << cl.level << " " << detail::sci(cl.bandwidth) << " B/s\n";
  for (const auto& pk : c.peaks)
    os << "  " << pk.glyph << "  peak " << to_string(pk.precision) << " " << detail::sci(pk.peak) << " flop/s\n";
  os << "  o  realistic traffic   x  idealized traffic   !  eta > " << kEtaFlagThreshold << '\n';
  os << "ridge points:\n";
  for (const auto& r : c.ridges)
    os << "  " << r.level << "/" << to_string(r.precision) << " at I = " << detail::sci(r.intensity) << '\n';
  return os.str();
}

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

/// Standalone SVG document of the same chart.
inline std::string render_svg(const RooflineChart& c, int width = 900, int height = 600) {
  const double left = 80, right = 220, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto X = [&](double intensity) { return left + c.axes.fx(intensity) * pw; };
  auto Y = [&](double flops) { return top + (1.0 - c.axes.fy(flops)) * ph; };
  const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double roof = c.max_peak();

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
     << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "  <title>" << detail::svg_escape(c.title) << "</title>\n";
  os << "  <rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (double d = c.axes.x_min; d <= c.axes.x_max * 1.0001; d *= 10.0)
    os << "  <line x1=\"" << X(d) << "\" y1=\"" << top << "\" x2=\"" << X(d) << "\" y2=\"" << top + ph
       << "\" stroke=\"#ddd\"/>\n  <text x=\"" << X(d) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
       << detail::decade_label(d) << "</text>\n";
  for (double d = c.axes.y_min; d <= c.axes.y_max * 1.0001; d *= 10.0)
    os << "  <line x1=\"" << left << "\" y1=\"" << Y(d) << "\" x2=\"" << left + pw << "\" y2=\"" << Y(d)
       << "\" stroke=\"#ddd\"/>\n  <text x=\"" << left - 6 << "\" y=\"" << Y(d) + 4 << "\" text-anchor=\"end\">"
       << detail::decade_label(d) << "</text>\n";
  os << "  <text x=\"" << left + pw / 2 << "\" y=\"" << height - 15
     << "\" text-anchor=\"middle\">arithmetic intensity [flop/byte]</text>\n";
  os << "  <text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2
     << ")\">performance [flop/s]</text>\n";
  os << "  <text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << detail::svg_escape(c.title) << "</text>\n";

  double legend_y = top + 10;
  for (std::size_t i = 0; i < c.ceilings.size(); ++i) {
    const auto& cl = c.ceilings[i];
    const double x0 = c.axes.x_min, y0 = cl.bandwidth * x0;
    const double x1 = roof / cl.bandwidth;
    os << "  <line class=\"ceiling\" x1=\"" << X(x0) << "\" y1=\"" << Y(y0) << "\" x2=\"" << X(x1) << "\" y2=\""
       << Y(roof) << "\" stroke=\"" << colors[i % 6] << "\" stroke-width=\"1.5\"/>\n";
    os << "  <text x=\"" << left + pw + 10 << "\" y=\"" << legend_y << "\" fill=\"" << colors[i % 6] << "\">"
       << detail::svg_escape(cl.level) << ' ' << detail::sci(cl.bandwidth, 2) << " B/s</text>\n";
    legend_y += 16;
  }
  double first_ridge = std::numeric_limits<double>::max();
  for (const auto& r : c.ridges) first_ridge = std::min(first_ridge, r.intensity);
  for (const auto& pk : c.peaks) {
    const double start = pk.peak < roof ? c.axes.x_min : std::max(first_ridge, c.axes.x_min);
    os << "  <line class=\"peak\" x1=\"" << X(start) << "\" y1=\"" << Y(pk.peak) << "\" x2=\"" << X(c.axes.x_max)
       << "\" y2=\"" << Y(pk.peak) << "\" stroke=\"#d62728\" stroke-width=\"2\""
       << (pk.precision == Precision::f32 ? " stroke-dasharray=\"6 3\"" : "") << "/>\n";
    os << "  <text x=\"" << left + pw + 10 << "\" y=\"" << legend_y << "\" fill=\"#d62728\">peak "
       << to_string(pk.precision) << ' ' << detail::sci(pk.peak, 2) << "</text>\n";
    legend_y += 16;
  }
  for (const auto& r : c.ridges)
    os << "  <circle class=\"ridge\" cx=\"" << X(r.intensity) << "\" cy=\"" << Y(r.flops_per_s)
       << "\" r=\"2\" fill=\"#000\"><title>ridge " << detail::svg_escape(r.level) << '/' << to_string(r.precision)
       << " I=" << detail::sci(r.intensity) << "</title></circle>\n";
  for (const auto& p : c.points) {
    if (!(p.intensity > 0.0) || !(p.flops_per_s > 0.0)) continue;
    const bool real = p.traffic == TrafficModel::realistic;
    os << "  <circle class=\"point\" cx=\"" << X(p.intensity) << "\" cy=\"" << Y(p.flops_per_s) << "\" r=\"4\" fill=\""
       << (real ? "#ff7f0e" : "none") << "\" stroke=\"" << (p.flagged ? "#d62728" : "#ff7f0e") << "\"><title>"
       << detail::svg_escape(p.label) << ' ' << to_string(p.traffic) << "</title></circle>\n";
  }
  os << "  <text x=\"" << left + pw + 10 << "\" y=\"" << legend_y + 8
     << "\">filled: realistic, hollow: idealized</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace hpcwb

#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "hpcwb/bench.hpp"
#include "hpcwb/error.hpp"
#include "hpcwb/kernels.hpp"
#include "hpcwb/machine.hpp"
#include "hpcwb/partest/plan.hpp"
#include "hpcwb/partest/report.hpp"
#include "hpcwb/partest/runner.hpp"
#include "hpcwb/plot.hpp"
#include "hpcwb/results.hpp"
#include "hpcwb/roofline.hpp"

namespace hpcwb::cli {

enum ExitStatus : int { kSuccess = 0, kFailures = 1, kUsage = 2, kRuntime = 3 };

/// Bad flag values; maps to exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::uint64_t parse_uint(std::string_view digits, std::string_view whole) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
    throw UsageError("cannot parse '" + std::string(whole) + "' as a number");
  return v;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, std::string_view whole) {
  if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b)
    throw UsageError("'" + std::string(whole) + "' is too large");
  return a * b;
}

}  // namespace detail

/// "4096", "16KiB", "8MiB", "1GiB" (also K/M/G, KB/MB/GB; all binary).
inline std::uint64_t parse_byte_size(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  const auto number = detail::parse_uint(text.substr(0, i), text);
  const std::string unit = detail::lower(text.substr(i));
  std::uint64_t mult = 1;
  if (unit.empty() || unit == "b")
    mult = 1;
  else if (unit == "k" || unit == "kb" || unit == "kib")
    mult = 1ull << 10;
  else if (unit == "m" || unit == "mb" || unit == "mib")
    mult = 1ull << 20;
  else if (unit == "g" || unit == "gb" || unit == "gib")
    mult = 1ull << 30;
  else
    throw UsageError("unknown size unit in '" + std::string(text) + "' (use KiB, MiB or GiB)");
  return detail::checked_mul(number, mult, text);
}

/// Comma separated byte sizes.
inline std::vector<std::uint64_t> parse_byte_sizes(std::string_view text) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_byte_size(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Element count with an optional binary k/M/G suffix: "1k" is 1024.
inline std::uint64_t parse_count(std::string_view text) {
  if (text.empty()) throw UsageError("empty size");
  std::uint64_t mult = 1;
  std::string_view digits = text;
  switch (text.back()) {
    case 'k': case 'K': mult = 1ull << 10; digits.remove_suffix(1); break;
    case 'm': case 'M': mult = 1ull << 20; digits.remove_suffix(1); break;
    case 'g': case 'G': mult = 1ull << 30; digits.remove_suffix(1); break;
    default: break;
  }
  return detail::checked_mul(detail::parse_uint(digits, text), mult, text);
}

/// "start:stop:*factor" (geometric), "start:stop:+step" (arithmetic), or a
/// comma list. Range ends are inclusive when hit exactly.
inline std::vector<std::uint64_t> parse_size_range(std::string_view text) {
  std::vector<std::uint64_t> out;
  const auto c1 = text.find(':');
  if (c1 == std::string_view::npos) {
    std::size_t start = 0;
    for (;;) {
      const auto comma = text.find(',', start);
      out.push_back(parse_count(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw UsageError("size range must look like start:stop:*factor");
    const auto first = parse_count(text.substr(0, c1));
    const auto last = parse_count(text.substr(c1 + 1, c2 - c1 - 1));
    const auto step_text = text.substr(c2 + 1);
    if (step_text.size() < 2 || (step_text[0] != '*' && step_text[0] != '+'))
      throw UsageError("size range step must be *factor or +step");
    const auto step = parse_count(step_text.substr(1));
    const bool geometric = step_text[0] == '*';
    if (first == 0 || first > last) throw UsageError("size range needs 0 < start <= stop");
    if (step < (geometric ? 2u : 1u)) throw UsageError("size range step does not advance");
    for (std::uint64_t n = first; n <= last;) {
      out.push_back(n);
      if (geometric ? n > last / step : n > last - step) break;
      n = geometric ? n * step : n + step;
    }
  }
  for (auto n : out)
    if (n == 0) throw UsageError("sizes must be >= 1");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw UsageError("sizes must be strictly increasing");
  return out;
}

/// Default data seed, or HPCWB_SEED when set.
inline std::uint64_t seed_from_env(std::uint64_t fallback = kDefaultSeed) {
  const char* env = std::getenv("HPCWB_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  return detail::parse_uint(env, std::string("HPCWB_SEED=") + env);
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path);
}

inline std::string level_table(const MachineModel& m) {
  std::ostringstream os;
  os << "model " << m.name << "\n";
  for (const auto& [p, v] : m.peaks) os << "  peak " << to_string(p) << "  " << std::scientific << std::setprecision(3) << v << " flop/s\n";
  os << "  " << std::left << std::setw(8) << "level" << std::setw(10) << "kind" << std::setw(16) << "working set"
     << "bandwidth [B/s]\n";
  for (const auto& l : m.levels)
    os << "  " << std::setw(8) << l.name << std::setw(10) << to_string(l.kind) << std::setw(16) << l.working_set_bytes
       << std::scientific << std::setprecision(3) << l.bandwidth_bytes_per_s << "\n";
  return os.str();
}

inline std::string results_table(const ResultSet& rs) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "kernel" << std::setw(11) << "backend" << std::setw(11) << "n" << std::setw(12)
     << "best [s]" << std::setw(12) << "flop/s" << std::setw(10) << "eta_real" << std::setw(10) << "eta_ideal"
     << std::setw(9) << "bound" << "level\n";
  for (const auto& r : rs.results) {
    os << std::setw(18) << r.kernel << std::setw(11) << r.backend << std::setw(11) << r.n << std::setw(12)
       << hpcwb::detail::fmt_sci(r.time_best_s) << std::setw(12) << hpcwb::detail::fmt_sci(r.perf_flops_per_s)
       << std::setw(10) << hpcwb::detail::fmt_double(r.eta_realistic) << std::setw(10)
       << hpcwb::detail::fmt_double(r.eta_idealized) << std::setw(9) << to_string(r.bound) << r.level
       << (r.flagged() ? "  ! eta above " + hpcwb::detail::fmt_double(kEtaFlagThreshold) : "") << "\n";
  }
  for (const auto& f : rs.failures) os << "FAILED " << f.kernel << " " << f.backend << " n=" << f.n << ": " << f.reason << "\n";
  return os.str();
}

}  // namespace detail

struct CalibrateArgs {
  std::string out;
  std::string sizes = "16KiB,256KiB,8MiB,512MiB";
  int reps = BenchOptions{}.reps;
  std::string name = "machine";
  std::optional<double> peak_f32, peak_f64;
};

inline int cmd_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream& err) {
  CalibrationOptions opts;
  opts.name = a.name;
  opts.reps = a.reps;
  opts.working_sets = parse_byte_sizes(a.sizes);
  for (auto ws : opts.working_sets)
    if (ws < kMinWorkingSetBytes) throw UsageError("working set " + std::to_string(ws) + " B is below the 4 KiB minimum");
  for (std::size_t i = 1; i < opts.working_sets.size(); ++i)
    if (opts.working_sets[i] <= opts.working_sets[i - 1]) throw UsageError("--sizes must be strictly increasing");
  if (a.reps < kMinCalibrationReps) throw UsageError("--reps must be >= " + std::to_string(kMinCalibrationReps));
  opts.peak_f32_override = a.peak_f32;
  opts.peak_f64_override = a.peak_f64;
  for (auto p : {a.peak_f32, a.peak_f64})
    if (p && !(*p > 0.0 && std::isfinite(*p))) throw UsageError("peak overrides must be positive");

  MachineModel m = calibrate_machine(opts);
  switch (check_bandwidth_sanity(m.levels)) {
    case BandwidthSanity::ok: break;
    case BandwidthSanity::warning:
      err << "warning: largest working set measured faster than the smallest (timing noise?)\n";
      break;
    case BandwidthSanity::violation:
      throw Error("calibration implausible: memory bandwidth exceeds first-level bandwidth by more than 2x");
  }
  save_model(m, a.out);
  out << detail::level_table(m);
  out << "wrote " << a.out << "\n";
  return kSuccess;
}

struct BenchArgs {
  std::string model;
  std::string kernel = "all";
  std::string backend = "all";
  std::string sizes = "1k:1M:*4";
  std::string out;
  int reps = BenchOptions{}.reps;
  std::optional<std::string> level;
};

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto sizes = parse_size_range(a.sizes);
  const Registry registry = make_registry();
  VariantFilter filter = VariantFilter::parse(a.kernel);
  if (a.backend != "all") filter.backend = a.backend;
  if (filter.kernel_id && !registry.find_spec(*filter.kernel_id)) {
    std::string ids;
    for (const auto& id : registry.kernel_ids()) ids += " " + id;
    throw UsageError("unknown kernel '" + a.kernel + "'; valid: all, an operation name, or one of:" + ids);
  }
  if (filter.backend && !registry.find_backend(*filter.backend)) {
    std::string names;
    for (const auto& n : registry.backend_names()) names += " " + n;
    throw UsageError("unknown backend '" + a.backend + "'; valid: all" + names);
  }
  if (a.reps < 3) throw UsageError("--reps must be >= 3");
  const MachineModel model = load_model(a.model);
  if (a.level) model.level(*a.level);

  BenchOptions opts;
  opts.reps = a.reps;
  opts.seed = seed_from_env();
  ResultSet all;
  all.machine = all.model_name = model.name;
  all.created = iso8601_now();
  all.seed = opts.seed;
  for (const auto& v : registry.list_variants(filter)) {
    err << "bench " << v.label() << " ...\n";
    append(all, sweep(v, sizes, model, LevelPolicy{a.level}, opts));
  }
  out << detail::results_table(all);
  if (all.results.empty()) throw Error("every measurement failed");
  if (!a.out.empty()) {
    save_result_set(all, a.out);
    out << "wrote " << a.out << "\n";
  }
  return kSuccess;
}

struct TestArgs {
  std::string plan = "full";
  std::size_t ranks = 4;
  double timeout = kDefaultWatchdogSeconds;
  std::string report = "text";
  std::string out;
  std::vector<std::string> traps;
};

inline int cmd_test(const TestArgs& a, std::ostream& out, std::ostream&) {
  const auto strategy = partest::parse_strategy(a.plan);
  if (a.ranks == 0) throw UsageError("--ranks must be >= 1");
  if (a.report != "text" && a.report != "junit") throw UsageError("--report must be text or junit");
  std::vector<Trap> traps;
  for (const auto& t : a.traps) {
    if (t == "unaligned")
      traps.push_back(Trap::unaligned);
    else if (t == "unordered")
      traps.push_back(Trap::unordered);
    else
      throw UsageError("unknown trap '" + t + "'");
  }
  if (!(a.timeout > 0.0) || !std::isfinite(a.timeout)) throw Error("watchdog timeout must be positive and finite");

  const Registry registry = make_registry(traps);
  auto dims = partest::default_dimensions(registry);
  for (auto& d : dims)
    if (d.name == partest::kDimRanks) d.levels = a.ranks == 1 ? std::vector<std::string>{"1"}
                                                              : std::vector<std::string>{"1", std::to_string(a.ranks)};
  const auto plan = partest::build_plan(dims, strategy);
  partest::SuiteOptions opts;
  opts.timeout_seconds = a.timeout;
  opts.seed = seed_from_env();
  opts.vector_size = std::max(partest::kDefaultVectorSize, a.ranks);
  const auto res = partest::run_suite(plan, registry, opts);
  detail::write_text(a.out, a.report == "junit" ? partest::render_junit(res) : partest::render_text(res), out);
  if (!a.out.empty() && a.out != "-")
    out << "summary: " << res.summary.pass << " passed, " << res.summary.fail << " failed, " << res.summary.error
        << " errors, " << res.summary.skipped << " skipped\n";
  return res.summary.fail + res.summary.error > 0 ? kFailures : kSuccess;
}

struct CompareArgs {
  std::vector<std::string> files;
  std::string by = "kernel";
  std::optional<std::string> json;
};

inline int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  if (a.files.size() < 2) throw UsageError("compare needs at least two result files");
  if (a.by != "kernel" && a.by != "machine") throw UsageError("--by must be kernel or machine");
  std::vector<ResultSet> sets;
  for (const auto& f : a.files) {
    try {
      sets.push_back(load_result_set(f));
    } catch (const SchemaError&) {
      err << "while reading " << f << "\n";
      throw;
    }
  }
  const auto table = compare(sets);
  const bool json_to_stdout = a.json && (a.json->empty() || *a.json == "-");
  if (!json_to_stdout) out << render_text(table, a.by == "machine" ? CompareView::by_machine : CompareView::by_kernel);
  if (a.json) detail::write_text(json_to_stdout ? "" : *a.json, to_json(table).dump(2) + "\n", out);
  return kSuccess;
}

struct PlotArgs {
  std::string results;
  std::string model;
  std::string format = "ascii";
  std::string out;
  int width = 72;
  int height = 24;
};

inline int cmd_plot(const PlotArgs& a, std::ostream& out, std::ostream&) {
  if (a.format != "ascii" && a.format != "svg") throw UsageError("--format must be ascii or svg");
  if (a.width < kMinAsciiWidth || a.height < kMinAsciiHeight) throw UsageError("ascii charts need at least 60x20 cells");
  const auto rs = load_result_set(a.results);
  const auto model = load_model(a.model);
  const auto chart = build_chart(rs, model);
  detail::write_text(a.out, a.format == "svg" ? render_svg(chart) : render_ascii(chart, a.width, a.height), out);
  return kSuccess;
}

/// Parses argv and dispatches. Returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"hpcwb: roofline benchmarking and parallel test-matrix workbench"};
  app.require_subcommand(1);

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Measure peak flop rates and bandwidth levels; write a machine model");
  c->add_option("--out", cal.out, "Model file to write")->required();
  c->add_option("--sizes", cal.sizes, "Working-set sizes, e.g. 16KiB,256KiB,8MiB,512MiB")->capture_default_str();
  c->add_option("--reps", cal.reps, "Repetitions per measurement (>= 3)")->capture_default_str();
  c->add_option("--name", cal.name, "Machine name")->capture_default_str();
  c->add_option("--peak-f32", cal.peak_f32, "Use this f32 peak [flop/s] instead of measuring");
  c->add_option("--peak-f64", cal.peak_f64, "Use this f64 peak [flop/s] instead of measuring");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Sweep kernels over sizes and assess them against the roofline");
  b->add_option("--model", bench.model, "Machine model file")->required();
  b->add_option("--kernel", bench.kernel, "Kernel id, operation name, or all")->capture_default_str();
  b->add_option("--backend", bench.backend, "Backend name or all")->capture_default_str();
  b->add_option("--sizes", bench.sizes, "start:stop:*factor, start:stop:+step or a comma list")->capture_default_str();
  b->add_option("--out", bench.out, "Result file to write");
  b->add_option("--reps", bench.reps, "Timed repetitions per size")->capture_default_str();
  b->add_option("--level", bench.level, "Assess every size against this bandwidth level");

  TestArgs test;
  auto* t = app.add_subcommand("test", "Run the combinatorial correctness suite");
  t->add_option("--plan", test.plan, "full or pairwise")->capture_default_str();
  t->add_option("--ranks", test.ranks, "Rank count of the multi-rank level")->capture_default_str();
  t->add_option("--timeout", test.timeout, "Watchdog timeout in seconds")->capture_default_str();
  t->add_option("--report", test.report, "text or junit")->capture_default_str();
  t->add_option("--out", test.out, "Report file (default: standard output)");
  t->add_option("--enable-trap", test.traps)->group("");

  CompareArgs cmp;
  auto* m = app.add_subcommand("compare", "Join result files and compare efficiency across machines");
  m->add_option("files", cmp.files, "Result files");
  m->add_option("--by", cmp.by, "kernel or machine")->capture_default_str();
  m->add_option("--json", cmp.json, "Also write the table as JSON to PATH (- for standard output)")->expected(0, 1);

  PlotArgs plot;
  auto* p = app.add_subcommand("plot", "Draw the roofline chart of a result file");
  p->add_option("results", plot.results, "Result file")->required();
  p->add_option("--model", plot.model, "Machine model file")->required();
  p->add_option("--format", plot.format, "ascii or svg")->capture_default_str();
  p->add_option("--out", plot.out, "Output file (default: standard output)");
  p->add_option("--width", plot.width, "ascii plot width")->capture_default_str();
  p->add_option("--height", plot.height, "ascii plot height")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help requests come through here with exit code 0
    return app.exit(e, out, err) == 0 ? kSuccess : kUsage;
  }

  try {
    if (c->parsed()) return cmd_calibrate(cal, out, err);
    if (b->parsed()) return cmd_bench(bench, out, err);
    if (t->parsed()) return cmd_test(test, out, err);
    if (m->parsed()) return cmd_compare(cmp, out, err);
    if (p->parsed()) return cmd_plot(plot, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SchemaError& e) {
    err << "error: schema violation at " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace hpcwb::cli

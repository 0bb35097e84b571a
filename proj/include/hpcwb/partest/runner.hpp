#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/kernels.hpp"
#include "hpcwb/numeric.hpp"
#include "hpcwb/partest/plan.hpp"
#include "hpcwb/simgroup.hpp"
#include "hpcwb/types.hpp"

namespace hpcwb::partest {

enum class Verdict { pass, fail, error, skipped };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::error: return "error";
    case Verdict::skipped: return "skipped";
  }
  return "?";
}

/// What one rank saw of its assertions. `gathered` is filled on rank 0 only:
/// every failing rank's message, prefixed and in rank order.
struct AssertLog {
  bool all_passed = true;
  std::vector<std::string> local_failures;
  std::vector<std::string> gathered;
};

/// Agrees on `local_condition` across the group. A failing rank only records
/// its message and carries on, so the others are never left waiting.
inline bool collective_assert(Communicator& comm, bool local_condition, const std::string& message,
                              AssertLog* log = nullptr) {
  if (!local_condition && log) log->local_failures.push_back(message);
  const bool verdict = comm.allreduce(local_condition, ReduceOp::logical_and);
  auto messages = comm.gather<std::string>(0, local_condition ? std::string() : message);
  if (log) {
    if (!verdict) log->all_passed = false;
    for (std::size_t r = 0; r < messages.size(); ++r)
      if (!messages[r].empty()) log->gathered.push_back("rank " + std::to_string(r) + ": " + messages[r]);
  }
  return verdict;
}

/// Decoded coordinates of a case. Dimensions absent from the plan take the
/// first default level.
struct CaseParams {
  Precision precision = Precision::f64;
  Layout layout = Layout::row_major;
  std::size_t offset = 0;
  std::shared_ptr<const Backend> backend;
  std::shared_ptr<const Backend> reference;
  std::size_t ranks = 1;
};

struct CaseContext {
  Communicator& comm;
  const CaseParams& params;
  std::size_t vector_size;
  DataOptions data;
  AssertLog log;

  bool check(bool condition, const std::string& message) {
    return collective_assert(comm, condition, message, &log);
  }
};

/// A test body; it is run by every rank of the case's group.
using CaseBody = std::function<void(CaseContext&)>;

struct RankReport {
  std::size_t rank = 0;
  Verdict verdict = Verdict::pass;
  std::vector<std::string> messages;
};

struct TestOutcome {
  TestCase test_case;
  std::string name;
  Verdict verdict = Verdict::pass;
  std::vector<RankReport> per_rank;
  /// Report lines: gathered failure messages, or the reason for skip/error.
  std::vector<std::string> messages;
  double duration_seconds = 0.0;
};

struct SuiteSummary {
  std::size_t pass = 0, fail = 0, error = 0, skipped = 0;
  std::size_t total() const noexcept { return pass + fail + error + skipped; }
};

struct SuiteResult {
  TestPlan plan;
  std::vector<TestOutcome> outcomes;
  SuiteSummary summary;
};

inline constexpr std::size_t kDefaultVectorSize = 67;

struct SuiteOptions {
  double timeout_seconds = kDefaultWatchdogSeconds;
  std::size_t vector_size = kDefaultVectorSize;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::uint64_t> jitter_seed;
  /// Operations the body exercises; every one must be supported or the case is skipped.
  std::vector<Operation> operations{kAllOperations.begin(), kAllOperations.end()};
};

/// pass only if every rank passed; any error makes the case an error.
inline Verdict fold_verdicts(const std::vector<RankReport>& ranks) {
  bool failed = false;
  for (const auto& r : ranks) {
    if (r.verdict == Verdict::error) return Verdict::error;
    if (r.verdict == Verdict::skipped) return Verdict::skipped;
    failed = failed || r.verdict == Verdict::fail;
  }
  return failed ? Verdict::fail : Verdict::pass;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> block_range(std::size_t n, std::size_t ranks, std::size_t rank) {
  const std::size_t base = n / ranks, extra = n % ranks;
  const std::size_t lo = rank * base + std::min(rank, extra);
  return {lo, lo + base + (rank < extra ? 1 : 0)};
}

/// The part of `g` owned by rows/elements [lo, hi).
template <typename T>
KernelInputs<T> local_inputs(const KernelSpec& spec, const KernelInputs<T>& g, std::size_t lo, std::size_t hi) {
  KernelInputs<T> in;
  in.alpha = g.alpha;
  auto slice = [&](const std::vector<T>& v) { return std::vector<T>(v.begin() + lo, v.begin() + hi); };
  switch (spec.operation) {
    case Operation::axpy:
    case Operation::dot:
      in.x = slice(g.x);
      in.y = slice(g.y);
      break;
    case Operation::scale: in.x = slice(g.x); break;
    case Operation::csr_spmv:
      in.csr = row_block(g.csr, lo, hi);
      in.x = g.x;
      in.y = slice(g.y);
      break;
    case Operation::dense_mv: {
      in.rows = hi - lo;
      in.cols = g.cols;
      in.a.resize(in.rows * in.cols);
      for (std::size_t i = lo; i < hi; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) {
          const T v = spec.layout == Layout::col_major ? g.a[j * g.rows + i] : g.a[i * g.cols + j];
          if (spec.layout == Layout::col_major)
            in.a[j * in.rows + (i - lo)] = v;
          else
            in.a[(i - lo) * in.cols + j] = v;
        }
      in.x = g.x;
      in.y = slice(g.y);
      break;
    }
  }
  return in;
}

template <typename T>
std::pair<std::uint64_t, std::size_t> max_ulp(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return {std::numeric_limits<std::uint64_t>::max(), 0};
  std::uint64_t worst = 0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto d = ulp_distance(a[i], b[i]);
    if (d > worst) {
      worst = d;
      at = i;
    }
  }
  return {worst, at};
}

template <typename T>
bool all_bitwise_equal(const std::vector<T>& v) {
  return std::all_of(v.begin(), v.end(), [&](T e) { return bitwise_equal(e, v.front()); });
}

inline constexpr std::uint64_t kUlpTolerance = 4;

template <typename T>
void standard_checks_typed(CaseContext& ctx) {
  const auto& p = ctx.params;
  auto& comm = ctx.comm;
  const std::string backend_name(p.backend->name());
  const std::string where = "rank " + std::to_string(comm.rank()) + (p.offset ? " offset1" : " aligned");

  for (auto op : kAllOperations) {
    const KernelSpec spec = KernelSpec::make(op, p.precision, has_layout(op) ? p.layout : Layout::none);
    const auto global = make_inputs<T>(spec, ctx.vector_size, ctx.data);
    const auto [lo, hi] = block_range(ctx.vector_size, comm.size(), comm.rank());
    const auto local = local_inputs(spec, global, lo, hi);

    const auto ref0 = run(spec, *p.reference, local, 0);
    const auto ref1 = run(spec, *p.reference, local, 1);
    const auto got = run(spec, *p.backend, local, p.offset);

    // (a) candidate against the reference
    const auto [ulps, at] = max_ulp(got.output, ref0.output);
    {
      std::ostringstream msg;
      msg << spec.id << ": " << backend_name << " differs from reference by " << ulps << " ulps at local element "
          << at << " (" << where << ")";
      ctx.check(ulps <= kUlpTolerance, msg.str());
    }

    // (b) reference does not depend on alignment
    {
      bool same = ref0.output.size() == ref1.output.size();
      for (std::size_t i = 0; same && i < ref0.output.size(); ++i) same = bitwise_equal(ref0.output[i], ref1.output[i]);
      ctx.check(same, spec.id + ": reference differs between offset 0 and offset 1 (" + where + ")");
    }

    // (c) collective results agree on every rank
    const double checksum = comm.allreduce(got.checksum, ReduceOp::sum);
    ctx.check(all_bitwise_equal(comm.allgather(checksum)), spec.id + ": global checksum differs across ranks");

    if (op == Operation::dot) {
      const auto partials = comm.allgather(got.output.front());
      const auto ref_partials = comm.allgather(ref0.output.front());
      const T total = p.backend->combine_partials(std::span<const T>(partials), comm.rank());
      const T ref_total = p.reference->combine_partials(std::span<const T>(ref_partials), comm.rank());
      ctx.check(ulp_distance(total, ref_total) <= kUlpTolerance,
                spec.id + ": combined dot differs from reference by " + std::to_string(ulp_distance(total, ref_total)) +
                    " ulps (" + where + ")");
      ctx.check(all_bitwise_equal(comm.allgather(total)), spec.id + ": combined dot differs across ranks");
    }
  }

  // Partials whose sum depends on association order; exposes any reduction
  // that is not the fixed tree.
  {
    constexpr std::array<double, 4> hostile{1e16, 1.0, -1e16, 1.0};
    const KernelSpec spec = KernelSpec::make(Operation::dot, p.precision);
    KernelInputs<T> in;
    in.x = {static_cast<T>(hostile[comm.rank() % hostile.size()])};
    in.y = {T{1}};
    const T partial = run(spec, *p.backend, in, p.offset).output.front();
    const T ref_partial = run(spec, *p.reference, in, 0).output.front();
    const auto partials = comm.allgather(partial);
    const auto ref_partials = comm.allgather(ref_partial);
    const T total = p.backend->combine_partials(std::span<const T>(partials), comm.rank());
    const T ref_total = p.reference->combine_partials(std::span<const T>(ref_partials), comm.rank());
    ctx.check(bitwise_equal(total, ref_total), "cancellation fixture: " + backend_name + " combined to " +
                                                   std::to_string(total) + ", tree order gives " +
                                                   std::to_string(ref_total) + " (" + where + ")");
    ctx.check(all_bitwise_equal(comm.allgather(total)), "cancellation fixture: combined value differs across ranks");
  }
}

}  // namespace detail

/// Runs every operation on lattice data partitioned block-wise over the
/// ranks and asserts (a) within 4 ulps of the reference, (b) reference
/// bitwise equal across alignment offsets, (c) collective results identical
/// on every rank.
inline void standard_checks(CaseContext& ctx) {
  if (ctx.params.precision == Precision::f32)
    detail::standard_checks_typed<float>(ctx);
  else
    detail::standard_checks_typed<double>(ctx);
}

/// Resolves case coordinates against the registry. Throws
/// UnsupportedCombination when the registry cannot serve the case.
inline CaseParams resolve_case(const TestPlan& plan, const TestCase& c, const Registry& registry,
                               const std::vector<Operation>& operations) {
  CaseParams p;
  const auto precision = plan.level(c, kDimPrecision, "double");
  const auto layout = plan.level(c, kDimLayout, "row");
  const auto parsed_precision = parse_precision(precision);
  const auto parsed_layout = parse_layout(layout);
  if (!parsed_precision) throw PreconditionError("unknown precision level '" + precision + "'");
  if (!parsed_layout || *parsed_layout == Layout::none) throw PreconditionError("unknown layout level '" + layout + "'");
  p.precision = *parsed_precision;
  p.layout = *parsed_layout;
  const auto alignment = plan.level(c, kDimAlignment, "aligned");
  if (alignment == "aligned")
    p.offset = 0;
  else if (alignment == "offset1")
    p.offset = 1;
  else
    throw PreconditionError("unknown alignment level '" + alignment + "'");
  const auto ranks = plan.level(c, kDimRanks, "1");
  try {
    std::size_t used = 0;
    p.ranks = std::stoul(ranks, &used);
    if (used != ranks.size()) throw std::invalid_argument(ranks);
  } catch (const std::logic_error&) {
    throw PreconditionError("ranks level '" + ranks + "' is not a number");
  }
  if (p.ranks == 0) throw PreconditionError("ranks must be >= 1");

  const auto backend_name = plan.level(c, kDimBackend, "reference");
  p.backend = registry.find_backend(backend_name);
  p.reference = registry.find_backend("reference");
  if (!p.backend) throw UnsupportedCombination("no backend named '" + backend_name + "'");
  if (!p.reference) throw UnsupportedCombination("registry has no reference backend");
  for (auto op : operations) {
    const KernelSpec spec = KernelSpec::make(op, p.precision, has_layout(op) ? p.layout : Layout::none);
    if (!registry.find_spec(spec.id)) throw UnsupportedCombination("registry has no kernel " + spec.id);
    if (!p.backend->supports(op, spec.precision, spec.layout))
      throw UnsupportedCombination(backend_name + " does not implement " + spec.id);
  }
  return p;
}

/// Runs one case on its own group and folds the per-rank verdicts.
inline TestOutcome run_case(const TestPlan& plan, const TestCase& c, const Registry& registry, const CaseBody& body,
                            const SuiteOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  TestOutcome out;
  out.test_case = c;
  out.name = plan.case_name(c);
  auto finish = [&]() -> TestOutcome {
    out.verdict = fold_verdicts(out.per_rank);
    out.duration_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return std::move(out);
  };

  CaseParams params;
  try {
    params = resolve_case(plan, c, registry, opts.operations);
  } catch (const UnsupportedCombination& e) {
    out.per_rank.push_back({0, Verdict::skipped, {e.what()}});
    out.messages.push_back(std::string("UnsupportedCombination: ") + e.what());
    return finish();
  } catch (const std::exception& e) {
    out.per_rank.push_back({0, Verdict::error, {e.what()}});
    out.messages.push_back(e.what());
    return finish();
  }
  if (params.ranks > opts.vector_size) {
    const std::string why = "ranks exceed the vector size " + std::to_string(opts.vector_size);
    out.per_rank.push_back({0, Verdict::error, {why}});
    out.messages.push_back(why);
    return finish();
  }

  GroupOptions group;
  group.timeout_seconds = opts.timeout_seconds;
  group.jitter_seed = opts.jitter_seed;
  auto result = spawn(
      params.ranks,
      [&](Communicator& comm) {
        CaseContext ctx{comm, params, opts.vector_size, DataOptions{opts.seed, kTestLatticeBits}, {}};
        body(ctx);
        return ctx.log;
      },
      group);

  for (std::size_t r = 0; r < result.ranks.size(); ++r) {
    const auto& rank = result.ranks[r];
    RankReport rep{r, Verdict::pass, {}};
    if (rank.ok()) {
      rep.verdict = rank.value->all_passed ? Verdict::pass : Verdict::fail;
      rep.messages = rank.value->local_failures;
      if (r == 0) out.messages = rank.value->gathered;
    } else {
      rep.verdict = Verdict::error;
      rep.messages.push_back(rank.failure);
      out.messages.push_back("rank " + std::to_string(r) + ": " + rank.failure);
    }
    out.per_rank.push_back(std::move(rep));
  }
  if (result.error) out.messages.insert(out.messages.begin(), result.error->what());
  return finish();
}

/// Runs the cases one after another; a failing or erroring case never stops the suite.
inline SuiteResult run_suite(const TestPlan& plan, const Registry& registry, const SuiteOptions& opts = {},
                             const CaseBody& body = standard_checks) {
  SuiteResult res{plan, {}, {}};
  for (const auto& c : plan.cases) {
    res.outcomes.push_back(run_case(plan, c, registry, body, opts));
    switch (res.outcomes.back().verdict) {
      case Verdict::pass: ++res.summary.pass; break;
      case Verdict::fail: ++res.summary.fail; break;
      case Verdict::error: ++res.summary.error; break;
      case Verdict::skipped: ++res.summary.skipped; break;
    }
  }
  return res;
}

/// reference and optimized first, then any other registered backend.
inline std::vector<TestDimension> default_dimensions(const Registry& registry) {
  std::vector<std::string> names{"reference", "optimized"};
  for (const auto& n : registry.backend_names())
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  return default_dimensions(std::move(names));
}

}  // namespace hpcwb::partest

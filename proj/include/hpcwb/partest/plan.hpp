#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hpcwb/error.hpp"

namespace hpcwb::partest {

struct TestDimension {
  std::string name;
  std::vector<std::string> levels;
};

/// One level index per dimension, in dimension order.
struct TestCase {
  std::vector<std::size_t> levels;

  bool operator==(const TestCase&) const = default;
  auto operator<=>(const TestCase&) const = default;
};

enum class PlanStrategy { full, pairwise };

inline std::string_view to_string(PlanStrategy s) { return s == PlanStrategy::full ? "full" : "pairwise"; }

inline PlanStrategy parse_strategy(std::string_view s) {
  if (s == "full") return PlanStrategy::full;
  if (s == "pairwise") return PlanStrategy::pairwise;
  throw PreconditionError("unknown plan strategy '" + std::string(s) + "' (expected full or pairwise)");
}

struct TestPlan {
  std::vector<TestDimension> dimensions;
  std::vector<TestCase> cases;
  PlanStrategy strategy = PlanStrategy::full;

  std::size_t dimension_index(std::string_view name) const {
    for (std::size_t d = 0; d < dimensions.size(); ++d)
      if (dimensions[d].name == name) return d;
    return dimensions.size();
  }

  /// Level name of `c` in dimension `name`, or `fallback` if the plan has no such dimension.
  std::string level(const TestCase& c, std::string_view name, std::string_view fallback = {}) const {
    const std::size_t d = dimension_index(name);
    if (d == dimensions.size()) return std::string(fallback);
    return dimensions[d].levels.at(c.levels.at(d));
  }

  /// "precision=double/layout=row/..." in dimension order.
  std::string case_name(const TestCase& c) const {
    std::string out;
    for (std::size_t d = 0; d < dimensions.size(); ++d) {
      if (d) out += '/';
      out += dimensions[d].name + "=" + dimensions[d].levels.at(c.levels.at(d));
    }
    return out;
  }
};

struct MissingPair {
  std::size_t dim_a = 0, level_a = 0;
  std::size_t dim_b = 0, level_b = 0;
};

struct PairwiseCheck {
  std::vector<MissingPair> missing;
  bool ok() const noexcept { return missing.empty(); }
};

/// Brute force: every level pair from two distinct dimensions must occur in
/// some case.
inline PairwiseCheck check_pairwise(const std::vector<TestCase>& cases, const std::vector<TestDimension>& dims) {
  PairwiseCheck out;
  for (std::size_t a = 0; a < dims.size(); ++a)
    for (std::size_t b = a + 1; b < dims.size(); ++b)
      for (std::size_t la = 0; la < dims[a].levels.size(); ++la)
        for (std::size_t lb = 0; lb < dims[b].levels.size(); ++lb) {
          bool found = false;
          for (const auto& c : cases)
            if (c.levels.size() == dims.size() && c.levels[a] == la && c.levels[b] == lb) {
              found = true;
              break;
            }
          if (!found) out.missing.push_back({a, la, b, lb});
        }
  return out;
}

inline PairwiseCheck check_pairwise(const TestPlan& plan) { return check_pairwise(plan.cases, plan.dimensions); }

namespace detail {

inline std::vector<TestCase> cartesian(const std::vector<TestDimension>& dims) {
  std::vector<TestCase> out;
  TestCase cur{std::vector<std::size_t>(dims.size(), 0)};
  for (;;) {
    out.push_back(cur);
    std::size_t d = dims.size();
    while (d > 0) {
      --d;
      if (++cur.levels[d] < dims[d].levels.size()) break;
      cur.levels[d] = 0;
      if (d == 0) return out;
    }
    if (dims.empty()) return out;
  }
}

// Offsets so every (dimension a, dimension b, level a, level b) has one slot.
class PairIndex {
 public:
  explicit PairIndex(const std::vector<TestDimension>& dims) : dims_(dims) {
    std::size_t next = 0;
    base_.assign(dims.size(), std::vector<std::size_t>(dims.size(), 0));
    for (std::size_t a = 0; a < dims.size(); ++a)
      for (std::size_t b = a + 1; b < dims.size(); ++b) {
        base_[a][b] = next;
        next += dims[a].levels.size() * dims[b].levels.size();
      }
    total_ = next;
  }
  std::size_t total() const noexcept { return total_; }
  std::size_t slot(std::size_t a, std::size_t la, std::size_t b, std::size_t lb) const {
    return base_[a][b] + la * dims_[b].levels.size() + lb;
  }

 private:
  const std::vector<TestDimension>& dims_;
  std::vector<std::vector<std::size_t>> base_;
  std::size_t total_ = 0;
};

}  // namespace detail

/// Builds the case list. full: Cartesian product, last dimension varying
/// fastest. pairwise: repeatedly add the candidate covering the most
/// still-uncovered pairs, earliest candidate on ties.
inline TestPlan build_plan(const std::vector<TestDimension>& dims, PlanStrategy strategy) {
  for (const auto& d : dims)
    if (d.levels.empty()) throw EmptyDimension("dimension '" + d.name + "' has no levels");
  TestPlan plan{dims, {}, strategy};
  auto all = detail::cartesian(dims);
  // with fewer than two dimensions there are no pairs; the product is already minimal
  if (strategy == PlanStrategy::full || dims.size() < 2) {
    plan.cases = std::move(all);
    return plan;
  }

  detail::PairIndex index(dims);
  std::vector<bool> covered(index.total(), false);
  std::size_t remaining = index.total();
  std::vector<bool> used(all.size(), false);
  auto gain = [&](const TestCase& c) {
    std::size_t g = 0;
    for (std::size_t a = 0; a < dims.size(); ++a)
      for (std::size_t b = a + 1; b < dims.size(); ++b)
        if (!covered[index.slot(a, c.levels[a], b, c.levels[b])]) ++g;
    return g;
  };
  while (remaining > 0) {
    std::size_t best = all.size(), best_gain = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (used[i]) continue;
      const std::size_t g = gain(all[i]);
      if (g > best_gain) {
        best = i;
        best_gain = g;
      }
    }
    if (best == all.size()) break;
    used[best] = true;
    const auto& c = all[best];
    for (std::size_t a = 0; a < dims.size(); ++a)
      for (std::size_t b = a + 1; b < dims.size(); ++b) {
        auto s = index.slot(a, c.levels[a], b, c.levels[b]);
        if (!covered[s]) {
          covered[s] = true;
          --remaining;
        }
      }
    plan.cases.push_back(c);
  }
  if (!check_pairwise(plan).ok()) throw InvariantError("pairwise.coverage", "covering array construction left pairs uncovered");
  return plan;
}

inline constexpr std::string_view kDimPrecision = "precision";
inline constexpr std::string_view kDimLayout = "layout";
inline constexpr std::string_view kDimAlignment = "alignment";
inline constexpr std::string_view kDimBackend = "backend";
inline constexpr std::string_view kDimRanks = "ranks";

/// precision{single,double}, layout{row,col}, alignment{aligned,offset1},
/// backend{...}, ranks{1,4}.
inline std::vector<TestDimension> default_dimensions(std::vector<std::string> backends = {"reference", "optimized"}) {
  return {
      {std::string(kDimPrecision), {"single", "double"}},
      {std::string(kDimLayout), {"row", "col"}},
      {std::string(kDimAlignment), {"aligned", "offset1"}},
      {std::string(kDimBackend), std::move(backends)},
      {std::string(kDimRanks), {"1", "4"}},
  };
}

}  // namespace hpcwb::partest

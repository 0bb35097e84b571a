#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hpcwb {

// Deterministic pairwise reduction. Each level combines neighbours (0,1), (2,3), ...;
// an odd element at the end of a level is carried up unchanged. For four values
// this is ((v0 op v1) op (v2 op v3)). The association depends only on the number
// of values, never on scheduling, so the result is bitwise reproducible.
template <typename T, typename Op>
T tree_reduce(std::vector<T> level, Op op) {
  if (level.empty()) throw std::invalid_argument("tree_reduce of an empty range");
  while (level.size() > 1) {
    std::size_t out = 0;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) level[out++] = op(level[i], level[i + 1]);
    if (level.size() % 2 == 1) level[out++] = level.back();
    level.resize(out);
  }
  return level.front();
}

template <typename T, typename Op>
T tree_reduce(std::span<const T> values, Op op) {
  return tree_reduce(std::vector<T>(values.begin(), values.end()), op);
}

/// Tree-order sum in double. Used for kernel checksums.
template <typename T>
double tree_sum(std::span<const T> values) {
  if (values.empty()) return 0.0;
  std::vector<double> widened(values.begin(), values.end());
  return tree_reduce(std::move(widened), [](double a, double b) { return a + b; });
}

}  // namespace hpcwb

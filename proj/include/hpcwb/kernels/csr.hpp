#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hpcwb/error.hpp"

namespace hpcwb {

/// Compressed sparse row matrix with 32-bit indices.
template <typename T>
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> row_ptr{0};
  std::vector<std::uint32_t> col_idx;
  std::vector<T> values;

  std::size_t nnz() const noexcept { return row_ptr.empty() ? 0 : row_ptr.back(); }

  /// Throws ShapeMismatch when any structural invariant is broken.
  void validate() const {
    auto fail = [](const std::string& what) { throw ShapeMismatch("csr: " + what); };
    if (row_ptr.size() != rows + 1) fail("row_ptr must have rows+1 entries");
    if (row_ptr.front() != 0) fail("row_ptr[0] must be 0");
    if (!std::is_sorted(row_ptr.begin(), row_ptr.end())) fail("row_ptr must be non-decreasing");
    if (col_idx.size() != nnz()) fail("col_idx length must equal nnz");
    if (values.size() != nnz()) fail("values length must equal nnz");
    for (auto c : col_idx)
      if (c >= cols) fail("column index out of range");
  }

  /// True when every column holds at least one entry.
  bool touches_every_column() const {
    std::vector<bool> seen(cols, false);
    for (auto c : col_idx) seen[c] = true;
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  }
};

/// Half-width of the band used for generated test matrices.
inline constexpr std::size_t kBandHalfWidth = 2;

/// Square n x n banded matrix, entries |i-j| <= half_width. Values are
/// produced by `next()` in row-major order.
template <typename T, typename Gen>
CsrMatrix<T> make_banded(std::size_t n, Gen&& next, std::size_t half_width = kBandHalfWidth) {
  if (n == 0) throw InvalidSize("banded matrix needs n >= 1");
  if (n > std::numeric_limits<std::uint32_t>::max() / (2 * half_width + 1))
    throw InvalidSize("banded matrix too large for 32-bit indices");
  CsrMatrix<T> m;
  m.rows = m.cols = n;
  m.row_ptr.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i >= half_width ? i - half_width : 0;
    std::size_t hi = std::min(n - 1, i + half_width);
    for (std::size_t j = lo; j <= hi; ++j) {
      m.col_idx.push_back(static_cast<std::uint32_t>(j));
      m.values.push_back(static_cast<T>(next()));
    }
    m.row_ptr.push_back(static_cast<std::uint32_t>(m.col_idx.size()));
  }
  return m;
}

template <typename T>
CsrMatrix<T> make_identity(std::size_t n) {
  CsrMatrix<T> m;
  m.rows = m.cols = n;
  for (std::size_t i = 0; i < n; ++i) {
    m.col_idx.push_back(static_cast<std::uint32_t>(i));
    m.values.push_back(T{1});
    m.row_ptr.push_back(static_cast<std::uint32_t>(i + 1));
  }
  return m;
}

/// Rows [first, last) of `m` as a standalone matrix with the same column space.
template <typename T>
CsrMatrix<T> row_block(const CsrMatrix<T>& m, std::size_t first, std::size_t last) {
  CsrMatrix<T> b;
  b.rows = last - first;
  b.cols = m.cols;
  std::uint32_t base = m.row_ptr[first];
  for (std::size_t i = first; i < last; ++i) b.row_ptr.push_back(m.row_ptr[i + 1] - base);
  b.col_idx.assign(m.col_idx.begin() + base, m.col_idx.begin() + m.row_ptr[last]);
  b.values.assign(m.values.begin() + base, m.values.begin() + m.row_ptr[last]);
  return b;
}

}  // namespace hpcwb

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/kernels/csr.hpp"
#include "hpcwb/types.hpp"

namespace hpcwb {

/// Problem dimensions. Vector kernels use `rows` as their length n.
struct ProblemShape {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t nnz = 0;

  static ProblemShape vector(std::uint64_t n) { return {n, 0, 0}; }
  static ProblemShape dense(std::uint64_t rows, std::uint64_t cols) { return {rows, cols, 0}; }
  static ProblemShape csr(std::uint64_t rows, std::uint64_t cols, std::uint64_t nnz) { return {rows, cols, nnz}; }
  template <typename T>
  static ProblemShape of(const CsrMatrix<T>& m) { return csr(m.rows, m.cols, m.nnz()); }

  bool operator==(const ProblemShape&) const = default;
};

/// Number of stored entries of the generated n x n banded matrix.
inline std::uint64_t banded_nnz(std::uint64_t n, std::uint64_t half_width = kBandHalfWidth) {
  std::uint64_t nnz = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t lo = i >= half_width ? i - half_width : 0;
    std::uint64_t hi = std::min(n - 1, i + half_width);
    nnz += hi - lo + 1;
  }
  return nnz;
}

/// The shape a kernel runs at for a scalar problem size n: vectors of length n,
/// n x n dense matrices, or the n x n banded CSR test matrix.
inline ProblemShape shape_for(Operation op, std::uint64_t n) {
  switch (op) {
    case Operation::dense_mv: return ProblemShape::dense(n, n);
    case Operation::csr_spmv: return ProblemShape::csr(n, n, banded_nnz(n));
    default: return ProblemShape::vector(n);
  }
}

struct KernelCost {
  std::uint64_t flops = 0;
  std::uint64_t bytes_realistic = 0;
  std::uint64_t bytes_idealized = 0;
  /// Distinct bytes touched; drives bandwidth-level selection.
  std::uint64_t footprint = 0;

  bool operator==(const KernelCost&) const = default;

  std::uint64_t bytes(TrafficModel t) const noexcept {
    return t == TrafficModel::realistic ? bytes_realistic : bytes_idealized;
  }
};

struct KernelSpec {
  std::string id;
  Operation operation = Operation::axpy;
  Precision precision = Precision::f64;
  Layout layout = Layout::none;

  bool operator==(const KernelSpec&) const = default;

  static std::string make_id(Operation op, Precision p, Layout l) {
    std::string id = std::string(to_string(op)) + "_" + std::string(to_string(p));
    if (l == Layout::row_major) id += "_row";
    if (l == Layout::col_major) id += "_col";
    return id;
  }

  static KernelSpec make(Operation op, Precision p, Layout l = Layout::none) {
    if (has_layout(op) && l == Layout::none) throw PreconditionError("dense_mv needs a layout");
    if (!has_layout(op)) l = Layout::none;
    return {make_id(op, p, l), op, p, l};
  }
};

/// Closed-form flop and traffic counts. `e` is the element size and indices
/// are 4 bytes. Realistic traffic counts every issued access plus one
/// write-allocate read per written element; idealized traffic counts each
/// distinct address read and each distinct address written once.
inline KernelCost cost(const KernelSpec& spec, const ProblemShape& s) {
  const std::uint64_t e = element_size(spec.precision);
  const std::uint64_t idx = kIndexBytes;
  KernelCost c;
  switch (spec.operation) {
    case Operation::axpy:
    case Operation::scale:
    case Operation::dot: {
      const std::uint64_t n = s.rows;
      if (n == 0) throw InvalidSize("vector length must be >= 1");
      if (spec.operation == Operation::axpy) {
        c = {2 * n, 4 * e * n, 3 * e * n, 2 * e * n};
      } else if (spec.operation == Operation::scale) {
        c = {n, 3 * e * n, 2 * e * n, e * n};
      } else {
        c = {2 * n, 2 * e * n, 2 * e * n, 2 * e * n};
      }
      break;
    }
    case Operation::csr_spmv: {
      const std::uint64_t r = s.rows, k = s.cols, nnz = s.nnz;
      if (r == 0 || k == 0) throw InvalidSize("csr matrix needs rows, cols >= 1");
      if (nnz > r * k) throw InvalidSize("nnz exceeds rows*cols");
      c.flops = 2 * nnz;
      c.bytes_idealized = nnz * (e + idx) + idx * (r + 1) + e * k + e * r;
      c.bytes_realistic = c.bytes_idealized + e * r + (nnz > k ? nnz - k : 0) * e;
      c.footprint = c.bytes_idealized;
      break;
    }
    case Operation::dense_mv: {
      const std::uint64_t r = s.rows, k = s.cols;
      if (r == 0 || k == 0) throw InvalidSize("dense matrix needs rows, cols >= 1");
      c.flops = 2 * r * k;
      c.footprint = e * (r * k + k + r);
      if (spec.layout == Layout::row_major) {
        // y[i] = sum_j A[i][j] x[j]: x re-read for every row, y written once.
        c.bytes_idealized = e * (r * k + k + r);
        c.bytes_realistic = e * (2 * r * k + 2 * r);
      } else {
        // y = 0; for j: y += A[:,j] x[j]: y read and written per column.
        c.bytes_idealized = e * (r * k + k + 2 * r);
        c.bytes_realistic = e * (3 * r * k + 2 * r + k);
      }
      break;
    }
  }
  return c;
}

inline KernelCost cost(const KernelSpec& spec, std::uint64_t n) { return cost(spec, shape_for(spec.operation, n)); }

}  // namespace hpcwb

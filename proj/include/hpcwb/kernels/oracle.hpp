#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/kernels/data.hpp"
#include "hpcwb/kernels/spec.hpp"

namespace hpcwb {

/// Largest problem size the oracle interprets.
inline constexpr std::uint64_t kOracleMaxSize = 1'000'000;
/// Largest number of tracked elements across all arrays.
inline constexpr std::uint64_t kOracleMaxElements = std::uint64_t{1} << 26;

/// Counts every load, store and flop issued by a scalar interpretation and
/// remembers which addresses were touched.
class TrafficCounter {
 public:
  using ArrayId = std::size_t;

  ArrayId add_array(std::size_t length, std::size_t elem_bytes) {
    arrays_.push_back({elem_bytes, std::vector<bool>(length, false), std::vector<bool>(length, false)});
    return arrays_.size() - 1;
  }

  void read(ArrayId a, std::size_t i) {
    auto& arr = arrays_[a];
    issued_bytes_ += arr.elem_bytes;
    arr.read[i] = true;
  }

  void write(ArrayId a, std::size_t i) {
    auto& arr = arrays_[a];
    issued_bytes_ += arr.elem_bytes;
    arr.written[i] = true;
  }

  void flops(std::uint64_t k) { flops_ += k; }

  KernelCost result() const {
    KernelCost c;
    c.flops = flops_;
    std::uint64_t write_allocate = 0;
    for (const auto& arr : arrays_) {
      for (std::size_t i = 0; i < arr.read.size(); ++i) {
        bool r = arr.read[i], w = arr.written[i];
        c.bytes_idealized += arr.elem_bytes * ((r ? 1 : 0) + (w ? 1 : 0));
        if (w) write_allocate += arr.elem_bytes;
        if (r || w) c.footprint += arr.elem_bytes;
      }
    }
    c.bytes_realistic = issued_bytes_ + write_allocate;
    return c;
  }

 private:
  struct Array {
    std::size_t elem_bytes;
    std::vector<bool> read;
    std::vector<bool> written;
  };
  std::vector<Array> arrays_;
  std::uint64_t issued_bytes_ = 0;
  std::uint64_t flops_ = 0;
};

/// Measures flops and traffic by replaying the kernel's canonical loop nest one
/// scalar access at a time. Independent of cost(); used to check the closed forms.
template <typename T>
KernelCost traffic_oracle(const KernelSpec& spec, const KernelInputs<T>& in) {
  const std::size_t e = sizeof(T);
  const ProblemShape shape = in.shape(spec.operation);
  std::uint64_t elements = 0;
  switch (spec.operation) {
    case Operation::csr_spmv: elements = shape.nnz + shape.rows + shape.cols; break;
    case Operation::dense_mv: elements = shape.rows * shape.cols + shape.rows + shape.cols; break;
    default: elements = 2 * shape.rows; break;
  }
  if (std::max(shape.rows, shape.cols) > kOracleMaxSize || elements > kOracleMaxElements)
    throw TooLarge("traffic_oracle: problem too large to interpret");
  if (shape.rows == 0) throw InvalidSize("traffic_oracle: empty problem");

  TrafficCounter tc;
  switch (spec.operation) {
    case Operation::axpy: {
      const std::size_t n = in.x.size();
      if (in.y.size() != n) throw ShapeMismatch("axpy: x and y differ in length");
      auto x = tc.add_array(n, e), y = tc.add_array(n, e);
      for (std::size_t i = 0; i < n; ++i) {
        tc.read(x, i);
        tc.read(y, i);
        tc.flops(2);
        tc.write(y, i);
      }
      break;
    }
    case Operation::scale: {
      const std::size_t n = in.x.size();
      auto x = tc.add_array(n, e);
      for (std::size_t i = 0; i < n; ++i) {
        tc.read(x, i);
        tc.flops(1);
        tc.write(x, i);
      }
      break;
    }
    case Operation::dot: {
      const std::size_t n = in.x.size();
      if (in.y.size() != n) throw ShapeMismatch("dot: x and y differ in length");
      auto x = tc.add_array(n, e), y = tc.add_array(n, e);
      for (std::size_t i = 0; i < n; ++i) {
        tc.read(x, i);
        tc.read(y, i);
        tc.flops(2);
      }
      break;
    }
    case Operation::csr_spmv: {
      const auto& m = in.csr;
      m.validate();
      if (in.x.size() != m.cols) throw ShapeMismatch("csr_spmv: x length must equal cols");
      auto row_ptr = tc.add_array(m.rows + 1, kIndexBytes);
      auto col_idx = tc.add_array(m.nnz(), kIndexBytes);
      auto values = tc.add_array(m.nnz(), e);
      auto x = tc.add_array(m.cols, e);
      auto y = tc.add_array(m.rows, e);
      tc.read(row_ptr, 0);
      std::size_t begin = m.row_ptr[0];
      for (std::size_t i = 0; i < m.rows; ++i) {
        tc.read(row_ptr, i + 1);
        std::size_t end = m.row_ptr[i + 1];
        for (std::size_t k = begin; k < end; ++k) {
          tc.read(values, k);
          tc.read(col_idx, k);
          tc.read(x, m.col_idx[k]);
          tc.flops(2);
        }
        tc.write(y, i);
        begin = end;
      }
      break;
    }
    case Operation::dense_mv: {
      const std::size_t r = in.rows, k = in.cols;
      if (in.a.size() != r * k || in.x.size() != k) throw ShapeMismatch("dense_mv: inconsistent shapes");
      auto a = tc.add_array(r * k, e);
      auto x = tc.add_array(k, e);
      auto y = tc.add_array(r, e);
      if (spec.layout == Layout::row_major) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            tc.read(a, i * k + j);
            tc.read(x, j);
            tc.flops(2);
          }
          tc.write(y, i);
        }
      } else {
        for (std::size_t i = 0; i < r; ++i) tc.write(y, i);
        for (std::size_t j = 0; j < k; ++j) {
          tc.read(x, j);
          for (std::size_t i = 0; i < r; ++i) {
            tc.read(a, j * r + i);
            tc.read(y, i);
            tc.flops(2);
            tc.write(y, i);
          }
        }
      }
      break;
    }
  }
  return tc.result();
}

}  // namespace hpcwb

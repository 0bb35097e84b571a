#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpcwb/aligned_buffer.hpp"
#include "hpcwb/kernels/csr.hpp"
#include "hpcwb/reduce.hpp"
#include "hpcwb/types.hpp"

namespace hpcwb {

/// Non-owning view of a CSR matrix; lets callers place values at any offset.
template <typename T>
struct CsrView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const std::uint32_t> row_ptr;
  std::span<const std::uint32_t> col_idx;
  std::span<const T> values;

  static CsrView of(const CsrMatrix<T>& m) { return {m.rows, m.cols, m.row_ptr, m.col_idx, m.values}; }
};

/// Interface between algorithms and kernel implementations. Every backend
/// provides every operation in both precisions; dense_mv takes the layout as
/// an argument. Partial results from several ranks are merged through
/// combine_partials so that a backend also owns its reduction order.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string_view name() const = 0;
  /// Alignment in bytes the implementation assumes for its arrays (0 = none).
  virtual std::size_t required_alignment() const { return 0; }
  virtual bool supports(Operation, Precision, Layout) const { return true; }

  virtual void axpy(float alpha, std::span<const float> x, std::span<float> y) const = 0;
  virtual void axpy(double alpha, std::span<const double> x, std::span<double> y) const = 0;
  virtual void scale(float alpha, std::span<float> x) const = 0;
  virtual void scale(double alpha, std::span<double> x) const = 0;
  virtual float dot(std::span<const float> x, std::span<const float> y) const = 0;
  virtual double dot(std::span<const double> x, std::span<const double> y) const = 0;
  virtual void csr_spmv(const CsrView<float>& a, std::span<const float> x, std::span<float> y) const = 0;
  virtual void csr_spmv(const CsrView<double>& a, std::span<const double> x, std::span<double> y) const = 0;
  virtual void dense_mv(Layout layout, std::size_t rows, std::size_t cols, std::span<const float> a,
                        std::span<const float> x, std::span<float> y) const = 0;
  virtual void dense_mv(Layout layout, std::size_t rows, std::size_t cols, std::span<const double> a,
                        std::span<const double> x, std::span<double> y) const = 0;

  /// Merges per-rank partial sums (indexed by rank) as seen from `rank`.
  virtual float combine_partials(std::span<const float> partials, std::size_t rank) const {
    (void)rank;
    return tree_reduce<float>(partials, [](float a, float b) { return a + b; });
  }
  virtual double combine_partials(std::span<const double> partials, std::size_t rank) const {
    (void)rank;
    return tree_reduce<double>(partials, [](double a, double b) { return a + b; });
  }
};

/// Implements the virtual interface by forwarding to templated members of
/// `Impl`: axpy_t, scale_t, dot_t, spmv_t, dense_mv_t.
template <typename Impl>
class BackendAdapter : public Backend {
 public:
  void axpy(float a, std::span<const float> x, std::span<float> y) const override { self().axpy_t(a, x, y); }
  void axpy(double a, std::span<const double> x, std::span<double> y) const override { self().axpy_t(a, x, y); }
  void scale(float a, std::span<float> x) const override { self().scale_t(a, x); }
  void scale(double a, std::span<double> x) const override { self().scale_t(a, x); }
  float dot(std::span<const float> x, std::span<const float> y) const override { return self().dot_t(x, y); }
  double dot(std::span<const double> x, std::span<const double> y) const override { return self().dot_t(x, y); }
  void csr_spmv(const CsrView<float>& a, std::span<const float> x, std::span<float> y) const override {
    self().spmv_t(a, x, y);
  }
  void csr_spmv(const CsrView<double>& a, std::span<const double> x, std::span<double> y) const override {
    self().spmv_t(a, x, y);
  }
  void dense_mv(Layout l, std::size_t r, std::size_t c, std::span<const float> a, std::span<const float> x,
                std::span<float> y) const override {
    self().dense_mv_t(l, r, c, a, x, y);
  }
  void dense_mv(Layout l, std::size_t r, std::size_t c, std::span<const double> a, std::span<const double> x,
                std::span<double> y) const override {
    self().dense_mv_t(l, r, c, a, x, y);
  }

 private:
  const Impl& self() const { return static_cast<const Impl&>(*this); }
};

/// Scalar, loop-order-canonical implementation. Defines the semantics every
/// other backend is checked against.
class ReferenceBackend : public BackendAdapter<ReferenceBackend> {
 public:
  std::string_view name() const override { return "reference"; }

  template <typename T>
  void axpy_t(T alpha, std::span<const T> x, std::span<T> y) const {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = alpha * x[i] + y[i];
  }

  template <typename T>
  void scale_t(T alpha, std::span<T> x) const {
    for (auto& v : x) v = alpha * v;
  }

  template <typename T>
  T dot_t(std::span<const T> x, std::span<const T> y) const {
    T acc{};
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
  }

  template <typename T>
  void spmv_t(const CsrView<T>& a, std::span<const T> x, std::span<T> y) const {
    for (std::size_t i = 0; i < a.rows; ++i) {
      T acc{};
      for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc += a.values[k] * x[a.col_idx[k]];
      y[i] = acc;
    }
  }

  template <typename T>
  void dense_mv_t(Layout layout, std::size_t rows, std::size_t cols, std::span<const T> a, std::span<const T> x,
                  std::span<T> y) const {
    if (layout == Layout::row_major) {
      for (std::size_t i = 0; i < rows; ++i) {
        T acc{};
        for (std::size_t j = 0; j < cols; ++j) acc += a[i * cols + j] * x[j];
        y[i] = acc;
      }
    } else {
      for (std::size_t i = 0; i < rows; ++i) y[i] = T{};
      for (std::size_t j = 0; j < cols; ++j) {
        const T xj = x[j];
        for (std::size_t i = 0; i < rows; ++i) y[i] += a[j * rows + i] * xj;
      }
    }
  }
};

/// Four-way unrolled loops with separate accumulators for dot and spmv, and
/// register-blocked dense_mv. No alignment assumptions.
class OptimizedBackend : public BackendAdapter<OptimizedBackend> {
 public:
  std::string_view name() const override { return "optimized"; }

  template <typename T>
  void axpy_t(T alpha, std::span<const T> x, std::span<T> y) const {
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      y[i] = alpha * x[i] + y[i];
      y[i + 1] = alpha * x[i + 1] + y[i + 1];
      y[i + 2] = alpha * x[i + 2] + y[i + 2];
      y[i + 3] = alpha * x[i + 3] + y[i + 3];
    }
    for (; i < n; ++i) y[i] = alpha * x[i] + y[i];
  }

  template <typename T>
  void scale_t(T alpha, std::span<T> x) const {
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      x[i] *= alpha;
      x[i + 1] *= alpha;
      x[i + 2] *= alpha;
      x[i + 3] *= alpha;
    }
    for (; i < n; ++i) x[i] *= alpha;
  }

  template <typename T>
  T dot_t(std::span<const T> x, std::span<const T> y) const {
    const std::size_t n = x.size();
    T s0{}, s1{}, s2{}, s3{};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      s0 += x[i] * y[i];
      s1 += x[i + 1] * y[i + 1];
      s2 += x[i + 2] * y[i + 2];
      s3 += x[i + 3] * y[i + 3];
    }
    for (; i < n; ++i) s0 += x[i] * y[i];
    return (s0 + s1) + (s2 + s3);
  }

  template <typename T>
  void spmv_t(const CsrView<T>& a, std::span<const T> x, std::span<T> y) const {
    for (std::size_t i = 0; i < a.rows; ++i) {
      std::size_t k = a.row_ptr[i];
      const std::size_t end = a.row_ptr[i + 1];
      T s0{}, s1{}, s2{}, s3{};
      for (; k + 4 <= end; k += 4) {
        s0 += a.values[k] * x[a.col_idx[k]];
        s1 += a.values[k + 1] * x[a.col_idx[k + 1]];
        s2 += a.values[k + 2] * x[a.col_idx[k + 2]];
        s3 += a.values[k + 3] * x[a.col_idx[k + 3]];
      }
      for (; k < end; ++k) s0 += a.values[k] * x[a.col_idx[k]];
      y[i] = (s0 + s1) + (s2 + s3);
    }
  }

  template <typename T>
  void dense_mv_t(Layout layout, std::size_t rows, std::size_t cols, std::span<const T> a, std::span<const T> x,
                  std::span<T> y) const {
    if (layout == Layout::row_major) {
      // Four rows share each load of x[j].
      std::size_t i = 0;
      for (; i + 4 <= rows; i += 4) {
        const T* r0 = &a[i * cols];
        const T* r1 = r0 + cols;
        const T* r2 = r1 + cols;
        const T* r3 = r2 + cols;
        T s0{}, s1{}, s2{}, s3{};
        for (std::size_t j = 0; j < cols; ++j) {
          const T xj = x[j];
          s0 += r0[j] * xj;
          s1 += r1[j] * xj;
          s2 += r2[j] * xj;
          s3 += r3[j] * xj;
        }
        y[i] = s0;
        y[i + 1] = s1;
        y[i + 2] = s2;
        y[i + 3] = s3;
      }
      for (; i < rows; ++i) {
        T acc{};
        for (std::size_t j = 0; j < cols; ++j) acc += a[i * cols + j] * x[j];
        y[i] = acc;
      }
    } else {
      // Four columns per sweep over y.
      for (std::size_t i = 0; i < rows; ++i) y[i] = T{};
      std::size_t j = 0;
      for (; j + 4 <= cols; j += 4) {
        const T x0 = x[j], x1 = x[j + 1], x2 = x[j + 2], x3 = x[j + 3];
        const T* c0 = &a[j * rows];
        const T* c1 = c0 + rows;
        const T* c2 = c1 + rows;
        const T* c3 = c2 + rows;
        for (std::size_t i = 0; i < rows; ++i) y[i] += c0[i] * x0 + c1[i] * x1 + c2[i] * x2 + c3[i] * x3;
      }
      for (; j < cols; ++j) {
        const T xj = x[j];
        for (std::size_t i = 0; i < rows; ++i) y[i] += a[j * rows + i] * xj;
      }
    }
  }
};

/// Planted bug: believes its arrays are 64-byte aligned and silently skips
/// the final element of a vector loop when they are not.
class UnalignedDropBackend : public BackendAdapter<UnalignedDropBackend> {
 public:
  std::string_view name() const override { return "trap_unaligned"; }
  std::size_t required_alignment() const override { return kCacheLineBytes; }

  template <typename T>
  void axpy_t(T alpha, std::span<const T> x, std::span<T> y) const {
    inner_.axpy_t(alpha, trim(x), trim(y));
  }
  template <typename T>
  void scale_t(T alpha, std::span<T> x) const {
    inner_.scale_t(alpha, trim(x));
  }
  template <typename T>
  T dot_t(std::span<const T> x, std::span<const T> y) const {
    return inner_.dot_t(trim(x), trim(y));
  }
  template <typename T>
  void spmv_t(const CsrView<T>& a, std::span<const T> x, std::span<T> y) const {
    inner_.spmv_t(a, x, y);
  }
  template <typename T>
  void dense_mv_t(Layout layout, std::size_t rows, std::size_t cols, std::span<const T> a, std::span<const T> x,
                  std::span<T> y) const {
    inner_.dense_mv_t(layout, rows, cols, a, x, y);
  }

 private:
  template <typename S>
  static S trim(S s) {
    if (!s.empty() && !is_aligned(s.data(), kCacheLineBytes)) return s.first(s.size() - 1);
    return s;
  }
  OptimizedBackend inner_;
};

/// Planted bug: merges rank partials in an order that depends on the calling
/// rank, like a ring reduction started at the local rank.
class UnorderedReduceBackend : public BackendAdapter<UnorderedReduceBackend> {
 public:
  std::string_view name() const override { return "trap_unordered"; }

  template <typename T>
  void axpy_t(T alpha, std::span<const T> x, std::span<T> y) const {
    inner_.axpy_t(alpha, x, y);
  }
  template <typename T>
  void scale_t(T alpha, std::span<T> x) const {
    inner_.scale_t(alpha, x);
  }
  template <typename T>
  T dot_t(std::span<const T> x, std::span<const T> y) const {
    return inner_.dot_t(x, y);
  }
  template <typename T>
  void spmv_t(const CsrView<T>& a, std::span<const T> x, std::span<T> y) const {
    inner_.spmv_t(a, x, y);
  }
  template <typename T>
  void dense_mv_t(Layout layout, std::size_t rows, std::size_t cols, std::span<const T> a, std::span<const T> x,
                  std::span<T> y) const {
    inner_.dense_mv_t(layout, rows, cols, a, x, y);
  }

  float combine_partials(std::span<const float> p, std::size_t rank) const override { return ring(p, rank); }
  double combine_partials(std::span<const double> p, std::size_t rank) const override { return ring(p, rank); }

 private:
  template <typename T>
  static T ring(std::span<const T> p, std::size_t rank) {
    T acc{};
    for (std::size_t k = 0; k < p.size(); ++k) acc += p[(rank + k) % p.size()];
    return acc;
  }
  OptimizedBackend inner_;
};

}  // namespace hpcwb

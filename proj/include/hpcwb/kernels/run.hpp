#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hpcwb/aligned_buffer.hpp"
#include "hpcwb/error.hpp"
#include "hpcwb/kernels/backend.hpp"
#include "hpcwb/kernels/data.hpp"
#include "hpcwb/kernels/spec.hpp"
#include "hpcwb/reduce.hpp"

namespace hpcwb {

template <typename T>
struct KernelResult {
  /// y for axpy/spmv/dense_mv, x for scale, the single value for dot.
  std::vector<T> output;
  double checksum = 0.0;
};

/// A kernel bound to a backend with its operands copied into 64-byte aligned
/// storage, shifted by `alignment_offset` elements (0 or 1). Can be executed
/// repeatedly; reset() restores the operands to the original inputs.
template <typename T>
class PreparedKernel {
 public:
  PreparedKernel(const KernelSpec& spec, const Backend& backend, const KernelInputs<T>& inputs,
                 std::size_t alignment_offset)
      : spec_(spec), backend_(&backend), inputs_(&inputs), offset_(alignment_offset) {
    if (spec.precision != precision_of<T>())
      throw ShapeMismatch("kernel " + spec.id + " run with the wrong element type");
    if (alignment_offset > 1) throw PreconditionError("alignment_offset must be 0 or 1");
    if (!backend.supports(spec.operation, spec.precision, spec.layout))
      throw UnsupportedCombination("backend " + std::string(backend.name()) + " does not implement " + spec.id);
    check_shapes();
    reset();
  }

  /// Restores the operands to the original inputs without reallocating.
  void reset() {
    const auto& in = *inputs_;
    restore(x_, in.x);
    restore(y_, in.y);
    if (spec_.operation == Operation::dense_mv) restore(a_, in.a);
    if (spec_.operation == Operation::csr_spmv) {
      restore(row_ptr_, in.csr.row_ptr);
      restore(col_idx_, in.csr.col_idx);
      restore(values_, in.csr.values);
    }
    scalar_ = T{};
    parity_ = false;
  }

  /// One application of the kernel. scale alternates alpha and 1/alpha so
  /// repeated execution neither overflows nor decays into subnormals.
  void execute() {
    const T alpha = inputs_->alpha;
    switch (spec_.operation) {
      case Operation::axpy: backend_->axpy(alpha, x_.span(), y_.span()); break;
      case Operation::scale:
        backend_->scale(parity_ && alpha != T{} ? T{1} / alpha : alpha, x_.span());
        parity_ = !parity_;
        break;
      case Operation::dot: scalar_ = backend_->dot(std::span<const T>(x_.span()), y_.span()); break;
      case Operation::csr_spmv: {
        const auto& m = inputs_->csr;
        CsrView<T> view{m.rows, m.cols, row_ptr_.span(), col_idx_.span(), values_.span()};
        backend_->csr_spmv(view, x_.span(), y_.span());
        break;
      }
      case Operation::dense_mv:
        backend_->dense_mv(spec_.layout, inputs_->rows, inputs_->cols, a_.span(), x_.span(), y_.span());
        break;
    }
  }

  std::vector<T> output() const {
    switch (spec_.operation) {
      case Operation::scale: return {x_.span().begin(), x_.span().end()};
      case Operation::dot: return {scalar_};
      default: return {y_.span().begin(), y_.span().end()};
    }
  }

  /// Tree-order sum of the current output.
  double checksum() const {
    if (spec_.operation == Operation::dot) return static_cast<double>(scalar_);
    return tree_sum<T>(spec_.operation == Operation::scale ? x_.span() : y_.span());
  }

  const KernelSpec& spec() const noexcept { return spec_; }

 private:
  template <typename U>
  void restore(AlignedBuffer<U>& buf, const std::vector<U>& src) {
    if (!buf.allocated() || buf.size() != src.size()) buf = AlignedBuffer<U>(src.size(), offset_);
    std::copy(src.begin(), src.end(), buf.data());
  }

  void check_shapes() const {
    const auto& in = *inputs_;
    switch (spec_.operation) {
      case Operation::axpy:
      case Operation::dot:
        if (in.x.size() != in.y.size()) throw ShapeMismatch(spec_.id + ": x and y differ in length");
        if (in.x.empty()) throw ShapeMismatch(spec_.id + ": empty vectors");
        break;
      case Operation::scale:
        if (in.x.empty()) throw ShapeMismatch(spec_.id + ": empty vector");
        break;
      case Operation::csr_spmv:
        in.csr.validate();
        if (in.x.size() != in.csr.cols) throw ShapeMismatch(spec_.id + ": x length must equal cols");
        if (in.y.size() != in.csr.rows) throw ShapeMismatch(spec_.id + ": y length must equal rows");
        break;
      case Operation::dense_mv:
        if (in.a.size() != in.rows * in.cols) throw ShapeMismatch(spec_.id + ": matrix size != rows*cols");
        if (in.x.size() != in.cols) throw ShapeMismatch(spec_.id + ": x length must equal cols");
        if (in.y.size() != in.rows) throw ShapeMismatch(spec_.id + ": y length must equal rows");
        break;
    }
  }

  KernelSpec spec_;
  const Backend* backend_;
  const KernelInputs<T>* inputs_;
  std::size_t offset_;
  AlignedBuffer<T> x_, y_, a_, values_;
  AlignedBuffer<std::uint32_t> row_ptr_, col_idx_;
  T scalar_{};
  bool parity_ = false;
};

/// Runs the kernel once on a fresh copy of `inputs`.
template <typename T>
KernelResult<T> run(const KernelSpec& spec, const Backend& backend, const KernelInputs<T>& inputs,
                    std::size_t alignment_offset = 0) {
  PreparedKernel<T> k(spec, backend, inputs, alignment_offset);
  k.execute();
  return {k.output(), k.checksum()};
}

}  // namespace hpcwb

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "hpcwb/kernels/csr.hpp"
#include "hpcwb/kernels/spec.hpp"

namespace hpcwb {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Uniform values in [-1, 1] from mt19937_64. The bits-to-double mapping is
/// written out so the stream is identical on every standard library.
///
/// With lattice_bits = b > 0 each value is rounded to a multiple of 2^-b. Sums
/// of products of such values are exact in floating point as long as they fit
/// the mantissa, so any summation order gives bitwise identical results.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed = kDefaultSeed, int lattice_bits = 0)
      : engine_(seed), lattice_bits_(lattice_bits) {}

  double operator()() {
    double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;  // [0, 1)
    double v = 2.0 * unit - 1.0;
    if (lattice_bits_ > 0) v = std::ldexp(std::nearbyint(std::ldexp(v, lattice_bits_)), -lattice_bits_);
    return v;
  }

 private:
  std::mt19937_64 engine_;
  int lattice_bits_;
};

/// Lattice used by correctness tests: exact for float up to 4096-term sums.
inline constexpr int kTestLatticeBits = 6;

struct DataOptions {
  std::uint64_t seed = kDefaultSeed;
  int lattice_bits = 0;
};

/// Everything any kernel may read. Unused members stay empty.
template <typename T>
struct KernelInputs {
  T alpha{};
  std::vector<T> x;
  std::vector<T> y;
  CsrMatrix<T> csr;
  /// Dense matrix stored according to the kernel's layout.
  std::vector<T> a;
  std::size_t rows = 0;
  std::size_t cols = 0;

  ProblemShape shape(Operation op) const {
    switch (op) {
      case Operation::csr_spmv: return ProblemShape::of(csr);
      case Operation::dense_mv: return ProblemShape::dense(rows, cols);
      default: return ProblemShape::vector(x.size());
    }
  }
};

/// Seeded inputs for `spec` at problem size n (see shape_for).
template <typename T>
KernelInputs<T> make_inputs(const KernelSpec& spec, std::size_t n, DataOptions opts = {}) {
  if (n == 0) throw InvalidSize("problem size must be >= 1");
  UniformSource next(opts.seed, opts.lattice_bits);
  auto fill = [&](std::size_t count) {
    std::vector<T> v(count);
    for (auto& e : v) e = static_cast<T>(next());
    return v;
  };
  KernelInputs<T> in;
  in.alpha = static_cast<T>(next());
  switch (spec.operation) {
    case Operation::axpy:
    case Operation::dot:
      in.x = fill(n);
      in.y = fill(n);
      break;
    case Operation::scale:
      in.x = fill(n);
      break;
    case Operation::csr_spmv:
      in.csr = make_banded<T>(n, next);
      in.x = fill(n);
      in.y.assign(n, T{});
      break;
    case Operation::dense_mv:
      in.rows = in.cols = n;
      in.a = fill(n * n);
      in.x = fill(n);
      in.y.assign(n, T{});
      break;
  }
  return in;
}

}  // namespace hpcwb

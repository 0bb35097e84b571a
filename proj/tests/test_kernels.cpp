#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hpcwb/kernels.hpp"
#include "hpcwb/numeric.hpp"
#include "hpcwb/reduce.hpp"

using namespace hpcwb;

namespace {

KernelSpec spec_of(Operation op, Precision p, Layout l = Layout::none) { return KernelSpec::make(op, p, l); }

template <typename T>
KernelCost oracle_at(const KernelSpec& s, std::size_t n) {
  return traffic_oracle<T>(s, make_inputs<T>(s, n));
}

KernelCost oracle_any(const KernelSpec& s, std::size_t n) {
  return s.precision == Precision::f32 ? oracle_at<float>(s, n) : oracle_at<double>(s, n);
}

}  // namespace

TEST(Traffic, AxpyOfSevenDoubles) {
  const auto s = spec_of(Operation::axpy, Precision::f64);
  const auto c = oracle_at<double>(s, 7);
  EXPECT_EQ(c.flops, 14u);
  EXPECT_EQ(c.bytes_realistic, 224u);
  EXPECT_EQ(c.bytes_idealized, 168u);
  const auto k = cost(s, 7);
  EXPECT_EQ(k.flops, 14u);
  EXPECT_EQ(k.bytes_realistic, 224u);
  EXPECT_EQ(k.bytes_idealized, 168u);
}

TEST(Traffic, CsrIdentityTwoByTwo) {
  const auto s = spec_of(Operation::csr_spmv, Precision::f64);
  KernelInputs<double> in;
  in.csr = make_identity<double>(2);
  in.x = {1.0, 2.0};
  in.y = {0.0, 0.0};
  const auto c = traffic_oracle<double>(s, in);
  EXPECT_EQ(c.flops, 4u);
  EXPECT_EQ(c.bytes_idealized, 68u);
  EXPECT_EQ(c.bytes_realistic, 84u);
  const auto k = cost(s, ProblemShape::of(in.csr));
  EXPECT_EQ(k.flops, 4u);
  EXPECT_EQ(k.bytes_idealized, 68u);
  EXPECT_EQ(k.bytes_realistic, 84u);
}

TEST(Traffic, HandCountedSmallCases) {
  // scale n=3 f32: read x, write x, allocate x -> 9 accesses of 4 bytes
  auto sc = cost(spec_of(Operation::scale, Precision::f32), 3);
  EXPECT_EQ(sc.flops, 3u);
  EXPECT_EQ(sc.bytes_realistic, 36u);
  EXPECT_EQ(sc.bytes_idealized, 24u);
  // dot n=5 f64: two streams, nothing written to memory
  auto d = cost(spec_of(Operation::dot, Precision::f64), 5);
  EXPECT_EQ(d.flops, 10u);
  EXPECT_EQ(d.bytes_realistic, 80u);
  EXPECT_EQ(d.bytes_idealized, 80u);
  // dense 3x3 row-major f64: A once, x per row, y written with allocate
  auto r = cost(spec_of(Operation::dense_mv, Precision::f64, Layout::row_major), 3);
  EXPECT_EQ(r.flops, 18u);
  EXPECT_EQ(r.bytes_idealized, 8u * (9 + 3 + 3));
  EXPECT_EQ(r.bytes_realistic, 8u * (9 + 9 + 3 + 3));
  // column-major also re-reads and re-writes y per column
  auto col = cost(spec_of(Operation::dense_mv, Precision::f64, Layout::col_major), 3);
  EXPECT_EQ(col.bytes_idealized, 8u * (9 + 3 + 3 + 3));
  EXPECT_EQ(col.bytes_realistic, 8u * (3 * 9 + 2 * 3 + 3));
}

TEST(Traffic, ClosedFormMatchesReplayForSmallSizes) {
  for (const auto& s : Registry::standard_specs())
    for (std::size_t n = 1; n <= 24; ++n) {
      const auto want = oracle_any(s, n);
      const auto got = cost(s, n);
      ASSERT_EQ(got.flops, want.flops) << s.id << " n=" << n;
      ASSERT_EQ(got.bytes_realistic, want.bytes_realistic) << s.id << " n=" << n;
      ASSERT_EQ(got.bytes_idealized, want.bytes_idealized) << s.id << " n=" << n;
      ASSERT_EQ(got.footprint, want.footprint) << s.id << " n=" << n;
    }
}

TEST(Traffic, IdealizedNeverExceedsRealistic) {
  for (const auto& s : Registry::standard_specs())
    for (std::uint64_t n : {1u, 2u, 5u, 100u, 1000u}) {
      auto c = cost(s, n);
      EXPECT_LE(c.bytes_idealized, c.bytes_realistic) << s.id;
      EXPECT_GT(c.bytes_idealized, 0u);
    }
}

TEST(Traffic, RejectsEmptyProblems) {
  EXPECT_THROW(cost(spec_of(Operation::axpy, Precision::f64), 0), InvalidSize);
  EXPECT_THROW(make_inputs<double>(spec_of(Operation::dot, Precision::f64), 0), InvalidSize);
}

TEST(Traffic, BandedNnzMatchesGenerator) {
  UniformSource src(7, 0);
  for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 10u, 33u}) {
    auto m = make_banded<double>(n, src);
    EXPECT_EQ(m.nnz(), banded_nnz(n)) << n;
    EXPECT_NO_THROW(m.validate());
  }
}

TEST(TreeReduce, AssociatesNeighboursAndCarriesOddTail) {
  std::vector<std::string> v{"a", "b", "c", "d", "e"};
  auto joined = tree_reduce(std::span<const std::string>(v),
                            [](const std::string& l, const std::string& r) { return "(" + l + r + ")"; });
  EXPECT_EQ(joined, "(((ab)(cd))e)");
  std::vector<std::string> four{"a", "b", "c", "d"};
  EXPECT_EQ(tree_reduce(std::span<const std::string>(four),
                        [](const std::string& l, const std::string& r) { return "(" + l + r + ")"; }),
            "((ab)(cd))");
}

TEST(TreeReduce, EmptyThrows) {
  std::vector<double> none;
  EXPECT_THROW(tree_reduce(std::span<const double>(none), [](double a, double b) { return a + b; }),
               std::invalid_argument);
}

TEST(Numeric, UlpDistance) {
  EXPECT_EQ(ulp_distance(1.0, std::nextafter(1.0, 2.0)), 1u);
  EXPECT_EQ(ulp_distance(0.0, -0.0), 0u);
  EXPECT_EQ(ulp_distance(-std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::denorm_min()), 2u);
  EXPECT_EQ(ulp_distance(1.0f, 1.0f), 0u);
  EXPECT_EQ(ulp_distance(std::nan(""), 1.0), std::numeric_limits<std::uint64_t>::max());
}

TEST(AlignedBufferTest, OffsetShiftsByOneElement) {
  AlignedBuffer<double> a(10, 0), b(10, 1);
  EXPECT_TRUE(is_aligned(a.data(), kCacheLineBytes));
  EXPECT_FALSE(is_aligned(b.data(), kCacheLineBytes));
  EXPECT_TRUE(is_aligned(b.data() - 1, kCacheLineBytes));
  EXPECT_EQ(b.size(), 10u);
}

TEST(Backends, ReferenceMatchesHandComputation) {
  ReferenceBackend ref;
  std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  ref.axpy(2.0, std::span<const double>(x), std::span<double>(y));
  EXPECT_EQ(y, (std::vector<double>{6, 9, 12}));
  EXPECT_EQ(ref.dot(std::span<const double>(x), std::span<const double>(x)), 14.0);
  // [[1 2] [3 4]] * [1 1]
  std::vector<double> row{1, 2, 3, 4}, col{1, 3, 2, 4}, ones{1, 1}, out(2);
  ref.dense_mv(Layout::row_major, 2, 2, std::span<const double>(row), std::span<const double>(ones), std::span<double>(out));
  EXPECT_EQ(out, (std::vector<double>{3, 7}));
  ref.dense_mv(Layout::col_major, 2, 2, std::span<const double>(col), std::span<const double>(ones), std::span<double>(out));
  EXPECT_EQ(out, (std::vector<double>{3, 7}));
}

TEST(Backends, OptimizedAgreesOnLatticeData) {
  auto reg = make_registry();
  auto ref = reg.find_backend("reference");
  auto opt = reg.find_backend("optimized");
  for (const auto& s : reg.specs())
    for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 129u})
      for (std::size_t off : {0u, 1u}) {
        auto check = [&]<typename T>() {
          auto in = make_inputs<T>(s, n, {kDefaultSeed, kTestLatticeBits});
          auto a = run(s, *ref, in, off);
          auto b = run(s, *opt, in, off);
          ASSERT_EQ(a.output.size(), b.output.size());
          for (std::size_t i = 0; i < a.output.size(); ++i)
            ASSERT_LE(ulp_distance(a.output[i], b.output[i]), 4u) << s.id << " n=" << n << " off=" << off;
        };
        if (s.precision == Precision::f32)
          check.template operator()<float>();
        else
          check.template operator()<double>();
      }
}

TEST(Backends, ReferenceIsAlignmentIndependent) {
  ReferenceBackend ref;
  for (const auto& s : Registry::standard_specs()) {
    if (s.precision != Precision::f64) continue;
    auto in = make_inputs<double>(s, 37);
    auto a = run(s, ref, in, 0), b = run(s, ref, in, 1);
    for (std::size_t i = 0; i < a.output.size(); ++i) ASSERT_TRUE(bitwise_equal(a.output[i], b.output[i])) << s.id;
  }
}

TEST(Backends, UnalignedTrapDropsLastElementOnlyWhenMisaligned) {
  UnalignedDropBackend trap;
  ReferenceBackend ref;
  const auto s = spec_of(Operation::axpy, Precision::f64);
  auto in = make_inputs<double>(s, 9);
  auto good = run(s, ref, in, 1);
  auto aligned = run(s, trap, in, 0);
  auto shifted = run(s, trap, in, 1);
  EXPECT_EQ(aligned.output, good.output);
  EXPECT_EQ(shifted.output.back(), in.y.back());
  EXPECT_NE(shifted.output.back(), good.output.back());
}

TEST(Backends, UnorderedTrapDependsOnRank) {
  UnorderedReduceBackend trap;
  ReferenceBackend ref;
  std::vector<double> p{1e16, 1.0, -1e16, 1.0};
  const double tree = ref.combine_partials(std::span<const double>(p), 0);
  EXPECT_EQ(tree, ((1e16 + 1.0) + (-1e16 + 1.0)));
  EXPECT_NE(trap.combine_partials(std::span<const double>(p), 0), trap.combine_partials(std::span<const double>(p), 1));
}

TEST(Registry, VariantCounts) {
  auto reg = make_registry();
  EXPECT_EQ(reg.list_variants().size(), 24u);
  EXPECT_EQ(reg.list_variants(VariantFilter::parse("dot")).size(), 4u);
  EXPECT_EQ(reg.list_variants(VariantFilter::parse("dense_mv_f64_col")).size(), 2u);
  EXPECT_TRUE(reg.list_variants(VariantFilter::parse("no_such")).empty());
  auto with_traps = make_registry({Trap::unaligned, Trap::unordered});
  EXPECT_EQ(with_traps.list_variants().size(), 48u);
}

TEST(Registry, IdsAreStable) {
  EXPECT_EQ(KernelSpec::make(Operation::axpy, Precision::f64).id, "axpy_f64");
  EXPECT_EQ(KernelSpec::make(Operation::dense_mv, Precision::f32, Layout::col_major).id, "dense_mv_f32_col");
}

TEST(PreparedKernelTest, RejectsBadArguments) {
  ReferenceBackend ref;
  const auto s = spec_of(Operation::axpy, Precision::f64);
  auto in = make_inputs<float>(spec_of(Operation::axpy, Precision::f32), 4);
  EXPECT_THROW(run(s, ref, in), ShapeMismatch);
  auto good = make_inputs<double>(s, 4);
  EXPECT_THROW(run(s, ref, good, 2), PreconditionError);
  good.y.pop_back();
  EXPECT_THROW(run(s, ref, good), ShapeMismatch);
}

TEST(PreparedKernelTest, ScaleAlternatesAlphaAndInverse) {
  ReferenceBackend ref;
  const auto s = spec_of(Operation::scale, Precision::f64);
  KernelInputs<double> in;
  in.alpha = 4.0;
  in.x = {1.0, 2.0};
  PreparedKernel<double> k(s, ref, in, 0);
  k.execute();
  EXPECT_EQ(k.output(), (std::vector<double>{4.0, 8.0}));
  k.execute();
  EXPECT_EQ(k.output(), (std::vector<double>{1.0, 2.0}));
  k.execute();
  k.reset();
  EXPECT_EQ(k.output(), (std::vector<double>{1.0, 2.0}));
}

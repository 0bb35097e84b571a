#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "hpcwb/numeric.hpp"
#include "hpcwb/simgroup.hpp"

using namespace hpcwb;

TEST(Collectives, BasicOperations) {
  auto res = spawn(4, [](Communicator& c) {
    c.barrier();
    const double r = static_cast<double>(c.rank());
    const double sum = c.allreduce(r + 1.0, ReduceOp::sum);
    const double mx = c.allreduce(r, ReduceOp::max);
    const double mn = c.allreduce(r, ReduceOp::min);
    const int b = c.broadcast(2, static_cast<int>(c.rank()) * 10);
    auto g = c.gather(1, static_cast<int>(c.rank()));
    auto ag = c.allgather(std::string(1, static_cast<char>('a' + c.rank())));
    EXPECT_EQ(sum, 10.0);
    EXPECT_EQ(mx, 3.0);
    EXPECT_EQ(mn, 0.0);
    EXPECT_EQ(b, 20);
    if (c.rank() == 1)
      EXPECT_EQ(g, (std::vector<int>{0, 1, 2, 3}));
    else
      EXPECT_TRUE(g.empty());
    EXPECT_EQ(ag, (std::vector<std::string>{"a", "b", "c", "d"}));
    return c.size();
  });
  ASSERT_TRUE(res.ok());
  EXPECT_EQ(res.values(), (std::vector<std::size_t>{4, 4, 4, 4}));
}

TEST(Collectives, LogicalAnd) {
  auto res = spawn(3, [](Communicator& c) { return c.allreduce(c.rank() != 1, ReduceOp::logical_and); });
  for (bool v : res.values()) EXPECT_FALSE(v);
}

TEST(Collectives, VoidBodiesAndSingleRank) {
  std::atomic<int> ran{0};
  auto res = spawn(1, [&](Communicator& c) {
    c.barrier();
    ++ran;
  });
  EXPECT_TRUE(res.ok());
  EXPECT_EQ(ran.load(), 1);
}

TEST(Collectives, TreeOrderFixture) {
  // fixed association ((v0+v1)+(v2+v3)) evaluated here independently
  const double v[4] = {1e16, 1.0, -1e16, 1.0};
  volatile double left = v[0] + v[1];
  volatile double right = v[2] + v[3];
  const double expected = left + right;
  auto res = spawn(4, [&](Communicator& c) { return c.allreduce(v[c.rank()], ReduceOp::sum); });
  for (double got : res.values()) EXPECT_TRUE(bitwise_equal(got, expected));
}

TEST(Collectives, AllreduceIsBitwiseReproducibleUnderJitter) {
  std::vector<double> values(4);
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : values) v = dist(gen) * std::pow(10.0, static_cast<int>(gen() % 20) - 10);
  std::optional<double> first;
  for (int trial = 0; trial < 25; ++trial) {
    GroupOptions o;
    o.jitter_seed = static_cast<std::uint64_t>(trial);
    auto res = spawn(4, [&](Communicator& c) { return c.allreduce(values[c.rank()], ReduceOp::sum); }, o);
    for (double got : res.values()) {
      if (!first) first = got;
      ASSERT_TRUE(bitwise_equal(got, *first));
    }
  }
}

TEST(Watchdog, SkippedBarrierIsADeadlock) {
  GroupOptions o;
  o.timeout_seconds = 0.5;
  const auto start = std::chrono::steady_clock::now();
  auto res = spawn(4, [](Communicator& c) {
    if (c.rank() != 1) c.barrier();
  }, o);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_TRUE(res.error.has_value());
  EXPECT_EQ(res.error->kind(), CollectiveErrorKind::deadlock);
  EXPECT_EQ(res.error->blocked_ranks(), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_EQ(res.error->site(), "barrier#1");
  EXPECT_LT(elapsed, o.timeout_seconds + 1.0);
  EXPECT_TRUE(res.ranks[1].ok());
  EXPECT_TRUE(res.ranks[0].aborted);
  EXPECT_THROW(res.values(), CollectiveError);
}

TEST(Watchdog, SlowRankIsNotADeadlock) {
  GroupOptions o;
  o.timeout_seconds = 0.2;
  auto res = spawn(2, [](Communicator& c) {
    if (c.rank() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(600));
    c.barrier();
    return 1;
  }, o);
  EXPECT_TRUE(res.ok()) << (res.error ? res.error->what() : "");
}

TEST(Watchdog, MismatchedCollectives) {
  GroupOptions o;
  o.timeout_seconds = 5;
  auto res = spawn(2, [](Communicator& c) {
    if (c.rank() == 0)
      c.barrier();
    else
      c.allreduce(1, ReduceOp::sum);
  }, o);
  ASSERT_TRUE(res.error.has_value());
  EXPECT_EQ(res.error->kind(), CollectiveErrorKind::mismatch);
}

TEST(Watchdog, MismatchedExplicitSites) {
  GroupOptions o;
  o.timeout_seconds = 5;
  auto res = spawn(2, [](Communicator& c) { c.barrier(c.rank() == 0 ? "here" : "there"); }, o);
  ASSERT_TRUE(res.error.has_value());
  EXPECT_EQ(res.error->kind(), CollectiveErrorKind::mismatch);
}

TEST(Spawn, RankExceptionIsReported) {
  auto res = spawn(2, [](Communicator& c) {
    if (c.rank() == 1) throw std::runtime_error("boom");
    return 0;
  });
  EXPECT_FALSE(res.ok());
  EXPECT_TRUE(res.ranks[0].ok());
  EXPECT_EQ(res.ranks[1].failure, "boom");
  EXPECT_THROW(res.values(), Error);
}

TEST(Spawn, RejectsBadArguments) {
  EXPECT_THROW(spawn(0, [](Communicator&) {}), PreconditionError);
  GroupOptions o;
  o.timeout_seconds = 0;
  EXPECT_THROW(spawn(1, [](Communicator&) {}, o), PreconditionError);
}

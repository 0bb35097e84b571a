#pragma once

#include <algorithm>
#include <any>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "hpcwb/error.hpp"
#include "hpcwb/reduce.hpp"

namespace hpcwb {

enum class CollectiveErrorKind { deadlock, mismatch };

/// A collective that cannot complete: ranks stuck past the watchdog timeout,
/// or ranks that entered different collectives at the same position.
class CollectiveError : public Error {
 public:
  CollectiveError(CollectiveErrorKind kind, std::vector<std::size_t> blocked_ranks, std::string site)
      : Error(describe(kind, blocked_ranks, site)),
        kind_(kind),
        blocked_ranks_(std::move(blocked_ranks)),
        site_(std::move(site)) {}

  CollectiveErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& blocked_ranks() const noexcept { return blocked_ranks_; }
  const std::string& site() const noexcept { return site_; }

 private:
  static std::string describe(CollectiveErrorKind kind, const std::vector<std::size_t>& ranks,
                              const std::string& site) {
    std::ostringstream os;
    os << (kind == CollectiveErrorKind::deadlock ? "Deadlock" : "Mismatch") << " at " << site << ", ranks [";
    for (std::size_t i = 0; i < ranks.size(); ++i) os << (i ? "," : "") << ranks[i];
    os << "]";
    return os.str();
  }

  CollectiveErrorKind kind_;
  std::vector<std::size_t> blocked_ranks_;
  std::string site_;
};

enum class ReduceOp { sum, max, min, logical_and };

inline constexpr double kDefaultWatchdogSeconds = 30.0;

struct GroupOptions {
  double timeout_seconds = kDefaultWatchdogSeconds;
  /// When set, every rank sleeps a pseudo-random few microseconds before
  /// each collective, perturbing the arrival order.
  std::optional<std::uint64_t> jitter_seed;
};

namespace detail {

/// Thrown inside ranks that are released after the group was aborted.
struct GroupAborted {};

class GroupState {
 public:
  using Clock = std::chrono::steady_clock;
  using Combine = std::function<std::any(std::vector<std::any>&, std::size_t root)>;

  explicit GroupState(std::size_t size) : size_(size), ranks_(size), next_seq_(size, 0) {
    last_progress_ = Clock::now();
  }

  std::size_t size() const noexcept { return size_; }

  std::any enter(std::size_t rank, const std::string& kind, const std::string& site, bool explicit_site,
                 std::size_t root, std::any contribution, const Combine& combine) {
    std::unique_lock lock(mu_);
    if (aborted_) throw GroupAborted{};
    const std::size_t seq = next_seq_[rank]++;
    Slot& slot = slots_[seq];
    if (slot.arrived == 0) {
      slot.kind = kind;
      slot.site = site;
      slot.explicit_site = explicit_site;
      slot.root = root;
      slot.contributions.resize(size_);
    } else if (slot.kind != kind || slot.root != root ||
               (explicit_site && slot.explicit_site && slot.site != site)) {
      std::vector<std::size_t> involved;
      for (std::size_t r = 0; r < size_; ++r)
        if (ranks_[r].status == Status::blocked && ranks_[r].seq == seq) involved.push_back(r);
      involved.push_back(rank);
      std::sort(involved.begin(), involved.end());
      abort_locked(CollectiveError(CollectiveErrorKind::mismatch, std::move(involved), slot.site + " vs " + site));
      throw GroupAborted{};
    }
    slot.contributions[rank] = std::move(contribution);
    ++slot.arrived;
    ranks_[rank] = {Status::blocked, seq, site};
    last_progress_ = Clock::now();
    if (slot.arrived == size_) {
      slot.result = combine(slot.contributions, root);
      slot.complete = true;
      cv_.notify_all();
    } else {
      cv_.wait(lock, [&] { return slot.complete || aborted_; });
      if (!slot.complete) throw GroupAborted{};
    }
    ranks_[rank].status = Status::running;
    std::any result = slot.result;
    if (++slot.departed == size_) slots_.erase(seq);
    last_progress_ = Clock::now();
    return result;
  }

  void finish(std::size_t rank) {
    std::lock_guard lock(mu_);
    ranks_[rank].status = Status::finished;
    last_progress_ = Clock::now();
    ++finished_;
    cv_.notify_all();
  }

  /// Blocks until every rank has finished or a deadlock is declared. A
  /// deadlock needs no progress for `timeout`, at least one blocked rank and
  /// no rank still running outside a collective.
  std::optional<CollectiveError> supervise(double timeout_seconds) {
    const auto timeout = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_seconds));
    std::unique_lock lock(mu_);
    for (;;) {
      if (finished_ == size_) return error_;
      if (aborted_) {
        cv_.wait(lock, [&] { return finished_ == size_; });
        return error_;
      }
      auto deadline = last_progress_ + timeout;
      auto now = Clock::now();
      if (now >= deadline) {
        std::vector<std::size_t> blocked;
        std::set<std::string> sites;
        bool running = false;
        for (std::size_t r = 0; r < size_; ++r) {
          if (ranks_[r].status == Status::blocked) {
            blocked.push_back(r);
            sites.insert(ranks_[r].site);
          }
          running = running || ranks_[r].status == Status::running;
        }
        if (!blocked.empty() && !running) {
          std::string site;
          for (const auto& s : sites) site += (site.empty() ? "" : ",") + s;
          abort_locked(CollectiveError(CollectiveErrorKind::deadlock, std::move(blocked), site));
          continue;
        }
        deadline = now + timeout;
      }
      cv_.wait_until(lock, std::min(deadline, Clock::now() + std::chrono::milliseconds(50)));
    }
  }

 private:
  enum class Status { running, blocked, finished };
  struct RankState {
    Status status = Status::running;
    std::size_t seq = 0;
    std::string site;
  };
  struct Slot {
    std::string kind;
    std::string site;
    bool explicit_site = false;
    std::size_t root = 0;
    std::vector<std::any> contributions;
    std::size_t arrived = 0;
    std::size_t departed = 0;
    bool complete = false;
    std::any result;
  };

  void abort_locked(CollectiveError err) {
    if (!aborted_) error_ = std::move(err);
    aborted_ = true;
    cv_.notify_all();
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t size_;
  std::vector<RankState> ranks_;
  std::vector<std::size_t> next_seq_;
  std::map<std::size_t, Slot> slots_;
  std::size_t finished_ = 0;
  bool aborted_ = false;
  std::optional<CollectiveError> error_;
  Clock::time_point last_progress_;
};

template <typename T>
T apply_op(ReduceOp op, const T& a, const T& b) {
  switch (op) {
    case ReduceOp::sum: return a + b;
    case ReduceOp::max: return std::max(a, b);
    case ReduceOp::min: return std::min(a, b);
    case ReduceOp::logical_and: return static_cast<T>(static_cast<bool>(a) && static_cast<bool>(b));
  }
  return a;
}

}  // namespace detail

/// A rank's handle on its group. Every collective must be entered by all
/// ranks in the same order; the optional `site` labels it in error reports.
class Communicator {
 public:
  Communicator(std::shared_ptr<detail::GroupState> state, std::size_t rank, std::optional<std::uint64_t> jitter)
      : state_(std::move(state)), rank_(rank) {
    if (jitter) rng_.emplace(*jitter * 7919 + rank);
  }

  std::size_t rank() const noexcept { return rank_; }
  std::size_t size() const noexcept { return state_->size(); }

  void barrier(std::optional<std::string> site = std::nullopt) {
    enter("barrier", site, 0, std::any{}, [](std::vector<std::any>&, std::size_t) { return std::any{}; });
  }

  /// Reduces in the fixed pairwise tree over rank order; every rank receives
  /// the same bits.
  template <typename T>
  T allreduce(const T& local, ReduceOp op, std::optional<std::string> site = std::nullopt) {
    auto combine = [op](std::vector<std::any>& c, std::size_t) {
      std::vector<T> values;
      values.reserve(c.size());
      for (auto& v : c) values.push_back(std::any_cast<T>(v));
      return std::any(
          T(tree_reduce(std::move(values), [op](const T& a, const T& b) { return detail::apply_op(op, a, b); })));
    };
    return std::any_cast<T>(enter("allreduce", site, 0, std::any(local), combine));
  }

  template <typename T>
  T broadcast(std::size_t root, const T& value, std::optional<std::string> site = std::nullopt) {
    check_root(root);
    auto combine = [](std::vector<std::any>& c, std::size_t r) { return c[r]; };
    return std::any_cast<T>(enter("broadcast", site, root, std::any(value), combine));
  }

  /// Rank-ordered values at `root`; other ranks receive an empty vector.
  template <typename T>
  std::vector<T> gather(std::size_t root, const T& value, std::optional<std::string> site = std::nullopt) {
    check_root(root);
    auto all = std::any_cast<std::vector<T>>(enter("gather", site, root, std::any(value), collect<T>));
    return rank_ == root ? all : std::vector<T>{};
  }

  template <typename T>
  std::vector<T> allgather(const T& value, std::optional<std::string> site = std::nullopt) {
    return std::any_cast<std::vector<T>>(enter("allgather", site, 0, std::any(value), collect<T>));
  }

 private:
  template <typename T>
  static std::any collect(std::vector<std::any>& c, std::size_t) {
    std::vector<T> out;
    out.reserve(c.size());
    for (auto& v : c) out.push_back(std::any_cast<T>(v));
    return out;
  }

  void check_root(std::size_t root) const {
    if (root >= size()) throw PreconditionError("collective root out of range");
  }

  std::any enter(const std::string& kind, const std::optional<std::string>& site, std::size_t root, std::any value,
                 const detail::GroupState::Combine& combine) {
    const std::string label = site ? *site : kind + "#" + std::to_string(++counts_[kind]);
    if (rng_) std::this_thread::sleep_for(std::chrono::microseconds((*rng_)() % 200));
    return state_->enter(rank_, kind, label, site.has_value(), root, std::move(value), combine);
  }

  std::shared_ptr<detail::GroupState> state_;
  std::size_t rank_;
  std::map<std::string, std::size_t> counts_;
  std::optional<std::mt19937_64> rng_;
};

/// Outcome of one rank. `failure` is set when the body threw or was released
/// from a collective after the group aborted.
template <typename R>
struct RankOutcome {
  std::optional<R> value;
  std::string failure;
  bool aborted = false;

  bool ok() const noexcept { return value.has_value(); }
};

template <typename R>
struct SpawnResult {
  std::vector<RankOutcome<R>> ranks;
  std::optional<CollectiveError> error;

  bool ok() const {
    return !error && std::all_of(ranks.begin(), ranks.end(), [](const auto& r) { return r.ok(); });
  }

  /// Per-rank values. Throws the CollectiveError, or Error for a failed rank.
  std::vector<R> values() const {
    if (error) throw *error;
    std::vector<R> out;
    for (std::size_t r = 0; r < ranks.size(); ++r) {
      if (!ranks[r].ok()) throw Error("rank " + std::to_string(r) + " failed: " + ranks[r].failure);
      out.push_back(*ranks[r].value);
    }
    return out;
  }
};

/// Runs `body(Communicator&)` on `size` concurrent workers and collects one
/// result per rank. A body returning void yields std::monostate.
template <typename Body>
auto spawn(std::size_t size, Body&& body, GroupOptions opts = {}) {
  using Raw = std::invoke_result_t<Body&, Communicator&>;
  using R = std::conditional_t<std::is_void_v<Raw>, std::monostate, Raw>;
  detail::require(size >= 1, "spawn needs at least one rank");
  detail::require(opts.timeout_seconds > 0.0, "watchdog timeout must be positive");

  auto state = std::make_shared<detail::GroupState>(size);
  SpawnResult<R> result;
  result.ranks.resize(size);
  std::vector<std::thread> workers;
  workers.reserve(size);
  for (std::size_t r = 0; r < size; ++r) {
    workers.emplace_back([&, r] {
      Communicator comm(state, r, opts.jitter_seed);
      auto& out = result.ranks[r];
      try {
        if constexpr (std::is_void_v<Raw>) {
          body(comm);
          out.value = std::monostate{};
        } else {
          out.value = body(comm);
        }
      } catch (const detail::GroupAborted&) {
        out.aborted = true;
        out.failure = "released from a collective after the group aborted";
      } catch (const std::exception& e) {
        out.failure = e.what();
      } catch (...) {
        out.failure = "unknown exception";
      }
      state->finish(r);
    });
  }
  result.error = state->supervise(opts.timeout_seconds);
  for (auto& w : workers) w.join();
  return result;
}

}  // namespace hpcwb

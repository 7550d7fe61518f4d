#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "dualquant/rng.hpp"

namespace dualquant {

/// Single-pass moments: Welford for the variance, a plain running sum for
/// the mean. The sum is monotone in every summand, so two paired sample
/// sequences that are ordered draw by draw give means ordered the same way.
class RunningStats {
 public:
  void push(double x) {
    ++count_;
    sum_ += x;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  /// Pooled merge (Chan et al.); deterministic for a fixed merge order.
  void merge(const RunningStats& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    const double n1 = static_cast<double>(count_);
    const double n2 = static_cast<double>(other.count_);
    const double delta = other.mean_ - mean_;
    const double total = n1 + n2;
    mean_ += delta * n2 / total;
    m2_ += other.m2_ + delta * delta * n1 * n2 / total;
    sum_ += other.sum_;
    count_ += other.count_;
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_); }
  double variance() const { return count_ < 2 ? 0.0 : std::max(0.0, m2_) / static_cast<double>(count_ - 1); }
  double std_error() const { return count_ == 0 ? 0.0 : std::sqrt(variance() / static_cast<double>(count_)); }

 private:
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Samples per RNG stream in sharded Monte Carlo runs.
inline constexpr std::uint64_t kShardSize = std::uint64_t{1} << 14;

/// Worker threads used for sharded runs; results never depend on it.
unsigned monte_carlo_threads();
void set_monte_carlo_threads(unsigned threads);

/// Runs `samples` evaluations split into shards of kShardSize, shard k
/// drawing from rng.substream(k). `make_worker()` returns a callable
/// `std::array<double, K>(RngStream&)` per shard so workers can hold
/// scratch state. Shards are merged in index order.
template <std::size_t K, typename MakeWorker>
std::array<RunningStats, K> run_sharded(std::uint64_t samples, const RngStream& rng, MakeWorker&& make_worker) {
  const std::uint64_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<std::array<RunningStats, K>> partial(shards);
  std::vector<std::exception_ptr> failures(shards);

  auto run_shard = [&](std::uint64_t k) {
    try {
      RngStream stream = rng.substream(k);
      auto worker = make_worker();
      const std::uint64_t begin = k * kShardSize;
      const std::uint64_t end = std::min(samples, begin + kShardSize);
      for (std::uint64_t i = begin; i < end; ++i) {
        const std::array<double, K> values = worker(stream);
        for (std::size_t c = 0; c < K; ++c) partial[k][c].push(values[c]);
      }
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };

  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(monte_carlo_threads(), shards));
  if (threads <= 1) {
    for (std::uint64_t k = 0; k < shards; ++k) run_shard(k);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::uint64_t k = t; k < shards; k += threads) run_shard(k);
      });
    }
  }

  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  std::array<RunningStats, K> merged{};
  for (const auto& shard : partial) {
    for (std::size_t c = 0; c < K; ++c) merged[c].merge(shard[c]);
  }
  return merged;
}

}  // namespace dualquant

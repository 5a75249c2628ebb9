#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

#include "fpsample/error.hpp"
#include "fpsample/instance.hpp"
#include "fpsample/random.hpp"

namespace fpsample {

/// Weighted running mean and sum of squared deviations. Mergeable, so
/// partial results from independent blocks combine into the same totals.
class MomentAccumulator {
 public:
  void add(double x, double w = 1.0) {
    weight_ += w;
    const double delta = x - mean_;
    mean_ += delta * (w / weight_);  // first add: factor is exactly 1
    m2_ += w * delta * (x - mean_);
  }

  void merge(const MomentAccumulator& o) {
    if (o.weight_ == 0.0) return;
    if (weight_ == 0.0) {
      *this = o;
      return;
    }
    const double total = weight_ + o.weight_;
    const double delta = o.mean_ - mean_;
    mean_ += delta * o.weight_ / total;
    m2_ += o.m2_ + delta * delta * weight_ * o.weight_ / total;
    weight_ = total;
  }

  double weight() const { return weight_; }
  double mean() const { return mean_; }
  double sum_squared_deviations() const { return m2_; }

  /// Divisor: total weight. Exact variance when weights are probabilities.
  double population_variance() const { return weight_ > 0.0 ? std::max(0.0, m2_ / weight_) : 0.0; }

  /// Divisor: count - 1, for unit weights.
  double sample_variance() const { return weight_ > 1.0 ? std::max(0.0, m2_ / (weight_ - 1.0)) : 0.0; }

 private:
  double weight_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct EmpiricalMoments {
  double mean = 0.0;
  double variance = 0.0;  // divisor trials - 1
  std::uint64_t trials = 0;
  double se_mean = 0.0;
  double se_variance = 0.0;  // from the spread of batch variances
  std::uint64_t batches = 0;

  bool operator==(const EmpiricalMoments&) const = default;
};

struct MonteCarloOptions {
  std::size_t workers = 1;
  std::uint64_t block_size = 8192;  // trials per random stream
  std::uint64_t batches = 100;
};

/// Runs `trials` independent draws of the design and estimator.
///
/// Trial t belongs to block t / block_size, and block b draws from
/// RandomStream(seed, b). Partial accumulators are merged in block order,
/// so the result is bit-identical for any number of workers.
inline EmpiricalMoments simulate(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est,
                                 std::uint64_t trials, std::uint64_t seed, const MonteCarloOptions& opt = {}) {
  detail::require(trials >= 1, "need at least one trial");
  detail::require(opt.block_size >= 1, "block size must be positive");
  detail::require(opt.batches >= 1, "need at least one batch");
  const TrialEvaluator eval(inst, cfg, est);

  const std::uint64_t nbatch = std::max<std::uint64_t>(1, std::min(opt.batches, trials / 2));
  const std::uint64_t nblock = (trials + opt.block_size - 1) / opt.block_size;
  auto batch_of = [&](std::uint64_t t) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(t) * nbatch) / trials);
  };

  using Partial = std::vector<std::pair<std::uint64_t, MomentAccumulator>>;
  std::vector<Partial> partials(nblock);

  auto run_block = [&](std::uint64_t b) {
    RandomStream gen(seed, b);
    Partial local;
    const std::uint64_t end = std::min(trials, (b + 1) * opt.block_size);
    for (std::uint64_t t = b * opt.block_size; t < end; ++t) {
      const double x = eval(gen);
      const auto j = batch_of(t);
      if (local.empty() || local.back().first != j) local.emplace_back(j, MomentAccumulator{});
      local.back().second.add(x);
    }
    partials[b] = std::move(local);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min<std::uint64_t>(opt.workers, nblock));
  if (workers == 1) {
    for (std::uint64_t b = 0; b < nblock; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t b = next++; b < nblock; b = next++) run_block(b);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<MomentAccumulator> batch(nbatch);
  for (const auto& part : partials)
    for (const auto& [j, acc] : part) batch[j].merge(acc);
  MomentAccumulator all;
  for (const auto& acc : batch) all.merge(acc);

  EmpiricalMoments out;
  out.trials = trials;
  out.batches = nbatch;
  out.mean = all.mean();
  out.variance = all.sample_variance();
  out.se_mean = std::sqrt(out.variance / static_cast<double>(trials));
  if (nbatch >= 2) {
    MomentAccumulator spread;
    for (const auto& acc : batch) spread.add(acc.sample_variance());
    out.se_variance = std::sqrt(spread.sample_variance() / static_cast<double>(nbatch));
  }
  return out;
}

}  // namespace fpsample

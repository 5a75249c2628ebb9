#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fpsample/distributions.hpp"
#include "fpsample/error.hpp"
#include "fpsample/instance.hpp"
#include "fpsample/monte_carlo.hpp"

namespace fpsample {

/// Upper bound on the number of outcomes any exhaustive enumeration visits.
inline constexpr std::uint64_t max_enumerated_outcomes = 10'000'000;

/// Number of ordered outcomes of n draws from N units, saturating just above
/// `cap` so the caller can test against it without overflow.
inline std::uint64_t ordered_outcome_count(std::uint64_t N, std::uint64_t n, Replacement r,
                                           std::uint64_t cap = max_enumerated_outcomes) {
  std::uint64_t count = 1;
  for (std::uint64_t j = 0; j < n; ++j) {
    const std::uint64_t factor = r == Replacement::with ? N : N - j;
    if (factor == 0) return 0;
    if (count > (cap + 1) / factor + 1) return cap + 1;
    count *= factor;
    if (count > cap) return cap + 1;
  }
  return count;
}

namespace detail {

inline void require_enumerable(std::uint64_t N, std::uint64_t n, Replacement r) {
  const auto count = ordered_outcome_count(N, n, r);
  if (count > max_enumerated_outcomes)
    throw SizeLimitError("enumeration of " + std::string(r == Replacement::with ? "N^n" : "N!/(N-n)!") +
                         " ordered outcomes with N=" + std::to_string(N) + ", n=" + std::to_string(n) +
                         " exceeds the limit of " + std::to_string(max_enumerated_outcomes));
}

}  // namespace detail

/// Calls f(seq) for every ordered n-tuple of distinct units from {0..N-1}.
template <class F>
void for_each_ordered_without_replacement(std::size_t N, std::size_t n, F&& f) {
  detail::require(n <= N, "cannot draw more than N units without replacement");
  detail::require_enumerable(N, n, Replacement::without);
  std::vector<std::size_t> seq(n);
  std::vector<char> used(N, 0);
  // Iterative depth-first walk; next[d] is the next candidate at depth d.
  std::vector<std::size_t> next(n + 1, 0);
  std::size_t depth = 0;
  if (n == 0) {
    f(std::span<const std::size_t>(seq));
    return;
  }
  while (true) {
    std::size_t& cand = next[depth];
    while (cand < N && used[cand]) ++cand;
    if (cand == N) {
      if (depth == 0) return;
      --depth;
      used[seq[depth]] = 0;
      ++next[depth];
      continue;
    }
    seq[depth] = cand;
    if (depth + 1 == n) {
      f(std::span<const std::size_t>(seq));
      ++cand;
      continue;
    }
    used[cand] = 1;
    ++depth;
    next[depth] = 0;
  }
}

/// Calls f(seq) for every ordered n-tuple from {0..N-1} with repetition.
template <class F>
void for_each_ordered_with_replacement(std::size_t N, std::size_t n, F&& f) {
  detail::require(N >= 1, "population must be non-empty");
  detail::require_enumerable(N, n, Replacement::with);
  std::vector<std::size_t> seq(n, 0);
  while (true) {
    f(std::span<const std::size_t>(seq));
    std::size_t j = n;
    while (j > 0 && seq[j - 1] + 1 == N) seq[--j] = 0;
    if (j == 0) return;
    ++seq[j - 1];
  }
}

/// Exact mean and variance of an estimator over every equally likely (or,
/// for PPS with replacement, exactly weighted) ordered outcome of the design.
inline Moments enumerate_moments(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est) {
  validate(inst, cfg, est);
  const auto r = cfg.replacement();
  MomentAccumulator acc;

  switch (est.kind) {
    case EstimatorKind::sample_mean: {
      const auto& pop = *inst.population;
      auto f = [&](std::span<const std::size_t> s) { acc.add(sample_mean(pop, s)); };
      if (r == Replacement::without)
        for_each_ordered_without_replacement(pop.size(), cfg.n, f);
      else
        for_each_ordered_with_replacement(pop.size(), cfg.n, f);
      break;
    }
    case EstimatorKind::hansen_hurvitz: {
      const auto& pop = *inst.population;
      const auto& w = *inst.sizes;
      if (r == Replacement::with) {
        for_each_ordered_with_replacement(pop.size(), cfg.n, [&](std::span<const std::size_t> s) {
          double p = 1.0;
          for (auto u : s) p *= w.probability(u);
          acc.add(hansen_hurvitz(pop, w, s), p);
        });
      } else {
        const auto map = extended_unit_map(w);
        std::vector<std::size_t> units(cfg.n);
        for_each_ordered_without_replacement(map.size(), cfg.n, [&](std::span<const std::size_t> s) {
          for (std::size_t j = 0; j < s.size(); ++j) units[j] = map[s[j]];
          acc.add(hansen_hurvitz(pop, w, units));
        });
      }
      break;
    }
    case EstimatorKind::acs_mean: {
      const auto& np = *inst.networks;
      auto f = [&](std::span<const std::size_t> s) { acc.add(acs_mean(np, s)); };
      if (r == Replacement::without)
        for_each_ordered_without_replacement(inst.population->size(), cfg.draws(), f);
      else
        for_each_ordered_with_replacement(inst.population->size(), cfg.draws(), f);
      break;
    }
    case EstimatorKind::random_group_variance: {
      const auto& pop = *inst.population;
      for_each_ordered_without_replacement(pop.size(), cfg.n, [&](std::span<const std::size_t> s) {
        std::vector<std::vector<std::size_t>> groups;
        auto it = s.begin();
        for (auto g : cfg.group_sizes) {
          groups.emplace_back(it, it + static_cast<std::ptrdiff_t>(g));
          it += static_cast<std::ptrdiff_t>(g);
        }
        acc.add(random_group_variance_estimate(pop, GroupedSample(std::move(groups))));
      });
      break;
    }
    case EstimatorKind::class_count: {
      const auto& cp = *inst.classes;
      const auto k = est.class_index;
      std::vector<std::size_t> label(cp.total());
      for (std::uint64_t u = 0; u < cp.total(); ++u) label[u] = cp.class_of(u);
      auto f = [&](std::span<const std::size_t> s) {
        std::size_t c = 0;
        for (auto u : s) c += label[u] == k;
        acc.add(static_cast<double>(c));
      };
      if (r == Replacement::without)
        for_each_ordered_without_replacement(cp.total(), cfg.n, f);
      else
        for_each_ordered_with_replacement(cp.total(), cfg.n, f);
      break;
    }
  }
  return {acc.mean(), acc.population_variance()};
}

using CountDistribution = std::map<CountVector, double>;

/// Exact law of the class counts, built draw by draw: each step moves
/// probability mass from count state a to a + e_k with the chance that the
/// next draw lands in class k. Equivalent to summing over all ordered unit
/// sequences, but the state space is only the set of count vectors.
inline CountDistribution enumerate_count_distribution(const ClassifiedPopulation& cp, std::uint64_t n,
                                                      Replacement r) {
  detail::require(n >= 1, "need at least one draw");
  if (r == Replacement::without) detail::require(n <= cp.total(), "cannot draw more than N units without replacement");
  const std::size_t K = cp.classes();
  // C(n + K - 1, K - 1) bounds the number of states.
  {
    std::uint64_t states = 1;
    for (std::uint64_t j = 1; j < K; ++j) {
      states = states * (n + j) / j;
      if (states > max_enumerated_outcomes)
        throw SizeLimitError("count distribution with K=" + std::to_string(K) + ", n=" + std::to_string(n) +
                             " has more than " + std::to_string(max_enumerated_outcomes) + " states");
    }
  }
  CountDistribution cur{{CountVector{std::vector<std::uint64_t>(K, 0)}, 1.0}};
  const double N = static_cast<double>(cp.total());
  for (std::uint64_t j = 0; j < n; ++j) {
    CountDistribution next;
    const double left = r == Replacement::without ? N - static_cast<double>(j) : N;
    for (const auto& [state, p] : cur) {
      for (std::size_t k = 0; k < K; ++k) {
        const double avail = static_cast<double>(cp.size(k)) -
                             (r == Replacement::without ? static_cast<double>(state.counts[k]) : 0.0);
        if (avail <= 0.0) continue;
        CountVector to = state;
        ++to.counts[k];
        next[to] += p * avail / left;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

/// The same law by brute force over ordered unit sequences. Only for
/// instances within the ordered-outcome limit.
inline CountDistribution enumerate_count_distribution_ordered(const ClassifiedPopulation& cp, std::uint64_t n,
                                                              Replacement r) {
  detail::require(n >= 1, "need at least one draw");
  const std::size_t K = cp.classes();
  std::vector<std::size_t> label(cp.total());
  for (std::uint64_t u = 0; u < cp.total(); ++u) label[u] = cp.class_of(u);
  std::map<CountVector, std::uint64_t> hits;
  std::uint64_t total = 0;
  CountVector c{std::vector<std::uint64_t>(K)};
  auto f = [&](std::span<const std::size_t> s) {
    std::fill(c.counts.begin(), c.counts.end(), 0);
    for (auto u : s) ++c.counts[label[u]];
    ++hits[c];
    ++total;
  };
  if (r == Replacement::without)
    for_each_ordered_without_replacement(cp.total(), n, f);
  else
    for_each_ordered_with_replacement(cp.total(), n, f);
  CountDistribution out;
  for (const auto& [cv, h] : hits) out[cv] = static_cast<double>(h) / static_cast<double>(total);
  return out;
}

struct CountMoments {
  std::vector<double> mean;
  CovMatrix covariance{0};
};

inline CountMoments count_moments(const CountDistribution& dist) {
  detail::require(!dist.empty(), "empty distribution");
  const std::size_t K = dist.begin()->first.classes();
  CountMoments m{std::vector<double>(K, 0.0), CovMatrix(K)};
  for (const auto& [cv, p] : dist)
    for (std::size_t k = 0; k < K; ++k) m.mean[k] += p * static_cast<double>(cv.counts[k]);
  for (const auto& [cv, p] : dist) {
    for (std::size_t k = 0; k < K; ++k) {
      const double dk = static_cast<double>(cv.counts[k]) - m.mean[k];
      for (std::size_t l = 0; l < K; ++l) m.covariance(k, l) += p * dk * (static_cast<double>(cv.counts[l]) - m.mean[l]);
    }
  }
  return m;
}

}  // namespace fpsample

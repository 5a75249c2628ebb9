#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fpsample/designs.hpp"
#include "fpsample/distributions.hpp"
#include "fpsample/error.hpp"
#include "fpsample/population.hpp"

namespace fpsample {

enum class Estimand { mean, total, population_variance };

constexpr std::string_view to_string(Estimand e) {
  switch (e) {
    case Estimand::mean: return "mean";
    case Estimand::total: return "total";
    case Estimand::population_variance: return "population_variance";
  }
  return "?";
}

/// A point estimate together with the design variance of its estimator.
struct EstimateReport {
  double point = 0.0;
  double theoretical_variance = 0.0;
  DesignKind design = DesignKind::srs;
  Estimand estimand = Estimand::mean;
};

// Span overloads take population unit indices and skip the DrawSequence
// bookkeeping; the enumeration oracle and the Monte Carlo loop use them.

inline double sample_mean(const Population& pop, std::span<const std::size_t> units) {
  detail::require(!units.empty(), "sample mean of an empty sample");
  double s = 0.0;
  for (std::size_t u : units) s += pop[u];
  return s / static_cast<double>(units.size());
}

inline double sample_mean(const Population& pop, const DrawSequence& seq) {
  for (std::size_t u : seq.units()) detail::require(u < pop.size(), "draw outside the population");
  return sample_mean(pop, seq.units());
}

/// var(ybar) = sigma^2 / n, times fpc(n, N) without replacement.
inline double srs_mean_variance(const Population& pop, std::size_t n, Replacement r) {
  detail::require(n >= 1, "sample size must be at least 1");
  const double base = pop.sum_squared_deviations() / (static_cast<double>(n) * static_cast<double>(pop.size()));
  if (r == Replacement::with) return base;
  detail::require(n <= pop.size(), "sample size exceeds population size for sampling without replacement");
  return base * fpc(n, pop.size());
}

/// Hansen-Hurvitz estimator of the total: mean of Y_i / Z_i over the draws.
inline double hansen_hurvitz(const Population& pop, const SizeWeights& w, std::span<const std::size_t> units) {
  detail::require(!units.empty(), "Hansen-Hurvitz estimate of an empty sample");
  double s = 0.0;
  for (std::size_t u : units) s += pps_ratio(pop, w, u);
  return s / static_cast<double>(units.size());
}

inline double hansen_hurvitz(const Population& pop, const SizeWeights& w, const DrawSequence& seq) {
  detail::require(pop.size() == w.size(), "population and size weights differ in length");
  for (std::size_t u : seq.units()) detail::require(u < pop.size(), "draw outside the population");
  return hansen_hurvitz(pop, w, seq.units());
}

/// (1/n) sum_i Z_i (Y_i/Z_i - t_Y)^2, times fpc(n, t_M) for sampling the
/// extended population without replacement.
inline double hh_variance(const Population& pop, const SizeWeights& w, std::size_t n, Replacement r) {
  detail::require(pop.size() == w.size(), "population and size weights differ in length");
  detail::require(n >= 1, "sample size must be at least 1");
  double s = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double d = pps_ratio(pop, w, i) - pop.total();
    s += w.probability(i) * d * d;
  }
  s /= static_cast<double>(n);
  if (r == Replacement::with) return s;
  detail::require(n <= w.total(), "sample size exceeds the extended population size t_M");
  return s * fpc(n, w.total());
}

/// Mean over initial draws of the mean of the network each draw falls in.
inline double acs_mean(const NetworkPartition& np, std::span<const std::size_t> initial) {
  detail::require(!initial.empty(), "ACS estimate of an empty initial sample");
  double s = 0.0;
  for (std::size_t u : initial) s += np.mean(np.network_of(u));
  return s / static_cast<double>(initial.size());
}

inline double acs_mean(const Population& pop, const NetworkPartition& np, const AcsSample& s) {
  detail::require(np.unit_count() == pop.size(), "partition size differs from population size");
  for (std::size_t u : s.initial.units()) {
    detail::require(u < pop.size(), "draw outside the population");
    detail::require(std::binary_search(s.final_units.begin(), s.final_units.end(), u),
                    "initial unit missing from the final sample");
  }
  return acs_mean(np, s.initial.units());
}

/// Variance of the flattened population over n1, times fpc(n1, N) without
/// replacement.
inline double acs_variance(const Population& pop, const NetworkPartition& np, std::size_t n1, Replacement r) {
  detail::require(n1 >= 1, "initial sample size must be at least 1");
  const double base = between_network_variance(pop, np) / static_cast<double>(n1);
  if (r == Replacement::with) return base;
  detail::require(n1 <= pop.size(), "initial sample size exceeds population size");
  return base * fpc(n1, pop.size());
}

namespace detail {

inline std::vector<double> group_means(const Population& pop, const GroupedSample& g) {
  std::vector<double> m(g.count());
  for (std::size_t k = 0; k < g.count(); ++k) {
    for (std::size_t u : g.group(k)) require(u < pop.size(), "group member outside the population");
    m[k] = sample_mean(pop, g.group(k));
  }
  return m;
}

}  // namespace detail

/// Unbiased estimate of S^2 from K >= 2 random groups: the average over
/// pairs k < l of (ybar_k - ybar_l)^2 / (1/n_k + 1/n_l).
inline double random_group_variance_estimate(const Population& pop, const GroupedSample& g) {
  detail::require(g.count() >= 2, "random group estimate needs at least two groups");
  const auto m = detail::group_means(pop, g);
  double s = 0.0;
  std::size_t pairs = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    for (std::size_t l = k + 1; l < m.size(); ++l) {
      const double d = m[k] - m[l];
      const double scale = 1.0 / static_cast<double>(g.group(k).size()) +
                           1.0 / static_cast<double>(g.group(l).size());
      s += d * d / scale;
      ++pairs;
    }
  }
  return s / static_cast<double>(pairs);
}

/// Equal group sizes m: m times the sample variance of the group means.
inline double random_group_variance_equal_size(const Population& pop, const GroupedSample& g) {
  detail::require(g.count() >= 2, "random group estimate needs at least two groups");
  const std::size_t m = g.group(0).size();
  for (std::size_t k = 1; k < g.count(); ++k)
    detail::require(g.group(k).size() == m, "groups must all have the same size");
  const auto means = detail::group_means(pop, g);
  double avg = 0.0;
  for (double x : means) avg += x;
  avg /= static_cast<double>(means.size());
  double ss = 0.0;
  for (double x : means) ss += (x - avg) * (x - avg);
  return static_cast<double>(m) * ss / static_cast<double>(means.size() - 1);
}

/// E{(ybar_k - ybar_l)^2} = S^2 (1/n_k + 1/n_l) for disjoint groups drawn
/// without replacement.
inline double rg_pair_expectation(const Population& pop, std::size_t nk, std::size_t nl) {
  detail::require(nk >= 1 && nl >= 1, "group sizes must be positive");
  detail::require(nk + nl <= pop.size(), "two disjoint groups cannot exceed the population");
  return pop.adjusted_variance() * (1.0 / static_cast<double>(nk) + 1.0 / static_cast<double>(nl));
}

inline EstimateReport srs_estimate(const Population& pop, const DrawSequence& seq) {
  return {sample_mean(pop, seq), srs_mean_variance(pop, seq.size(), seq.replacement()), seq.design(),
          Estimand::mean};
}

inline EstimateReport hh_estimate(const Population& pop, const SizeWeights& w, const DrawSequence& seq) {
  return {hansen_hurvitz(pop, w, seq), hh_variance(pop, w, seq.size(), seq.replacement()), seq.design(),
          Estimand::total};
}

inline EstimateReport acs_estimate(const Population& pop, const NetworkPartition& np, const AcsSample& s) {
  return {acs_mean(pop, np, s), acs_variance(pop, np, s.initial.size(), s.initial.replacement()),
          s.initial.design(), Estimand::mean};
}

}  // namespace fpsample

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fpsample/error.hpp"

namespace fpsample {

/// A finite population: one fixed real value per unit, N >= 1.
///
/// Units are addressed 0-based in memory. Summary statistics are computed
/// once at construction; the object is immutable afterwards.
class Population {
 public:
  explicit Population(std::vector<double> values) : values_(std::move(values)) {
    detail::require(!values_.empty(), "population must have at least one unit");
    for (double v : values_)
      detail::require(std::isfinite(v), "population values must be finite");
    total_ = std::accumulate(values_.begin(), values_.end(), 0.0);
    mean_ = total_ / static_cast<double>(values_.size());
    ssd_ = 0.0;
    for (double v : values_) ssd_ += (v - mean_) * (v - mean_);
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  double total() const { return total_; }
  double mean() const { return mean_; }

  /// Sum of squared deviations from the mean.
  double sum_squared_deviations() const { return ssd_; }

  /// sigma^2: divisor N.
  double variance() const { return ssd_ / static_cast<double>(size()); }

  /// S^2: divisor N - 1. Requires N >= 2.
  double adjusted_variance() const {
    detail::require(size() >= 2, "S^2 needs at least two units");
    return ssd_ / static_cast<double>(size() - 1);
  }

 private:
  std::vector<double> values_;
  double total_ = 0.0;
  double mean_ = 0.0;
  double ssd_ = 0.0;
};

/// Sizes N_1..N_K of the K subgroups of a classified population.
class ClassifiedPopulation {
 public:
  explicit ClassifiedPopulation(std::vector<std::uint64_t> sizes) : sizes_(std::move(sizes)) {
    detail::require(!sizes_.empty(), "need at least one subgroup");
    for (auto s : sizes_) detail::require(s >= 1, "subgroup sizes must be positive");
    total_ = std::accumulate(sizes_.begin(), sizes_.end(), std::uint64_t{0});
  }

  std::size_t classes() const { return sizes_.size(); }
  std::uint64_t size(std::size_t k) const { return sizes_[k]; }
  std::uint64_t total() const { return total_; }
  std::span<const std::uint64_t> sizes() const { return sizes_; }

  /// N_k / N.
  double proportion(std::size_t k) const {
    return static_cast<double>(sizes_[k]) / static_cast<double>(total_);
  }

  std::vector<double> proportions() const {
    std::vector<double> p(classes());
    for (std::size_t k = 0; k < classes(); ++k) p[k] = proportion(k);
    return p;
  }

  /// Class label of unit u when units are laid out class by class.
  std::size_t class_of(std::uint64_t u) const {
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      if (u < sizes_[k]) return k;
      u -= sizes_[k];
    }
    throw PreconditionError("unit index outside classified population");
  }

 private:
  std::vector<std::uint64_t> sizes_;
  std::uint64_t total_ = 0;
};

/// Positive integer size measures M_i; selection probabilities Z_i = M_i / t_M.
class SizeWeights {
 public:
  explicit SizeWeights(std::vector<std::uint64_t> sizes) : sizes_(std::move(sizes)) {
    detail::require(!sizes_.empty(), "size weights must not be empty");
    for (auto m : sizes_) detail::require(m >= 1, "size weights must be positive integers");
    total_ = std::accumulate(sizes_.begin(), sizes_.end(), std::uint64_t{0});
  }

  std::size_t size() const { return sizes_.size(); }
  std::uint64_t operator[](std::size_t i) const { return sizes_[i]; }
  std::span<const std::uint64_t> sizes() const { return sizes_; }
  std::uint64_t total() const { return total_; }

  double probability(std::size_t i) const {
    return static_cast<double>(sizes_[i]) / static_cast<double>(total_);
  }

 private:
  std::vector<std::uint64_t> sizes_;
  std::uint64_t total_ = 0;
};

/// Symmetric neighbour relation over unit indices, without self-loops.
class Adjacency {
 public:
  explicit Adjacency(std::vector<std::vector<std::size_t>> neighbors)
      : neighbors_(std::move(neighbors)) {
    const std::size_t n = neighbors_.size();
    for (auto& list : neighbors_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : neighbors_[i]) {
        detail::require(j < n, "adjacency refers to a unit outside the population");
        detail::require(j != i, "adjacency must not contain self-loops");
        detail::require(std::binary_search(neighbors_[j].begin(), neighbors_[j].end(), i),
                        "adjacency must be symmetric");
      }
    }
  }

  /// No edges at all.
  static Adjacency empty(std::size_t n) { return Adjacency(std::vector<std::vector<std::size_t>>(n)); }

  /// Path 0 - 1 - ... - (n-1).
  static Adjacency path(std::size_t n) {
    std::vector<std::vector<std::size_t>> nb(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      nb[i].push_back(i + 1);
      nb[i + 1].push_back(i);
    }
    return Adjacency(std::move(nb));
  }

  std::size_t size() const { return neighbors_.size(); }
  std::span<const std::size_t> neighbors(std::size_t i) const { return neighbors_[i]; }

 private:
  std::vector<std::vector<std::size_t>> neighbors_;
};

/// Partition of the units into networks, with the mean of each network.
///
/// Networks are numbered in order of their smallest member, so two
/// partitions with the same blocks compare equal.
class NetworkPartition {
 public:
  /// `assignment[i]` is an arbitrary label for the network of unit i.
  static NetworkPartition from_assignment(const Population& pop,
                                          std::span<const std::size_t> assignment) {
    detail::require(assignment.size() == pop.size(),
                    "network assignment length differs from population size");
    NetworkPartition np;
    np.assignment_.resize(pop.size());
    std::unordered_map<std::size_t, std::size_t> relabel;  // label -> id, first-seen order
    for (std::size_t i = 0; i < pop.size(); ++i) {
      auto [it, fresh] = relabel.try_emplace(assignment[i], np.members_.size());
      const std::size_t id = it->second;
      if (fresh) np.members_.emplace_back();
      np.assignment_[i] = id;
      np.members_[id].push_back(i);
    }
    np.means_.resize(np.members_.size());
    for (std::size_t k = 0; k < np.members_.size(); ++k) {
      double s = 0.0;
      for (std::size_t i : np.members_[k]) s += pop[i];
      np.means_[k] = s / static_cast<double>(np.members_[k].size());
    }
    return np;
  }

  /// Build from explicit blocks; they must be disjoint and cover every unit.
  static NetworkPartition from_groups(const Population& pop,
                                      const std::vector<std::vector<std::size_t>>& groups) {
    constexpr std::size_t unassigned = static_cast<std::size_t>(-1);
    std::vector<std::size_t> assignment(pop.size(), unassigned);
    for (std::size_t k = 0; k < groups.size(); ++k) {
      detail::require(!groups[k].empty(), "networks must be non-empty");
      for (std::size_t i : groups[k]) {
        detail::require(i < pop.size(), "network member outside the population");
        detail::require(assignment[i] == unassigned, "networks must be disjoint");
        assignment[i] = k;
      }
    }
    for (auto a : assignment) detail::require(a != unassigned, "networks must cover every unit");
    return from_assignment(pop, assignment);
  }

  std::size_t unit_count() const { return assignment_.size(); }
  std::size_t count() const { return members_.size(); }
  std::size_t network_of(std::size_t unit) const { return assignment_[unit]; }
  std::size_t size(std::size_t k) const { return members_[k].size(); }
  double mean(std::size_t k) const { return means_[k]; }
  std::span<const std::size_t> members(std::size_t k) const { return members_[k]; }
  std::span<const std::size_t> assignment() const { return assignment_; }
  std::span<const double> means() const { return means_; }

 private:
  NetworkPartition() = default;

  std::vector<std::size_t> assignment_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<double> means_;
};

/// Y_i / Z_i = Y_i * t_M / M_i.
inline double pps_ratio(const Population& pop, const SizeWeights& w, std::size_t i) {
  return pop[i] * static_cast<double>(w.total()) / static_cast<double>(w[i]);
}

/// Maps each position of the extended population to its original unit.
inline std::vector<std::size_t> extended_unit_map(const SizeWeights& w) {
  std::vector<std::size_t> map;
  map.reserve(w.total());
  for (std::size_t i = 0; i < w.size(); ++i) map.insert(map.end(), w[i], i);
  return map;
}

/// The extended population of size t_M: unit i is replicated M_i times with
/// value Y_i / Z_i. Its mean is the original total t_Y, so PPS sampling with
/// replacement becomes simple random sampling from it.
inline Population extend_pps(const Population& pop, const SizeWeights& w) {
  detail::require(pop.size() == w.size(), "population and size weights differ in length");
  std::vector<double> values;
  values.reserve(w.total());
  for (std::size_t i = 0; i < pop.size(); ++i) values.insert(values.end(), w[i], pps_ratio(pop, w, i));
  return Population(std::move(values));
}

/// Networks for the condition y > threshold.
///
/// Units meeting the condition form networks given by the connected
/// components of the induced subgraph; every other unit is a singleton.
inline NetworkPartition compute_networks(const Population& pop, const Adjacency& adj, double threshold) {
  detail::require(adj.size() == pop.size(), "adjacency size differs from population size");
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(pop.size(), unvisited);
  std::size_t next = 0;
  for (std::size_t s = 0; s < pop.size(); ++s) {
    if (label[s] != unvisited) continue;
    label[s] = next;
    if (pop[s] > threshold) {
      std::queue<std::size_t> frontier;
      frontier.push(s);
      while (!frontier.empty()) {
        std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v : adj.neighbors(u)) {
          if (label[v] == unvisited && pop[v] > threshold) {
            label[v] = next;
            frontier.push(v);
          }
        }
      }
    }
    ++next;
  }
  return NetworkPartition::from_assignment(pop, label);
}

/// Replace every unit's value by the mean of its network.
inline Population flatten_networks(const Population& pop, const NetworkPartition& np) {
  detail::require(np.unit_count() == pop.size(), "partition size differs from population size");
  std::vector<double> sums(np.count(), 0.0);
  for (std::size_t i = 0; i < pop.size(); ++i) sums[np.network_of(i)] += pop[i];
  for (std::size_t k = 0; k < np.count(); ++k) {
    double m = sums[k] / static_cast<double>(np.size(k));
    detail::require(std::abs(m - np.mean(k)) <= 1e-12 * std::max(1.0, std::abs(m)),
                    "partition means do not match this population");
  }
  std::vector<double> flat(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) flat[i] = np.mean(np.network_of(i));
  return Population(std::move(flat));
}

/// sigma^2 of the flattened population, (1/N) sum_k N_k (mean_k - mean)^2.
inline double between_network_variance(const Population& pop, const NetworkPartition& np) {
  detail::require(np.unit_count() == pop.size(), "partition size differs from population size");
  double s = 0.0;
  for (std::size_t k = 0; k < np.count(); ++k) {
    double d = np.mean(k) - pop.mean();
    s += static_cast<double>(np.size(k)) * d * d;
  }
  return s / static_cast<double>(pop.size());
}

}  // namespace fpsample

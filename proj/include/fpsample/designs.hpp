#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "fpsample/distributions.hpp"
#include "fpsample/error.hpp"
#include "fpsample/population.hpp"
#include "fpsample/random.hpp"

namespace fpsample {

enum class DesignKind { srs, srs_wr, pps_wr, pps_wor, acs, acs_wr };

constexpr std::string_view to_string(DesignKind d) {
  switch (d) {
    case DesignKind::srs: return "srs";
    case DesignKind::srs_wr: return "srs_wr";
    case DesignKind::pps_wr: return "pps_wr";
    case DesignKind::pps_wor: return "pps_wor";
    case DesignKind::acs: return "acs";
    case DesignKind::acs_wr: return "acs_wr";
  }
  return "?";
}

constexpr Replacement replacement_of(DesignKind d) {
  switch (d) {
    case DesignKind::srs_wr:
    case DesignKind::pps_wr:
    case DesignKind::acs_wr: return Replacement::with;
    default: return Replacement::without;
  }
}

/// Ordered draws produced by a design.
///
/// `indices` address the frame that was sampled (the extended population for
/// `pps_wor`, the population itself otherwise); `units` holds the population
/// unit behind each draw.
class DrawSequence {
 public:
  DrawSequence(std::vector<std::size_t> indices, std::vector<std::size_t> units, Replacement r,
               DesignKind design)
      : indices_(std::move(indices)), units_(std::move(units)), replacement_(r), design_(design) {
    detail::require(indices_.size() == units_.size(), "indices and units differ in length");
    if (r == Replacement::without) {
      auto sorted = indices_;
      std::sort(sorted.begin(), sorted.end());
      detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                      "draws without replacement must be distinct");
    }
  }

  /// A sequence whose frame is the population itself.
  static DrawSequence of_units(std::vector<std::size_t> units, Replacement r, DesignKind design) {
    auto idx = units;
    return DrawSequence(std::move(idx), std::move(units), r, design);
  }

  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  std::span<const std::size_t> indices() const { return indices_; }
  std::span<const std::size_t> units() const { return units_; }
  Replacement replacement() const { return replacement_; }
  DesignKind design() const { return design_; }

 private:
  std::vector<std::size_t> indices_;
  std::vector<std::size_t> units_;
  Replacement replacement_;
  DesignKind design_;
};

/// K disjoint, non-empty groups of units.
class GroupedSample {
 public:
  explicit GroupedSample(std::vector<std::vector<std::size_t>> groups) : groups_(std::move(groups)) {
    std::vector<std::size_t> all;
    for (const auto& g : groups_) {
      detail::require(!g.empty(), "groups must be non-empty");
      all.insert(all.end(), g.begin(), g.end());
    }
    std::sort(all.begin(), all.end());
    detail::require(std::adjacent_find(all.begin(), all.end()) == all.end(), "groups must be disjoint");
  }

  std::size_t count() const { return groups_.size(); }
  std::span<const std::size_t> group(std::size_t k) const { return groups_[k]; }
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }

 private:
  std::vector<std::vector<std::size_t>> groups_;
};

/// Initial draws plus every unit pulled in through their networks.
struct AcsSample {
  DrawSequence initial;
  std::vector<std::size_t> final_units;  // sorted
};

namespace detail {

/// n sequential uniform draws without replacement from {0..N-1}: a partial
/// Fisher-Yates shuffle over the remaining units.
template <UniformSource G>
std::vector<std::size_t> draw_without_replacement(std::size_t N, std::size_t n, G& gen) {
  std::vector<std::size_t> pool(N);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t r = j + static_cast<std::size_t>(gen.below(N - j));
    std::swap(pool[j], pool[r]);
  }
  pool.resize(n);
  return pool;
}

template <UniformSource G>
std::vector<std::size_t> draw_with_replacement(std::size_t N, std::size_t n, G& gen) {
  std::vector<std::size_t> out(n);
  for (auto& x : out) x = static_cast<std::size_t>(gen.below(N));
  return out;
}

}  // namespace detail

/// Simple random sampling of n from N units, with or without replacement.
template <UniformSource G>
DrawSequence srs(std::size_t N, std::size_t n, Replacement r, G& gen) {
  detail::require(N >= 1, "population must be non-empty");
  detail::require(n >= 1, "sample size must be at least 1");
  if (r == Replacement::without) {
    detail::require(n <= N, "sample size exceeds population size for sampling without replacement");
    return DrawSequence::of_units(detail::draw_without_replacement(N, n, gen), r, DesignKind::srs);
  }
  return DrawSequence::of_units(detail::draw_with_replacement(N, n, gen), r, DesignKind::srs_wr);
}

/// Cumulative sizes for inverse-transform selection.
class PpsSelector {
 public:
  explicit PpsSelector(const SizeWeights& w) : cumulative_(w.size()) {
    std::partial_sum(w.sizes().begin(), w.sizes().end(), cumulative_.begin());
  }

  template <UniformSource G>
  std::size_t operator()(G& gen) const {
    const std::uint64_t r = static_cast<std::uint64_t>(gen.below(cumulative_.back()));
    return static_cast<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), r) - cumulative_.begin());
  }

 private:
  std::vector<std::uint64_t> cumulative_;
};

/// PPS with replacement: each draw picks unit i with probability M_i / t_M.
template <UniformSource G>
DrawSequence pps_wr(const SizeWeights& w, std::size_t n, G& gen) {
  detail::require(n >= 1, "sample size must be at least 1");
  PpsSelector pick(w);
  std::vector<std::size_t> units(n);
  for (auto& u : units) u = pick(gen);
  return DrawSequence::of_units(std::move(units), Replacement::with, DesignKind::pps_wr);
}

/// Simple random sampling without replacement from the extended population.
/// Indices are extended positions; units map them back to the population.
template <UniformSource G>
DrawSequence pps_wor_extended(const Population& pop, const SizeWeights& w, std::size_t n, G& gen) {
  detail::require(pop.size() == w.size(), "population and size weights differ in length");
  detail::require(n >= 1, "sample size must be at least 1");
  detail::require(n <= w.total(), "sample size exceeds the extended population size t_M");
  const auto map = extended_unit_map(w);
  auto positions = detail::draw_without_replacement(map.size(), n, gen);
  std::vector<std::size_t> units(n);
  for (std::size_t j = 0; j < n; ++j) units[j] = map[positions[j]];
  return DrawSequence(std::move(positions), std::move(units), Replacement::without, DesignKind::pps_wor);
}

/// Union of the networks of the given initial units, sorted.
inline std::vector<std::size_t> network_closure(const NetworkPartition& np, std::span<const std::size_t> initial) {
  std::vector<char> hit(np.count(), 0);
  for (std::size_t u : initial) hit[np.network_of(u)] = 1;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < np.count(); ++k)
    if (hit[k]) out.insert(out.end(), np.members(k).begin(), np.members(k).end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Adaptive cluster sampling: an SRS of n1 initial units, each bringing its
/// whole network into the final sample.
template <UniformSource G>
AcsSample acs(const Population& pop, const NetworkPartition& np, std::size_t n1, Replacement r, G& gen) {
  detail::require(np.unit_count() == pop.size(), "partition size differs from population size");
  auto initial = srs(pop.size(), n1, r, gen);
  auto units = std::vector<std::size_t>(initial.units().begin(), initial.units().end());
  DrawSequence seq = DrawSequence::of_units(std::move(units), r,
                                            r == Replacement::with ? DesignKind::acs_wr : DesignKind::acs);
  auto final_units = network_closure(np, seq.units());
  return AcsSample{std::move(seq), std::move(final_units)};
}

/// Ascribe the first n_1 draws to group 1, the next n_2 to group 2, and so on.
inline GroupedSample random_group_split(const DrawSequence& seq, std::span<const std::size_t> sizes) {
  detail::require(seq.replacement() == Replacement::without, "random groups need a draw without replacement");
  detail::require(!sizes.empty(), "need at least one group");
  for (auto s : sizes) detail::require(s >= 1, "group sizes must be positive");
  detail::require(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == seq.size(),
                  "group sizes must add up to the sample size");
  std::vector<std::vector<std::size_t>> groups;
  groups.reserve(sizes.size());
  auto it = seq.units().begin();
  for (auto s : sizes) {
    groups.emplace_back(it, it + static_cast<std::ptrdiff_t>(s));
    it += static_cast<std::ptrdiff_t>(s);
  }
  return GroupedSample(std::move(groups));
}

}  // namespace fpsample

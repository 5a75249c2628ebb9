#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fpsample/designs.hpp"
#include "fpsample/distributions.hpp"
#include "fpsample/error.hpp"
#include "fpsample/estimators.hpp"
#include "fpsample/population.hpp"
#include "fpsample/random.hpp"

namespace fpsample {

/// Everything a design may sample from. Which parts are required depends on
/// the design and estimator.
struct Instance {
  std::optional<Population> population;
  std::optional<ClassifiedPopulation> classes;
  std::optional<SizeWeights> sizes;
  std::optional<NetworkPartition> networks;
};

struct DesignConfig {
  DesignKind design = DesignKind::srs;
  std::size_t n = 1;
  std::optional<std::size_t> n1;         // ACS initial sample size; falls back to n
  std::vector<std::size_t> group_sizes;  // random groups; empty when unused

  bool is_acs() const { return design == DesignKind::acs || design == DesignKind::acs_wr; }
  std::size_t draws() const { return is_acs() && n1 ? *n1 : n; }
  Replacement replacement() const { return replacement_of(design); }
};

enum class EstimatorKind { sample_mean, hansen_hurvitz, acs_mean, random_group_variance, class_count };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::sample_mean;
  std::size_t class_index = 0;  // class_count only
};

constexpr std::string_view to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::sample_mean: return "sample_mean";
    case EstimatorKind::hansen_hurvitz: return "hansen_hurvitz";
    case EstimatorKind::acs_mean: return "acs_mean";
    case EstimatorKind::random_group_variance: return "random_group_variance";
    case EstimatorKind::class_count: return "class_count";
  }
  return "?";
}

inline std::string estimator_tag(EstimatorSpec e) {
  std::string tag(to_string(e.kind));
  if (e.kind == EstimatorKind::class_count) tag += "[" + std::to_string(e.class_index + 1) + "]";
  return tag;
}

constexpr Estimand estimand_of(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::hansen_hurvitz:
    case EstimatorKind::class_count: return Estimand::total;
    case EstimatorKind::random_group_variance: return Estimand::population_variance;
    default: return Estimand::mean;
  }
}

/// The estimator a design is normally paired with.
inline EstimatorSpec default_estimator(const Instance& inst, const DesignConfig& cfg) {
  switch (cfg.design) {
    case DesignKind::pps_wr:
    case DesignKind::pps_wor: return {EstimatorKind::hansen_hurvitz};
    case DesignKind::acs:
    case DesignKind::acs_wr: return {EstimatorKind::acs_mean};
    default: break;
  }
  if (!cfg.group_sizes.empty()) return {EstimatorKind::random_group_variance};
  if (!inst.population && inst.classes) return {EstimatorKind::class_count};
  return {EstimatorKind::sample_mean};
}

/// Number of units in the frame the design draws from.
inline std::uint64_t frame_size(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est) {
  if (est.kind == EstimatorKind::class_count) return inst.classes->total();
  if (cfg.design == DesignKind::pps_wor) return inst.sizes->total();
  return inst.population->size();
}

/// Throws PreconditionError unless the instance, design and estimator fit together.
inline void validate(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est) {
  using detail::require;
  const bool srs_like = cfg.design == DesignKind::srs || cfg.design == DesignKind::srs_wr;
  switch (est.kind) {
    case EstimatorKind::sample_mean:
      require(srs_like, "sample_mean pairs with srs or srs_wr");
      require(inst.population.has_value(), "sample_mean needs population values");
      break;
    case EstimatorKind::hansen_hurvitz:
      require(cfg.design == DesignKind::pps_wr || cfg.design == DesignKind::pps_wor,
              "hansen_hurvitz pairs with pps_wr or pps_wor");
      require(inst.population && inst.sizes, "PPS designs need population values and sizes");
      require(inst.population->size() == inst.sizes->size(), "population and sizes differ in length");
      break;
    case EstimatorKind::acs_mean:
      require(cfg.is_acs(), "acs_mean pairs with acs or acs_wr");
      require(inst.population && inst.networks, "ACS designs need population values, adjacency and threshold");
      require(inst.networks->unit_count() == inst.population->size(), "networks do not match the population");
      break;
    case EstimatorKind::random_group_variance: {
      require(cfg.design == DesignKind::srs, "random groups need srs without replacement");
      require(inst.population.has_value(), "random groups need population values");
      require(cfg.group_sizes.size() >= 2, "random group estimate needs at least two groups");
      for (auto s : cfg.group_sizes) require(s >= 1, "group sizes must be positive");
      require(std::accumulate(cfg.group_sizes.begin(), cfg.group_sizes.end(), std::size_t{0}) == cfg.n,
              "group sizes must add up to n");
      require(inst.population->size() >= 2, "S^2 needs at least two units");
      break;
    }
    case EstimatorKind::class_count:
      require(srs_like, "class counts pair with srs or srs_wr");
      require(inst.classes.has_value(), "class counts need subgroup sizes");
      require(est.class_index < inst.classes->classes(), "class index out of range");
      break;
  }
  if (est.kind != EstimatorKind::random_group_variance)
    require(cfg.group_sizes.empty(), "group_sizes only apply to the random group estimator");
  require(cfg.draws() >= 1, "sample size must be at least 1");
  if (cfg.replacement() == Replacement::without)
    require(cfg.draws() <= frame_size(inst, cfg, est),
            "sample size n=" + std::to_string(cfg.draws()) + " exceeds frame size " +
                std::to_string(frame_size(inst, cfg, est)) + " for sampling without replacement");
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;

  bool operator==(const Moments&) const = default;
};

/// Closed-form design moments. The random group estimator has no closed-form
/// variance; its expectation is S^2.
struct TheoreticalMoments {
  double mean = 0.0;
  std::optional<double> variance;

  bool operator==(const TheoreticalMoments&) const = default;
};

inline TheoreticalMoments theoretical_moments(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est) {
  validate(inst, cfg, est);
  const auto r = cfg.replacement();
  switch (est.kind) {
    case EstimatorKind::sample_mean:
      return {inst.population->mean(), srs_mean_variance(*inst.population, cfg.n, r)};
    case EstimatorKind::hansen_hurvitz:
      return {inst.population->total(), hh_variance(*inst.population, *inst.sizes, cfg.n, r)};
    case EstimatorKind::acs_mean:
      return {inst.population->mean(), acs_variance(*inst.population, *inst.networks, cfg.draws(), r)};
    case EstimatorKind::random_group_variance:
      return {inst.population->adjusted_variance(), std::nullopt};
    case EstimatorKind::class_count: {
      const auto& cp = *inst.classes;
      const auto k = est.class_index;
      const double mean = static_cast<double>(cfg.n) * cp.proportion(k);
      const auto p = cp.proportions();
      const double var = r == Replacement::without ? mvhyper_cov(cp, cfg.n)(k, k) : multinomial_cov(p, cfg.n)(k, k);
      return {mean, var};
    }
  }
  return {};
}

/// One draw of the design followed by the estimator, for Monte Carlo use.
/// Holds a reference to the instance, which must outlive it.
class TrialEvaluator {
 public:
  TrialEvaluator(const Instance& inst, DesignConfig cfg, EstimatorSpec est)
      : inst_(inst), cfg_(std::move(cfg)), est_(est) {
    validate(inst_, cfg_, est_);
    if (cfg_.design == DesignKind::pps_wr) selector_.emplace(*inst_.sizes);
    if (cfg_.design == DesignKind::pps_wor) extended_ = extended_unit_map(*inst_.sizes);
  }

  template <UniformSource G>
  double operator()(G& gen) const {
    const auto r = cfg_.replacement();
    switch (est_.kind) {
      case EstimatorKind::sample_mean:
        return sample_mean(*inst_.population, srs(inst_.population->size(), cfg_.n, r, gen).units());
      case EstimatorKind::hansen_hurvitz: {
        std::vector<std::size_t> units(cfg_.n);
        if (cfg_.design == DesignKind::pps_wr) {
          for (auto& u : units) u = (*selector_)(gen);
        } else {
          auto pos = detail::draw_without_replacement(extended_.size(), cfg_.n, gen);
          for (std::size_t j = 0; j < cfg_.n; ++j) units[j] = extended_[pos[j]];
        }
        return hansen_hurvitz(*inst_.population, *inst_.sizes, units);
      }
      case EstimatorKind::acs_mean: {
        auto s = acs(*inst_.population, *inst_.networks, cfg_.draws(), r, gen);
        return acs_mean(*inst_.networks, s.initial.units());
      }
      case EstimatorKind::random_group_variance: {
        auto seq = srs(inst_.population->size(), cfg_.n, r, gen);
        return random_group_variance_estimate(*inst_.population, random_group_split(seq, cfg_.group_sizes));
      }
      case EstimatorKind::class_count:
        return static_cast<double>(sample_counts(*inst_.classes, cfg_.n, r, gen).counts[est_.class_index]);
    }
    return 0.0;
  }

 private:
  const Instance& inst_;
  DesignConfig cfg_;
  EstimatorSpec est_;
  std::optional<PpsSelector> selector_;
  std::vector<std::size_t> extended_;
};

}  // namespace fpsample

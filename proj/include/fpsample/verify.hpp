#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpsample/enumerate.hpp"
#include "fpsample/error.hpp"
#include "fpsample/instance.hpp"
#include "fpsample/monte_carlo.hpp"

namespace fpsample {

/// Every tolerance used to reach a verdict, in one place.
struct Tolerances {
  double absolute = 1e-10;      // oracle vs closed form
  double relative = 1e-9;       // oracle vs closed form, relative to the reference
  double se_multiplier = 4.0;   // Monte Carlo band, in standard errors

  /// Bound for comparisons against exact values: the larger of the
  /// absolute and relative tolerances.
  double exact_bound(double reference) const { return std::max(absolute, relative * std::abs(reference)); }

  bool operator==(const Tolerances&) const = default;
};

/// One observed-vs-reference check.
struct Comparison {
  std::string name;
  double observed = 0.0;
  double reference = 0.0;
  double difference = 0.0;  // |observed - reference|
  double bound = 0.0;
  bool pass = false;

  bool operator==(const Comparison&) const = default;
};

inline Comparison compare(std::string name, double observed, double reference, double bound) {
  const double diff = std::abs(observed - reference);
  return {std::move(name), observed, reference, diff, bound, diff <= bound};
}

struct MomentReport {
  std::string estimator;
  std::string design;
  std::string estimand;
  TheoreticalMoments theoretical;
  std::optional<Moments> enumerated;
  std::optional<EmpiricalMoments> empirical;
  std::vector<Comparison> verdicts;
  Tolerances tolerances;

  bool pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Comparison& c) { return c.pass; });
  }

  bool operator==(const MomentReport&) const = default;
};

/// Compares the enumerated moments with the closed form, and the Monte Carlo
/// moments with the closed form (or with the enumerated value where no
/// closed form exists). A Monte Carlo check passes when the difference is
/// within se_multiplier standard errors; the absolute tolerance is a floor
/// for the band so that exact-zero cases are not failed on rounding.
inline MomentReport build_moment_report(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est,
                                        std::optional<Moments> enumerated,
                                        std::optional<EmpiricalMoments> empirical, const Tolerances& tol) {
  MomentReport rep;
  rep.estimator = estimator_tag(est);
  rep.design = std::string(to_string(cfg.design));
  rep.estimand = std::string(to_string(estimand_of(est.kind)));
  rep.theoretical = theoretical_moments(inst, cfg, est);
  rep.enumerated = enumerated;
  rep.empirical = empirical;
  rep.tolerances = tol;

  const auto& th = rep.theoretical;
  if (enumerated) {
    rep.verdicts.push_back(compare("enumerated_mean", enumerated->mean, th.mean, tol.exact_bound(th.mean)));
    if (th.variance)
      rep.verdicts.push_back(
          compare("enumerated_variance", enumerated->variance, *th.variance, tol.exact_bound(*th.variance)));
  }
  if (empirical) {
    const double k = tol.se_multiplier;
    rep.verdicts.push_back(
        compare("empirical_mean", empirical->mean, th.mean, std::max(k * empirical->se_mean, tol.absolute)));
    std::optional<double> ref_var = th.variance;
    if (!ref_var && enumerated) ref_var = enumerated->variance;
    if (ref_var)
      rep.verdicts.push_back(compare("empirical_variance", empirical->variance, *ref_var,
                                     std::max(k * empirical->se_variance, tol.absolute)));
  }
  return rep;
}

/// Closed form against a seeded Monte Carlo run.
inline MomentReport run_monte_carlo(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est,
                                    std::uint64_t trials, std::uint64_t seed, const Tolerances& tol = {},
                                    const MonteCarloOptions& opt = {}) {
  auto emp = simulate(inst, cfg, est, trials, seed, opt);
  return build_moment_report(inst, cfg, est, std::nullopt, emp, tol);
}

/// Enumeration when the instance is small enough, else nothing.
inline std::optional<Moments> try_enumerate_moments(const Instance& inst, const DesignConfig& cfg,
                                                    EstimatorSpec est) {
  try {
    return enumerate_moments(inst, cfg, est);
  } catch (const SizeLimitError&) {
    return std::nullopt;
  }
}

/// Closed form, enumeration (when feasible) and Monte Carlo in one report.
inline MomentReport verify_instance(const Instance& inst, const DesignConfig& cfg, EstimatorSpec est,
                                    std::uint64_t trials, std::uint64_t seed, const Tolerances& tol = {},
                                    const MonteCarloOptions& opt = {}) {
  validate(inst, cfg, est);
  auto enumerated = try_enumerate_moments(inst, cfg, est);
  auto emp = simulate(inst, cfg, est, trials, seed, opt);
  return build_moment_report(inst, cfg, est, enumerated, emp, tol);
}

struct RelativeEfficiencyReport {
  std::string estimator;
  std::string design_wor;
  std::string design_wr;
  std::uint64_t draws = 0;
  std::uint64_t effective_population_size = 0;
  double variance_wor = 0.0;
  double variance_wr = 0.0;
  std::string source;           // "enumerated" or "empirical"
  std::optional<double> ratio;  // absent when the WR variance is zero
  double predicted_fpc = 1.0;
  double difference = 0.0;
  double bound = 0.0;
  bool pass = false;

  bool operator==(const RelativeEfficiencyReport&) const = default;
};

struct MonteCarloRequest {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  MonteCarloOptions options;
};

/// Pairs the design with its with/without-replacement twin and compares the
/// variance ratio (WOR / WR) against fpc with the design's effective
/// population size: N for SRS and ACS, t_M for PPS.
inline RelativeEfficiencyReport relative_efficiency(const Instance& inst, const DesignConfig& cfg,
                                                    EstimatorSpec est, const Tolerances& tol = {},
                                                    std::optional<MonteCarloRequest> mc = std::nullopt) {
  DesignConfig wor = cfg, wr = cfg;
  switch (cfg.design) {
    case DesignKind::srs:
    case DesignKind::srs_wr:
      wor.design = DesignKind::srs;
      wr.design = DesignKind::srs_wr;
      break;
    case DesignKind::pps_wr:
    case DesignKind::pps_wor:
      wor.design = DesignKind::pps_wor;
      wr.design = DesignKind::pps_wr;
      break;
    case DesignKind::acs:
    case DesignKind::acs_wr:
      wor.design = DesignKind::acs;
      wr.design = DesignKind::acs_wr;
      break;
  }
  detail::require(est.kind != EstimatorKind::random_group_variance,
                  "the random group estimator has no with-replacement counterpart");
  validate(inst, wor, est);
  validate(inst, wr, est);

  RelativeEfficiencyReport rep;
  rep.estimator = estimator_tag(est);
  rep.design_wor = std::string(to_string(wor.design));
  rep.design_wr = std::string(to_string(wr.design));
  rep.draws = wor.draws();
  rep.effective_population_size = frame_size(inst, wor, est);
  rep.predicted_fpc = fpc(rep.draws, rep.effective_population_size);

  auto e_wor = try_enumerate_moments(inst, wor, est);
  auto e_wr = e_wor ? try_enumerate_moments(inst, wr, est) : std::nullopt;
  double rel_se = 0.0;
  if (e_wor && e_wr) {
    rep.source = "enumerated";
    rep.variance_wor = e_wor->variance;
    rep.variance_wr = e_wr->variance;
  } else {
    if (!mc)
      throw SizeLimitError("instance too large to enumerate; supply trials and a seed for a Monte Carlo comparison");
    rep.source = "empirical";
    auto m_wor = simulate(inst, wor, est, mc->trials, mc->seed, mc->options);
    auto m_wr = simulate(inst, wr, est, mc->trials, mc->seed + 1, mc->options);
    rep.variance_wor = m_wor.variance;
    rep.variance_wr = m_wr.variance;
    if (m_wor.variance > 0.0 && m_wr.variance > 0.0)
      rel_se = std::hypot(m_wor.se_variance / m_wor.variance, m_wr.se_variance / m_wr.variance);
  }

  if (rep.variance_wr <= tol.absolute) {
    // Degenerate: both designs have zero variance, the ratio is undefined.
    rep.ratio.reset();
    rep.difference = rep.variance_wor;
    rep.bound = tol.absolute;
  } else {
    rep.ratio = rep.variance_wor / rep.variance_wr;
    rep.difference = std::abs(*rep.ratio - rep.predicted_fpc);
    rep.bound = rep.source == "enumerated" ? tol.exact_bound(rep.predicted_fpc)
                                           : std::max(tol.se_multiplier * *rep.ratio * rel_se, tol.absolute);
  }
  rep.pass = rep.difference <= rep.bound;
  return rep;
}

}  // namespace fpsample

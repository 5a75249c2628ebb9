#pragma once

// Command-line front end. Lives in a header so tests can drive it in-process.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpsample/fpsample.hpp"
#include "fpsample/io.hpp"

namespace fpsample::cli {

enum ExitCode : int { ok = 0, usage_error = 1, verdict_failed = 2 };

struct RunConfig {
  std::string command;
  std::string population_path;
  std::string design;
  std::uint64_t trials = 100000;
  std::optional<std::uint64_t> seed;
  Tolerances tolerances;
  std::size_t workers = 1;
  std::string out_path;
  std::string format = "json";
};

namespace detail {

inline std::ostringstream classic_stream() {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  return os;
}

inline std::string num(double x) {
  auto os = classic_stream();
  os << std::setprecision(12) << x;
  return os.str();
}

inline std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : "-"; }

inline std::string moment_table(const MomentReport& r) {
  auto os = classic_stream();
  os << "estimator: " << r.estimator << "   design: " << r.design << "   estimand: " << r.estimand << '\n';
  os << std::left << std::setw(14) << "" << std::right << std::setw(22) << "mean" << std::setw(22) << "variance"
     << '\n';
  os << std::left << std::setw(14) << "theoretical" << std::right << std::setw(22) << num(r.theoretical.mean)
     << std::setw(22) << opt_num(r.theoretical.variance) << '\n';
  if (r.enumerated)
    os << std::left << std::setw(14) << "enumerated" << std::right << std::setw(22) << num(r.enumerated->mean)
       << std::setw(22) << num(r.enumerated->variance) << '\n';
  if (r.empirical) {
    os << std::left << std::setw(14) << "empirical" << std::right << std::setw(22) << num(r.empirical->mean)
       << std::setw(22) << num(r.empirical->variance) << '\n';
    os << std::left << std::setw(14) << "  std. error" << std::right << std::setw(22) << num(r.empirical->se_mean)
       << std::setw(22) << num(r.empirical->se_variance) << "   (" << r.empirical->trials << " trials)\n";
  }
  os << std::left << std::setw(22) << "comparison" << std::right << std::setw(20) << "|diff|" << std::setw(20)
     << "bound" << std::setw(8) << "verdict" << '\n';
  for (const auto& c : r.verdicts)
    os << std::left << std::setw(22) << c.name << std::right << std::setw(20) << num(c.difference) << std::setw(20)
       << num(c.bound) << std::setw(8) << (c.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

inline std::string efficiency_table(const RelativeEfficiencyReport& r) {
  auto os = classic_stream();
  os << "estimator: " << r.estimator << "   designs: " << r.design_wor << " / " << r.design_wr
     << "   source: " << r.source << '\n';
  os << std::left << std::setw(28) << "draws" << r.draws << '\n';
  os << std::left << std::setw(28) << "effective population size" << r.effective_population_size << '\n';
  os << std::left << std::setw(28) << "variance (WOR)" << num(r.variance_wor) << '\n';
  os << std::left << std::setw(28) << "variance (WR)" << num(r.variance_wr) << '\n';
  os << std::left << std::setw(28) << "ratio" << opt_num(r.ratio) << '\n';
  os << std::left << std::setw(28) << "predicted fpc" << num(r.predicted_fpc) << '\n';
  os << std::left << std::setw(28) << "verdict" << (r.pass ? "PASS" : "FAIL") << "  (|diff| " << num(r.difference)
     << " <= " << num(r.bound) << ")\n";
  return os.str();
}

inline void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw io::InputError("cannot write output file: " + cfg.out_path);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

/// Estimators to run: the one named in the design, else the design's default
/// (for class counts, every class).
inline std::vector<EstimatorSpec> estimators_for(const Instance& inst, const io::DesignFile& d) {
  if (d.estimator) return {*d.estimator};
  auto e = default_estimator(inst, d.config);
  if (e.kind != EstimatorKind::class_count) return {e};
  std::vector<EstimatorSpec> all;
  for (std::size_t k = 0; k < inst.classes->classes(); ++k) all.push_back({EstimatorKind::class_count, k});
  return all;
}

/// Totals rescaled to per-unit means: divide means by N and variances by N^2.
inline io::Json per_unit(const MomentReport& r, std::size_t N) {
  const double d = static_cast<double>(N);
  auto block = [&](double m, std::optional<double> v) {
    return io::Json{{"mean", m / d}, {"variance", v ? io::Json(*v / (d * d)) : io::Json(nullptr)}};
  };
  io::Json j{{"estimand", "mean"}, {"divisor", N}, {"theoretical", block(r.theoretical.mean, r.theoretical.variance)}};
  j["enumerated"] = r.enumerated ? block(r.enumerated->mean, r.enumerated->variance) : io::Json(nullptr);
  j["empirical"] = r.empirical ? block(r.empirical->mean, r.empirical->variance) : io::Json(nullptr);
  return j;
}

inline MonteCarloOptions mc_options(const RunConfig& cfg) {
  MonteCarloOptions opt;
  opt.workers = cfg.workers;
  return opt;
}

}  // namespace detail

/// Closed form vs enumeration vs Monte Carlo. Exit 0 when every verdict passes.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.seed) throw io::InputError("verify requires --seed");
  const auto inst = io::load_instance(cfg.population_path);
  const auto design = io::load_design(cfg.design);
  bool all_pass = true;
  io::Json reports = io::Json::array();
  std::string table;
  for (auto est : detail::estimators_for(inst, design)) {
    auto rep = verify_instance(inst, design.config, est, cfg.trials, *cfg.seed, cfg.tolerances, detail::mc_options(cfg));
    all_pass = all_pass && rep.pass();
    auto j = io::to_json(rep);
    table += detail::moment_table(rep);
    if (est.kind == EstimatorKind::hansen_hurvitz) {
      j["per_unit"] = detail::per_unit(rep, inst.population->size());
      table += "per-unit mean (total / " + std::to_string(inst.population->size()) + "): theoretical " +
               detail::num(j["per_unit"]["theoretical"]["mean"].get<double>()) + ", variance " +
               detail::num(j["per_unit"]["theoretical"]["variance"].get<double>()) + '\n';
    }
    reports.push_back(std::move(j));
    table += '\n';
  }
  if (cfg.format == "json") {
    io::Json doc{{"command", "verify"}, {"seed", *cfg.seed}, {"reports", reports}, {"pass", all_pass}};
    detail::emit(cfg, io::dump(doc), out);
  } else {
    detail::emit(cfg, table + (all_pass ? "ALL PASS" : "FAILURES PRESENT"), out);
  }
  return all_pass ? ok : verdict_failed;
}

/// WOR / WR variance ratio against the predicted fpc.
inline int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const auto inst = io::load_instance(cfg.population_path);
  const auto design = io::load_design(cfg.design);
  std::optional<MonteCarloRequest> mc;
  if (cfg.seed) mc = MonteCarloRequest{cfg.trials, *cfg.seed, detail::mc_options(cfg)};
  bool all_pass = true;
  io::Json reports = io::Json::array();
  std::string table;
  for (auto est : detail::estimators_for(inst, design)) {
    auto rep = relative_efficiency(inst, design.config, est, cfg.tolerances, mc);
    all_pass = all_pass && rep.pass;
    reports.push_back(io::to_json(rep));
    table += detail::efficiency_table(rep) + '\n';
  }
  if (cfg.format == "json") {
    io::Json doc{{"command", "compare"}, {"reports", reports}, {"pass", all_pass}};
    detail::emit(cfg, io::dump(doc), out);
  } else {
    detail::emit(cfg, table, out);
  }
  return all_pass ? ok : verdict_failed;
}

/// Exact count distribution (classified populations) or exact estimator moments.
inline int cmd_enumerate(const RunConfig& cfg, std::ostream& out) {
  const auto inst = io::load_instance(cfg.population_path);
  const auto design = io::load_design(cfg.design);
  const auto ests = detail::estimators_for(inst, design);

  if (ests.front().kind == EstimatorKind::class_count) {
    const auto& cp = *inst.classes;
    const auto& c = design.config;
    validate(inst, c, ests.front());
    const auto r = c.replacement();
    const auto dist = enumerate_count_distribution(cp, c.n, r);
    const auto mom = count_moments(dist);
    const auto probs = cp.proportions();
    io::Json points = io::Json::array();
    for (const auto& [cv, p] : dist) {
      const double pmf = r == Replacement::without ? mvhyper_pmf(cv, cp) : multinomial_pmf(cv, probs);
      points.push_back(io::Json{{"counts", cv.counts}, {"probability", p}, {"pmf", pmf}});
    }
    io::Json doc{{"command", "enumerate"},
                 {"kind", "count_distribution"},
                 {"subgroup_sizes", std::vector<std::uint64_t>(cp.sizes().begin(), cp.sizes().end())},
                 {"n", c.n},
                 {"replacement", r == Replacement::with ? "with" : "without"},
                 {"distribution", points},
                 {"mean", mom.mean},
                 {"covariance", io::to_json(mom.covariance)}};
    if (cfg.format == "json") {
      detail::emit(cfg, io::dump(doc), out);
    } else {
      auto os = detail::classic_stream();
      os << std::left << std::setw(24) << "counts" << std::right << std::setw(22) << "probability" << std::setw(22)
         << "pmf" << '\n';
      for (const auto& [cv, p] : dist) {
        std::string label = "(";
        for (std::size_t k = 0; k < cv.counts.size(); ++k) label += (k ? "," : "") + std::to_string(cv.counts[k]);
        label += ")";
        const double pmf = r == Replacement::without ? mvhyper_pmf(cv, cp) : multinomial_pmf(cv, probs);
        os << std::left << std::setw(24) << label << std::right << std::setw(22) << detail::num(p) << std::setw(22)
           << detail::num(pmf) << '\n';
      }
      detail::emit(cfg, os.str(), out);
    }
    return ok;
  }

  io::Json results = io::Json::array();
  std::string table;
  for (auto est : ests) {
    const auto m = enumerate_moments(inst, design.config, est);
    const auto th = theoretical_moments(inst, design.config, est);
    results.push_back(io::Json{{"estimator", estimator_tag(est)},
                               {"design", std::string(to_string(design.config.design))},
                               {"mean", m.mean},
                               {"variance", m.variance},
                               {"theoretical", io::Json{{"mean", th.mean},
                                                        {"variance", th.variance ? io::Json(*th.variance)
                                                                                 : io::Json(nullptr)}}}});
    table += "estimator: " + estimator_tag(est) + "   design: " + std::string(to_string(design.config.design)) +
             "\n  exact mean " + detail::num(m.mean) + "   exact variance " + detail::num(m.variance) + '\n';
  }
  if (cfg.format == "json") {
    detail::emit(cfg, io::dump(io::Json{{"command", "enumerate"}, {"kind", "estimator_moments"}, {"results", results}}),
                 out);
  } else {
    detail::emit(cfg, table, out);
  }
  return ok;
}

/// Parses argv and dispatches. Diagnostics go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-population sampling: exact and Monte Carlo checks of design variances"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--population", cfg.population_path, "Population JSON file")->required();
    sub->add_option("--design", cfg.design, "Design config: inline JSON or a path")->required();
    sub->add_option("--trials", cfg.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "64-bit seed for all randomness");
    sub->add_option("--tolerance-abs", cfg.tolerances.absolute, "Absolute tolerance for exact comparisons")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--workers", cfg.workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out_path, "Write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  };
  auto* verify = app.add_subcommand("verify", "Compare closed-form moments with enumeration and Monte Carlo");
  auto* compare = app.add_subcommand("compare", "WOR / WR variance ratio against the finite population correction");
  auto* enumerate = app.add_subcommand("enumerate", "Exact count distribution or estimator moments");
  for (auto* s : {verify, compare, enumerate}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return usage_error;
  }

  try {
    if (verify->parsed()) return cmd_verify(cfg, out);
    if (compare->parsed()) return cmd_compare(cfg, out);
    return cmd_enumerate(cfg, out);
  } catch (const io::InputError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const PreconditionError& e) {
    err << "error: precondition violated: " << e.what() << '\n';
  } catch (const SizeLimitError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return usage_error;
}

}  // namespace fpsample::cli

#pragma once

// JSON file formats. Unit indices in files and reports are 1-based.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpsample/enumerate.hpp"
#include "fpsample/instance.hpp"
#include "fpsample/verify.hpp"

namespace fpsample::io {

using Json = nlohmann::ordered_json;

/// Malformed or inconsistent input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void allow_only(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw InputError(std::string(what) + ": unknown key \"" + k + "\"");
}

inline std::uint64_t to_uint(const Json& j, const std::string& what) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    throw InputError(what + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

inline double to_real(const Json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + " must be a number");
  return j.get<double>();
}

inline std::vector<std::uint64_t> to_uint_array(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + " must be an array");
  std::vector<std::uint64_t> out;
  for (const auto& x : j) out.push_back(to_uint(x, what + " entries"));
  return out;
}

inline Json optional_number(std::optional<double> x) { return x ? Json(*x) : Json(nullptr); }

inline std::optional<double> read_optional_number(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline void write(std::ostream& os, const Json& j, int indent, int level) {
  indent = std::max(indent, 0);
  const std::string pad(static_cast<std::size_t>(indent * (level + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * level), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(k).dump() << sep;
        write(os, v, indent, level + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write(os, v, indent, level + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        os << "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      std::string s(buf);
      // Keep it a float on re-read.
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      os << s;
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Serialises with every float written to 17 significant digits. A
/// non-positive indent gives compact output.
inline std::string dump(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::write(os, j, indent, 0);
  return os.str();
}

inline Json parse_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(what + ": invalid JSON (" + e.what() + ")");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Population file:
/// {"values": [...], "sizes": [...], "adjacency": [[...], ...], "threshold": y0,
///  "subgroup_sizes": [...]}
/// `sizes` for PPS designs, `adjacency` + `threshold` for ACS designs,
/// `subgroup_sizes` for class-count distributions. Adjacency lists hold
/// 1-based unit numbers.
inline Instance parse_instance(const Json& j) {
  if (!j.is_object()) throw InputError("population file must hold a JSON object");
  detail::allow_only(j, {"values", "sizes", "adjacency", "threshold", "subgroup_sizes"}, "population");
  Instance inst;
  try {
    if (j.contains("values")) {
      if (!j["values"].is_array()) throw InputError("values must be an array");
      std::vector<double> v;
      for (const auto& x : j["values"]) v.push_back(detail::to_real(x, "values entries"));
      inst.population.emplace(std::move(v));
    }
    if (j.contains("subgroup_sizes")) inst.classes.emplace(detail::to_uint_array(j["subgroup_sizes"], "subgroup_sizes"));
    if (!inst.population && !inst.classes) throw InputError("population file needs \"values\" or \"subgroup_sizes\"");
    if (j.contains("sizes")) {
      if (!inst.population) throw InputError("sizes need values");
      inst.sizes.emplace(detail::to_uint_array(j["sizes"], "sizes"));
      if (inst.sizes->size() != inst.population->size())
        throw InputError("sizes and values differ in length");
    }
    if (j.contains("adjacency") != j.contains("threshold"))
      throw InputError("adjacency and threshold must be given together");
    if (j.contains("adjacency")) {
      if (!inst.population) throw InputError("adjacency needs values");
      const auto& a = j["adjacency"];
      if (!a.is_array()) throw InputError("adjacency must be an array of neighbour lists");
      std::vector<std::vector<std::size_t>> nb;
      for (const auto& list : a) {
        auto ids = detail::to_uint_array(list, "adjacency lists");
        std::vector<std::size_t> zero_based;
        for (auto id : ids) {
          if (id == 0) throw InputError("adjacency uses 1-based unit numbers");
          zero_based.push_back(static_cast<std::size_t>(id - 1));
        }
        nb.push_back(std::move(zero_based));
      }
      if (nb.size() != inst.population->size()) throw InputError("adjacency and values differ in length");
      Adjacency adj(std::move(nb));
      inst.networks.emplace(compute_networks(*inst.population, adj, detail::to_real(j["threshold"], "threshold")));
    }
  } catch (const PreconditionError& e) {
    throw InputError(std::string("population: ") + e.what());
  }
  return inst;
}

inline Instance load_instance(const std::string& path) { return parse_instance(parse_text(read_file(path), path)); }

inline DesignKind parse_design_kind(const std::string& s) {
  for (auto d : {DesignKind::srs, DesignKind::srs_wr, DesignKind::pps_wr, DesignKind::pps_wor, DesignKind::acs,
                 DesignKind::acs_wr})
    if (s == to_string(d)) return d;
  throw InputError("unknown design \"" + s + "\"");
}

/// Design file or inline config:
/// {"design": "srs"|"srs_wr"|"pps_wr"|"pps_wor"|"acs"|"acs_wr", "n": int,
///  "n1": int, "group_sizes": [int], "estimator": name, "class": int}
/// `estimator` and `class` (1-based) are optional; without them the design's
/// usual estimator is used.
struct DesignFile {
  DesignConfig config;
  std::optional<EstimatorSpec> estimator;
};

inline DesignFile parse_design(const Json& j) {
  if (!j.is_object()) throw InputError("design must be a JSON object");
  detail::allow_only(j, {"design", "n", "n1", "group_sizes", "estimator", "class"}, "design");
  if (!j.contains("design") || !j["design"].is_string()) throw InputError("design needs a \"design\" string");
  DesignFile out;
  out.config.design = parse_design_kind(j["design"].get<std::string>());
  if (j.contains("n")) {
    out.config.n = detail::to_uint(j["n"], "n");
  } else if (!j.contains("n1")) {
    throw InputError("design needs \"n\"");
  }
  if (j.contains("n1")) {
    out.config.n1 = detail::to_uint(j["n1"], "n1");
    if (!j.contains("n")) out.config.n = *out.config.n1;
  }
  if (j.contains("group_sizes")) {
    for (auto s : detail::to_uint_array(j["group_sizes"], "group_sizes")) out.config.group_sizes.push_back(s);
  }
  if (j.contains("estimator")) {
    if (!j["estimator"].is_string()) throw InputError("estimator must be a string");
    const auto name = j["estimator"].get<std::string>();
    EstimatorSpec e;
    bool found = false;
    for (auto k : {EstimatorKind::sample_mean, EstimatorKind::hansen_hurvitz, EstimatorKind::acs_mean,
                   EstimatorKind::random_group_variance, EstimatorKind::class_count})
      if (name == to_string(k)) {
        e.kind = k;
        found = true;
      }
    if (!found) throw InputError("unknown estimator \"" + name + "\"");
    out.estimator = e;
  } else if (j.contains("class")) {
    out.estimator = EstimatorSpec{EstimatorKind::class_count};
  }
  if (j.contains("class")) {
    auto c = detail::to_uint(j["class"], "class");
    if (c == 0) throw InputError("class uses 1-based numbering");
    out.estimator->class_index = static_cast<std::size_t>(c - 1);
  }
  return out;
}

/// Accepts inline JSON (starting with '{') or a path to a JSON file.
inline DesignFile load_design(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return parse_design(parse_text(arg, "--design"));
  return parse_design(parse_text(read_file(arg), arg));
}

// Reports.

inline Json to_json(const Tolerances& t) {
  return Json{{"absolute", t.absolute}, {"relative", t.relative}, {"se_multiplier", t.se_multiplier}};
}

inline Json to_json(const MomentReport& r) {
  Json j;
  j["estimator"] = r.estimator;
  j["design"] = r.design;
  j["estimand"] = r.estimand;
  j["theoretical"] = Json{{"mean", r.theoretical.mean}, {"variance", detail::optional_number(r.theoretical.variance)}};
  j["enumerated"] = r.enumerated ? Json{{"mean", r.enumerated->mean}, {"variance", r.enumerated->variance}} : Json(nullptr);
  if (r.empirical) {
    const auto& e = *r.empirical;
    j["empirical"] = Json{{"mean", e.mean},
                          {"variance", e.variance},
                          {"trials", e.trials},
                          {"batches", e.batches},
                          {"standard_error", Json{{"mean", e.se_mean}, {"variance", e.se_variance}}}};
  } else {
    j["empirical"] = nullptr;
  }
  Json verdicts = Json::array();
  for (const auto& c : r.verdicts)
    verdicts.push_back(Json{{"comparison", c.name},
                            {"observed", c.observed},
                            {"reference", c.reference},
                            {"difference", c.difference},
                            {"bound", c.bound},
                            {"pass", c.pass}});
  j["verdicts"] = std::move(verdicts);
  j["tolerances"] = to_json(r.tolerances);
  j["pass"] = r.pass();
  return j;
}

inline MomentReport moment_report_from_json(const Json& j) {
  MomentReport r;
  r.estimator = j.at("estimator").get<std::string>();
  r.design = j.at("design").get<std::string>();
  r.estimand = j.at("estimand").get<std::string>();
  r.theoretical.mean = j.at("theoretical").at("mean").get<double>();
  r.theoretical.variance = detail::read_optional_number(j.at("theoretical").at("variance"));
  if (!j.at("enumerated").is_null())
    r.enumerated = Moments{j["enumerated"].at("mean").get<double>(), j["enumerated"].at("variance").get<double>()};
  if (!j.at("empirical").is_null()) {
    const auto& e = j["empirical"];
    r.empirical = EmpiricalMoments{e.at("mean").get<double>(),
                                   e.at("variance").get<double>(),
                                   e.at("trials").get<std::uint64_t>(),
                                   e.at("standard_error").at("mean").get<double>(),
                                   e.at("standard_error").at("variance").get<double>(),
                                   e.at("batches").get<std::uint64_t>()};
  }
  for (const auto& c : j.at("verdicts"))
    r.verdicts.push_back(Comparison{c.at("comparison").get<std::string>(), c.at("observed").get<double>(),
                                    c.at("reference").get<double>(), c.at("difference").get<double>(),
                                    c.at("bound").get<double>(), c.at("pass").get<bool>()});
  const auto& t = j.at("tolerances");
  r.tolerances = Tolerances{t.at("absolute").get<double>(), t.at("relative").get<double>(),
                            t.at("se_multiplier").get<double>()};
  return r;
}

inline Json to_json(const RelativeEfficiencyReport& r) {
  return Json{{"estimator", r.estimator},
              {"design_wor", r.design_wor},
              {"design_wr", r.design_wr},
              {"draws", r.draws},
              {"effective_population_size", r.effective_population_size},
              {"variance_wor", r.variance_wor},
              {"variance_wr", r.variance_wr},
              {"source", r.source},
              {"ratio", detail::optional_number(r.ratio)},
              {"predicted_fpc", r.predicted_fpc},
              {"difference", r.difference},
              {"bound", r.bound},
              {"pass", r.pass}};
}

inline RelativeEfficiencyReport efficiency_report_from_json(const Json& j) {
  RelativeEfficiencyReport r;
  r.estimator = j.at("estimator").get<std::string>();
  r.design_wor = j.at("design_wor").get<std::string>();
  r.design_wr = j.at("design_wr").get<std::string>();
  r.draws = j.at("draws").get<std::uint64_t>();
  r.effective_population_size = j.at("effective_population_size").get<std::uint64_t>();
  r.variance_wor = j.at("variance_wor").get<double>();
  r.variance_wr = j.at("variance_wr").get<double>();
  r.source = j.at("source").get<std::string>();
  r.ratio = detail::read_optional_number(j.at("ratio"));
  r.predicted_fpc = j.at("predicted_fpc").get<double>();
  r.difference = j.at("difference").get<double>();
  r.bound = j.at("bound").get<double>();
  r.pass = j.at("pass").get<bool>();
  return r;
}

inline Json to_json(const CountDistribution& dist) {
  Json points = Json::array();
  for (const auto& [cv, p] : dist) points.push_back(Json{{"counts", cv.counts}, {"probability", p}});
  return points;
}

inline Json to_json(const CovMatrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.size(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.size(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fpsample::io

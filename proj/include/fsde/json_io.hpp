// JSON bindings: report serialization and strict config parsing (unknown keys
// are errors, so experiment definitions cannot silently carry typos).
#pragma once

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fsde/check.hpp"
#include "fsde/coeff.hpp"
#include "fsde/constraint.hpp"
#include "fsde/mc.hpp"
#include "fsde/sde.hpp"

namespace fsde {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
T optional_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline json to_json(const CheckReport& rep) {
  json w = json::array();
  for (const auto& wit : rep.witnesses)
    w.push_back({{"t", wit.t}, {"x", wit.x}, {"clause", wit.clause}, {"lhs", wit.lhs}});
  return json{{"verdict", rep.pass ? "PASS" : "FAIL"},
              {"tolerance", rep.tolerance},
              {"witnesses", w},
              {"n_checked", rep.n_checked},
              {"n_violations", rep.n_violations},
              {"note", CheckReport::kNote}};
}

inline json to_json(const ExperimentReport& rep) {
  return json{{"experiment", to_string(rep.kind)},
              {"n_paths", rep.n_paths},
              {"violation_fraction", rep.violation_fraction},
              {"max_excursion", rep.max_excursion},
              {"n_blowups", rep.n_blowups},
              {"membership_tol", rep.membership_tol},
              {"master_seed", rep.master_seed},
              {"lambda_alpha_stats",
               {{"min", rep.lambda_alpha_stats.min},
                {"mean", rep.lambda_alpha_stats.mean},
                {"max", rep.lambda_alpha_stats.max}}},
              {"checker", to_json(rep.checker)}};
}

inline json to_json(const RegularityReport& rep) {
  json conds = json::array();
  for (const auto& c : rep.conditions)
    conds.push_back({{"name", c.name}, {"status", c.warn ? "WARN" : "PASS"}, {"detail", c.detail}});
  return json{{"M0", rep.fitted.M0},   {"L0", rep.fitted.L0},       {"LR", rep.fitted.LR},
              {"MR", rep.fitted.MR},   {"beta", rep.fitted.beta},   {"delta", rep.fitted.delta},
              {"mu", rep.fitted.mu},   {"n_samples", rep.n_samples}, {"conditions", conds},
              {"note", "sampling falsifier: constants are empirical lower bounds"}};
}

inline json to_json(const RateReport& rep) {
  json rows = json::array();
  for (std::size_t i = 0; i < rep.levels.size(); ++i)
    rows.push_back({{"level", rep.levels[i]}, {"sup_error", rep.sup_errors[i]}});
  json out{{"levels", rows}, {"exact", rep.exact}};
  if (!rep.exact) out["fitted_order"] = rep.fitted_order;
  return out;
}

inline json to_json(const Lemma41Report& rep) {
  return json{{"max_ratio_a", rep.max_ratio_a},
              {"max_ratio_b", rep.max_ratio_b},
              {"holder_U", rep.holder_U},
              {"holder_V", rep.holder_V},
              {"lambda_driver", rep.lambda_driver},
              {"chain_constant", rep.chain_constant},
              {"grid_points", rep.grid_points}};
}

// {"d": 1, "b": ["1 - x1"], "sigma": ["x1"]} or a catalog shortcut
// {"catalog": "linear", "f": .., "f1": .., "g": .., "g1": ..} /
// {"catalog": "rotation"} / {"catalog": "logistic"}.
inline CoefficientField coeff_from_json(const json& j, const std::string& where = "coefficients") {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  if (j.contains("catalog")) {
    const auto name = detail::require<std::string>(j, "catalog", where);
    if (name == "linear") {
      detail::reject_unknown_keys(j, {"catalog", "f", "f1", "g", "g1"}, where);
      return make_linear(detail::optional_or(j, "f", 0.0, where),
                         detail::optional_or(j, "f1", 0.0, where),
                         detail::optional_or(j, "g", 0.0, where),
                         detail::optional_or(j, "g1", 0.0, where));
    }
    if (name == "rotation") {
      detail::reject_unknown_keys(j, {"catalog"}, where);
      return make_rotation();
    }
    if (name == "logistic") {
      detail::reject_unknown_keys(j, {"catalog"}, where);
      return make_logistic();
    }
    throw ConfigError(where + ": unknown catalog \"" + name + "\"");
  }
  detail::reject_unknown_keys(j, {"d", "b", "sigma"}, where);
  const int d = detail::require<int>(j, "d", where);
  auto b = detail::require<std::vector<std::string>>(j, "b", where);
  auto s = detail::require<std::vector<std::string>>(j, "sigma", where);
  try {
    return make_coefficients(d, b, s);
  } catch (const ParseError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline ConstraintSet constraint_from_json(const json& j, int d,
                                          const std::string& where = "constraint") {
  const auto kind = detail::require<std::string>(j, "kind", where);
  if (kind == "sphere") {
    detail::reject_unknown_keys(j, {"kind", "rho"}, where);
    return ConstraintSet::sphere(detail::require<double>(j, "rho", where), d);
  }
  if (kind == "ball") {
    detail::reject_unknown_keys(j, {"kind", "rho"}, where);
    return ConstraintSet::ball(detail::require<double>(j, "rho", where), d);
  }
  if (kind == "annulus") {
    detail::reject_unknown_keys(j, {"kind", "r_in", "r_out"}, where);
    return ConstraintSet::annulus(detail::require<double>(j, "r_in", where),
                                  detail::require<double>(j, "r_out", where), d);
  }
  if (kind == "half_line") {
    detail::reject_unknown_keys(j, {"kind"}, where);
    return ConstraintSet::half_line();
  }
  if (kind == "comparison_cone") {
    detail::reject_unknown_keys(j, {"kind"}, where);
    return ConstraintSet::comparison_cone();
  }
  throw ConfigError(where + ": unknown kind \"" + kind + "\"");
}

struct RunConfig {
  ExperimentConfig experiment;
  std::string output_dir = "runs";
};

// Full run configuration document:
// {
//   "fbm": {"hurst": 0.75, "t0": 0, "T": 1, "n_steps": 4096, "method": "circulant"},
//   "coefficients": {...}, "coefficients2": {...},
//   "constraint": {"kind": "sphere", "rho": 1},
//   "experiment": {"kind": "viability", "n_paths": 100, "master_seed": 42,
//                  "membership_tol": 0.02, "x0": {"policy": "fixed", "value": [1, 0]},
//                  "y0": [..], "alpha": 0.375,
//                  "checker_time_points": 11, "checker_boundary_samples": 256,
//                  "checker_tol": 1e-9},
//   "output_dir": "runs"
// }
inline RunConfig run_config_from_json(const json& j) {
  detail::reject_unknown_keys(
      j, {"fbm", "coefficients", "coefficients2", "constraint", "experiment", "output_dir"},
      "config");
  RunConfig rc;
  ExperimentConfig& e = rc.experiment;

  const json& jf = j.contains("fbm") ? j.at("fbm") : throw ConfigError("config: missing \"fbm\"");
  detail::reject_unknown_keys(jf, {"hurst", "t0", "T", "n_steps", "method"}, "fbm");
  e.hurst = HurstParameter(detail::require<double>(jf, "hurst", "fbm"));
  e.t = detail::optional_or(jf, "t0", 0.0, "fbm");
  e.T = detail::optional_or(jf, "T", 1.0, "fbm");
  e.n_steps = detail::require<std::size_t>(jf, "n_steps", "fbm");
  e.method = fbm_method_from_string(
      detail::optional_or<std::string>(jf, "method", "circulant_embedding", "fbm"));

  if (!j.contains("coefficients")) throw ConfigError("config: missing \"coefficients\"");
  e.cf = coeff_from_json(j.at("coefficients"), "coefficients");
  if (j.contains("coefficients2"))
    e.cf2 = coeff_from_json(j.at("coefficients2"), "coefficients2");

  if (!j.contains("constraint")) throw ConfigError("config: missing \"constraint\"");
  e.constraint = constraint_from_json(j.at("constraint"), e.cf.d, "constraint");

  if (!j.contains("experiment")) throw ConfigError("config: missing \"experiment\"");
  const json& je = j.at("experiment");
  detail::reject_unknown_keys(je,
                              {"kind", "n_paths", "master_seed", "membership_tol", "x0", "y0",
                               "alpha", "checker_time_points", "checker_boundary_samples",
                               "checker_tol"},
                              "experiment");
  const auto kind = detail::require<std::string>(je, "kind", "experiment");
  if (kind == "viability") e.kind = ExperimentKind::viability;
  else if (kind == "positivity") e.kind = ExperimentKind::positivity;
  else if (kind == "comparison") e.kind = ExperimentKind::comparison;
  else throw ConfigError("experiment: unknown kind \"" + kind + "\"");
  e.n_paths = detail::require<std::size_t>(je, "n_paths", "experiment");
  e.master_seed = detail::require<std::uint64_t>(je, "master_seed", "experiment");
  e.membership_tol = detail::require<double>(je, "membership_tol", "experiment");
  if (je.contains("alpha")) e.alpha = detail::require<double>(je, "alpha", "experiment");
  e.checker_time_points =
      detail::optional_or<std::size_t>(je, "checker_time_points", 11, "experiment");
  e.checker_boundary_samples =
      detail::optional_or<std::size_t>(je, "checker_boundary_samples", 256, "experiment");
  e.checker_tol = detail::optional_or(je, "checker_tol", -1.0, "experiment");

  const json& jx = je.contains("x0") ? je.at("x0") : throw ConfigError("experiment: missing \"x0\"");
  detail::reject_unknown_keys(jx, {"policy", "value"}, "experiment.x0");
  const auto policy = detail::require<std::string>(jx, "policy", "experiment.x0");
  if (policy == "fixed") {
    e.x0 = X0Policy::fixed(detail::require<std::vector<double>>(jx, "value", "experiment.x0"));
    if (static_cast<int>(e.x0.value.size()) != e.cf.d)
      throw ConfigError("experiment.x0: value dimension does not match coefficients");
  } else if (policy == "boundary_uniform") {
    detail::reject_unknown_keys(jx, {"policy"}, "experiment.x0");
    e.x0 = X0Policy::boundary_uniform();
  } else {
    throw ConfigError("experiment.x0: unknown policy \"" + policy + "\"");
  }
  if (je.contains("y0"))
    e.y0 = detail::require<std::vector<double>>(je, "y0", "experiment");

  rc.output_dir = detail::optional_or<std::string>(j, "output_dir", "runs", "config");
  try {
    e.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  return rc;
}

// FNV-1a over the canonical dump; stable across runs and platforms
inline std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fsde

#pragma once

#include <cstdlib>
#include <fstream>
#include <string>

#include "json.hpp"
#include "nuidx/curve.hpp"
#include "nuidx/error.hpp"
#include "nuidx/scenario.hpp"
#include "nuidx/study.hpp"
#include "nuidx/theory.hpp"

namespace nuidx {

/// Grid of the theory curves and the region map.
struct TheoryConfig {
  double alpha = 0.8;
  double pi = 0.25;
  double beta0 = 0.2;
  double beta1_min = 0.05;
  double beta1_max = 4.0;
  std::size_t steps = 80;
  theory::ConfounderDesign design{0.55, 1.7, 1.7};
  std::size_t region_steps = 50;
};

/**
 * Run configuration read from a JSON file with nested sections:
 *
 *   {
 *     "output_dir": "results",
 *     "workers": 4,
 *     "cv":       {"folds": 10, "rule": "one_se", "loss": "deviance",
 *                  "n_lambda": 100, "min_ratio": 1e-4, "seed": 1},
 *     "study":    {"scenarios": ["medium_uncorrelated", {...}], "replicates": 100,
 *                  "n": 10000, "master_seed": 20240101, "arms": "auto"},
 *     "pipeline": {"weighting": "auto", "curve_folds": 10, "curve_seed": 7},
 *     "theory":   {"alpha": 0.8, "pi": 0.25, "beta0": 0.2, "beta1_min": 0.05,
 *                  "beta1_max": 4, "steps": 80, "pz": 0.55, "rr_az": 1.7,
 *                  "rr_xz": 1.7, "region_steps": 50}
 *   }
 *
 * Every key is optional. Unknown keys are rejected.
 */
struct RunConfig {
  std::string output_dir;
  std::size_t workers = 1;
  glm::CvOptions cv{};
  StudyConfig study{};
  PipelineConfig pipeline{};
  TheoryConfig theory{};
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& section,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw config_error("config section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw config_error("unknown key '" + it.key() + "' in config section '" + section + "'");
  }
}

template <class T>
void take(const nlohmann::json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

inline std::string default_output_dir() {
  const char* env = std::getenv("NUIDX_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::take;
  RunConfig rc;
  rc.output_dir = default_output_dir();
  rc.study.scenarios = builtin_scenarios();
  try {
    detail::check_keys(j, "<root>", {"output_dir", "workers", "cv", "study", "pipeline", "theory"});
    take(j, "output_dir", rc.output_dir);
    take(j, "workers", rc.workers);
    if (j.contains("cv")) {
      const auto& c = j.at("cv");
      detail::check_keys(c, "cv", {"folds", "rule", "loss", "n_lambda", "min_ratio", "seed"});
      take(c, "folds", rc.cv.folds);
      take(c, "n_lambda", rc.cv.n_lambda);
      take(c, "min_ratio", rc.cv.min_ratio);
      take(c, "seed", rc.cv.seed);
      if (c.contains("rule")) rc.cv.rule = glm::parse_rule(c.at("rule").get<std::string>());
      if (c.contains("loss")) rc.cv.loss = glm::parse_loss(c.at("loss").get<std::string>());
    }
    if (j.contains("study")) {
      const auto& s = j.at("study");
      detail::check_keys(s, "study", {"scenarios", "replicates", "n", "master_seed", "arms"});
      if (s.contains("scenarios")) {
        rc.study.scenarios.clear();
        for (const auto& e : s.at("scenarios"))
          rc.study.scenarios.push_back(e.is_string() ? find_scenario(e.get<std::string>())
                                                     : scenario_from_json(e));
      }
      take(s, "replicates", rc.study.replicates);
      if (s.contains("n")) rc.study.n = s.at("n").get<std::size_t>();
      take(s, "master_seed", rc.study.master_seed);
      if (s.contains("arms")) rc.study.arms = parse_arms(s.at("arms").get<std::string>());
    }
    if (j.contains("pipeline")) {
      const auto& p = j.at("pipeline");
      detail::check_keys(p, "pipeline", {"weighting", "curve_folds", "curve_seed"});
      if (p.contains("weighting"))
        rc.pipeline.weighting = parse_weighting(p.at("weighting").get<std::string>());
      take(p, "curve_folds", rc.pipeline.curve_folds);
      take(p, "curve_seed", rc.pipeline.curve_seed);
    }
    if (j.contains("theory")) {
      const auto& t = j.at("theory");
      detail::check_keys(t, "theory", {"alpha", "pi", "beta0", "beta1_min", "beta1_max", "steps",
                                       "pz", "rr_az", "rr_xz", "region_steps"});
      take(t, "alpha", rc.theory.alpha);
      take(t, "pi", rc.theory.pi);
      take(t, "beta0", rc.theory.beta0);
      take(t, "beta1_min", rc.theory.beta1_min);
      take(t, "beta1_max", rc.theory.beta1_max);
      take(t, "steps", rc.theory.steps);
      take(t, "pz", rc.theory.design.pz);
      take(t, "rr_az", rc.theory.design.rr_az);
      take(t, "rr_xz", rc.theory.design.rr_xz);
      take(t, "region_steps", rc.theory.region_steps);
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  rc.study.workers = rc.workers;
  rc.study.cv = rc.cv;
  rc.pipeline.workers = rc.workers;
  rc.pipeline.cv = rc.cv;
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace nuidx

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nuidx/cohort.hpp"
#include "nuidx/csv.hpp"
#include "nuidx/curve.hpp"
#include "nuidx/error.hpp"
#include "nuidx/index.hpp"

namespace nuidx {

inline constexpr const char* kVersion = "1.0.0";

/// Flags describing modelling choices, echoed into every manifest.
inline nlohmann::json decision_flags(const glm::CvOptions& cv) {
  return {
      {"feature_standardization", false},
      {"penalty", "l1, intercept unpenalized"},
      {"cv_loss", glm::to_string(cv.loss)},
      {"lambda_rule", glm::to_string(cv.rule)},
      {"cv_folds", "stratified by infection, keyed on (seed, id)"},
      {"index_rounding", "nearest tenth, halves away from zero, times 10"},
      {"negative_weights", "kept"},
      {"balancing_weights", "stratum counts: 1 infected, n1(z)/n0(z) uninfected"},
      {"curve_grid", "infected rate 0.01..0.99 step 0.01, stepwise"},
      {"numeric_output", "6 significant digits"},
  };
}

inline nlohmann::json to_json(const glm::CvOptions& cv) {
  return {{"folds", cv.folds},       {"rule", glm::to_string(cv.rule)},
          {"loss", glm::to_string(cv.loss)}, {"n_lambda", cv.n_lambda},
          {"min_ratio", cv.min_ratio}, {"seed", cv.seed}};
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw config_error("cannot write " + p.string());
  return os;
}

/// feature, raw_coefficient, selected_flag
inline void write_coefficients(const std::vector<std::string>& names,
                               const std::vector<double>& coef, std::ostream& os) {
  csv::write_row(os, {"feature", "raw_coefficient", "selected_flag"});
  for (std::size_t k = 0; k < coef.size(); ++k)
    csv::write_row(os, {names[k], csv::num(coef[k]), coef[k] != 0.0 ? "1" : "0"});
}

/// lambda, mean_error, se, nonzero_count
inline void write_cv_profile(const glm::LassoFit& fit, std::ostream& os) {
  csv::write_row(os, {"lambda", "mean_error", "se", "nonzero_count"});
  for (std::size_t l = 0; l < fit.lambdas.size(); ++l)
    csv::write_row(os, {csv::num(fit.lambdas[l]), csv::num(fit.cv_mean[l]), csv::num(fit.cv_se[l]),
                        std::to_string(fit.nonzero[l])});
}

/// feature, raw_coefficient, index_weight, negative_flag
inline void write_index_model(const std::vector<std::string>& names, const IndexModel& m,
                              std::ostream& os) {
  csv::write_row(os, {"feature", "raw_coefficient", "index_weight", "negative_flag"});
  for (std::size_t k = 0; k < m.weights.size(); ++k)
    csv::write_row(os, {names[k], csv::num(m.raw_coefficients[k]), std::to_string(m.weights[k]),
                        m.weights[k] < 0 ? "1" : "0"});
}

inline std::vector<std::string> negative_weight_names(const std::vector<std::string>& names,
                                                      const IndexModel& m) {
  std::vector<std::string> out;
  for (auto k : m.negative_features()) out.push_back(names[k]);
  return out;
}

/**
 * Read a coefficients CSV and align it with the cohort's feature names.
 * Every cohort feature must appear exactly once.
 */
inline IndexModel read_coefficients(const std::string& path,
                                    const std::vector<std::string>& features) {
  const auto t = csv::read(path);
  const auto fcol = t.column("feature");
  const auto ccol = t.column("raw_coefficient");
  std::map<std::string, double> by_name;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& name = t.rows[r][fcol];
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(t.rows[r][ccol], &used);
      if (used != t.rows[r][ccol].size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw data_error(path + ": row " + std::to_string(r + 1) +
                       ", column raw_coefficient: not a number '" + t.rows[r][ccol] + "'");
    }
    if (!by_name.emplace(name, v).second)
      throw data_error(path + ": feature '" + name + "' listed twice");
  }
  std::vector<double> coef;
  for (const auto& f : features) {
    auto it = by_name.find(f);
    if (it == by_name.end()) throw data_error(path + ": no coefficient for feature '" + f + "'");
    coef.push_back(it->second);
  }
  return build_index_model(coef);
}

/// id, infected, index, symptom_count
inline void write_scores(const Cohort& c, const std::vector<int>& index,
                         const std::vector<int>& count, std::ostream& os) {
  csv::write_row(os, {"id", "infected", "index", "symptom_count"});
  for (std::size_t i = 0; i < c.n(); ++i)
    csv::write_row(os, {std::to_string(c.ids[i]), c.a[i] ? "1" : "0", std::to_string(index[i]),
                        std::to_string(count[i])});
}

/// threshold, rate_infected, rate_uninfected, fold, scorer. Sentinel
/// thresholds are written as -Inf and Inf.
inline void write_curve(const CvCurveResult& r, std::ostream& os) {
  csv::write_row(os, {"threshold", "rate_infected", "rate_uninfected", "fold", "scorer"});
  for (int s = 0; s < 2; ++s) {
    const auto& curves = s == 0 ? r.index_curves : r.count_curves;
    for (std::size_t f = 0; f < curves.size(); ++f) {
      if (!curves[f]) continue;
      for (const auto& p : curves[f]->points)
        csv::write_row(os, {csv::num(p.threshold), csv::num(p.rate_infected),
                            csv::num(p.rate_uninfected), std::to_string(f + 1),
                            s == 0 ? "index" : "symptom_count"});
    }
  }
}

/// rate_infected, uninfected_index, uninfected_symptom_count
inline void write_curve_average(const CvCurveResult& r, std::ostream& os) {
  csv::write_row(os, {"rate_infected", "uninfected_index", "uninfected_symptom_count"});
  for (std::size_t g = 0; g < r.grid.size(); ++g)
    csv::write_row(os, {csv::num(r.grid[g]), csv::num(r.index_uninfected[g]),
                        csv::num(r.count_uninfected[g])});
}

struct PipelineArtifacts {
  IndexFit fit;
  std::vector<int> index_scores;
  std::vector<int> counts;
  CvCurveResult curve;
  std::vector<std::filesystem::path> files;
};

/**
 * Full analysis of one cohort CSV: weights, cross-validated lasso, index,
 * scores and the cross-validated threshold curves. Writes
 * coefficients.csv, cv_profile.csv, index_model.csv, scores.csv,
 * curve.csv, curve_average.csv and manifest.json into `out_dir`.
 */
inline PipelineArtifacts run_pipeline(const std::string& cohort_path,
                                      const PipelineConfig& cfg,
                                      const std::filesystem::path& out_dir) {
  const Cohort c = read_cohort_csv(cohort_path);
  PipelineArtifacts art;
  art.fit = fit_index(c, cfg);
  art.index_scores = score(art.fit.model, c.x);
  art.counts = symptom_count(c.x);
  art.curve = cv_threshold_curve(c, cfg);

  const auto emit = [&](const char* name, auto&& writer) {
    const auto p = out_dir / name;
    auto os = open_output(p);
    writer(os);
    art.files.push_back(p);
  };
  emit("coefficients.csv",
       [&](std::ostream& os) { write_coefficients(c.feature_names, art.fit.fit.final_coefficients(), os); });
  emit("cv_profile.csv", [&](std::ostream& os) { write_cv_profile(art.fit.fit, os); });
  emit("index_model.csv",
       [&](std::ostream& os) { write_index_model(c.feature_names, art.fit.model, os); });
  emit("scores.csv", [&](std::ostream& os) { write_scores(c, art.index_scores, art.counts, os); });
  emit("curve.csv", [&](std::ostream& os) { write_curve(art.curve, os); });
  emit("curve_average.csv", [&](std::ostream& os) { write_curve_average(art.curve, os); });

  nlohmann::json m;
  m["tool"] = "nuidx";
  m["version"] = kVersion;
  m["input"] = cohort_path;
  m["rows"] = c.n();
  m["features"] = c.k();
  m["strata"] = c.strata ? c.strata->n_levels : 0;
  m["config"] = {{"weighting", to_string(cfg.weighting)},
                 {"balancing_applied", art.fit.balancing},
                 {"cv", to_json(cfg.cv)},
                 {"curve_folds", cfg.curve_folds},
                 {"curve_seed", cfg.curve_seed}};
  m["selected_lambda"] = art.fit.fit.selected_lambda();
  m["lambda_min"] = art.fit.fit.lambda_min;
  m["lambda_1se"] = art.fit.fit.lambda_1se;
  m["negative_weights"] = negative_weight_names(c.feature_names, art.fit.model);
  m["decisions"] = decision_flags(cfg.cv);
  emit("manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
  return art;
}

}  // namespace nuidx

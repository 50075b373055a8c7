#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nuidx/cohort.hpp"
#include "nuidx/cv.hpp"
#include "nuidx/error.hpp"
#include "nuidx/index.hpp"
#include "nuidx/metrics.hpp"
#include "nuidx/parallel.hpp"
#include "nuidx/rng.hpp"
#include "nuidx/weights.hpp"

namespace nuidx {

/// off: unit weights. on: balancing weights, strata required. auto: on when
/// the cohort has strata.
enum class Weighting { off, on, automatic };

inline std::string to_string(Weighting w) {
  switch (w) {
    case Weighting::off: return "off";
    case Weighting::on: return "on";
    case Weighting::automatic: return "auto";
  }
  return "?";
}

inline Weighting parse_weighting(const std::string& s) {
  if (s == "off" || s == "none" || s == "unadjusted") return Weighting::off;
  if (s == "on" || s == "balancing") return Weighting::on;
  if (s == "auto") return Weighting::automatic;
  throw config_error("unknown weighting '" + s + "' (expected off, on or auto)");
}

struct PipelineConfig {
  Weighting weighting = Weighting::automatic;
  glm::CvOptions cv{};
  std::size_t curve_folds = 10;
  std::uint64_t curve_seed = 7;
  std::size_t workers = 1;  ///< threads for the curve folds; 0 = hardware
};

inline bool uses_balancing(const Cohort& c, Weighting w) {
  if (w == Weighting::on && !c.strata)
    throw config_error("balancing weights requested but the cohort has no z_ columns");
  return w == Weighting::on || (w == Weighting::automatic && c.strata.has_value());
}

struct IndexFit {
  glm::LassoFit fit;
  IndexModel model;
  std::vector<double> weights;
  bool balancing = false;
};

/// Weights (when enabled), cross-validated lasso, integer index.
inline IndexFit fit_index(const Cohort& c, const PipelineConfig& cfg) {
  IndexFit out;
  out.balancing = uses_balancing(c, cfg.weighting);
  out.weights = out.balancing ? compute_balancing_weights(c) : std::vector<double>(c.n(), 1.0);
  out.fit = glm::cv_fit(c.x, c.a, out.weights, c.ids, cfg.cv);
  out.model = build_index_model(out.fit, out.balancing);
  return out;
}

struct CvCurveResult {
  std::vector<int> fold;                 ///< outer fold of each row
  std::vector<int> index_score;          ///< held-out index score of each row
  std::vector<int> count_score;          ///< symptom count of each row
  std::vector<IndexModel> fold_models;   ///< one per fold
  /// Per-fold curves; absent when a held-out fold lacks one infection class.
  std::vector<std::optional<metrics::ThresholdCurve>> index_curves;
  std::vector<std::optional<metrics::ThresholdCurve>> count_curves;
  std::vector<double> grid;              ///< infected-rate grid
  std::vector<double> index_uninfected;  ///< fold-averaged uninfected rate on the grid
  std::vector<double> count_uninfected;

  /// Averaged uninfected rate at the grid point nearest to `rate`.
  double index_at(double rate) const { return at(index_uninfected, rate); }
  double count_at(double rate) const { return at(count_uninfected, rate); }

 private:
  double at(const std::vector<double>& v, double rate) const {
    if (grid.empty()) throw undefined_error("no fold produced a curve");
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
      if (std::abs(grid[g] - rate) < std::abs(grid[best] - rate)) best = g;
    return v[best];
  }
};

/**
 * Cross-validated threshold curves. Rows are split into folds stratified by
 * infection; for each fold the whole index pipeline (including balancing
 * weights) is refitted on the other folds and the held-out rows are scored.
 * Each fold with both infection classes yields a curve for the index and
 * one for the symptom count; curves are averaged pointwise over the
 * infected-rate grid with stepwise interpolation.
 */
inline CvCurveResult cv_threshold_curve(const Cohort& c, const PipelineConfig& cfg,
                                        std::vector<double> grid = metrics::default_rate_grid()) {
  c.check();
  const std::size_t F = cfg.curve_folds;
  CvCurveResult r;
  r.fold = glm::stratified_folds(c.ids, c.a, F, cfg.curve_seed);
  r.index_score.assign(c.n(), 0);
  r.count_score = symptom_count(c.x);
  r.fold_models.resize(F);
  r.index_curves.resize(F);
  r.count_curves.resize(F);

  std::vector<std::vector<std::size_t>> train(F), test(F);
  for (std::size_t i = 0; i < c.n(); ++i)
    for (std::size_t f = 0; f < F; ++f) (r.fold[i] == static_cast<int>(f) ? test : train)[f].push_back(i);

  parallel_for(F, cfg.workers, [&](std::size_t f) {
    const Cohort tr = c.subset(train[f]);
    const Cohort te = c.subset(test[f]);
    const auto fitted = fit_index(tr, cfg);
    const auto s = score(fitted.model, te.x);
    for (std::size_t j = 0; j < test[f].size(); ++j) r.index_score[test[f][j]] = s[j];
    r.fold_models[f] = fitted.model;
    const bool both = std::count(te.a.begin(), te.a.end(), 1) > 0 &&
                      std::count(te.a.begin(), te.a.end(), 0) > 0;
    if (both) {
      r.index_curves[f] = metrics::threshold_curve(s, te.a);
      r.count_curves[f] = metrics::threshold_curve(symptom_count(te.x), te.a);
    }
  });

  std::vector<metrics::ThresholdCurve> ic, cc;
  for (std::size_t f = 0; f < F; ++f) {
    if (r.index_curves[f]) ic.push_back(*r.index_curves[f]);
    if (r.count_curves[f]) cc.push_back(*r.count_curves[f]);
  }
  if (!ic.empty()) {
    r.grid = std::move(grid);
    r.index_uninfected = metrics::average_uninfected_rate(ic, r.grid);
    r.count_uninfected = metrics::average_uninfected_rate(cc, r.grid);
  }
  return r;
}

}  // namespace nuidx

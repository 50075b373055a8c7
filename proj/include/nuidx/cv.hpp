#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nuidx/error.hpp"
#include "nuidx/lasso.hpp"
#include "nuidx/matrix.hpp"
#include "nuidx/rng.hpp"

namespace nuidx::glm {

enum class SelectionRule { min, one_se };

inline std::string to_string(SelectionRule r) { return r == SelectionRule::min ? "min" : "one_se"; }

inline SelectionRule parse_rule(const std::string& s) {
  if (s == "min") return SelectionRule::min;
  if (s == "one_se" || s == "1se") return SelectionRule::one_se;
  throw config_error("unknown selection rule '" + s + "' (expected min or one_se)");
}

/// Held-out loss used to score each lambda.
enum class CvLoss { deviance, misclassification };

inline std::string to_string(CvLoss l) {
  return l == CvLoss::deviance ? "deviance" : "misclassification";
}

inline CvLoss parse_loss(const std::string& s) {
  if (s == "deviance") return CvLoss::deviance;
  if (s == "misclassification" || s == "class") return CvLoss::misclassification;
  throw config_error("unknown CV loss '" + s + "' (expected deviance or misclassification)");
}

struct CvOptions {
  std::size_t folds = 10;
  CvLoss loss = CvLoss::deviance;
  SelectionRule rule = SelectionRule::one_se;
  std::size_t n_lambda = 100;
  double min_ratio = 1e-4;
  std::uint64_t seed = 1;
  SolverOptions solver{};
};

/**
 * Regularisation path with cross-validated held-out loss.
 *
 * Invariants: coefficients at lambdas[0] are all zero; lambda_1se >= lambda_min.
 */
struct LassoFit {
  std::vector<double> lambdas;
  std::vector<Coefficients> path;
  std::vector<std::size_t> nonzero;
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  std::vector<std::vector<double>> fold_error;  ///< [fold][lambda]
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  SelectionRule rule = SelectionRule::one_se;
  CvLoss loss = CvLoss::deviance;
  std::vector<std::size_t> constant_features;

  std::size_t selected_index() const { return rule == SelectionRule::min ? index_min : index_1se; }
  double selected_lambda() const { return lambdas[selected_index()]; }
  const Coefficients& final_fit() const { return path[selected_index()]; }
  const std::vector<double>& final_coefficients() const { return final_fit().beta; }
  double final_intercept() const { return final_fit().intercept; }
};

/**
 * Stratified fold assignment. Within each label class rows are ordered by
 * stream_seed(seed, id) and dealt round-robin, the second class continuing
 * where the first stopped, so a row's fold depends only on (seed, id, class
 * sizes) and not on row order. Throws when there are fewer rows than folds.
 */
inline std::vector<int> stratified_folds(std::span<const std::int64_t> ids,
                                         std::span<const std::uint8_t> a, std::size_t folds,
                                         std::uint64_t seed) {
  if (folds < 2) throw config_error("need at least 2 folds");
  if (ids.size() != a.size()) throw data_error("ids and labels differ in length");
  if (a.size() < folds)
    throw data_error("fold degeneracy: " + std::to_string(a.size()) + " rows for " +
                     std::to_string(folds) + " folds");
  std::vector<int> fold(a.size(), -1);
  std::size_t offset = 0;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < a.size(); ++i)
      if ((a[i] != 0) == (cls == 1)) rows.push_back(i);
    std::vector<std::pair<std::uint64_t, std::int64_t>> key(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto id = ids[rows[j]];
      key[j] = {stream_seed(seed, static_cast<std::uint64_t>(id)), id};
    }
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return key[l] < key[r]; });
    for (std::size_t j = 0; j < order.size(); ++j)
      fold[rows[order[j]]] = static_cast<int>((offset + j) % folds);
    offset += rows.size();
  }
  return fold;
}

/// Weighted share of rows whose prediction (probability > 1/2) disagrees with the label.
inline double misclassification(const LogisticProblem& prob, const Coefficients& c) {
  const auto eta = prob.linear_predictor(c);
  const auto w = prob.weights();
  const auto a = prob.labels();
  double err = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const bool pred = eta[i] > 0.0;
    if (pred != static_cast<bool>(a[i])) err += w[i];
  }
  return err;
}

/// Weighted binomial deviance -2 sum_i w_i log p(a_i), with fitted
/// probabilities clipped to [1e-5, 1 - 1e-5].
inline double binomial_deviance(const LogisticProblem& prob, const Coefficients& c) {
  const auto eta = prob.linear_predictor(c);
  const auto w = prob.weights();
  const auto a = prob.labels();
  double dev = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double p = std::clamp(sigmoid(eta[i]), 1e-5, 1.0 - 1e-5);
    dev -= 2.0 * w[i] * std::log(a[i] ? p : 1.0 - p);
  }
  return dev;
}

inline double held_out_loss(CvLoss loss, const LogisticProblem& prob, const Coefficients& c) {
  return loss == CvLoss::deviance ? binomial_deviance(prob, c) : misclassification(prob, c);
}

/**
 * k-fold cross-validated lasso logistic regression.
 *
 * The lambda sequence comes from the full data. For each fold the path is
 * fitted on the remaining folds and the held-out loss recorded (binomial
 * deviance by default, or misclassification at 1/2; both use the row
 * weights, normalised within the fold). Per lambda the fold errors are
 * averaged with fold weight totals as weights; the standard error is
 * sqrt(weighted variance / (folds - 1)).
 * lambda_min is the first minimiser along the descending path, lambda_1se the
 * largest lambda whose error is within one SE of that minimum. Final
 * coefficients are the full-data path fit at the selected lambda.
 */
inline LassoFit cv_fit(const BinaryMatrix& x, std::span<const std::uint8_t> a,
                       std::span<const double> w, std::span<const std::int64_t> ids,
                       const CvOptions& opts = {}) {
  const LogisticProblem full(x, a, w);
  const auto path = lambda_path(full, opts.n_lambda, opts.min_ratio);
  LassoFit fit;
  fit.rule = opts.rule;
  fit.loss = opts.loss;
  fit.lambdas = path.lambdas;
  fit.constant_features = path.constant_features;
  fit.path = fit_path(full, fit.lambdas, opts.solver);
  for (const auto& c : fit.path) fit.nonzero.push_back(c.nonzero());

  for (int cls = 0; cls < 2; ++cls) {
    const auto m = static_cast<std::size_t>(
        std::count_if(a.begin(), a.end(), [&](auto v) { return (v != 0) == (cls == 1); }));
    if (m < opts.folds)
      throw data_error("fold degeneracy: class " + std::to_string(cls) + " has " +
                       std::to_string(m) + " rows for " + std::to_string(opts.folds) + " folds");
  }
  const auto fold = stratified_folds(ids, a, opts.folds, opts.seed);
  const std::size_t L = fit.lambdas.size();
  fit.fold_error.assign(opts.folds, std::vector<double>(L, 0.0));
  std::vector<double> fold_mass(opts.folds, 0.0);
  for (std::size_t f = 0; f < opts.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < a.size(); ++i) (fold[i] == static_cast<int>(f) ? test : train).push_back(i);
    const auto xtr = x.select_rows(train);
    const auto atr = select<std::uint8_t>(a, train);
    const auto wtr = select<double>(w, train);
    const auto xte = x.select_rows(test);
    const auto ate = select<std::uint8_t>(a, test);
    const auto wte = select<double>(w, test);
    for (double v : wte) fold_mass[f] += v;
    const LogisticProblem tr(xtr, atr, wtr);
    const LogisticProblem te(xte, ate, wte);
    const auto fpath = fit_path(tr, fit.lambdas, opts.solver);
    for (std::size_t l = 0; l < L; ++l) fit.fold_error[f][l] = held_out_loss(opts.loss, te, fpath[l]);
  }

  const double total_mass = std::accumulate(fold_mass.begin(), fold_mass.end(), 0.0);
  fit.cv_mean.assign(L, 0.0);
  fit.cv_se.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    double m = 0.0;
    for (std::size_t f = 0; f < opts.folds; ++f) m += fold_mass[f] * fit.fold_error[f][l];
    m /= total_mass;
    double v = 0.0;
    for (std::size_t f = 0; f < opts.folds; ++f) {
      const double d = fit.fold_error[f][l] - m;
      v += fold_mass[f] * d * d;
    }
    v /= total_mass;
    fit.cv_mean[l] = m;
    fit.cv_se[l] = std::sqrt(v / static_cast<double>(opts.folds - 1));
  }
  fit.index_min = static_cast<std::size_t>(
      std::min_element(fit.cv_mean.begin(), fit.cv_mean.end()) - fit.cv_mean.begin());
  const double bound = fit.cv_mean[fit.index_min] + fit.cv_se[fit.index_min];
  fit.index_1se = fit.index_min;
  for (std::size_t l = 0; l < L; ++l) {
    if (fit.cv_mean[l] <= bound) {
      fit.index_1se = l;
      break;
    }
  }
  fit.lambda_min = fit.lambdas[fit.index_min];
  fit.lambda_1se = fit.lambdas[fit.index_1se];
  return fit;
}

}  // namespace nuidx::glm

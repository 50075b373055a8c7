#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nuidx/error.hpp"
#include "nuidx/matrix.hpp"

namespace nuidx::glm {

struct Coefficients {
  double intercept = 0.0;
  std::vector<double> beta;

  std::size_t nonzero() const {
    return static_cast<std::size_t>(
        std::count_if(beta.begin(), beta.end(), [](double b) { return b != 0.0; }));
  }
};

struct SolverOptions {
  double tol = 1e-7;                ///< max absolute parameter change between Newton steps
  double inner_tol = 1e-9;          ///< coordinate change threshold inside a quadratic subproblem
  std::size_t max_sweeps = 100000;  ///< coordinate sweeps, summed over all Newton steps
  std::size_t max_newton = 500;
  double intercept_cap = 30.0;      ///< |intercept| beyond this is reported as separation
};

inline double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

inline double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

/**
 * Weighted logistic loss on binary features, prepared for repeated fits:
 *
 *   L(b0, b) = sum_i w_i [log(1 + exp(eta_i)) - a_i eta_i],  eta_i = b0 + x_i . b
 *
 * with weights normalised to sum to one. The penalised objective adds
 * lambda * ||b||_1; the intercept is not penalised. Features are used on
 * their raw 0/1 scale.
 */
class LogisticProblem {
 public:
  LogisticProblem(const BinaryMatrix& x, std::span<const std::uint8_t> a,
                  std::span<const double> w)
      : n_(x.rows()), k_(x.cols()), cols_(column_support(x)), a_(a.begin(), a.end()) {
    row_start_.reserve(n_ + 1);
    row_start_.push_back(0);
    for (std::size_t i = 0; i < n_; ++i) {
      auto r = x.row(i);
      for (std::size_t k = 0; k < k_; ++k)
        if (r[k]) row_feat_.push_back(static_cast<std::uint32_t>(k));
      row_start_.push_back(static_cast<std::uint32_t>(row_feat_.size()));
    }
    if (a.size() != n_ || w.size() != n_) throw data_error("labels/weights do not match rows");
    if (n_ == 0) throw data_error("no observations");
    double total = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw data_error("weights must be finite and nonnegative");
      total += v;
    }
    if (!(total > 0.0)) throw data_error("weights sum to zero");
    wn_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) wn_[i] = w[i] / total;
    double pos = 0.0;
    for (std::size_t i = 0; i < n_; ++i) pos += a_[i] ? wn_[i] : 0.0;
    mean_ = pos;
    if (!(mean_ > 0.0 && mean_ < 1.0))
      throw data_error("labels are constant (after weighting); logistic fit undefined");
    for (std::size_t k = 0; k < k_; ++k) {
      double mass = 0.0;
      for (auto i : cols_[k]) mass += wn_[i];
      if (cols_[k].empty() || mass <= 0.0 || mass >= 1.0 - 1e-15) constant_.push_back(k);
    }
  }

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  const std::vector<std::uint32_t>& column(std::size_t k) const { return cols_[k]; }
  /// Features present in row i.
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {row_feat_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
  }
  std::span<const double> weights() const { return wn_; }
  std::span<const std::uint8_t> labels() const { return a_; }

  /// Weighted mean of the labels.
  double mean_label() const { return mean_; }
  double null_intercept() const { return std::log(mean_ / (1.0 - mean_)); }

  /// Features that are constant over observations with positive weight.
  const std::vector<std::size_t>& constant_features() const { return constant_; }

  /// Smallest lambda at which every coefficient is zero:
  ///   max_k |sum_i w_i x_ik (a_i - mean)|   over non-constant features.
  double lambda_max() const {
    double best = 0.0;
    std::vector<bool> skip(k_, false);
    for (auto k : constant_) skip[k] = true;
    for (std::size_t k = 0; k < k_; ++k) {
      if (skip[k]) continue;
      double g = 0.0;
      for (auto i : cols_[k]) g += wn_[i] * (a_[i] - mean_);
      best = std::max(best, std::abs(g));
    }
    return best;
  }

  std::vector<double> linear_predictor(const Coefficients& c) const {
    std::vector<double> eta(n_);
    linear_predictor(c, eta);
    return eta;
  }

  void linear_predictor(const Coefficients& c, std::span<double> eta) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double e = c.intercept;
      for (auto k : row(i)) e += c.beta[k];
      eta[i] = e;
    }
  }

  double loss(std::span<const double> eta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += wn_[i] * (softplus(eta[i]) - (a_[i] ? eta[i] : 0.0));
    return s;
  }

  double objective(const Coefficients& c, double lambda) const {
    const auto eta = linear_predictor(c);
    double l1 = 0.0;
    for (double b : c.beta) l1 += std::abs(b);
    return loss(eta) + lambda * l1;
  }

  /// Negative loss gradient: (sum_i w_i (a_i - p_i), sum_i w_i x_ik (a_i - p_i)).
  std::pair<double, std::vector<double>> score(const Coefficients& c) const {
    const auto eta = linear_predictor(c);
    std::vector<double> resid(n_);
    double g0 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      resid[i] = wn_[i] * (a_[i] - sigmoid(eta[i]));
      g0 += resid[i];
    }
    std::vector<double> g(k_, 0.0);
    for (std::size_t k = 0; k < k_; ++k)
      for (auto i : cols_[k]) g[k] += resid[i];
    return {g0, std::move(g)};
  }

 private:
  std::size_t n_, k_;
  std::vector<std::vector<std::uint32_t>> cols_;
  std::vector<std::uint32_t> row_feat_;
  std::vector<std::uint32_t> row_start_;
  std::vector<std::uint8_t> a_;
  std::vector<double> wn_;
  double mean_ = 0.0;
  std::vector<std::size_t> constant_;
};

/// Largest violation of the lasso optimality conditions at `c`:
///   |g_k| <= lambda where b_k = 0,  g_k = lambda sign(b_k) where b_k != 0,
///   and a zero intercept score.
inline double kkt_violation(const LogisticProblem& prob, const Coefficients& c, double lambda) {
  const auto [g0, g] = prob.score(c);
  double worst = std::abs(g0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double v = c.beta[k] == 0.0 ? std::max(0.0, std::abs(g[k]) - lambda)
                                      : std::abs(g[k] - (c.beta[k] > 0 ? lambda : -lambda));
    worst = std::max(worst, v);
  }
  return worst;
}

struct FitResult {
  Coefficients coef;
  std::size_t newton_steps = 0;
  std::size_t sweeps = 0;
  std::vector<double> objective_trace;  ///< penalised objective after each accepted step
};

/**
 * Minimise L(b0, b) + lambda ||b||_1 by proximal Newton. Each step forms the
 * weighted quadratic approximation of the loss (gradient and the full
 * (K+1)x(K+1) weighted Gram matrix, built from the sparse rows) and solves it
 * by cyclic coordinate descent with soft-thresholding, cycling on the active
 * set and confirming with full sweeps. Steps that would raise the objective
 * are halved, so the objective is non-increasing. Converged when no parameter
 * moves by more than opts.tol in a step.
 *
 * For lambda >= lambda_max the closed-form null model is returned.
 * Throws convergence_error when the sweep or step budget runs out and
 * separation_error when |intercept| exceeds opts.intercept_cap.
 */
inline FitResult fit_at_lambda(const LogisticProblem& prob, double lambda,
                               const Coefficients* warm = nullptr,
                               const SolverOptions& opts = {}) {
  if (!(lambda >= 0.0)) throw data_error("lambda must be nonnegative");
  const std::size_t n = prob.n(), K = prob.k(), P = K + 1;
  FitResult res;
  Coefficients cur;
  cur.beta.assign(K, 0.0);
  cur.intercept = prob.null_intercept();
  if (lambda >= prob.lambda_max()) {
    res.coef = cur;
    res.objective_trace.push_back(prob.objective(cur, lambda));
    return res;
  }
  if (warm) {
    if (warm->beta.size() != K) throw data_error("warm start has wrong dimension");
    cur = *warm;
  }
  const auto wn = prob.weights();
  const auto a = prob.labels();

  std::vector<double> eta(n), eta_new(n), prob1(n), prob1_new(n);
  // Penalised objective at c; also fills eta and the fitted probabilities.
  const auto evaluate = [&](const Coefficients& c, std::span<double> e, std::span<double> pr) {
    prob.linear_predictor(c, e);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = std::exp(-std::abs(e[i]));
      loss += wn[i] * (std::max(e[i], 0.0) + std::log1p(t) - (a[i] ? e[i] : 0.0));
      pr[i] = e[i] >= 0.0 ? 1.0 / (1.0 + t) : t / (1.0 + t);
    }
    double l1 = 0.0;
    for (double b : c.beta) l1 += std::abs(b);
    return loss + lambda * l1;
  };
  double obj = evaluate(cur, eta, prob1);
  res.objective_trace.push_back(obj);

  // Parameter vector theta = (b0, b_1..b_K); index 0 is the intercept.
  std::vector<double> gram(P * P), q(P), theta(P);
  std::vector<char> active(P, 0);

  for (std::size_t step = 0; step < opts.max_newton; ++step) {
    std::fill(gram.begin(), gram.end(), 0.0);
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = prob1[i];
      const double v = wn[i] * p * (1.0 - p);
      const double r = wn[i] * ((a[i] ? 1.0 : 0.0) - p);
      const auto feats = prob.row(i);
      q[0] += r;
      gram[0] += v;
      for (std::size_t u = 0; u < feats.size(); ++u) {
        const std::size_t j = feats[u] + 1;
        q[j] += r;
        double* gj = &gram[j * P];
        gj[0] += v;
        for (std::size_t w = u; w < feats.size(); ++w) gj[feats[w] + 1] += v;
      }
    }
    // Only one triangle of each off-diagonal pair was accumulated.
    for (std::size_t j = 0; j < P; ++j)
      for (std::size_t k = j + 1; k < P; ++k)
        gram[j * P + k] = gram[k * P + j] = gram[j * P + k] + gram[k * P + j];

    theta[0] = cur.intercept;
    for (std::size_t k = 0; k < K; ++k) theta[k + 1] = cur.beta[k];
    for (std::size_t j = 1; j < P; ++j) active[j] = theta[j] != 0.0;
    active[0] = 1;

    // q holds the quadratic model's negative gradient at the current theta.
    const auto update = [&](std::size_t j, double d) {
      theta[j] += d;
      const double* gj = &gram[j * P];
      for (std::size_t k = 0; k < P; ++k) q[k] -= gj[k] * d;
    };
    const auto sweep = [&](bool all) {
      double maxd = 0.0;
      for (std::size_t j = 0; j < P; ++j) {
        if (!all && !active[j]) continue;
        const double h = gram[j * P + j];
        if (!(h > 0.0)) continue;
        const double old = theta[j];
        const double nv = j == 0 ? old + q[0] / h : soft_threshold(h * old + q[j], lambda) / h;
        const double d = nv - old;
        if (d != 0.0) {
          update(j, d);
          maxd = std::max(maxd, std::abs(d));
        }
        if (nv != 0.0) active[j] = 1;
      }
      ++res.sweeps;
      if (res.sweeps > opts.max_sweeps)
        throw convergence_error("coordinate descent exceeded " + std::to_string(opts.max_sweeps) +
                                " sweeps at lambda=" + std::to_string(lambda));
      return maxd;
    };
    while (true) {
      if (sweep(true) < opts.inner_tol) break;
      while (sweep(false) >= opts.inner_tol) {
      }
    }

    Coefficients next;
    next.intercept = theta[0];
    next.beta.assign(theta.begin() + 1, theta.end());

    // Halve the step until the true objective does not increase.
    double t = 1.0;
    Coefficients trial = next;
    double obj_new = 0.0;
    for (int halving = 0;; ++halving) {
      obj_new = evaluate(trial, eta_new, prob1_new);
      if (obj_new <= obj + 1e-15 * std::max(1.0, std::abs(obj)) || halving >= 60) break;
      t *= 0.5;
      trial.intercept = cur.intercept + t * (next.intercept - cur.intercept);
      for (std::size_t k = 0; k < K; ++k)
        trial.beta[k] = cur.beta[k] + t * (next.beta[k] - cur.beta[k]);
    }
    if (obj_new > obj) {
      // No decrease even for tiny steps: already optimal up to rounding.
      trial = cur;
      obj_new = obj;
      std::copy(eta.begin(), eta.end(), eta_new.begin());
      std::copy(prob1.begin(), prob1.end(), prob1_new.begin());
    }

    double change = std::abs(trial.intercept - cur.intercept);
    for (std::size_t k = 0; k < K; ++k)
      change = std::max(change, std::abs(trial.beta[k] - cur.beta[k]));
    cur = std::move(trial);
    eta.swap(eta_new);
    prob1.swap(prob1_new);
    obj = obj_new;
    res.objective_trace.push_back(obj);
    ++res.newton_steps;

    if (std::abs(cur.intercept) > opts.intercept_cap)
      throw separation_error("intercept magnitude " + std::to_string(cur.intercept) +
                             " exceeds cap; the data appear separable at lambda=" +
                             std::to_string(lambda));
    if (change < opts.tol) {
      res.coef = std::move(cur);
      return res;
    }
  }
  throw convergence_error("Newton iterations exceeded " + std::to_string(opts.max_newton) +
                          " at lambda=" + std::to_string(lambda));
}

struct LambdaPath {
  std::vector<double> lambdas;                 ///< descending
  std::vector<std::size_t> constant_features;  ///< excluded from lambda_max (warning)
};

/// Geometric sequence of n_lambda values from lambda_max down to lambda_max * min_ratio.
inline LambdaPath lambda_path(const LogisticProblem& prob, std::size_t n_lambda,
                              double min_ratio) {
  if (n_lambda == 0) throw config_error("n_lambda must be positive");
  if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw config_error("min_ratio must lie in (0,1)");
  LambdaPath path;
  path.constant_features = prob.constant_features();
  const double lmax = prob.lambda_max();
  if (!(lmax > 0.0)) throw data_error("every feature is constant; no lambda path exists");
  path.lambdas.resize(n_lambda);
  if (n_lambda == 1) {
    path.lambdas[0] = lmax;
    return path;
  }
  const double step = std::log(min_ratio) / static_cast<double>(n_lambda - 1);
  for (std::size_t j = 0; j < n_lambda; ++j)
    path.lambdas[j] = lmax * std::exp(step * static_cast<double>(j));
  path.lambdas[0] = lmax;
  return path;
}

/// Fit every lambda in order, warm-starting each from the previous solution.
inline std::vector<Coefficients> fit_path(const LogisticProblem& prob,
                                          std::span<const double> lambdas,
                                          const SolverOptions& opts = {}) {
  std::vector<Coefficients> out;
  out.reserve(lambdas.size());
  const Coefficients* warm = nullptr;
  for (double lam : lambdas) {
    out.push_back(fit_at_lambda(prob, lam, warm, opts).coef);
    warm = &out.back();
  }
  return out;
}

}  // namespace nuidx::glm

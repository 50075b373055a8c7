#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nuidx/datagen.hpp"
#include "nuidx/lasso.hpp"
#include "oracles.hpp"

using namespace nuidx;
using namespace nuidx::glm;

namespace {

struct Data {
  BinaryMatrix x;
  std::vector<std::uint8_t> a;
  std::vector<double> w;
};

Data from_cohort(std::size_t n, std::uint64_t seed, const char* name = "medium_uncorrelated") {
  auto spec = find_scenario(name);
  spec.n = n;
  spec.seed = seed;
  auto c = sample_cohort(spec);
  return {c.x, c.a, std::vector<double>(n, 1.0)};
}

Data two_by_two() {
  Data d{BinaryMatrix(100, 1), {}, std::vector<double>(100, 1.0)};
  const int counts[2][2] = {{30, 20}, {20, 30}};  // [a=1 / a=0][x=1 / x=0]
  std::size_t i = 0;
  for (int a = 1; a >= 0; --a)
    for (int x = 1; x >= 0; --x)
      for (int r = 0; r < counts[1 - a][1 - x]; ++r, ++i) {
        d.x(i, 0) = static_cast<std::uint8_t>(x);
        d.a.push_back(static_cast<std::uint8_t>(a));
      }
  return d;
}

// Gradient of the normalised weighted loss, computed directly from rows.
std::vector<double> gradient(const Data& d, const Coefficients& c) {
  const std::size_t K = d.x.cols();
  std::vector<double> g(K + 1, 0.0);
  const double wsum = std::accumulate(d.w.begin(), d.w.end(), 0.0);
  for (std::size_t i = 0; i < d.x.rows(); ++i) {
    double eta = c.intercept;
    for (std::size_t k = 0; k < K; ++k) eta += c.beta[k] * d.x(i, k);
    const double r = d.w[i] / wsum * (1.0 / (1.0 + std::exp(-eta)) - d.a[i]);
    g[0] += r;
    for (std::size_t k = 0; k < K; ++k) g[k + 1] += r * d.x(i, k);
  }
  return g;
}

double kkt_oracle(const Data& d, const Coefficients& c, double lambda) {
  const auto g = gradient(d, c);
  double worst = std::abs(g[0]);
  for (std::size_t k = 0; k < c.beta.size(); ++k) {
    const double gk = g[k + 1];
    const double v = c.beta[k] == 0.0 ? std::max(0.0, std::abs(gk) - lambda)
                                      : std::abs(gk + (c.beta[k] > 0 ? lambda : -lambda));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

TEST(Lasso, SoftThreshold) {
  EXPECT_EQ(soft_threshold(0.5, 0.2), 0.3);
  EXPECT_EQ(soft_threshold(-0.5, 0.2), -0.3);
  EXPECT_EQ(soft_threshold(0.1, 0.2), 0.0);
}

TEST(Lasso, NullModelAboveLambdaMax) {
  auto d = from_cohort(2000, 3);
  std::mt19937_64 g(1);
  for (auto& v : d.w) v = std::uniform_real_distribution<double>(0.2, 3.0)(g);
  const LogisticProblem prob(d.x, d.a, d.w);
  double wa = 0.0, ws = 0.0;
  for (std::size_t i = 0; i < d.a.size(); ++i) {
    wa += d.w[i] * d.a[i];
    ws += d.w[i];
  }
  const double pbar = wa / ws;
  for (double scale : {1.0, 1.5, 10.0}) {
    const auto r = fit_at_lambda(prob, prob.lambda_max() * scale);
    EXPECT_EQ(r.coef.nonzero(), 0u);
    EXPECT_NEAR(r.coef.intercept, std::log(pbar / (1 - pbar)), 1e-10);
  }
  // just below lambda_max exactly one feature enters
  const auto r = fit_at_lambda(prob, prob.lambda_max() * 0.999);
  EXPECT_EQ(r.coef.nonzero(), 1u);
}

TEST(Lasso, LambdaMaxFromDefinition) {
  const auto d = from_cohort(1500, 4);
  const LogisticProblem prob(d.x, d.a, d.w);
  const double n = static_cast<double>(d.a.size());
  const double pbar = std::accumulate(d.a.begin(), d.a.end(), 0.0) / n;
  double best = 0.0;
  for (std::size_t k = 0; k < d.x.cols(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.a.size(); ++i) s += d.x(i, k) * (d.a[i] - pbar);
    best = std::max(best, std::abs(s) / n);
  }
  EXPECT_NEAR(prob.lambda_max(), best, 1e-14);
}

TEST(Lasso, TwoByTwoLogOddsRatio) {
  const auto d = two_by_two();
  const LogisticProblem prob(d.x, d.a, d.w);
  const auto r = fit_at_lambda(prob, 0.0);
  EXPECT_NEAR(r.coef.beta[0], std::log(2.25), 1e-6);
  EXPECT_NEAR(r.coef.intercept, std::log(20.0 / 30.0), 1e-6);
}

TEST(Lasso, GridOracleTwoFeatures) {
  std::mt19937_64 g(2024);
  const std::size_t n = 200;
  std::vector<std::vector<int>> xr(n, std::vector<int>(2));
  Data d{BinaryMatrix(n, 2), std::vector<std::uint8_t>(n), std::vector<double>(n, 1.0)};
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 2; ++k) {
      xr[i][k] = u(g) < 0.4;
      d.x(i, k) = static_cast<std::uint8_t>(xr[i][k]);
    }
    const double eta = -0.3 + 1.0 * xr[i][0] - 0.4 * xr[i][1];
    d.a[i] = u(g) < 1.0 / (1.0 + std::exp(-eta));
  }
  std::vector<int> ai(d.a.begin(), d.a.end());
  const double lambda = 0.05;
  const LogisticProblem prob(d.x, d.a, d.w);
  const auto r = fit_at_lambda(prob, lambda);
  const double solver = prob.objective(r.coef, lambda);
  const double direct = oracle::penalised_objective(xr, ai, d.w, r.coef.intercept, r.coef.beta, lambda);
  EXPECT_NEAR(solver, direct, 1e-12);
  const double grid = oracle::grid_minimum(
      [&](double b0, double b1, double b2) {
        return oracle::penalised_objective(xr, ai, d.w, b0, {b1, b2}, lambda);
      },
      {0.0, 0.0, 0.0}, 3.0, 4);
  EXPECT_NEAR(solver, grid, 1e-4);
  EXPECT_LE(solver, grid + 1e-12);
}

TEST(Lasso, KktAlongPath) {
  for (const char* name : {"medium_uncorrelated", "medium_non_group_sparse"}) {
    auto d = from_cohort(3000, 5, name);
    const LogisticProblem prob(d.x, d.a, d.w);
    const auto lam = lambda_path(prob, 100, 1e-4).lambdas;
    const auto path = fit_path(prob, lam);
    ASSERT_EQ(path.size(), 100u);
    EXPECT_EQ(path.front().nonzero(), 0u);
    double worst = 0.0;
    for (std::size_t l = 0; l < lam.size(); ++l) {
      worst = std::max(worst, kkt_oracle(d, path[l], lam[l]));
      EXPECT_NEAR(kkt_violation(prob, path[l], lam[l]), kkt_oracle(d, path[l], lam[l]), 1e-12);
    }
    EXPECT_LE(worst, 1e-6) << name;
  }
}

TEST(Lasso, PathGeometry) {
  const auto d = from_cohort(1000, 6);
  const LogisticProblem prob(d.x, d.a, d.w);
  const auto lam = lambda_path(prob, 100, 0.01).lambdas;
  EXPECT_EQ(lam.front(), prob.lambda_max());
  for (std::size_t j = 1; j < lam.size(); ++j)
    EXPECT_NEAR(lam[j] / lam[j - 1], std::pow(0.01, 1.0 / 99.0), 1e-12);
  EXPECT_NEAR(lam.back(), prob.lambda_max() * 0.01, 1e-15);
  EXPECT_THROW(lambda_path(prob, 0, 0.01), config_error);
  EXPECT_THROW(lambda_path(prob, 10, 1.0), config_error);
}

TEST(Lasso, ObjectiveNonIncreasing) {
  const auto d = from_cohort(3000, 7, "medium_group_sparse");
  const LogisticProblem prob(d.x, d.a, d.w);
  const auto lam = lambda_path(prob, 30, 1e-3).lambdas;
  for (double l : lam) {
    const auto r = fit_at_lambda(prob, l);
    for (std::size_t s = 1; s < r.objective_trace.size(); ++s)
      EXPECT_LE(r.objective_trace[s], r.objective_trace[s - 1] + 1e-10);
  }
}

TEST(Lasso, WarmStartMatchesColdStart) {
  const auto d = from_cohort(3000, 8);
  const LogisticProblem prob(d.x, d.a, d.w);
  const auto lam = lambda_path(prob, 40, 1e-3).lambdas;
  const auto path = fit_path(prob, lam);
  for (std::size_t l = 0; l < lam.size(); l += 3) {
    const auto cold = fit_at_lambda(prob, lam[l]).coef;
    EXPECT_NEAR(cold.intercept, path[l].intercept, 1e-6);
    for (std::size_t k = 0; k < cold.beta.size(); ++k) EXPECT_NEAR(cold.beta[k], path[l].beta[k], 1e-6);
  }
}

TEST(Lasso, WeightScaleInvariance) {
  auto d = from_cohort(2000, 9);
  std::mt19937_64 g(9);
  for (auto& v : d.w) v = std::uniform_real_distribution<double>(0.5, 2.0)(g);
  auto d2 = d;
  for (auto& v : d2.w) v *= 2.0;
  const LogisticProblem p1(d.x, d.a, d.w), p2(d2.x, d2.a, d2.w);
  const auto l1 = lambda_path(p1, 20, 1e-3).lambdas;
  const auto l2 = lambda_path(p2, 20, 1e-3).lambdas;
  for (std::size_t j = 0; j < l1.size(); ++j) EXPECT_NEAR(l1[j], l2[j], 1e-15);
  const auto f1 = fit_path(p1, l1), f2 = fit_path(p2, l1);
  for (std::size_t j = 0; j < l1.size(); ++j)
    for (std::size_t k = 0; k < f1[j].beta.size(); ++k) EXPECT_NEAR(f1[j].beta[k], f2[j].beta[k], 1e-9);
}

TEST(Lasso, SingleStratumWeightsReduceToUnweighted) {
  const auto d = from_cohort(2000, 10);
  auto dw = d;
  for (auto& v : dw.w) v = 0.37;
  const LogisticProblem p1(d.x, d.a, d.w), p2(dw.x, dw.a, dw.w);
  const auto lam = lambda_path(p1, 15, 1e-3).lambdas;
  const auto f1 = fit_path(p1, lam), f2 = fit_path(p2, lam);
  for (std::size_t j = 0; j < lam.size(); ++j)
    for (std::size_t k = 0; k < f1[j].beta.size(); ++k) EXPECT_NEAR(f1[j].beta[k], f2[j].beta[k], 1e-9);
}

TEST(Lasso, PermutationInvariance) {
  const auto d = from_cohort(2000, 11);
  std::vector<std::size_t> perm(d.a.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  Data p{d.x.select_rows(perm), select<std::uint8_t>(d.a, perm), select<double>(d.w, perm)};
  const LogisticProblem p1(d.x, d.a, d.w), p2(p.x, p.a, p.w);
  const double lam = p1.lambda_max() * 0.05;
  const auto c1 = fit_at_lambda(p1, lam).coef, c2 = fit_at_lambda(p2, lam).coef;
  for (std::size_t k = 0; k < c1.beta.size(); ++k) EXPECT_NEAR(c1.beta[k], c2.beta[k], 1e-8);
}

TEST(Lasso, SeparationReported) {
  Data d{BinaryMatrix(60, 2), std::vector<std::uint8_t>(60), std::vector<double>(60, 1.0)};
  for (std::size_t i = 0; i < 60; ++i) {
    d.a[i] = i < 30;
    d.x(i, 0) = i < 30;
    d.x(i, 1) = i % 2;
  }
  const LogisticProblem prob(d.x, d.a, d.w);
  EXPECT_THROW(fit_at_lambda(prob, 0.0), separation_error);
}

TEST(Lasso, ConvergenceBudget) {
  const auto d = from_cohort(2000, 12);
  const LogisticProblem prob(d.x, d.a, d.w);
  SolverOptions o;
  o.max_sweeps = 2;
  EXPECT_THROW(fit_at_lambda(prob, prob.lambda_max() * 0.01, nullptr, o), convergence_error);
  SolverOptions n;
  n.max_newton = 1;
  EXPECT_THROW(fit_at_lambda(prob, prob.lambda_max() * 0.01, nullptr, n), convergence_error);
}

TEST(Lasso, InputErrors) {
  const auto d = from_cohort(200, 13);
  std::vector<std::uint8_t> same(200, 1);
  EXPECT_THROW(LogisticProblem(d.x, same, d.w), data_error);
  auto neg = d.w;
  neg[3] = -1.0;
  EXPECT_THROW(LogisticProblem(d.x, d.a, neg), data_error);
  std::vector<double> shorter(199, 1.0);
  EXPECT_THROW(LogisticProblem(d.x, d.a, shorter), data_error);
  const LogisticProblem prob(d.x, d.a, d.w);
  EXPECT_THROW(fit_at_lambda(prob, -1.0), data_error);
}

TEST(Lasso, ConstantFeatureIgnored) {
  auto d = from_cohort(1000, 14);
  for (std::size_t i = 0; i < d.x.rows(); ++i) d.x(i, 5) = 1;
  const LogisticProblem prob(d.x, d.a, d.w);
  EXPECT_EQ(prob.constant_features(), (std::vector<std::size_t>{5}));
  const auto path = fit_path(prob, lambda_path(prob, 30, 1e-3).lambdas);
  for (const auto& c : path) EXPECT_EQ(c.beta[5], 0.0);
}

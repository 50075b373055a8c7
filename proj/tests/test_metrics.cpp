#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nuidx/metrics.hpp"
#include "oracles.hpp"

using namespace nuidx;
using namespace nuidx::metrics;
using V = std::vector<double>;
using L = std::vector<std::uint8_t>;

TEST(Selection, Definitions) {
  const V truth{1.5, 1.0, 1.0};
  auto r = selection_metrics(V{0.3, 0.0, 0.1}, truth);
  EXPECT_EQ(r.n_selected, 2u);
  EXPECT_EQ(r.tpr(), 1.0);
  EXPECT_EQ(r.tnr(), 0.5);
  r = selection_metrics(V{0, 0, 0}, truth);
  EXPECT_EQ(r.tpr(), 0.0);
  EXPECT_EQ(r.tnr(), 1.0);
  EXPECT_THROW(r.kendall_tau(), undefined_error);
  r = selection_metrics(V{1, 2, 3}, truth);
  EXPECT_EQ(r.tpr(), 1.0);
  EXPECT_EQ(r.tnr(), 0.0);
  r = selection_metrics(V{1, 0}, V{1.0, 1.0});
  EXPECT_THROW(r.tpr(), undefined_error);
  EXPECT_EQ(r.tnr(), 0.5);
  EXPECT_THROW(selection_metrics(V{1}, V{1, 2}), data_error);
}

TEST(KendallTau, Fixtures) {
  const V truth{1.7, 1.3, 1.0};
  EXPECT_DOUBLE_EQ(kendall_tau(V{0.5, 0.2, 0.0}, truth), 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(V{0.0, 0.2, 0.5}, truth), -1.0);
  EXPECT_NEAR(kendall_tau(V{0.1, 0.1, 0.0}, truth), 2.0 / std::sqrt(6.0), 1e-12);
  EXPECT_NEAR(kendall_tau(V{0.1, 0.1, 0.0}, truth), oracle::tau_b(V{0.1, 0.1, 0.0}, truth), 1e-12);
  EXPECT_THROW(kendall_tau(V{1, 1, 1}, truth), undefined_error);
  EXPECT_THROW(kendall_tau(V{1}, V{1}), undefined_error);
}

TEST(KendallTau, MatchesOracleAndIsAntisymmetric) {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 200; ++rep) {
    V x(25), y(25);
    for (int i = 0; i < 25; ++i) {
      x[i] = static_cast<double>(g() % 5);
      y[i] = static_cast<double>(g() % 4) + (i % 3 == 0 ? x[i] : 0.0);
    }
    V neg(x);
    for (auto& v : neg) v = -v;
    EXPECT_NEAR(kendall_tau(x, y), oracle::tau_b(x, y), 1e-12);
    EXPECT_NEAR(kendall_tau(neg, y), -kendall_tau(x, y), 1e-12);
  }
}

TEST(Auc, Fixtures) {
  EXPECT_EQ(auc(V{1, 2, 3}, L{0, 0, 1}), 1.0);
  EXPECT_EQ(auc(V{1, 2}, L{1, 0}), 0.0);
  EXPECT_EQ(auc(V{1, 1}, L{0, 1}), 0.5);
  EXPECT_THROW(auc(V{1, 2}, L{1, 1}), undefined_error);
  EXPECT_THROW(auc(V{1, 2}, L{1}), data_error);
}

TEST(Auc, UIdentityAndOracle) {
  std::mt19937_64 g(4);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 5 + g() % 60;
    V s(n);
    L y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(g() % 8);
      y[i] = g() % 3 == 0;
    }
    y[0] = 1;
    y[1] = 0;
    double n1 = 0;
    for (auto v : y) n1 += v;
    const double n0 = static_cast<double>(n) - n1;
    EXPECT_NEAR(auc(s, y) * n1 * n0, mann_whitney_u(s, y), 1e-12);
    EXPECT_NEAR(auc(s, y), oracle::auc_pairs(s, y), 1e-12);
    EXPECT_NEAR(aucpr(s, y), oracle::average_precision(s, y), 1e-12);
    V t(s);
    for (auto& v : t) v = std::exp(0.3 * v) - 7.0;
    EXPECT_NEAR(auc(t, y), auc(s, y), 1e-15);
  }
}

TEST(Aucpr, Fixtures) {
  EXPECT_NEAR(aucpr(V{3, 2, 1}, L{1, 0, 1}), 0.5 * (1.0 + 2.0 / 3.0), 1e-12);
  EXPECT_EQ(aucpr(V{3, 2, 1}, L{1, 1, 0}), 1.0);
  EXPECT_THROW(aucpr(V{3, 2}, L{0, 0}), undefined_error);
}

TEST(Aucpr, RandomScoresApproachPrevalence) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t n = 200000;
  V s(n);
  L y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = u(g);
    y[i] = u(g) < 0.3;
  }
  EXPECT_NEAR(aucpr(s, y), 0.3, 0.01);
}

TEST(Wilcoxon, PermutationFixture) {
  const V s{3, 4, 1, 2};
  const L y{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(mann_whitney_u(s, y), 4.0);
  EXPECT_NEAR(wilcoxon_statistic(s, y), 2.0 / std::sqrt(5.0 / 3.0), 1e-10);
  EXPECT_NEAR(wilcoxon_statistic(s, y), oracle::wilcoxon_permutation_z(s, y), 1e-10);
}

TEST(Wilcoxon, TieCorrectionMatchesPermutation) {
  std::mt19937_64 g(6);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 8 + g() % 6;
    V s(n);
    L y(n, 0);
    for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<double>(g() % 4);
    for (std::size_t i = 0; i < n / 2; ++i) y[i] = 1;
    if (std::all_of(s.begin(), s.end(), [&](double v) { return v == s[0]; })) s[0] += 1;
    EXPECT_NEAR(wilcoxon_statistic(s, y), oracle::wilcoxon_permutation_z(s, y), 1e-10);
  }
}

TEST(Wilcoxon, AllTiedAndNullSymmetry) {
  EXPECT_EQ(wilcoxon_statistic(V{2, 2, 2}, L{1, 0, 1}), 0.0);
  std::mt19937_64 g(7);
  std::normal_distribution<double> z;
  double sum = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    V s(100);
    L y(100);
    for (int i = 0; i < 100; ++i) {
      s[i] = z(g);
      y[i] = i < 50;
    }
    sum += wilcoxon_statistic(s, y);
  }
  EXPECT_LT(std::abs(sum / reps), 4.0 / std::sqrt(reps));
}

TEST(ThresholdCurve, CountingFixture) {
  const V s{0, 5, 5, 9, 0, 0, 5};
  const L inf{1, 1, 1, 1, 0, 0, 0};
  const auto c = threshold_curve(s, inf);
  const auto at = [&](double t) {
    for (const auto& p : c.points)
      if (p.threshold == t) return p;
    throw std::runtime_error("missing");
  };
  EXPECT_EQ(at(5).rate_infected, 0.75);
  EXPECT_EQ(at(5).rate_uninfected, 1.0 / 3.0);
  EXPECT_EQ(c.points.front().rate_infected, 1.0);
  EXPECT_EQ(c.points.front().rate_uninfected, 1.0);
  EXPECT_TRUE(std::isinf(c.points.front().threshold));
  EXPECT_EQ(c.points.back().rate_infected, 0.0);
  EXPECT_EQ(c.points.back().rate_uninfected, 0.0);
  for (std::size_t j = 1; j < c.points.size(); ++j) {
    EXPECT_LE(c.points[j].rate_infected, c.points[j - 1].rate_infected);
    EXPECT_LE(c.points[j].rate_uninfected, c.points[j - 1].rate_uninfected);
    EXPECT_GT(c.points[j].threshold, c.points[j - 1].threshold);
  }
  EXPECT_THROW(threshold_curve(V{1, 2}, L{0, 0}), undefined_error);
}

TEST(ThresholdCurve, StepwiseLookup) {
  const auto c = threshold_curve(V{0, 5, 5, 9, 0, 0, 5}, L{1, 1, 1, 1, 0, 0, 0});
  EXPECT_EQ(c.uninfected_rate_at(0.25), 0.0);       // t=9
  EXPECT_EQ(c.uninfected_rate_at(0.5), 1.0 / 3.0);  // t=5 reaches 0.75
  EXPECT_EQ(c.uninfected_rate_at(0.75), 1.0 / 3.0);
  EXPECT_EQ(c.uninfected_rate_at(0.8), 1.0);
  const std::vector<ThresholdCurve> two{c, threshold_curve(V{1, 0}, L{1, 0})};
  const auto avg = average_uninfected_rate(two, std::vector<double>{0.5});
  EXPECT_DOUBLE_EQ(avg[0], (1.0 / 3.0 + 0.0) / 2.0);
  EXPECT_EQ(default_rate_grid().size(), 99u);
}

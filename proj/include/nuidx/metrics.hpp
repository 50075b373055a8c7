#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "nuidx/error.hpp"

namespace nuidx::metrics {

/// Feature-selection quality of an estimated coefficient vector against the
/// true risk ratios. Rates for an empty class are absent and throw on access.
struct SelectionReport {
  std::size_t n_selected = 0;
  std::optional<double> tpr_value;
  std::optional<double> tnr_value;
  std::optional<double> kendall_tau_value;

  double tpr() const {
    if (!tpr_value) throw undefined_error("TPR undefined: no features with beta1 != 1");
    return *tpr_value;
  }
  double tnr() const {
    if (!tnr_value) throw undefined_error("TNR undefined: no features with beta1 == 1");
    return *tnr_value;
  }
  double kendall_tau() const {
    if (!kendall_tau_value) throw undefined_error("Kendall tau undefined: constant input");
    return *kendall_tau_value;
  }
};

/**
 * Kendall's tau-b:
 *   (concordant - discordant) / sqrt((n0 - t_x)(n0 - t_y)),
 * with n0 = n(n-1)/2 and t_x, t_y the pairs tied in x and in y.
 * Throws undefined_error when either input is constant.
 */
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw data_error("kendall_tau: length mismatch");
  if (x.size() < 2) throw undefined_error("kendall_tau needs at least two observations");
  long long conc = 0, disc = 0, tie_x = 0, tie_y = 0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++tie_x;
      if (dy == 0.0) ++tie_y;
      if (dx == 0.0 || dy == 0.0) continue;
      ((dx > 0) == (dy > 0) ? conc : disc)++;
    }
  }
  const long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  if (tie_x == n0 || tie_y == n0) throw undefined_error("kendall_tau: constant input");
  return static_cast<double>(conc - disc) /
         std::sqrt(static_cast<double>(n0 - tie_x) * static_cast<double>(n0 - tie_y));
}

inline SelectionReport selection_metrics(std::span<const double> estimated,
                                         std::span<const double> true_beta1) {
  if (estimated.size() != true_beta1.size()) throw data_error("selection_metrics: length mismatch");
  SelectionReport r;
  std::size_t pos = 0, neg = 0, tp = 0, tn = 0;
  for (std::size_t k = 0; k < estimated.size(); ++k) {
    const bool sel = estimated[k] != 0.0;
    r.n_selected += sel;
    if (true_beta1[k] != 1.0) {
      ++pos;
      tp += sel;
    } else {
      ++neg;
      tn += !sel;
    }
  }
  if (pos) r.tpr_value = static_cast<double>(tp) / static_cast<double>(pos);
  if (neg) r.tnr_value = static_cast<double>(tn) / static_cast<double>(neg);
  try {
    r.kendall_tau_value = kendall_tau(estimated, true_beta1);
  } catch (const undefined_error&) {
  }
  return r;
}

namespace detail {

inline void check_labels(std::span<const std::uint8_t> labels, std::size_t n, std::size_t& n1,
                         std::size_t& n0) {
  if (labels.size() != n) throw data_error("scores and labels differ in length");
  n1 = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; }));
  n0 = n - n1;
}

/// Midranks (1-based) and the tie term sum(t^3 - t).
template <class T>
std::pair<std::vector<double>, double> midranks(std::span<const T> s) {
  const std::size_t n = s.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  std::vector<double> rank(n);
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && s[order[j + 1]] == s[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) rank[order[m]] = mid;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    i = j + 1;
  }
  return {std::move(rank), ties};
}

}  // namespace detail

/// Mann-Whitney U of positives over negatives: #(s1 > s0) + #(s1 == s0)/2.
template <class T>
double mann_whitney_u(std::span<const T> scores, std::span<const std::uint8_t> labels) {
  std::size_t n1, n0;
  detail::check_labels(labels, scores.size(), n1, n0);
  if (n1 == 0 || n0 == 0) throw undefined_error("need both classes present");
  const auto [rank, ties] = detail::midranks(scores);
  double r1 = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (labels[i]) r1 += rank[i];
  return r1 - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
}

/// Area under the ROC curve: U / (n1 n0).
template <class T>
double auc(std::span<const T> scores, std::span<const std::uint8_t> labels) {
  std::size_t n1, n0;
  detail::check_labels(labels, scores.size(), n1, n0);
  if (n1 == 0 || n0 == 0) throw undefined_error("AUC needs both classes present");
  return mann_whitney_u(scores, labels) / (static_cast<double>(n1) * static_cast<double>(n0));
}

/**
 * Standardised rank-sum statistic z = (U - n1 n0 / 2) / sigma with
 *   sigma^2 = n1 n0 / 12 * [(N + 1) - sum(t^3 - t) / (N (N - 1))].
 * Returns 0 when every score is tied (sigma = 0).
 */
template <class T>
double wilcoxon_statistic(std::span<const T> scores, std::span<const std::uint8_t> labels) {
  std::size_t n1, n0;
  detail::check_labels(labels, scores.size(), n1, n0);
  if (n1 == 0 || n0 == 0) throw undefined_error("Wilcoxon statistic needs both classes present");
  const double u = mann_whitney_u(scores, labels);
  const double ties = detail::midranks(scores).second;
  const double N = static_cast<double>(scores.size());
  const double m = static_cast<double>(n1) * static_cast<double>(n0);
  const double var = m / 12.0 * ((N + 1.0) - ties / (N * (N - 1.0)));
  if (!(var > 0.0)) return 0.0;
  return (u - 0.5 * m) / std::sqrt(var);
}

/// Average precision: sum over distinct thresholds (descending) of
/// (recall gain) * (precision at that threshold). Tied scores enter together.
template <class T>
double aucpr(std::span<const T> scores, std::span<const std::uint8_t> labels) {
  std::size_t n1, n0;
  detail::check_labels(labels, scores.size(), n1, n0);
  if (n1 == 0) throw undefined_error("AUCPR needs at least one positive");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0;
  std::size_t tp = 0, seen = 0, tp_prev = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]] ? 1 : 0;
      ++j;
    }
    seen = j;
    if (tp > tp_prev) {
      const double recall_gain = static_cast<double>(tp - tp_prev) / static_cast<double>(n1);
      ap += recall_gain * static_cast<double>(tp) / static_cast<double>(seen);
    }
    tp_prev = tp;
    i = j;
  }
  return ap;
}

// ---------------------------------------------------------------------------
// Threshold curves

struct CurvePoint {
  double threshold;
  double rate_infected;    ///< share of infected with score >= threshold
  double rate_uninfected;  ///< share of uninfected with score >= threshold
};

/// Points ordered by ascending threshold; both rates are nonincreasing.
/// The first point (threshold -inf) is (1,1) and the last (+inf) is (0,0).
struct ThresholdCurve {
  std::vector<CurvePoint> points;

  /// Uninfected rate of the strictest rule whose infected rate reaches `r`.
  double uninfected_rate_at(double r) const {
    for (auto it = points.rbegin(); it != points.rend(); ++it)
      if (it->rate_infected >= r) return it->rate_uninfected;
    return points.front().rate_uninfected;
  }
};

template <class T>
ThresholdCurve threshold_curve(std::span<const T> scores, std::span<const std::uint8_t> infected) {
  std::size_t n1, n0;
  detail::check_labels(infected, scores.size(), n1, n0);
  if (n1 == 0 || n0 == 0) throw undefined_error("threshold curve needs infected and uninfected rows");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  // Walk from the highest score down; counts are of rows with score >= t.
  std::vector<CurvePoint> desc;
  constexpr double inf = std::numeric_limits<double>::infinity();
  desc.push_back({inf, 0.0, 0.0});
  std::size_t c1 = 0, c0 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    const T t = scores[order[i]];
    while (j < order.size() && scores[order[j]] == t) {
      (infected[order[j]] ? c1 : c0)++;
      ++j;
    }
    desc.push_back({static_cast<double>(t), static_cast<double>(c1) / static_cast<double>(n1),
                    static_cast<double>(c0) / static_cast<double>(n0)});
    i = j;
  }
  desc.push_back({-inf, 1.0, 1.0});
  ThresholdCurve c;
  c.points.assign(desc.rbegin(), desc.rend());
  return c;
}

/// Infected-rate grid 0.01, 0.02, ..., 0.99.
inline std::vector<double> default_rate_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 99; ++i) g.push_back(i / 100.0);
  return g;
}

/// Pointwise mean of the stepwise uninfected rate over several curves.
inline std::vector<double> average_uninfected_rate(std::span<const ThresholdCurve> curves,
                                                   std::span<const double> grid) {
  std::vector<double> out(grid.size(), 0.0);
  if (curves.empty()) return out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (const auto& c : curves) s += c.uninfected_rate_at(grid[g]);
    out[g] = s / static_cast<double>(curves.size());
  }
  return out;
}

// Convenience overloads for vectors.
template <class T>
double auc(const std::vector<T>& s, const std::vector<std::uint8_t>& l) {
  return auc(std::span<const T>(s), std::span<const std::uint8_t>(l));
}
template <class T>
double aucpr(const std::vector<T>& s, const std::vector<std::uint8_t>& l) {
  return aucpr(std::span<const T>(s), std::span<const std::uint8_t>(l));
}
template <class T>
double wilcoxon_statistic(const std::vector<T>& s, const std::vector<std::uint8_t>& l) {
  return wilcoxon_statistic(std::span<const T>(s), std::span<const std::uint8_t>(l));
}
template <class T>
double mann_whitney_u(const std::vector<T>& s, const std::vector<std::uint8_t>& l) {
  return mann_whitney_u(std::span<const T>(s), std::span<const std::uint8_t>(l));
}
template <class T>
ThresholdCurve threshold_curve(const std::vector<T>& s, const std::vector<std::uint8_t>& l) {
  return threshold_curve(std::span<const T>(s), std::span<const std::uint8_t>(l));
}

}  // namespace nuidx::metrics

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nuidx/cohort.hpp"
#include "nuidx/error.hpp"

namespace nuidx {

/**
 * Balancing weights w(a, z) = P(A=1|Z=z) / P(A=a|Z=z) estimated by stratum
 * counts: infected rows get 1, uninfected rows in stratum z get
 * n_infected(z) / n_uninfected(z). Within each stratum the weighted
 * uninfected mass then equals the infected count.
 *
 * Every non-empty stratum must contain both infected and uninfected rows;
 * otherwise a data_error lists the offending strata.
 */
inline std::vector<double> compute_balancing_weights(std::span<const std::uint8_t> a,
                                                     std::span<const int> stratum) {
  if (a.size() != stratum.size()) throw data_error("labels and strata differ in length");
  int levels = 0;
  for (int s : stratum) {
    if (s < 0) throw data_error("negative stratum label");
    levels = std::max(levels, s + 1);
  }
  std::vector<std::size_t> n1(levels, 0), n0(levels, 0);
  for (std::size_t i = 0; i < a.size(); ++i) (a[i] ? n1 : n0)[stratum[i]]++;
  std::string bad;
  for (int s = 0; s < levels; ++s) {
    if (n1[s] + n0[s] == 0) continue;
    if (n1[s] == 0 || n0[s] == 0) {
      if (!bad.empty()) bad += "; ";
      bad += "stratum " + std::to_string(s) + " (infected " + std::to_string(n1[s]) +
             ", uninfected " + std::to_string(n0[s]) + ")";
    }
  }
  if (!bad.empty()) throw data_error("degenerate strata: " + bad);
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    w[i] = a[i] ? 1.0
                : static_cast<double>(n1[stratum[i]]) / static_cast<double>(n0[stratum[i]]);
  return w;
}

/// Stratum display name built from its column values, e.g. "z_age=2|z_sex=F".
inline std::string stratum_name(const Strata& s, int label) {
  for (std::size_t i = 0; i < s.label.size(); ++i) {
    if (s.label[i] != label) continue;
    std::string out;
    for (std::size_t j = 0; j < s.columns.size(); ++j) {
      if (j) out += '|';
      out += s.columns[j] + "=" + s.values[i][j];
    }
    return out;
  }
  return "?";
}

inline std::vector<double> compute_balancing_weights(const Cohort& c) {
  if (!c.strata) throw config_error("balancing weights need stratum columns (prefix 'z_')");
  const auto& st = *c.strata;
  std::vector<std::size_t> n1(st.n_levels, 0), n0(st.n_levels, 0);
  for (std::size_t i = 0; i < c.n(); ++i) (c.a[i] ? n1 : n0)[st.label[i]]++;
  std::string bad;
  for (int s = 0; s < st.n_levels; ++s) {
    if (n1[s] == 0 || n0[s] == 0) {
      if (!bad.empty()) bad += "; ";
      bad += stratum_name(st, s) + " (infected " + std::to_string(n1[s]) + ", uninfected " +
             std::to_string(n0[s]) + ")";
    }
  }
  if (!bad.empty()) throw data_error("degenerate strata: " + bad);
  return compute_balancing_weights(c.a, st.label);
}

}  // namespace nuidx

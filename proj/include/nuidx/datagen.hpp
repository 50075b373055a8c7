#pragma once

#include <cmath>
#include <vector>

#include "nuidx/cohort.hpp"
#include "nuidx/copula.hpp"
#include "nuidx/rng.hpp"
#include "nuidx/scenario.hpp"

namespace nuidx {

/**
 * Sample a cohort from the latent-condition model:
 *
 *   Z ~ Bern(pz)                               (only with a confounder)
 *   A | Z ~ Bern(P(A=1|Z))
 *   Y | A ~ Bern(pi) if A = 1, else Y = 0
 *   X_k | Y, Z: within each copula group, Clayton uniforms U_k are
 *               thresholded as X_k = 1{U_k > 1 - b_k(Z) beta1_k^Y}
 *
 * so each feature keeps its conditional prevalence while features in one
 * group share positive dependence.
 */
inline Cohort sample_cohort(const ScenarioSpec& spec, Rng& rng) {
  validate(spec);
  const std::size_t n = spec.n, K = spec.k();
  const auto pa = infection_probabilities(spec);
  const auto base = feature_baselines(spec);
  // thresholds[y][z][k] = 1 - P(X_k=1 | Y=y, Z=z)
  std::vector<double> cut[2][2];
  for (int y = 0; y < 2; ++y)
    for (int z = 0; z < 2; ++z) {
      cut[y][z].resize(K);
      for (std::size_t k = 0; k < K; ++k)
        cut[y][z][k] = 1.0 - base[k][z] * (y ? spec.beta1[k] : 1.0);
    }

  Cohort c;
  c.ids.resize(n);
  c.a.resize(n);
  c.x = BinaryMatrix(n, K);
  c.y_latent.emplace(n);
  for (std::size_t k = 0; k < K; ++k) c.feature_names.push_back("x_" + std::to_string(k + 1));
  Strata strata;
  if (spec.confounder) {
    strata.columns = {"z_1"};
    strata.values.reserve(n);
  }

  std::size_t max_group = 0;
  for (const auto& g : spec.groups) max_group = std::max(max_group, g.size());
  std::vector<double> u(max_group);

  for (std::size_t i = 0; i < n; ++i) {
    c.ids[i] = static_cast<std::int64_t>(i + 1);
    int z = 0;
    if (spec.confounder) {
      z = bernoulli(rng, spec.confounder->pz) ? 1 : 0;
      strata.values.push_back({z ? "1" : "0"});
    }
    const bool a = bernoulli(rng, pa[z]);
    const bool y = a && bernoulli(rng, spec.pi);
    c.a[i] = a;
    (*c.y_latent)[i] = y;
    const auto& thr = cut[y ? 1 : 0][z];
    auto row = c.x.row(i);
    for (const auto& g : spec.groups) {
      std::span<double> ug(u.data(), g.size());
      sample_clayton_uniforms(spec.rho, ug, rng);
      for (std::size_t j = 0; j < g.size(); ++j) row[g[j]] = ug[j] > thr[g[j]] ? 1 : 0;
    }
  }
  if (spec.confounder) {
    relabel(strata);
    c.strata = std::move(strata);
  }
  return c;
}

/// Sample with the stream seeded from spec.seed.
inline Cohort sample_cohort(const ScenarioSpec& spec) {
  Rng rng(spec.seed);
  return sample_cohort(spec, rng);
}

}  // namespace nuidx

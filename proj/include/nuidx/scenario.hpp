#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nuidx/error.hpp"
#include "nuidx/theory.hpp"

namespace nuidx {

/// Binary confounder acting on infection and on a subset of features.
struct ConfounderSpec {
  double pz = 0.55;
  double rr_az = 1.0;
  std::vector<double> rr_xz;  // per feature; 1 means no Z association
};

/**
 * Full generative configuration of a simulated cohort.
 *
 * Feature indices in `groups` are 0-based here and 1-based in the JSON form.
 */
struct ScenarioSpec {
  std::string name;
  std::size_t n = 10000;
  double alpha = 0.8;
  double pi = 0.2;
  std::vector<double> beta0;
  std::vector<double> beta1;
  std::vector<std::vector<std::size_t>> groups;
  double rho = 0.0;
  std::optional<ConfounderSpec> confounder;
  std::uint64_t seed = 1;

  std::size_t k() const { return beta0.size(); }
};

/// Per-feature baselines b_k(z) for z = 0,1 (equal when there is no confounder).
inline std::vector<std::array<double, 2>> feature_baselines(const ScenarioSpec& s) {
  std::vector<std::array<double, 2>> out(s.k());
  for (std::size_t k = 0; k < s.k(); ++k) {
    if (s.confounder && s.confounder->rr_xz[k] != 1.0) {
      auto [b0, b1] = theory::solve_conditional_from_marginal(s.beta0[k], s.confounder->pz,
                                                              s.confounder->rr_xz[k]);
      out[k] = {b0, b1};
    } else {
      out[k] = {s.beta0[k], s.beta0[k]};
    }
  }
  return out;
}

/// P(A=1 | Z=z) for z = 0,1.
inline std::array<double, 2> infection_probabilities(const ScenarioSpec& s) {
  if (!s.confounder || s.confounder->rr_az == 1.0) return {s.alpha, s.alpha};
  auto [p0, p1] = theory::solve_conditional_from_marginal(s.alpha, s.confounder->pz,
                                                          s.confounder->rr_az);
  return {p0, p1};
}

inline void validate(const ScenarioSpec& s) {
  const auto where = [&](const std::string& m) { return "scenario '" + s.name + "': " + m; };
  if (s.n == 0) throw config_error(where("n must be positive"));
  if (!theory::open_unit(s.alpha)) throw config_error(where("alpha must lie in (0,1)"));
  if (!(s.pi >= 0.0 && s.pi < 1.0)) throw config_error(where("pi must lie in [0,1)"));
  if (s.k() == 0 || s.beta1.size() != s.k())
    throw config_error(where("beta0 and beta1 must be non-empty and of equal length"));
  for (std::size_t k = 0; k < s.k(); ++k) {
    if (!theory::open_unit(s.beta0[k])) throw config_error(where("beta0 must lie in (0,1)"));
    if (!(s.beta1[k] > 0.0) || s.beta0[k] * s.beta1[k] > 1.0)
      throw config_error(where("beta0*beta1 must lie in (0,1] for feature " +
                               std::to_string(k + 1)));
  }
  if (!(s.rho >= 0.0)) throw config_error(where("rho must be nonnegative"));
  std::vector<int> seen(s.k(), 0);
  for (const auto& g : s.groups) {
    if (g.empty()) throw config_error(where("empty feature group"));
    for (auto k : g) {
      if (k >= s.k()) throw config_error(where("group index out of range"));
      ++seen[k];
    }
  }
  for (std::size_t k = 0; k < s.k(); ++k)
    if (seen[k] != 1)
      throw config_error(where("groups must partition the features; feature " +
                               std::to_string(k + 1) + " appears " + std::to_string(seen[k]) +
                               " times"));
  if (s.confounder) {
    if (s.confounder->rr_xz.size() != s.k())
      throw config_error(where("rr_xz must have one entry per feature"));
    try {
      infection_probabilities(s);
      const auto b = feature_baselines(s);
      for (std::size_t k = 0; k < s.k(); ++k)
        for (double bz : b[k])
          if (bz * s.beta1[k] > 1.0)
            throw infeasible_error("b(z)*beta1 exceeds 1 for feature " + std::to_string(k + 1));
    } catch (const infeasible_error& e) {
      throw infeasible_error(where(e.what()));
    } catch (const domain_error& e) {
      throw config_error(where(e.what()));
    }
  }
}

// ---------------------------------------------------------------------------
// Built-in catalog

namespace catalog {

inline constexpr std::size_t kFeatures = 40;
inline constexpr std::size_t kSignal = 12;
inline constexpr double kSignalExponent[3] = {1.0, 1.2, 1.4};
inline constexpr const char* kSignalName[3] = {"low", "medium", "high"};

/// Risk ratios: features 1-4 -> 1.3^s, 5-8 -> 1.5^s, 9-12 -> 1.7^s, rest 1.
inline std::vector<double> beta1_pattern(double s) {
  std::vector<double> b(kFeatures, 1.0);
  for (std::size_t k = 0; k < 4; ++k) {
    b[k] = std::pow(1.3, s);
    b[k + 4] = std::pow(1.5, s);
    b[k + 8] = std::pow(1.7, s);
  }
  return b;
}

inline constexpr std::size_t kGroupSizes[9] = {1, 2, 3, 3, 3, 5, 6, 7, 10};

/// Contiguous groups of the stated sizes. The first five groups cover
/// features 1-12 exactly, so signal and null features never share a group.
inline std::vector<std::vector<std::size_t>> contiguous_groups() {
  std::vector<std::vector<std::size_t>> g;
  std::size_t next = 0;
  for (auto size : kGroupSizes) {
    g.emplace_back(size);
    std::iota(g.back().begin(), g.back().end(), next);
    next += size;
  }
  return g;
}

/// Same group sizes with signal features spread across eight groups, each
/// sharing its group with null features.
inline std::vector<std::vector<std::size_t>> mixed_groups() {
  return {
      {12},
      {0, 13},
      {4, 14, 15},
      {8, 16, 17},
      {1, 18, 19},
      {5, 9, 20, 21, 22},
      {2, 6, 23, 24, 25, 26},
      {3, 10, 27, 28, 29, 30, 31},
      {7, 11, 32, 33, 34, 35, 36, 37, 38, 39},
  };
}

/// Twelve per-feature Z risk ratios evenly spaced on [1.35, 2].
inline std::vector<double> zx_ratios() {
  std::vector<double> r(kSignal);
  for (std::size_t j = 0; j < kSignal; ++j)
    r[j] = 1.35 + (2.0 - 1.35) * static_cast<double>(j) / static_cast<double>(kSignal - 1);
  return r;
}

}  // namespace catalog

/**
 * Named scenarios:
 *   {low,medium,high}_{uncorrelated,non_group_sparse,group_sparse}
 *   confound_{none,nonoverlap,overlap}_{positive,negative}
 *
 * Correlated settings use rho = 5. Confounding settings use alpha = 0.7,
 * medium signal, uncorrelated features, P(Z=1) = 0.55 and rr_az = 1.7
 * (positive) or 0.65 (negative); the Z-associated features are 1-12
 * (overlap) or 13-24 (nonoverlap) with zx_ratios() assigned in index order.
 */
inline std::vector<ScenarioSpec> builtin_scenarios() {
  using namespace catalog;
  std::vector<ScenarioSpec> out;
  const char* corr_name[3] = {"uncorrelated", "non_group_sparse", "group_sparse"};
  for (int level = 0; level < 3; ++level) {
    for (int c = 0; c < 3; ++c) {
      ScenarioSpec s;
      s.name = std::string(kSignalName[level]) + "_" + corr_name[c];
      s.alpha = 0.8;
      s.pi = 0.2;
      s.beta0.assign(kFeatures, 0.2);
      s.beta1 = beta1_pattern(kSignalExponent[level]);
      s.groups = c == 1 ? mixed_groups() : contiguous_groups();
      s.rho = c == 0 ? 0.0 : 5.0;
      out.push_back(std::move(s));
    }
  }
  const char* zx_name[3] = {"none", "nonoverlap", "overlap"};
  const char* za_name[2] = {"positive", "negative"};
  const double za_rr[2] = {1.7, 0.65};
  for (int zx = 0; zx < 3; ++zx) {
    for (int za = 0; za < 2; ++za) {
      ScenarioSpec s;
      s.name = std::string("confound_") + zx_name[zx] + "_" + za_name[za];
      s.alpha = 0.7;
      s.pi = 0.2;
      s.beta0.assign(kFeatures, 0.2);
      s.beta1 = beta1_pattern(kSignalExponent[1]);
      s.groups = contiguous_groups();
      s.rho = 0.0;
      ConfounderSpec cz;
      cz.pz = 0.55;
      cz.rr_az = za_rr[za];
      cz.rr_xz.assign(kFeatures, 1.0);
      const auto r = zx_ratios();
      const std::size_t first = zx == 1 ? kSignal : 0;
      if (zx != 0)
        for (std::size_t j = 0; j < kSignal; ++j) cz.rr_xz[first + j] = r[j];
      s.confounder = std::move(cz);
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline ScenarioSpec find_scenario(const std::string& name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  throw config_error("unknown scenario '" + name + "'");
}

/// True features are the ones with beta1 != 1.
inline std::vector<bool> signal_mask(const ScenarioSpec& s) {
  std::vector<bool> m(s.k());
  for (std::size_t k = 0; k < s.k(); ++k) m[k] = s.beta1[k] != 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// JSON form

inline nlohmann::json to_json(const ScenarioSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["n"] = s.n;
  j["alpha"] = s.alpha;
  j["pi"] = s.pi;
  j["beta0"] = s.beta0;
  j["beta1"] = s.beta1;
  auto groups = nlohmann::json::array();
  for (const auto& g : s.groups) {
    auto one = nlohmann::json::array();
    for (auto k : g) one.push_back(k + 1);
    groups.push_back(one);
  }
  j["groups"] = groups;
  j["rho"] = s.rho;
  j["seed"] = s.seed;
  if (s.confounder) {
    j["confounder"] = {{"pz", s.confounder->pz},
                       {"rr_az", s.confounder->rr_az},
                       {"rr_xz", s.confounder->rr_xz}};
  }
  return j;
}

/**
 * Parse a scenario. A "base" key names a built-in scenario whose fields the
 * remaining keys override. Scalars beta0/beta1/rr_xz broadcast to all
 * features. Missing groups default to one singleton group per feature.
 */
inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  try {
    if (j.contains("base")) s = find_scenario(j.at("base").get<std::string>());
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    if (j.contains("n")) s.n = j.at("n").get<std::size_t>();
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("pi")) s.pi = j.at("pi").get<double>();
    if (j.contains("rho")) s.rho = j.at("rho").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    std::size_t k = s.k();
    if (j.contains("k")) k = j.at("k").get<std::size_t>();
    for (const char* key : {"beta0", "beta1"})
      if (j.contains(key) && j.at(key).is_array()) k = j.at(key).size();
    const auto vec = [&](const char* key, std::vector<double>& dst) {
      if (j.contains(key)) {
        const auto& v = j.at(key);
        dst = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>(k, v.get<double>());
      } else if (dst.size() != k && !dst.empty()) {
        dst.assign(k, dst.front());
      }
    };
    vec("beta0", s.beta0);
    vec("beta1", s.beta1);
    if (j.contains("groups")) {
      s.groups.clear();
      for (const auto& g : j.at("groups")) {
        std::vector<std::size_t> one;
        for (const auto& v : g) {
          const auto idx = v.get<std::size_t>();
          if (idx == 0) throw config_error("group feature numbers are 1-based");
          one.push_back(idx - 1);
        }
        s.groups.push_back(std::move(one));
      }
    } else if (s.groups.empty() || j.contains("beta0") || j.contains("beta1") || j.contains("k")) {
      std::size_t total = 0;
      for (const auto& g : s.groups) total += g.size();
      if (total != s.k()) {
        s.groups.clear();
        for (std::size_t f = 0; f < s.k(); ++f) s.groups.push_back({f});
      }
    }
    if (j.contains("confounder")) {
      const auto& c = j.at("confounder");
      if (c.is_null()) {
        s.confounder.reset();
      } else {
        ConfounderSpec cz = s.confounder.value_or(ConfounderSpec{});
        if (c.contains("pz")) cz.pz = c.at("pz").get<double>();
        if (c.contains("rr_az")) cz.rr_az = c.at("rr_az").get<double>();
        if (c.contains("rr_xz")) {
          const auto& r = c.at("rr_xz");
          cz.rr_xz = r.is_array() ? r.get<std::vector<double>>()
                                  : std::vector<double>(s.k(), r.get<double>());
        }
        if (cz.rr_xz.empty()) cz.rr_xz.assign(s.k(), 1.0);
        s.confounder = std::move(cz);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace nuidx

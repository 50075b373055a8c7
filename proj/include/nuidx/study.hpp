#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nuidx/csv.hpp"
#include "nuidx/curve.hpp"
#include "nuidx/datagen.hpp"
#include "nuidx/metrics.hpp"
#include "nuidx/parallel.hpp"
#include "nuidx/rng.hpp"
#include "nuidx/scenario.hpp"

namespace nuidx {

/// Which weighting arms to run. automatic: both for scenarios with a
/// confounder, unadjusted otherwise.
enum class Arms { unadjusted, balancing, both, automatic };

inline Arms parse_arms(const std::string& s) {
  if (s == "unadjusted") return Arms::unadjusted;
  if (s == "balancing" || s == "weighted") return Arms::balancing;
  if (s == "both") return Arms::both;
  if (s == "auto") return Arms::automatic;
  throw config_error("unknown arms '" + s + "' (expected unadjusted, balancing, both or auto)");
}

inline std::string to_string(Arms a) {
  switch (a) {
    case Arms::unadjusted: return "unadjusted";
    case Arms::balancing: return "balancing";
    case Arms::both: return "both";
    case Arms::automatic: return "auto";
  }
  return "?";
}

struct StudyConfig {
  std::vector<ScenarioSpec> scenarios;
  std::size_t replicates = 100;
  std::optional<std::size_t> n;  ///< overrides each scenario's n when set
  std::uint64_t master_seed = 20240101;
  Arms arms = Arms::automatic;
  std::size_t workers = 1;  ///< 0 = hardware concurrency
  glm::CvOptions cv{};
};

struct DiscriminationMetrics {
  double auc = NAN;
  double aucpr = NAN;
  double wilcoxon_z = NAN;
};

struct ReplicateRecord {
  std::string scenario;
  std::string arm;  ///< "unadjusted" or "balancing"
  std::size_t replicate = 0;
  std::optional<std::string> error;
  metrics::SelectionReport selection;
  double lambda = NAN;
  DiscriminationMetrics index;
  DiscriminationMetrics count;
};

struct StudyResult {
  std::vector<ReplicateRecord> records;  ///< sorted by (scenario order, arm, replicate)
  std::vector<std::string> scenario_order;

  /// (scenario, arm) cells in which every replicate failed.
  std::vector<std::string> failed_cells() const {
    std::map<std::pair<std::string, std::string>, std::size_t> ok, all;
    for (const auto& r : records) {
      ++all[{r.scenario, r.arm}];
      if (!r.error) ++ok[{r.scenario, r.arm}];
    }
    std::vector<std::string> out;
    for (const auto& [cell, count] : all)
      if (ok[cell] == 0) out.push_back(cell.first + "/" + cell.second);
    return out;
  }
};

inline std::vector<std::string> arms_for(const ScenarioSpec& s, Arms arms) {
  switch (arms) {
    case Arms::unadjusted: return {"unadjusted"};
    case Arms::balancing: return {"balancing"};
    case Arms::both: return {"unadjusted", "balancing"};
    case Arms::automatic:
      return s.confounder ? std::vector<std::string>{"unadjusted", "balancing"}
                          : std::vector<std::string>{"unadjusted"};
  }
  return {};
}

/// Seed of the cohort of one (scenario, replicate) unit.
inline std::uint64_t replicate_seed(std::uint64_t master, const std::string& scenario,
                                    std::size_t replicate) {
  return stream_seed(master, hash_name(scenario), replicate);
}

inline DiscriminationMetrics discrimination(const std::vector<int>& s,
                                            const std::vector<std::uint8_t>& y) {
  return {metrics::auc(s, y), metrics::aucpr(s, y), metrics::wilcoxon_statistic(s, y)};
}

/**
 * Replicated simulation study. Each (scenario, replicate) unit samples one
 * cohort from its own stream; every arm of that unit fits the same cohort
 * with the same CV folds. Selection and discrimination are measured against
 * the true risk ratios and the latent labels of the whole cohort. A failing
 * unit is recorded with its error and does not stop the others.
 */
inline StudyResult run_study(const StudyConfig& cfg) {
  if (cfg.replicates == 0) throw config_error("replicates must be at least 1");
  if (cfg.scenarios.empty()) throw config_error("no scenarios configured");
  for (const auto& s : cfg.scenarios) {
    validate(s);
    if (!s.confounder && (cfg.arms == Arms::balancing || cfg.arms == Arms::both))
      throw config_error("scenario '" + s.name + "' has no confounder to balance on");
  }
  StudyResult result;
  for (const auto& s : cfg.scenarios) result.scenario_order.push_back(s.name);

  const std::size_t units = cfg.scenarios.size() * cfg.replicates;
  std::vector<std::vector<ReplicateRecord>> slots(units);
  parallel_for(units, cfg.workers, [&](std::size_t u) {
    ScenarioSpec spec = cfg.scenarios[u / cfg.replicates];
    const std::size_t rep = u % cfg.replicates + 1;
    if (cfg.n) spec.n = *cfg.n;
    spec.seed = replicate_seed(cfg.master_seed, spec.name, rep);
    const auto arms = arms_for(spec, cfg.arms);
    std::vector<ReplicateRecord>& out = slots[u];
    for (const auto& arm : arms) {
      ReplicateRecord r;
      r.scenario = spec.name;
      r.arm = arm;
      r.replicate = rep;
      out.push_back(std::move(r));
    }
    try {
      const Cohort c = sample_cohort(spec);
      const auto& y = *c.y_latent;
      const auto count = discrimination(symptom_count(c.x), y);
      for (auto& r : out) {
        try {
          PipelineConfig pc;
          pc.weighting = r.arm == "balancing" ? Weighting::on : Weighting::off;
          pc.cv = cfg.cv;
          pc.cv.seed = splitmix64(spec.seed);
          const auto fitted = fit_index(c, pc);
          r.selection = metrics::selection_metrics(fitted.fit.final_coefficients(), spec.beta1);
          r.lambda = fitted.fit.selected_lambda();
          r.index = discrimination(score(fitted.model, c.x), y);
          r.count = count;
        } catch (const std::exception& e) {
          r.error = e.what();
        }
      }
    } catch (const std::exception& e) {
      for (auto& r : out) r.error = e.what();
    }
  });

  for (std::size_t si = 0; si < cfg.scenarios.size(); ++si) {
    for (const auto& arm : arms_for(cfg.scenarios[si], cfg.arms)) {
      for (std::size_t rep = 0; rep < cfg.replicates; ++rep)
        for (const auto& r : slots[si * cfg.replicates + rep])
          if (r.arm == arm) result.records.push_back(r);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summaries

namespace stats {

/// Sample quantile with linear interpolation between order statistics
/// (h = (n-1)p), matching the common default of statistical packages.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return NAN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Sample standard deviation; NaN with fewer than two values.
inline double sd(const std::vector<double>& v) {
  if (v.size() < 2) return NAN;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace stats

/// Aggregate of one (scenario, arm) cell over its successful replicates.
/// tau is averaged over the replicates where it is defined.
struct CellSummary {
  std::string scenario, arm;
  std::size_t ok = 0, failed = 0, tau_defined = 0;
  double selected_median = NAN, selected_q1 = NAN, selected_q3 = NAN;
  double tpr_mean = NAN, tpr_sd = NAN, tnr_mean = NAN, tnr_sd = NAN;
  double tau_mean = NAN, tau_sd = NAN;
  double auc_index_mean = NAN, auc_count_mean = NAN;
};

inline CellSummary summarise(const StudyResult& res, const std::string& scenario,
                             const std::string& arm) {
  CellSummary c;
  c.scenario = scenario;
  c.arm = arm;
  std::vector<double> sel, tpr, tnr, tau, ai, ac;
  for (const auto& r : res.records) {
    if (r.scenario != scenario || r.arm != arm) continue;
    if (r.error) {
      ++c.failed;
      continue;
    }
    ++c.ok;
    sel.push_back(static_cast<double>(r.selection.n_selected));
    if (r.selection.tpr_value) tpr.push_back(*r.selection.tpr_value);
    if (r.selection.tnr_value) tnr.push_back(*r.selection.tnr_value);
    if (r.selection.kendall_tau_value) tau.push_back(*r.selection.kendall_tau_value);
    ai.push_back(r.index.auc);
    ac.push_back(r.count.auc);
  }
  c.tau_defined = tau.size();
  c.selected_median = stats::quantile(sel, 0.5);
  c.selected_q1 = stats::quantile(sel, 0.25);
  c.selected_q3 = stats::quantile(sel, 0.75);
  c.tpr_mean = stats::mean(tpr);
  c.tpr_sd = stats::sd(tpr);
  c.tnr_mean = stats::mean(tnr);
  c.tnr_sd = stats::sd(tnr);
  c.tau_mean = stats::mean(tau);
  c.tau_sd = stats::sd(tau);
  c.auc_index_mean = stats::mean(ai);
  c.auc_count_mean = stats::mean(ac);
  return c;
}

/// Cells in record order.
inline std::vector<CellSummary> summarise(const StudyResult& res) {
  std::vector<CellSummary> out;
  for (const auto& r : res.records) {
    if (!out.empty() && out.back().scenario == r.scenario && out.back().arm == r.arm) continue;
    out.push_back(summarise(res, r.scenario, r.arm));
  }
  return out;
}

enum class TableStyle { main, confounding };

namespace detail {
inline std::vector<std::string> summary_fields(const CellSummary& c) {
  using csv::num;
  return {num(c.selected_median), num(c.selected_q1), num(c.selected_q3), num(c.tpr_mean),
          num(c.tpr_sd),          num(c.tnr_mean),    num(c.tnr_sd),      num(c.tau_mean),
          num(c.tau_sd),          std::to_string(c.ok), std::to_string(c.failed)};
}
inline std::vector<std::string> summary_names(const std::string& suffix) {
  std::vector<std::string> out;
  for (const char* n : {"selected_median", "selected_q1", "selected_q3", "tpr_mean", "tpr_sd",
                        "tnr_mean", "tnr_sd", "tau_mean", "tau_sd", "n_ok", "n_failed"})
    out.push_back(std::string(n) + suffix);
  return out;
}
}  // namespace detail

/**
 * main: one row per (scenario, arm).
 * confounding: one row per scenario with _balancing and _unadjusted column
 * pairs; a missing arm is written as NA.
 */
inline void emit_table(const StudyResult& res, TableStyle style, std::ostream& os) {
  if (res.records.empty()) throw data_error("study result is empty");
  const auto cells = summarise(res);
  if (style == TableStyle::main) {
    std::vector<std::string> header = {"scenario", "arm"};
    for (auto& n : detail::summary_names("")) header.push_back(n);
    csv::write_row(os, header);
    for (const auto& c : cells) {
      std::vector<std::string> row = {c.scenario, c.arm};
      for (auto& f : detail::summary_fields(c)) row.push_back(f);
      csv::write_row(os, row);
    }
    return;
  }
  std::vector<std::string> header = {"scenario"};
  for (auto& n : detail::summary_names("_balancing")) header.push_back(n);
  for (auto& n : detail::summary_names("_unadjusted")) header.push_back(n);
  csv::write_row(os, header);
  for (const auto& name : res.scenario_order) {
    std::vector<std::string> row = {name};
    bool any = false;
    for (const char* arm : {"balancing", "unadjusted"}) {
      auto it = std::find_if(cells.begin(), cells.end(),
                             [&](const CellSummary& c) { return c.scenario == name && c.arm == arm; });
      if (it == cells.end()) {
        for (std::size_t i = 0; i < detail::summary_names("").size(); ++i) row.push_back("NA");
      } else {
        any = true;
        for (auto& f : detail::summary_fields(*it)) row.push_back(f);
      }
    }
    if (any) csv::write_row(os, row);
  }
}

/// Long format: scenario, arm, scorer, replicate, auc, aucpr, wilcoxon_z.
/// Failed replicates are omitted (they appear in the records file).
inline void emit_discrimination(const StudyResult& res, std::ostream& os) {
  if (res.records.empty()) throw data_error("study result is empty");
  csv::write_row(os, {"scenario", "arm", "scorer", "replicate", "auc", "aucpr", "wilcoxon_z"});
  for (const auto& r : res.records) {
    if (r.error) continue;
    for (int s = 0; s < 2; ++s) {
      const auto& m = s == 0 ? r.index : r.count;
      csv::write_row(os, {r.scenario, r.arm, s == 0 ? "index" : "symptom_count",
                          std::to_string(r.replicate), csv::num(m.auc), csv::num(m.aucpr),
                          csv::num(m.wilcoxon_z)});
    }
  }
}

/// One row per replicate record, including failures and their messages.
inline void emit_records(const StudyResult& res, std::ostream& os) {
  csv::write_row(os, {"scenario", "arm", "replicate", "status", "lambda", "n_selected", "tpr",
                      "tnr", "tau", "auc_index", "aucpr_index", "z_index", "auc_count",
                      "aucpr_count", "z_count", "error"});
  const auto opt = [](const std::optional<double>& v) { return v ? csv::num(*v) : std::string("NA"); };
  for (const auto& r : res.records) {
    if (r.error) {
      csv::write_row(os, {r.scenario, r.arm, std::to_string(r.replicate), "error", "NA", "NA",
                          "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", *r.error});
      continue;
    }
    csv::write_row(os, {r.scenario, r.arm, std::to_string(r.replicate), "ok", csv::num(r.lambda),
                        std::to_string(r.selection.n_selected), opt(r.selection.tpr_value),
                        opt(r.selection.tnr_value), opt(r.selection.kendall_tau_value),
                        csv::num(r.index.auc), csv::num(r.index.aucpr), csv::num(r.index.wilcoxon_z),
                        csv::num(r.count.auc), csv::num(r.count.aucpr), csv::num(r.count.wilcoxon_z),
                        ""});
  }
}

}  // namespace nuidx

// nuidx command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nuidx/nuidx.hpp"

namespace fs = std::filesystem;
using namespace nuidx;

namespace {

struct Common {
  std::string config;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
};

struct CvFlags {
  std::optional<std::size_t> folds, n_lambda;
  std::optional<double> min_ratio;
  std::optional<std::string> rule, loss;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--folds", folds, "CV folds");
    app->add_option("--n-lambda", n_lambda, "lambda path length");
    app->add_option("--min-ratio", min_ratio, "smallest lambda as a fraction of lambda_max");
    app->add_option("--rule", rule, "lambda rule: one_se or min");
    app->add_option("--loss", loss, "CV loss: deviance or misclassification");
    app->add_option("--cv-seed", seed, "CV fold seed");
  }
  void apply(glm::CvOptions& cv) const {
    if (folds) cv.folds = *folds;
    if (n_lambda) cv.n_lambda = *n_lambda;
    if (min_ratio) cv.min_ratio = *min_ratio;
    if (rule) cv.rule = glm::parse_rule(*rule);
    if (loss) cv.loss = glm::parse_loss(*loss);
    if (seed) cv.seed = *seed;
  }
};

RunConfig resolve(const Common& c, const CvFlags* cv = nullptr) {
  RunConfig rc = c.config.empty() ? parse_config(nlohmann::json::object()) : load_config(c.config);
  if (c.out_dir) rc.output_dir = *c.out_dir;
  if (c.workers) rc.workers = *c.workers;
  if (cv) cv->apply(rc.cv);
  rc.study.workers = rc.pipeline.workers = rc.workers;
  rc.study.cv = rc.pipeline.cv = rc.cv;
  return rc;
}

fs::path out_path(const RunConfig& rc, const std::optional<std::string>& explicit_path,
                  const char* default_name) {
  if (explicit_path) return *explicit_path;
  return fs::path(rc.output_dir) / default_name;
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& f) {
  auto os = open_output(p);
  f(os);
  std::cerr << "wrote " << p.string() << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Weighting weighting_flag(const std::optional<std::string>& flag, Weighting fallback) {
  return flag ? parse_weighting(*flag) : fallback;
}

void theory_outputs(const TheoryConfig& t, const fs::path& curves, const fs::path& region) {
  write_file(curves, [&](std::ostream& os) {
    csv::write_row(os, {"beta1", "or_unconfounded", "or_unadjusted", "or_weighted"});
    for (std::size_t s = 0; s <= t.steps; ++s) {
      const double b1 = t.beta1_min + (t.beta1_max - t.beta1_min) * static_cast<double>(s) /
                                          static_cast<double>(std::max<std::size_t>(t.steps, 1));
      std::vector<std::string> row = {csv::num(b1)};
      try {
        row.push_back(csv::num(theory::or_closed_form({t.alpha, t.pi, t.beta0, b1})));
      } catch (const domain_error&) {
        continue;
      }
      try {
        const auto jt = theory::build_confounded_joint(t.alpha, t.pi, t.beta0, b1, t.design);
        row.push_back(csv::num(theory::or_from_joint(jt, false)));
        row.push_back(csv::num(theory::or_from_joint(jt, true)));
      } catch (const std::exception&) {
        row.push_back("NA");
        row.push_back("NA");
      }
      csv::write_row(os, row);
    }
  });
  write_file(region, [&](std::ostream& os) {
    csv::write_row(os, {"pi", "beta0", "in_region"});
    const std::size_t m = std::max<std::size_t>(t.region_steps, 1);
    for (std::size_t i = 1; i < m; ++i)
      for (std::size_t j = 1; j < m; ++j) {
        const double pi = static_cast<double>(i) / static_cast<double>(m);
        const double b0 = static_cast<double>(j) / static_cast<double>(m);
        csv::write_row(os, {csv::num(pi), csv::num(b0),
                            theory::attenuation_region(pi, b0) ? "1" : "0"});
      }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nuidx: indices from negative-unlabeled data"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-o,--out-dir", common.out_dir,
                 "output directory (default: $NUIDX_OUTPUT_DIR or .)");
  app.add_option("-j,--workers", common.workers, "worker threads (0 = all cores)");

  // simulate ---------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "sample a cohort from a scenario");
  sim->alias("datagen");
  std::string sim_scenario = "medium_uncorrelated";
  std::optional<std::string> sim_file, sim_out, sim_dump;
  std::optional<std::size_t> sim_n;
  std::optional<std::uint64_t> sim_seed;
  bool sim_truth = false, sim_list = false;
  sim->add_option("-s,--scenario", sim_scenario, "built-in scenario name");
  sim->add_option("--scenario-file", sim_file, "JSON scenario spec")->check(CLI::ExistingFile);
  sim->add_option("-n,--n", sim_n, "cohort size");
  sim->add_option("--seed", sim_seed, "sampling seed");
  sim->add_option("--out", sim_out, "cohort CSV path (default <out-dir>/cohort.csv)");
  sim->add_option("--dump-scenario", sim_dump, "also write the resolved scenario as JSON");
  sim->add_flag("--with-truth", sim_truth, "add the latent label column y_latent");
  sim->add_flag("--list", sim_list, "list built-in scenarios and exit");

  // study ------------------------------------------------------------------
  auto* study = app.add_subcommand("study", "replicated simulation study");
  std::optional<std::string> st_scen, st_arms;
  std::optional<std::size_t> st_reps, st_n;
  std::optional<std::uint64_t> st_seed;
  CvFlags st_cv;
  study->add_option("--scenarios", st_scen, "comma-separated scenario names (default: all)");
  study->add_option("-r,--replicates", st_reps, "replicates per scenario");
  study->add_option("-n,--n", st_n, "cohort size");
  study->add_option("--seed", st_seed, "master seed");
  study->add_option("--arms", st_arms, "unadjusted, balancing, both or auto");
  st_cv.add(study);

  // fit --------------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "cross-validated lasso on a cohort CSV");
  std::string fit_cohort;
  std::optional<std::string> fit_weights;
  CvFlags fit_cv;
  fit->add_option("--cohort", fit_cohort, "cohort CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--weights", fit_weights, "balancing weights: on, off or auto");
  fit_cv.add(fit);

  // index ------------------------------------------------------------------
  auto* idx = app.add_subcommand("index", "score a cohort with a coefficients CSV");
  std::string idx_coef, idx_cohort;
  std::optional<std::string> idx_out;
  idx->add_option("--coefficients", idx_coef, "coefficients CSV")->required()->check(CLI::ExistingFile);
  idx->add_option("--cohort", idx_cohort, "cohort CSV")->required()->check(CLI::ExistingFile);
  idx->add_option("--out", idx_out, "scores CSV path (default <out-dir>/scores.csv)");

  // metrics ----------------------------------------------------------------
  auto* met = app.add_subcommand("metrics", "discrimination metrics of a scores CSV");
  std::string met_scores, met_label = "infected";
  std::optional<std::string> met_out;
  met->add_option("--scores", met_scores, "scores CSV")->required()->check(CLI::ExistingFile);
  met->add_option("--label", met_label, "0/1 label column to discriminate");
  met->add_option("--out", met_out, "metrics CSV path (default <out-dir>/metrics.csv)");

  // curve ------------------------------------------------------------------
  auto* cur = app.add_subcommand("curve", "cross-validated threshold curves");
  std::string cur_cohort;
  std::optional<std::string> cur_weights;
  std::optional<std::size_t> cur_folds;
  CvFlags cur_cv;
  cur->add_option("--cohort", cur_cohort, "cohort CSV")->required()->check(CLI::ExistingFile);
  cur->add_option("--weights", cur_weights, "balancing weights: on, off or auto");
  cur->add_option("--curve-folds", cur_folds, "outer folds");
  cur_cv.add(cur);

  // theory -----------------------------------------------------------------
  auto* th = app.add_subcommand("theory", "odds-ratio curves and region grid");
  std::optional<double> th_alpha, th_pi, th_beta0, th_bmin, th_bmax, th_pz, th_raz, th_rxz;
  std::optional<std::size_t> th_steps;
  th->add_option("--alpha", th_alpha);
  th->add_option("--pi", th_pi);
  th->add_option("--beta0", th_beta0);
  th->add_option("--beta1-min", th_bmin);
  th->add_option("--beta1-max", th_bmax);
  th->add_option("--steps", th_steps);
  th->add_option("--pz", th_pz);
  th->add_option("--rr-az", th_raz);
  th->add_option("--rr-xz", th_rxz);

  // pipeline ---------------------------------------------------------------
  auto* pipe = app.add_subcommand("pipeline", "weights, fit, index, scores and curves in one run");
  std::string pipe_cohort;
  std::optional<std::string> pipe_weights;
  std::optional<std::size_t> pipe_folds;
  CvFlags pipe_cv;
  pipe->add_option("--cohort", pipe_cohort, "cohort CSV")->required()->check(CLI::ExistingFile);
  pipe->add_option("--weights", pipe_weights, "balancing weights: on, off or auto");
  pipe->add_option("--curve-folds", pipe_folds, "outer folds of the threshold curves");
  pipe_cv.add(pipe);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      if (sim_list) {
        for (const auto& s : builtin_scenarios()) std::cout << s.name << '\n';
        return 0;
      }
      const auto rc = resolve(common);
      ScenarioSpec spec;
      if (sim_file) {
        std::ifstream is(*sim_file);
        nlohmann::json j;
        try {
          is >> j;
        } catch (const nlohmann::json::exception& e) {
          throw config_error(*sim_file + ": " + e.what());
        }
        spec = scenario_from_json(j);
      } else {
        spec = find_scenario(sim_scenario);
      }
      if (sim_n) spec.n = *sim_n;
      if (sim_seed) spec.seed = *sim_seed;
      const auto c = sample_cohort(spec);
      write_file(out_path(rc, sim_out, "cohort.csv"),
                 [&](std::ostream& os) { write_cohort_csv(c, os, sim_truth); });
      if (sim_dump) write_file(*sim_dump, [&](std::ostream& os) { os << to_json(spec).dump(2) << '\n'; });
    } else if (*study) {
      auto rc = resolve(common, &st_cv);
      auto& sc = rc.study;
      if (st_scen) {
        sc.scenarios.clear();
        for (const auto& name : split_list(*st_scen)) sc.scenarios.push_back(find_scenario(name));
      }
      if (st_reps) sc.replicates = *st_reps;
      if (st_n) sc.n = *st_n;
      if (st_seed) sc.master_seed = *st_seed;
      if (st_arms) sc.arms = parse_arms(*st_arms);
      const auto res = run_study(sc);
      const fs::path dir = rc.output_dir;
      write_file(dir / "records.csv", [&](std::ostream& os) { emit_records(res, os); });
      write_file(dir / "table_main.csv", [&](std::ostream& os) { emit_table(res, TableStyle::main, os); });
      write_file(dir / "table_confounding.csv",
                 [&](std::ostream& os) { emit_table(res, TableStyle::confounding, os); });
      write_file(dir / "discrimination.csv", [&](std::ostream& os) { emit_discrimination(res, os); });
      nlohmann::json m;
      m["tool"] = "nuidx";
      m["version"] = kVersion;
      m["replicates"] = sc.replicates;
      m["n"] = sc.n ? nlohmann::json(*sc.n) : nlohmann::json("per scenario");
      m["master_seed"] = sc.master_seed;
      m["arms"] = to_string(sc.arms);
      m["cv"] = to_json(sc.cv);
      m["scenarios"] = nlohmann::json::array();
      for (const auto& s : sc.scenarios) m["scenarios"].push_back(to_json(s));
      m["decisions"] = decision_flags(sc.cv);
      write_file(dir / "manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
      const auto failed = res.failed_cells();
      if (!failed.empty()) {
        std::cerr << "error: every replicate failed in:";
        for (const auto& f : failed) std::cerr << ' ' << f;
        std::cerr << '\n';
        return 3;
      }
    } else if (*fit) {
      auto rc = resolve(common, &fit_cv);
      rc.pipeline.weighting = weighting_flag(fit_weights, rc.pipeline.weighting);
      const auto c = read_cohort_csv(fit_cohort);
      const auto f = fit_index(c, rc.pipeline);
      const fs::path dir = rc.output_dir;
      write_file(dir / "coefficients.csv", [&](std::ostream& os) {
        write_coefficients(c.feature_names, f.fit.final_coefficients(), os);
      });
      write_file(dir / "cv_profile.csv", [&](std::ostream& os) { write_cv_profile(f.fit, os); });
    } else if (*idx) {
      const auto rc = resolve(common);
      const auto c = read_cohort_csv(idx_cohort);
      const auto model = read_coefficients(idx_coef, c.feature_names);
      for (const auto& name : negative_weight_names(c.feature_names, model))
        std::cerr << "warning: negative index weight for " << name << '\n';
      write_file(out_path(rc, idx_out, "scores.csv"), [&](std::ostream& os) {
        write_scores(c, score(model, c.x), symptom_count(c.x), os);
      });
    } else if (*met) {
      const auto rc = resolve(common);
      const auto t = csv::read(met_scores);
      const auto column = [&](const std::string& name) {
        const int j = t.column(name);
        if (j < 0) throw data_error(met_scores + ": missing column '" + name + "'");
        return j;
      };
      const auto lc = column(met_label);
      std::vector<std::uint8_t> y;
      for (std::size_t r = 0; r < t.rows.size(); ++r)
        y.push_back(detail::parse_binary(t.rows[r][lc], r + 1, met_label));
      write_file(out_path(rc, met_out, "metrics.csv"), [&](std::ostream& os) {
        csv::write_row(os, {"scorer", "auc", "aucpr", "wilcoxon_z"});
        for (const char* col : {"index", "symptom_count"}) {
          const auto sc = column(col);
          std::vector<double> s;
          for (std::size_t r = 0; r < t.rows.size(); ++r) {
            try {
              s.push_back(std::stod(t.rows[r][sc]));
            } catch (const std::exception&) {
              throw data_error(met_scores + ": row " + std::to_string(r + 1) + ", column " + col +
                               ": not a number");
            }
          }
          csv::write_row(os, {col, csv::num(metrics::auc(s, y)), csv::num(metrics::aucpr(s, y)),
                              csv::num(metrics::wilcoxon_statistic(s, y))});
        }
      });
    } else if (*cur) {
      auto rc = resolve(common, &cur_cv);
      rc.pipeline.weighting = weighting_flag(cur_weights, rc.pipeline.weighting);
      if (cur_folds) rc.pipeline.curve_folds = *cur_folds;
      const auto c = read_cohort_csv(cur_cohort);
      const auto r = cv_threshold_curve(c, rc.pipeline);
      const fs::path dir = rc.output_dir;
      write_file(dir / "curve.csv", [&](std::ostream& os) { write_curve(r, os); });
      write_file(dir / "curve_average.csv", [&](std::ostream& os) { write_curve_average(r, os); });
    } else if (*th) {
      auto rc = resolve(common);
      auto& t = rc.theory;
      if (th_alpha) t.alpha = *th_alpha;
      if (th_pi) t.pi = *th_pi;
      if (th_beta0) t.beta0 = *th_beta0;
      if (th_bmin) t.beta1_min = *th_bmin;
      if (th_bmax) t.beta1_max = *th_bmax;
      if (th_steps) t.steps = *th_steps;
      if (th_pz) t.design.pz = *th_pz;
      if (th_raz) t.design.rr_az = *th_raz;
      if (th_rxz) t.design.rr_xz = *th_rxz;
      const fs::path dir = rc.output_dir;
      theory_outputs(t, dir / "theory_curves.csv", dir / "region_grid.csv");
    } else if (*pipe) {
      auto rc = resolve(common, &pipe_cv);
      rc.pipeline.weighting = weighting_flag(pipe_weights, rc.pipeline.weighting);
      if (pipe_folds) rc.pipeline.curve_folds = *pipe_folds;
      const auto art = run_pipeline(pipe_cohort, rc.pipeline, rc.output_dir);
      for (const auto& f : art.files) std::cerr << "wrote " << f.string() << '\n';
    }
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

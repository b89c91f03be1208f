/*
 * Copyright 2026 The labalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "labalign/alignment.hpp"
#include "labalign/datagen.hpp"
#include "labalign/datasets.hpp"
#include "labalign/error.hpp"
#include "labalign/harness/config.hpp"
#include "labalign/harness/experiments.hpp"
#include "labalign/harness/report.hpp"

namespace {

using namespace labalign;
using namespace labalign::harness;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitViolation = 3;

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string format = "csv";
  std::string solver;
  std::string step = "auto";
  int iterations = 5000;
  int jobs = 0;
  bool no_timestamp = false;
  nlohmann::json config = nlohmann::json::object();
};

// Fills `value` from the config file unless the flag was given explicitly.
template <typename T>
void merge(const CLI::Option* option, const nlohmann::json& config,
           const std::string& key, T& value) {
  if (option != nullptr && option->count() > 0) return;
  value = config_value<T>(config, key, value);
}

StepSize parse_step(const std::string& text) {
  if (text == "auto") return StepSize::automatic();
  if (text == "inverse-two-sigma") return StepSize::inverse_two_sigma();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(value >= 0.0)) {
    throw std::invalid_argument("step must be auto, inverse-two-sigma or a number >= 0");
  }
  return StepSize::fixed(value);
}

Mode parse_mode(const std::string& text) {
  if (text == "label-align") return Mode::kLabelAlign;
  if (text == "unregularized") return Mode::kUnregularized;
  if (text == "l2") return Mode::kL2;
  throw std::invalid_argument("mode must be label-align, unregularized or l2");
}

TaskKind parse_task(const std::string& text) {
  if (text == "classification") return TaskKind::kClassification;
  if (text == "regression") return TaskKind::kRegression;
  throw std::invalid_argument("task must be classification or regression");
}

SolverOptions solver_options(const Common& common, Solver fallback) {
  SolverOptions out;
  out.solver = common.solver.empty() ? fallback : parse_solver(common.solver);
  out.iterations = common.iterations;
  out.step = parse_step(common.step);
  out.jobs = common.jobs;
  if (out.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  return out;
}

int finish(const RunReport& report, const Common& common) {
  const auto paths = write_report(report, common.out, parse_format(common.format),
                                  !common.no_timestamp);
  for (const auto& path : paths) std::cout << "wrote " << path.string() << "\n";
  std::cout << report.summary.dump(2) << "\n";
  if (!report.violations.empty()) {
    for (const auto& v : report.violations) std::cerr << "violation: " << v << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-alignment regularization for unsupervised domain adaptation"};
  app.set_version_flag("--version", std::string(LABALIGN_VERSION));
  app.require_subcommand(1);

  Common common;
  auto* config_opt = app.add_option("--config", common.config_path,
                                    "JSON or key = value configuration file");
  auto* seed_opt = app.add_option("--seed", common.seed, "Random seed");
  auto* out_opt = app.add_option("--out", common.out, "Output directory");
  auto* format_opt = app.add_option("--format", common.format, "Report format")
                         ->check(CLI::IsMember({"csv", "json"}));
  auto* solver_opt = app.add_option("--solver", common.solver, "gd or closed")
                         ->check(CLI::IsMember({"gd", "closed"}));
  auto* step_opt = app.add_option("--step", common.step,
                                  "Gradient step: auto, inverse-two-sigma or a number");
  auto* iter_opt = app.add_option("--iterations", common.iterations, "Gradient steps");
  auto* jobs_opt = app.add_option("--jobs", common.jobs, "Worker threads (0 = all cores)");
  app.add_flag("--no-timestamp", common.no_timestamp, "Omit the timestamp from reports");
  for (auto* opt : {config_opt, seed_opt, out_opt, format_opt, solver_opt, step_opt,
                    iter_opt, jobs_opt}) {
    opt->configurable(false);
  }
  app.fallthrough();

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "Label alignment statistics of a dataset");
  std::string diag_csv, diag_mnist, diag_usps, diag_pair = "0-1";
  bool diag_synth = false;
  std::vector<double> diag_eps{0.1};
  diagnose->add_option("--data", diag_csv, "Feature CSV with a label column");
  diagnose->add_option("--mnist", diag_mnist, "MNIST directory (train split)");
  diagnose->add_option("--usps", diag_usps, "USPS directory (train split)");
  diagnose->add_option("--pair", diag_pair, "Digit pair for image data");
  diagnose->add_flag("--synth", diag_synth, "Source domain of the synthetic task");
  auto* diag_eps_opt = diagnose->add_option("--eps", diag_eps, "Tail tolerances")->delimiter(',');

  // synth
  auto* synth = app.add_subcommand("synth", "Rotated-Gaussian experiment");
  SynthOptions synth_options;
  std::string synth_task_name = "classification";
  auto* s_task = synth->add_option("--task", synth_task_name, "classification or regression");
  auto* s_runs = synth->add_option("--runs", synth_options.runs, "Independent seeds");
  auto* s_ns = synth->add_option("--n-source", synth_options.spec.n_source);
  auto* s_nt = synth->add_option("--n-target", synth_options.spec.n_target);
  auto* s_major = synth->add_option("--sigma-major", synth_options.spec.sigma_major);
  auto* s_minor = synth->add_option("--sigma-minor", synth_options.spec.sigma_minor);
  auto* s_rot = synth->add_option("--rotation", synth_options.spec.rotation_deg, "Degrees");
  auto* s_lambdas = synth->add_option("--lambdas", synth_options.lambdas)->delimiter(',');
  auto* s_l2 = synth->add_option("--l2", synth_options.l2_coefficients)->delimiter(',');
  auto* s_cut = synth->add_option("--cutoff", synth_options.cutoff, "k = k~");
  auto* s_val = synth->add_option("--validation-size", synth_options.validation_size);

  // mnist-usps
  auto* mu = app.add_subcommand("mnist-usps", "Binary MNIST-USPS transfer tasks");
  std::string mu_mnist, mu_usps, mu_pairs;
  std::vector<double> mu_ratios;
  bool mu_all = false;
  Index mu_val = 100;
  auto* mu_mnist_opt = mu->add_option("--mnist", mu_mnist, "MNIST IDX directory");
  auto* mu_usps_opt = mu->add_option("--usps", mu_usps, "USPS CSV directory");
  auto* mu_pairs_opt = mu->add_option("--pairs", mu_pairs, "Digit pairs, e.g. 0-1,2-3");
  auto* mu_ratio_opt = mu->add_option("--ratio", mu_ratios,
                                      "M->U columns with these lower-digit ratios")
                           ->delimiter(',');
  mu->add_flag("--all-pairs", mu_all, "All 45 digit pairs");
  auto* mu_val_opt = mu->add_option("--validation-size", mu_val);

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Check the solution-distance bounds");
  BoundCheckOptions bound_options;
  auto* b_count = bounds->add_option("--count", bound_options.count, "Random instances");

  // emergence
  auto* emergence = app.add_subcommand("emergence", "Correlated-features alignment demo");
  EmergenceOptions emergence_options;
  int e_seeds = 5;
  auto* e_noise = emergence->add_option("--noise", emergence_options.noise_levels)
                      ->delimiter(',');
  auto* e_seed_opt = emergence->add_option("--seeds", e_seeds, "Seeds per noise level");

  // train
  auto* train = app.add_subcommand("train", "Fit one configuration to CSV data");
  std::string t_source, t_target, t_mode = "label-align", t_metric = "accuracy";
  AdaptConfig t_config;
  train->add_option("--source", t_source, "Labeled source CSV")->required();
  train->add_option("--target", t_target, "Target CSV (labels optional)")->required();
  auto* t_mode_opt = train->add_option("--mode", t_mode, "label-align, unregularized or l2");
  auto* t_lambda = train->add_option("--lambda", t_config.lambda);
  auto* t_k = train->add_option("--k", t_config.source_cutoff);
  auto* t_kt = train->add_option("--k-tilde", t_config.target_cutoff);
  auto* t_l2 = train->add_option("--l2", t_config.l2_coefficient, "Ridge coefficient");
  auto* t_metric_opt = train->add_option("--metric", t_metric, "accuracy, f1 or mse");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Validated hyperparameter sweep on CSV data");
  std::string w_source, w_target, w_metric = "accuracy";
  SweepGrid w_grid;
  Index w_val = 100;
  sweep->add_option("--source", w_source, "Labeled source CSV")->required();
  sweep->add_option("--target", w_target, "Labeled target CSV")->required();
  auto* w_lambdas = sweep->add_option("--lambdas", w_grid.lambdas)->delimiter(',');
  auto* w_k = sweep->add_option("--k", w_grid.source_cutoffs)->delimiter(',');
  auto* w_kt = sweep->add_option("--k-tilde", w_grid.target_cutoffs)->delimiter(',');
  auto* w_metric_opt = sweep->add_option("--metric", w_metric, "accuracy, f1 or mse");
  auto* w_val_opt = sweep->add_option("--validation-size", w_val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!common.config_path.empty()) common.config = load_config(common.config_path);
    const nlohmann::json& cfg = common.config;
    merge(seed_opt, cfg, "seed", common.seed);
    merge(out_opt, cfg, "out", common.out);
    merge(format_opt, cfg, "format", common.format);
    merge(solver_opt, cfg, "solver", common.solver);
    merge(step_opt, cfg, "step", common.step);
    merge(iter_opt, cfg, "iterations", common.iterations);
    merge(jobs_opt, cfg, "jobs", common.jobs);
    if (!app.get_option("--no-timestamp")->count()) {
      common.no_timestamp = !config_value<bool>(cfg, "timestamp", !common.no_timestamp);
    }

    if (diagnose->parsed()) {
      merge(diag_eps_opt, cfg, "diagnose.eps", diag_eps);
      const int sources = !diag_csv.empty() + !diag_mnist.empty() + !diag_usps.empty() +
                          diag_synth;
      if (sources != 1) {
        throw std::invalid_argument("diagnose needs exactly one of --data, --mnist, --usps, --synth");
      }
      std::string name;
      std::optional<LabeledDomain> data;
      if (!diag_csv.empty()) {
        CsvMatrix csv = load_matrix_csv(diag_csv);
        if (!csv.labels) throw DataError(diag_csv + ": a 'label' column is required");
        data = LabeledDomain{DesignMatrix::with_bias(csv.data), *csv.labels};
        name = diag_csv;
      } else if (diag_synth) {
        SyntheticSpec spec;
        spec.seed = common.seed;
        data = synth_task(spec).source;
        name = "synthetic";
      } else {
        const DigitPair pair = parse_pairs(diag_pair).front();
        const bool mnist = !diag_mnist.empty();
        const DigitCorpus corpus = mnist ? load_mnist_dir(diag_mnist) : load_usps_dir(diag_usps);
        data = binary_design(corpus.train, pair.lo, pair.hi);
        name = std::string(mnist ? "mnist " : "usps ") + diag_pair;
      }
      RunReport report = run_diagnose(name, data->design, data->labels, diag_eps);
      report.seed = common.seed;
      return finish(report, common);
    }

    if (synth->parsed()) {
      merge(s_task, cfg, "synth.task", synth_task_name);
      merge(s_runs, cfg, "synth.runs", synth_options.runs);
      merge(s_ns, cfg, "synth.n_source", synth_options.spec.n_source);
      merge(s_nt, cfg, "synth.n_target", synth_options.spec.n_target);
      merge(s_major, cfg, "synth.sigma_major", synth_options.spec.sigma_major);
      merge(s_minor, cfg, "synth.sigma_minor", synth_options.spec.sigma_minor);
      merge(s_rot, cfg, "synth.rotation_deg", synth_options.spec.rotation_deg);
      merge(s_lambdas, cfg, "synth.lambdas", synth_options.lambdas);
      merge(s_l2, cfg, "synth.l2", synth_options.l2_coefficients);
      merge(s_cut, cfg, "synth.cutoff", synth_options.cutoff);
      merge(s_val, cfg, "synth.validation_size", synth_options.validation_size);
      synth_options.spec.task = parse_task(synth_task_name);
      synth_options.spec.seed = common.seed;
      synth_options.solver = solver_options(common, Solver::kClosedForm);
      return finish(run_synth(synth_options), common);
    }

    if (mu->parsed()) {
      merge(mu_mnist_opt, cfg, "mnist_usps.mnist", mu_mnist);
      merge(mu_usps_opt, cfg, "mnist_usps.usps", mu_usps);
      merge(mu_pairs_opt, cfg, "mnist_usps.pairs", mu_pairs);
      merge(mu_ratio_opt, cfg, "mnist_usps.ratios", mu_ratios);
      merge(mu_val_opt, cfg, "mnist_usps.validation_size", mu_val);
      if (mu_mnist.empty() || mu_usps.empty()) {
        throw std::invalid_argument("mnist-usps needs --mnist and --usps directories");
      }
      MnistUspsOptions options;
      if (mu_all) {
        options.pairs = all_pairs();
      } else if (!mu_pairs.empty()) {
        options.pairs = parse_pairs(mu_pairs);
      }
      if (!mu_ratios.empty()) {
        options.columns.clear();
        for (const double r : mu_ratios) options.columns.push_back(ratio_column(r));
      }
      options.seed = common.seed;
      options.validation_size = mu_val;
      options.solver = solver_options(common, Solver::kGradientDescent);
      const DigitCorpus mnist = load_mnist_dir(mu_mnist);
      const DigitCorpus usps = load_usps_dir(mu_usps);
      return finish(run_mnist_usps(mnist, usps, options), common);
    }

    if (bounds->parsed()) {
      merge(b_count, cfg, "bounds.count", bound_options.count);
      bound_options.seed = common.seed;
      return finish(run_bound_check(bound_options), common);
    }

    if (emergence->parsed()) {
      merge(e_noise, cfg, "emergence.noise", emergence_options.noise_levels);
      merge(e_seed_opt, cfg, "emergence.seeds", e_seeds);
      if (e_seeds < 1) throw std::invalid_argument("seeds must be >= 1");
      emergence_options.seeds.clear();
      for (int i = 0; i < e_seeds; ++i) {
        emergence_options.seeds.push_back(common.seed + static_cast<std::uint64_t>(i));
      }
      return finish(run_emergence(emergence_options), common);
    }

    if (train->parsed()) {
      merge(t_mode_opt, cfg, "train.mode", t_mode);
      merge(t_lambda, cfg, "train.lambda", t_config.lambda);
      merge(t_k, cfg, "train.k", t_config.source_cutoff);
      merge(t_kt, cfg, "train.k_tilde", t_config.target_cutoff);
      merge(t_l2, cfg, "train.l2", t_config.l2_coefficient);
      merge(t_metric_opt, cfg, "train.metric", t_metric);
      t_config.mode = parse_mode(t_mode);
      const CsvTask task = load_csv_task(t_source, t_target);
      RunReport report = run_train(task, t_config, solver_options(common, Solver::kClosedForm),
                                   parse_metric(t_metric));
      report.seed = common.seed;
      return finish(report, common);
    }

    if (sweep->parsed()) {
      merge(w_lambdas, cfg, "sweep.lambdas", w_grid.lambdas);
      merge(w_k, cfg, "sweep.k", w_grid.source_cutoffs);
      merge(w_kt, cfg, "sweep.k_tilde", w_grid.target_cutoffs);
      merge(w_metric_opt, cfg, "sweep.metric", w_metric);
      merge(w_val_opt, cfg, "sweep.validation_size", w_val);
      w_grid.metric = parse_metric(w_metric);
      const CsvTask task = load_csv_task(w_source, w_target);
      return finish(run_csv_sweep(task, w_grid, solver_options(common, Solver::kClosedForm),
                                  w_val, common.seed),
                    common);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ViolationError& e) {
    std::cerr << "violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

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

#include "labalign/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "labalign/alignment.hpp"
#include "labalign/error.hpp"
#include "labalign/rng.hpp"

namespace labalign::harness {
namespace {

constexpr std::uint64_t kSynthSplitStream = 21;
constexpr std::uint64_t kCsvSplitStream = 22;
constexpr double kBoundSlack = 1e-9;

std::int64_t as_int(Index v) { return static_cast<std::int64_t>(v); }

std::string task_name(TaskKind kind) {
  return kind == TaskKind::kClassification ? "classification" : "regression";
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<Index> shuffled_indices(Index count, std::uint64_t seed) {
  std::vector<Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(order));
  return order;
}

TargetSplit split_target(const Matrix& design, const Vector& labels,
                         Index validation_size, std::uint64_t seed) {
  if (validation_size < 1 || validation_size >= design.rows()) {
    throw DataError("validation size must lie in [1, target rows)");
  }
  const std::vector<Index> order = shuffled_indices(design.rows(), seed);
  std::vector<Index> validation(order.begin(), order.begin() + validation_size);
  std::vector<Index> evaluation(order.begin() + validation_size, order.end());
  std::sort(validation.begin(), validation.end());
  std::sort(evaluation.begin(), evaluation.end());
  return {select_rows(design, labels, validation),
          select_rows(design, labels, evaluation)};
}

nlohmann::ordered_json step_json(const StepSize& step) {
  switch (step.rule) {
    case StepSize::Rule::kAuto:
      return "auto";
    case StepSize::Rule::kInverseTwoSigma:
      return "inverse-two-sigma";
    case StepSize::Rule::kFixed:
      break;
  }
  return step.value;
}

nlohmann::ordered_json solver_json(const SolverOptions& options) {
  nlohmann::ordered_json out;
  out["solver"] = std::string(solver_name(options.solver));
  if (options.solver == Solver::kGradientDescent) {
    out["iterations"] = options.iterations;
    out["step"] = step_json(options.step);
  }
  return out;
}

void add_weight_columns(std::vector<std::string>& columns, Index d) {
  for (Index j = 0; j < d; ++j) {
    columns.push_back(j + 1 == d ? "w_bias" : "w_" + std::to_string(j + 1));
  }
}

void append_weights(std::vector<Cell>& row, const Vector& w) {
  for (Index j = 0; j < w.size(); ++j) row.emplace_back(w(j));
}

}  // namespace

SolutionReport fit(const RegularizedProblem& prob, const AdaptConfig& config,
                   const SolverOptions& options) {
  AdaptConfig effective = config;
  effective.iterations = options.iterations;
  effective.step = options.step;
  const RegularizedProblem configured = prob.with_config(effective);
  return options.solver == Solver::kClosedForm ? fit_closed_form(configured)
                                               : fit_gd(configured);
}

RunReport run_synth(const SynthOptions& options) {
  options.spec.validate();
  if (options.runs < 1) throw std::invalid_argument("runs must be >= 1");
  const bool classify = options.spec.task == TaskKind::kClassification;
  const Metric metric = classify ? Metric::kAccuracy : Metric::kMse;

  RunReport report;
  report.command = "synth";
  report.seed = options.spec.seed;

  std::vector<std::string> la_columns{"run", "seed", "lambda", "k", "k_tilde",
                                      "param_distance", "target_metric", "source_metric"};
  std::vector<std::string> l2_columns{"run", "seed", "coefficient", "param_distance",
                                      "target_metric", "source_metric"};
  std::vector<std::string> base_columns{"run", "seed", "param_distance",
                                        "target_metric", "source_metric", "minimum_norm"};
  add_weight_columns(la_columns, 3);
  add_weight_columns(l2_columns, 3);
  add_weight_columns(base_columns, 3);
  Table& la = report.table("label_align", la_columns);
  Table& l2 = report.table("l2", l2_columns);
  Table& base = report.table("unregularized", base_columns);
  Table& selection = report.table(
      "selection", {"run", "seed", "lambda", "k", "k_tilde", "validation_metric",
                    "evaluation_metric"});

  std::vector<std::vector<double>> la_distance(options.lambdas.size());
  std::vector<std::vector<double>> la_metric(options.lambdas.size());
  std::vector<std::vector<double>> l2_distance(options.l2_coefficients.size());
  std::vector<std::vector<double>> l2_metric(options.l2_coefficients.size());
  std::vector<double> base_distance, base_metric;
  nlohmann::ordered_json selected = nlohmann::ordered_json::array();
  int better_runs = 0;

  for (int run = 0; run < options.runs; ++run) {
    SyntheticSpec spec = options.spec;
    spec.seed = options.spec.seed + static_cast<std::uint64_t>(run);
    const SyntheticTask task = synth_task(spec);
    const Vector w_target = target_oracle(task.target.design, task.target.labels);
    const RegularizedProblem prob(task.source.design, task.source.labels,
                                  task.target.design);
    const Matrix& target_x = task.target.design.data();
    const Matrix& source_x = task.source.design.data();
    auto target_metric = [&](const Vector& w) {
      return evaluate(metric, target_x * w, task.target.labels);
    };
    auto source_metric = [&](const Vector& w) {
      return evaluate(metric, source_x * w, task.source.labels);
    };
    const auto seed = static_cast<std::int64_t>(spec.seed);

    AdaptConfig unreg;
    unreg.mode = Mode::kUnregularized;
    const SolutionReport base_fit = fit(prob, unreg, options.solver);
    const double base_d = param_distance(base_fit.weights, w_target);
    const double base_m = target_metric(base_fit.weights);
    base_distance.push_back(base_d);
    base_metric.push_back(base_m);
    std::vector<Cell> base_row{std::int64_t{run}, seed, base_d, base_m,
                               source_metric(base_fit.weights),
                               std::int64_t{base_fit.minimum_norm ? 1 : 0}};
    append_weights(base_row, base_fit.weights);
    base.add_row(std::move(base_row));

    std::vector<Cell> zero_row{std::int64_t{run}, seed, 0.0, std::int64_t{options.cutoff},
                               std::int64_t{options.cutoff}, base_d, base_m,
                               source_metric(base_fit.weights)};
    append_weights(zero_row, base_fit.weights);
    la.add_row(std::move(zero_row));

    double last_metric = base_m;
    for (std::size_t i = 0; i < options.lambdas.size(); ++i) {
      AdaptConfig config;
      config.lambda = options.lambdas[i];
      config.source_cutoff = options.cutoff;
      config.target_cutoff = options.cutoff;
      const SolutionReport sol = fit(prob, config, options.solver);
      const double dist = param_distance(sol.weights, w_target);
      const double m = target_metric(sol.weights);
      la_distance[i].push_back(dist);
      la_metric[i].push_back(m);
      last_metric = m;
      std::vector<Cell> row{std::int64_t{run}, seed, options.lambdas[i],
                            std::int64_t{options.cutoff}, std::int64_t{options.cutoff},
                            dist, m, source_metric(sol.weights)};
      append_weights(row, sol.weights);
      la.add_row(std::move(row));
    }
    if (!options.lambdas.empty() &&
        (classify ? last_metric > base_m : last_metric < base_m)) {
      ++better_runs;
    }

    for (std::size_t i = 0; i < options.l2_coefficients.size(); ++i) {
      AdaptConfig config;
      config.mode = Mode::kL2;
      config.l2_coefficient = options.l2_coefficients[i];
      const SolutionReport sol = fit(prob, config, options.solver);
      const double dist = param_distance(sol.weights, w_target);
      const double m = target_metric(sol.weights);
      l2_distance[i].push_back(dist);
      l2_metric[i].push_back(m);
      std::vector<Cell> row{std::int64_t{run}, seed, options.l2_coefficients[i], dist, m,
                            source_metric(sol.weights)};
      append_weights(row, sol.weights);
      l2.add_row(std::move(row));
    }

    if (!options.lambdas.empty() && options.validation_size > 0) {
      const TargetSplit split =
          split_target(target_x, task.target.labels, options.validation_size,
                       derive_seed(spec.seed, kSynthSplitStream));
      SweepGrid grid;
      grid.lambdas = options.lambdas;
      grid.source_cutoffs = {options.cutoff};
      grid.target_cutoffs = {options.cutoff};
      grid.metric = metric;
      const SweepResult sweep = run_sweep(prob, grid, split, options.solver.sweep());
      const SweepRow& best = sweep.rows[sweep.selected];
      selection.add_row({std::int64_t{run}, seed, best.lambda,
                         std::int64_t{best.source_cutoff}, std::int64_t{best.target_cutoff},
                         best.validation, best.evaluation});
      selected.push_back(best.lambda);
    }
  }

  nlohmann::ordered_json& s = report.summary;
  s["task"] = task_name(options.spec.task);
  s["metric"] = std::string(metric_name(metric));
  s["runs"] = options.runs;
  s["n_source"] = options.spec.n_source;
  s["n_target"] = options.spec.n_target;
  s["sigma_major"] = options.spec.sigma_major;
  s["sigma_minor"] = options.spec.sigma_minor;
  s["rotation_deg"] = options.spec.rotation_deg;
  s["cutoff"] = options.cutoff;
  s["solver"] = solver_json(options.solver);
  s["unregularized"] = {{"param_distance", mean(base_distance)},
                        {"target_metric", mean(base_metric)}};
  nlohmann::ordered_json la_summary = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < options.lambdas.size(); ++i) {
    la_summary.push_back({{"lambda", options.lambdas[i]},
                          {"param_distance", mean(la_distance[i])},
                          {"target_metric", mean(la_metric[i])}});
  }
  s["label_align"] = std::move(la_summary);
  nlohmann::ordered_json l2_summary = nlohmann::ordered_json::array();
  double l2_best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < options.l2_coefficients.size(); ++i) {
    const double dist = mean(l2_distance[i]);
    l2_best = std::min(l2_best, dist);
    l2_summary.push_back({{"coefficient", options.l2_coefficients[i]},
                          {"param_distance", dist},
                          {"target_metric", mean(l2_metric[i])}});
  }
  s["l2"] = std::move(l2_summary);
  s["l2_min_param_distance"] = l2_best;
  s["runs_improved_at_largest_lambda"] = better_runs;
  s["selected_lambdas"] = std::move(selected);
  return report;
}

namespace {

struct BoundInstance {
  std::string kind;
  int index = 0;
  std::uint64_t seed = 0;
  DesignMatrix source;
  Vector y;
  DesignMatrix target;
  Vector y_target;
  int k = 1;
  int k_tilde = 1;
};

struct BoundOutcome {
  BoundPair thm1;
  BoundPair thm2;
};

BoundOutcome evaluate_bounds(const BoundInstance& inst) {
  AdaptConfig config;
  config.lambda = 1.0;
  config.source_cutoff = inst.k;
  config.target_cutoff = inst.k_tilde;
  const RegularizedProblem prob(inst.source, inst.y, inst.target, config);
  const Vector w_target = target_oracle(inst.target, inst.y_target);
  const Vector w_hat = fit_closed_form(prob).weights;
  const LeastSquaresFit w_source =
      source_least_squares(inst.source, inst.y, Mode::kUnregularized);
  if (w_source.minimum_norm) throw SingularSystemError("source Gram matrix singular");
  return {regularized_solution_bound(prob, w_hat, w_target, inst.y_target),
          source_solution_bound(prob, w_source.weights, w_target, inst.y_target)};
}

Matrix gaussian(Rng& rng, Index rows, Index cols) {
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = rng.normal();
  }
  return out;
}

Vector gaussian_vector(Rng& rng, Index size) {
  Vector out(size);
  for (Index i = 0; i < size; ++i) out(i) = rng.normal();
  return out;
}

Index uniform_index(Rng& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

// Source and target share a feature map up to a random linear distortion and
// shift; target weights differ from the source weights by a perturbation.
BoundInstance random_instance(int index, std::uint64_t seed,
                              const BoundCheckOptions& options) {
  Rng rng(seed);
  const Index n = uniform_index(rng, options.min_n, options.max_n);
  const Index d = uniform_index(rng, options.min_d, options.max_d);
  const Index features = d - 1;
  // Redraw until both Gram matrices are numerically nonsingular.
  while (true) {
    const Matrix x = gaussian(rng, n, features);
    const Matrix distortion =
        Matrix::Identity(features, features) + 0.5 * gaussian(rng, features, features);
    const Vector shift = 0.5 * gaussian_vector(rng, features);
    Matrix x_target = gaussian(rng, n, features) * distortion;
    x_target.rowwise() += shift.transpose();
    DesignMatrix source = DesignMatrix::with_bias(x);
    DesignMatrix target = DesignMatrix::with_bias(x_target);
    const Vector w0 = gaussian_vector(rng, d);
    const Vector w1 = w0 + 0.3 * gaussian_vector(rng, d);
    Vector y = source.data() * w0 + 0.1 * gaussian_vector(rng, n);
    Vector y_target = target.data() * w1 + 0.1 * gaussian_vector(rng, n);
    if (decompose(source).rank < d || decompose(target).rank < d) continue;
    BoundInstance inst{"random", index, seed, std::move(source), std::move(y),
                       std::move(target), std::move(y_target), 1, 1};
    inst.k = static_cast<int>(uniform_index(rng, 1, d));
    inst.k_tilde = static_cast<int>(uniform_index(rng, 1, inst.k));
    return inst;
  }
}

}  // namespace

RunReport run_bound_check(const BoundCheckOptions& options) {
  if (options.count < 0) throw std::invalid_argument("count must be >= 0");
  if (options.min_n < options.max_d || options.min_n > options.max_n ||
      options.min_d < 2 || options.min_d > options.max_d) {
    throw std::invalid_argument("bound check needs 2 <= min_d <= max_d <= min_n <= max_n");
  }
  RunReport report;
  report.command = "bounds";
  report.seed = options.seed;
  Table& table = report.table(
      "instances", {"kind", "index", "seed", "n", "d", "k", "k_tilde", "thm1_lhs",
                    "thm1_rhs", "thm1_ratio", "thm2_lhs", "thm2_rhs", "thm2_ratio",
                    "holds"});

  std::vector<BoundInstance> instances;
  for (int i = 0; i < options.count; ++i) {
    const std::uint64_t seed = derive_seed(options.seed, static_cast<std::uint64_t>(i));
    instances.push_back(random_instance(i, seed, options));
  }
  {
    Rng rng(derive_seed(options.seed, 1'000'003));
    const Index n = 40, d = 5;
    DesignMatrix phi = DesignMatrix::with_bias(gaussian(rng, n, d - 1));
    Vector y = gaussian_vector(rng, n);
    instances.push_back({"identical", 0, options.seed, phi, y, phi, y,
                         static_cast<int>(d), static_cast<int>(d)});
  }
  if (options.include_synthetic) {
    SyntheticSpec spec;
    spec.seed = options.seed;
    const SyntheticTask task = synth_task(spec);
    instances.push_back({"synthetic", 0, options.seed, task.source.design,
                         task.source.labels, task.target.design, task.target.labels,
                         1, 1});
  }

  std::vector<double> ratios1, ratios2;
  int evaluated = 0;
  for (BoundInstance& inst : instances) {
    std::optional<BoundOutcome> outcome;
    // A singular regularized system is a property of (k, k~); redraw them.
    Rng redraw(derive_seed(inst.seed, 7));
    for (int attempt = 0; attempt < 50 && !outcome; ++attempt) {
      try {
        outcome = evaluate_bounds(inst);
      } catch (const SingularSystemError&) {
        if (inst.kind != "random") throw;
        const Index d = inst.source.cols();
        inst.k = static_cast<int>(uniform_index(redraw, 1, d));
        inst.k_tilde = static_cast<int>(uniform_index(redraw, 1, inst.k));
      }
    }
    if (!outcome) {
      throw NumericalError("no nonsingular configuration for bound instance seed " +
                           std::to_string(inst.seed));
    }
    ++evaluated;
    const BoundPair& t1 = outcome->thm1;
    const BoundPair& t2 = outcome->thm2;
    auto ratio = [](const BoundPair& p) {
      // Distances at roundoff level count as exact agreement.
      return p.lhs > 1e-12 ? p.rhs / p.lhs : std::numeric_limits<double>::infinity();
    };
    const bool holds = t1.holds(kBoundSlack) && t2.holds(kBoundSlack);
    if (std::isfinite(ratio(t1))) ratios1.push_back(ratio(t1));
    if (std::isfinite(ratio(t2))) ratios2.push_back(ratio(t2));
    if (!holds) {
      std::ostringstream msg;
      msg.precision(17);
      msg << inst.kind << " instance " << inst.index << " (seed " << inst.seed
          << "): thm1 " << t1.lhs << " <= " << t1.rhs << ", thm2 " << t2.lhs
          << " <= " << t2.rhs;
      report.violations.push_back(msg.str());
    }
    table.add_row({inst.kind, std::int64_t{inst.index}, static_cast<std::int64_t>(inst.seed),
                   as_int(inst.source.rows()), as_int(inst.source.cols()),
                   std::int64_t{inst.k}, std::int64_t{inst.k_tilde}, t1.lhs, t1.rhs,
                   ratio(t1), t2.lhs, t2.rhs, ratio(t2), std::int64_t{holds ? 1 : 0}});
  }

  auto stats = [](const std::vector<double>& r) {
    nlohmann::ordered_json out;
    out["min"] = r.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : *std::min_element(r.begin(), r.end());
    out["median"] = median(r);
    out["max"] = r.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : *std::max_element(r.begin(), r.end());
    return out;
  };
  report.summary["instances"] = evaluated;
  report.summary["violations"] = report.violations.size();
  report.summary["slack"] = kBoundSlack;
  report.summary["thm1_ratio"] = stats(ratios1);
  report.summary["thm2_ratio"] = stats(ratios2);
  return report;
}

RunReport run_diagnose(const std::string& dataset, const DesignMatrix& design,
                       const Vector& labels, const std::vector<double>& eps) {
  const AlignmentProfile profile = alignment_profile(design, labels);
  RunReport report;
  report.command = "diagnose";
  Table& summary = report.table("diagnose", {"dataset", "n", "d", "rank", "eps", "k_eps"});
  nlohmann::ordered_json k_values = nlohmann::ordered_json::object();
  for (const double e : eps) {
    const int k = k_epsilon(profile, e);
    summary.add_row({dataset, as_int(profile.n), as_int(profile.d),
                     std::int64_t{profile.rank}, e, std::int64_t{k}});
    std::ostringstream key;
    key << e;
    k_values[key.str()] = k;
  }
  Table& energy = report.table("energy", {"k", "projection_energy"});
  for (int k = 0; k <= profile.rank; ++k) {
    energy.add_row({std::int64_t{k}, projection_energy(profile, k)});
  }
  report.summary["dataset"] = dataset;
  report.summary["n"] = profile.n;
  report.summary["d"] = profile.d;
  report.summary["rank"] = profile.rank;
  report.summary["k_eps"] = std::move(k_values);
  report.summary["in_span_fraction"] =
      std::sqrt(profile.total_energy / profile.label_norm_sq);
  return report;
}

RunReport run_emergence(const EmergenceOptions& options) {
  if (options.correlated < 1 || options.correlated > options.d) {
    throw std::invalid_argument("correlated column count must lie in [1, d]");
  }
  RunReport report;
  report.command = "emergence";
  report.seed = options.seeds.empty() ? 0 : options.seeds.front();
  Table& table = report.table(
      "emergence", {"s", "seed", "delta", "k_hat", "applicable", "bound", "k",
                    "projection", "projection_top1", "projection_top2", "holds"});
  std::vector<Index> correlated(static_cast<std::size_t>(options.correlated));
  std::iota(correlated.begin(), correlated.end(), Index{0});
  int applicable_count = 0;
  for (const double s : options.noise_levels) {
    for (const std::uint64_t seed : options.seeds) {
      const LabeledDomain toy =
          correlated_features_toy(s, seed, options.n, options.d, options.correlated);
      const double delta =
          measured_delta(toy.design, toy.labels, correlated, 0.0).delta;
      // Smallest delta for which every correlated column clears 1 - delta strictly.
      const double threshold = std::nextafter(std::max(delta, 0.0), 1.0);
      const MeasuredDelta measured =
          measured_delta(toy.design, toy.labels, correlated, threshold);
      const auto bound = emergence_lower_bound(
          {measured.k_hat, threshold, static_cast<int>(options.d), s});
      const AlignmentProfile profile = alignment_profile(toy.design, toy.labels);
      const int k = std::clamp(static_cast<int>(options.d) - measured.k_hat + 1, 0,
                               profile.rank);
      const double projection = projection_energy(profile, k);
      const bool holds = !bound || projection >= *bound;
      if (bound) ++applicable_count;
      if (!holds) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "s=" << s << " seed=" << seed << ": projection " << projection
            << " below bound " << *bound;
        report.violations.push_back(msg.str());
      }
      table.add_row({s, static_cast<std::int64_t>(seed), threshold,
                     std::int64_t{measured.k_hat}, std::int64_t{bound ? 1 : 0},
                     bound ? Cell{*bound} : Cell{std::string("")}, std::int64_t{k},
                     projection, projection_energy(profile, std::min(1, profile.rank)),
                     projection_energy(profile, std::min(2, profile.rank)),
                     std::int64_t{holds ? 1 : 0}});
    }
  }
  report.summary["n"] = options.n;
  report.summary["d"] = options.d;
  report.summary["correlated"] = options.correlated;
  report.summary["rows"] = options.noise_levels.size() * options.seeds.size();
  report.summary["applicable"] = applicable_count;
  report.summary["violations"] = report.violations.size();
  return report;
}

std::vector<DigitPair> parse_pairs(const std::string& text) {
  std::vector<DigitPair> pairs;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto dash = item.find('-');
    int lo = -1, hi = -1;
    try {
      if (dash == std::string::npos) throw std::invalid_argument("");
      std::size_t used = 0;
      lo = std::stoi(item.substr(0, dash), &used);
      if (used != dash) throw std::invalid_argument("");
      const std::string rest = item.substr(dash + 1);
      hi = std::stoi(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad digit pair '" + item + "' (expected lo-hi)");
    }
    if (lo < 0 || hi > 9 || lo >= hi) {
      throw std::invalid_argument("digit pair '" + item + "' needs 0 <= lo < hi <= 9");
    }
    pairs.push_back({lo, hi});
  }
  if (pairs.empty()) throw std::invalid_argument("no digit pairs given");
  return pairs;
}

std::vector<DigitPair> all_pairs() {
  std::vector<DigitPair> pairs;
  for (int lo = 0; lo < 10; ++lo) {
    for (int hi = lo + 1; hi < 10; ++hi) pairs.push_back({lo, hi});
  }
  return pairs;
}

std::vector<DigitPair> subset_pairs() {
  return {{0, 1}, {0, 6}, {1, 7}, {2, 3}, {2, 7}, {3, 5}, {3, 8}, {4, 9}, {5, 6}, {7, 9}};
}

std::vector<TaskColumn> default_columns() {
  return {{"U->M", Direction::kUspsToMnist, 1.0},
          ratio_column(1.0),
          ratio_column(0.3),
          ratio_column(0.2),
          ratio_column(0.1)};
}

TaskColumn ratio_column(double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("ratio must lie in (0, 1]");
  }
  if (ratio == 1.0) return {"M->U", Direction::kMnistToUsps, 1.0};
  std::ostringstream name;
  name << ratio << "->U";
  return {name.str(), Direction::kMnistToUsps, ratio};
}

RunReport run_mnist_usps(const DigitCorpus& mnist, const DigitCorpus& usps,
                         const MnistUspsOptions& options) {
  if (options.pairs.empty() || options.columns.empty()) {
    throw std::invalid_argument("mnist-usps needs at least one pair and one column");
  }
  RunReport report;
  report.command = "mnist-usps";
  report.seed = options.seed;
  Table& tasks = report.table(
      "tasks", {"pair", "column", "seed", "n_source", "n_target", "baseline_accuracy",
                "regularizer_accuracy", "lambda", "k", "k_tilde", "validation_accuracy"});
  Table& sweeps = report.table(
      "sweep", {"pair", "column", "lambda", "k", "k_tilde", "ok", "validation_accuracy",
                "evaluation_accuracy"});

  std::vector<std::vector<double>> baseline(options.columns.size());
  std::vector<std::vector<double>> regularizer(options.columns.size());
  for (const DigitPair& pair : options.pairs) {
    const std::string pair_name = std::to_string(pair.lo) + "-" + std::to_string(pair.hi);
    for (std::size_t c = 0; c < options.columns.size(); ++c) {
      const TaskColumn& column = options.columns[c];
      TaskSpec spec;
      spec.digit_lo = pair.lo;
      spec.digit_hi = pair.hi;
      spec.subsample_ratio = column.ratio;
      spec.direction = column.direction;
      spec.seed = derive_seed(options.seed, static_cast<std::uint64_t>(pair.lo * 10 + pair.hi));
      spec.validation_size = options.validation_size;
      const PreparedTask task = prepare_binary_task(mnist, usps, spec);
      const TargetSplit split{
          select_rows(task.target.data(), task.target_labels, task.validation),
          select_rows(task.target.data(), task.target_labels, task.evaluation)};

      const RegularizedProblem prob(task.source.design, task.source.labels, task.target);
      AdaptConfig unreg;
      unreg.mode = Mode::kUnregularized;
      const SolutionReport base_fit = fit(prob, unreg, options.solver);
      const double base_acc = accuracy(split.evaluation.features * base_fit.weights,
                                       split.evaluation.labels);

      const SweepGrid grid = SweepGrid::for_problem(prob, Metric::kAccuracy);
      const SweepResult sweep = run_sweep(prob, grid, split, options.solver.sweep());
      const SweepRow& best = sweep.rows[sweep.selected];
      baseline[c].push_back(base_acc);
      regularizer[c].push_back(best.evaluation);
      tasks.add_row({pair_name, column.name, static_cast<std::int64_t>(spec.seed),
                     as_int(task.source.design.rows()), as_int(task.target.rows()),
                     base_acc, best.evaluation, best.lambda,
                     std::int64_t{best.source_cutoff}, std::int64_t{best.target_cutoff},
                     best.validation});
      for (const SweepRow& row : sweep.rows) {
        sweeps.add_row({pair_name, column.name, row.lambda, std::int64_t{row.source_cutoff},
                        std::int64_t{row.target_cutoff}, std::int64_t{row.ok ? 1 : 0},
                        row.ok ? Cell{row.validation} : Cell{std::string("")},
                        row.ok ? Cell{row.evaluation} : Cell{std::string("")}});
      }
    }
  }

  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  Table& averages = report.table(
      "averages", {"column", "pairs", "baseline_accuracy_pct", "regularizer_accuracy_pct"});
  for (std::size_t c = 0; c < options.columns.size(); ++c) {
    const double b = 100.0 * mean(baseline[c]);
    const double r = 100.0 * mean(regularizer[c]);
    averages.add_row({options.columns[c].name, as_int(static_cast<Index>(baseline[c].size())),
                      b, r});
    columns.push_back({{"column", options.columns[c].name},
                       {"baseline_accuracy_pct", b},
                       {"regularizer_accuracy_pct", r}});
  }
  report.summary["pairs"] = options.pairs.size();
  report.summary["validation_size"] = options.validation_size;
  report.summary["solver"] = solver_json(options.solver);
  report.summary["columns"] = std::move(columns);
  return report;
}

CsvTask load_csv_task(const std::filesystem::path& source,
                      const std::filesystem::path& target) {
  CsvMatrix src = load_matrix_csv(source);
  if (!src.labels) throw DataError(source.string() + ": a 'label' column is required");
  CsvMatrix tgt = load_matrix_csv(target);
  if (src.data.cols() != tgt.data.cols()) {
    throw DataError("source and target CSVs have different feature counts");
  }
  return {DesignMatrix::with_bias(src.data), std::move(*src.labels),
          DesignMatrix::with_bias(tgt.data), std::move(tgt.labels)};
}

RunReport run_train(const CsvTask& task, const AdaptConfig& config,
                    const SolverOptions& solver, Metric metric) {
  const RegularizedProblem prob(task.source, task.source_labels, task.target, config);
  const SolutionReport sol = fit(prob, config, solver);
  RunReport report;
  report.command = "train";
  Table& weights = report.table("weights", {"index", "weight"});
  for (Index j = 0; j < sol.weights.size(); ++j) {
    weights.add_row({as_int(j), sol.weights(j)});
  }
  Table& metrics = report.table("metrics", {"domain", "metric", "value"});
  metrics.add_row({"source", std::string(metric_name(metric)),
                   evaluate(metric, task.source.data() * sol.weights, task.source_labels)});

  nlohmann::ordered_json& s = report.summary;
  s["mode"] = config.mode == Mode::kLabelAlign      ? "label-align"
              : config.mode == Mode::kUnregularized ? "unregularized"
                                                     : "l2";
  s["lambda"] = config.lambda;
  s["k"] = config.source_cutoff;
  s["k_tilde"] = config.target_cutoff;
  if (config.mode == Mode::kL2) s["l2_coefficient"] = config.l2_coefficient;
  s["solver"] = solver_json(solver);
  s["step_size"] = sol.step_size;
  s["objective"] = sol.objective_trace.empty() ? 0.0 : sol.objective_trace.back();
  s["minimum_norm"] = sol.minimum_norm;
  if (task.target_labels) {
    const Vector& y_target = *task.target_labels;
    metrics.add_row({"target", std::string(metric_name(metric)),
                     evaluate(metric, task.target.data() * sol.weights, y_target)});
    if (prob.target_spectrum().rank == prob.dim()) {
      const Vector w_target = target_oracle(task.target, y_target);
      s["param_distance"] = param_distance(sol.weights, w_target);
      if (config.mode == Mode::kLabelAlign && config.lambda == 1.0) {
        const BoundPair b = regularized_solution_bound(prob, sol.weights, w_target, y_target);
        s["regularized_bound"] = {{"lhs", b.lhs}, {"rhs", b.rhs}};
      }
    }
  }
  if (sol.objective_trace.size() > 1) {
    Table& trace = report.table("trace", {"iteration", "objective"});
    for (std::size_t i = 0; i < sol.objective_trace.size(); ++i) {
      trace.add_row({static_cast<std::int64_t>(i + 1), sol.objective_trace[i]});
    }
  }
  return report;
}

RunReport run_csv_sweep(const CsvTask& task, const SweepGrid& grid,
                        const SolverOptions& solver, Index validation_size,
                        std::uint64_t seed) {
  if (!task.target_labels) {
    throw DataError("sweep needs target labels for validation and evaluation");
  }
  const RegularizedProblem prob(task.source, task.source_labels, task.target);
  SweepGrid effective = grid;
  const SweepGrid defaults = SweepGrid::for_problem(prob, grid.metric);
  if (effective.source_cutoffs.empty()) effective.source_cutoffs = defaults.source_cutoffs;
  if (effective.target_cutoffs.empty()) effective.target_cutoffs = defaults.target_cutoffs;
  const TargetSplit split = split_target(task.target.data(), *task.target_labels,
                                         validation_size,
                                         derive_seed(seed, kCsvSplitStream));
  const SweepResult result = run_sweep(prob, effective, split, solver.sweep());

  RunReport report;
  report.command = "sweep";
  report.seed = seed;
  Table& rows = report.table("sweep", {"lambda", "k", "k_tilde", "ok", "validation",
                                       "evaluation", "error"});
  for (const SweepRow& row : result.rows) {
    rows.add_row({row.lambda, std::int64_t{row.source_cutoff}, std::int64_t{row.target_cutoff},
                  std::int64_t{row.ok ? 1 : 0}, row.validation, row.evaluation, row.error});
  }
  Table& weights = report.table("weights", {"index", "weight"});
  for (Index j = 0; j < result.weights.size(); ++j) {
    weights.add_row({as_int(j), result.weights(j)});
  }
  const SweepRow& best = result.rows[result.selected];
  report.summary["metric"] = std::string(metric_name(grid.metric));
  report.summary["validation_size"] = validation_size;
  report.summary["solver"] = solver_json(solver);
  report.summary["selected"] = {{"lambda", best.lambda},
                                {"k", best.source_cutoff},
                                {"k_tilde", best.target_cutoff},
                                {"validation", best.validation},
                                {"evaluation", best.evaluation}};
  return report;
}

}  // namespace labalign::harness

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

// Acceptance checks. Prints one PASS, FAIL or SKIP line per criterion.
// Exit status: 0 when nothing failed, 1 on any failure, 77 when every
// selected criterion was skipped.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "labalign/adapt.hpp"
#include "labalign/alignment.hpp"
#include "labalign/datagen.hpp"
#include "labalign/datasets.hpp"
#include "labalign/error.hpp"
#include "labalign/harness/experiments.hpp"
#include "labalign/rng.hpp"

namespace fs = std::filesystem;
using namespace labalign;
using namespace labalign::harness;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

struct Settings {
  fs::path cli;
  fs::path work;
  fs::path data;
};

Outcome verdict(bool ok, const std::string& detail) {
  return {ok ? Status::kPass : Status::kFail, detail};
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

Matrix gaussian(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

Vector gaussian(Rng& rng, Index n) { return gaussian(rng, n, 1); }

Index draw(Rng& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

Outcome rewrite_identity() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Index n = draw(rng, 2, 200);
    const Index d = draw(rng, 1, 20);
    const DesignMatrix m(gaussian(rng, n, d), false);
    const RewriteCheck r = rewrite_check(gaussian(rng, d), m, gaussian(rng, n));
    worst = std::max(worst, std::abs(r.direct - r.reformulated) / std::abs(r.direct));
  }
  return verdict(worst <= 1e-8, "max relative difference " + num(worst));
}

Outcome solver_cross_check() {
  Rng rng(102);
  double worst_solution = 0.0;
  double worst_gradient = 0.0;
  int instances = 0;
  int redraws = 0;
  while (instances < 20) {
    const Index d = draw(rng, 2, 20);
    const Index n = draw(rng, 2 * d, 200);
    AdaptConfig config;
    config.iterations = 5000;
    config.lambda = std::pow(10.0, static_cast<double>(draw(rng, -1, 1)));
    config.source_cutoff = static_cast<int>(draw(rng, 1, d));
    config.target_cutoff = static_cast<int>(draw(rng, 1, d));
    const RegularizedProblem prob(DesignMatrix(gaussian(rng, n, d), false), gaussian(rng, n),
                                  DesignMatrix(gaussian(rng, n, d), false), config);
    // Redraw when cond(M) > 300.
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(prob.system_matrix());
    const Vector ev = eig.eigenvalues();
    if (!(ev(0) > 0.0) || ev(ev.size() - 1) / ev(0) > 300.0) {
      ++redraws;
      continue;
    }
    const Vector closed = fit_closed_form(prob).weights;
    const Vector gd = fit_gd(prob).weights;
    worst_solution =
        std::max(worst_solution, (gd - closed).norm() / (1.0 + closed.norm()));

    const Vector w = gaussian(rng, d);
    const Vector g = objective_gradient(w, prob);
    Vector fd(d);
    for (Index j = 0; j < d; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(w(j)));
      Vector plus = w, minus = w;
      plus(j) += h;
      minus(j) -= h;
      fd(j) = (objective_value(plus, prob) - objective_value(minus, prob)) / (2.0 * h);
    }
    worst_gradient = std::max(worst_gradient, (fd - g).norm() / g.norm());
    ++instances;
  }
  return verdict(worst_solution <= 1e-6 && worst_gradient <= 1e-4,
                 "max |dw|/(1+|w|) " + num(worst_solution) + ", gradient rel. error " +
                     num(worst_gradient) + ", redrawn " + std::to_string(redraws));
}

Outcome distance_bounds() {
  BoundCheckOptions options;
  options.count = 100;
  options.seed = 103;
  const RunReport report = run_bound_check(options);
  const int instances = report.summary["instances"].get<int>();
  return verdict(report.violations.empty() && instances == 102,
                 std::to_string(instances) + " instances, " +
                     std::to_string(report.violations.size()) + " violations");
}

double summary_at(const nlohmann::ordered_json& list, const char* key, double value,
                  const char* field) {
  for (const auto& entry : list) {
    if (entry[key].get<double>() == value) return entry[field].get<double>();
  }
  throw std::runtime_error("summary entry missing");
}

Outcome synthetic_classification() {
  SynthOptions options;
  options.spec.task = TaskKind::kClassification;
  options.lambdas = {1e-1, 1e1, 1e3};
  const RunReport r = run_synth(options);
  const auto& s = r.summary;
  const double acc = summary_at(s["label_align"], "lambda", 1e3, "target_metric");
  const double base = s["unregularized"]["target_metric"].get<double>();
  const double dist_hi = summary_at(s["label_align"], "lambda", 1e3, "param_distance");
  const double dist_lo = summary_at(s["label_align"], "lambda", 1e-1, "param_distance");
  const double l2_min = s["l2_min_param_distance"].get<double>();
  return verdict(acc >= 0.95 && base <= 0.90 && dist_hi < dist_lo && l2_min > dist_hi,
                 "accuracy " + num(acc) + " vs unregularized " + num(base) +
                     ", distance " + num(dist_hi) + " < " + num(dist_lo) +
                     ", best l2 distance " + num(l2_min));
}

Outcome synthetic_regression() {
  SynthOptions options;
  options.spec.task = TaskKind::kRegression;
  options.lambdas = {1e3};
  options.runs = 10;
  options.validation_size = 0;
  const RunReport r = run_synth(options);
  const int improved = r.summary["runs_improved_at_largest_lambda"].get<int>();
  return verdict(improved >= 9, std::to_string(improved) + "/10 seeds improved");
}

fs::path data_subdir(const fs::path& data, const char* name) {
  return data.empty() ? fs::path() : data / name;
}

Outcome alignment_diagnostics(const Settings& settings) {
  const fs::path mnist_dir = data_subdir(settings.data, "mnist");
  const fs::path usps_dir = data_subdir(settings.data, "usps");
  if (mnist_dir.empty() || !fs::is_directory(mnist_dir) || !fs::is_directory(usps_dir)) {
    return {Status::kSkip, "needs <data>/mnist and <data>/usps"};
  }
  const LabeledDomain mnist = binary_design(load_mnist_dir(mnist_dir).train, 0, 1);
  const AlignmentProfile mp = alignment_profile(mnist.design, mnist.labels);
  const int mk = k_epsilon(mp, 0.1);
  const LabeledDomain usps = binary_design(load_usps_dir(usps_dir).train, 0, 1);
  const int uk = k_epsilon(alignment_profile(usps.design, usps.labels), 0.1);
  const bool ok = mp.n == 12665 && mp.d == 785 && mp.rank == 580 && std::abs(mk - 2) <= 1 &&
                  std::abs(uk - 2) <= 1;
  return verdict(ok, "mnist n=" + std::to_string(mp.n) + " d=" + std::to_string(mp.d) +
                         " rank=" + std::to_string(mp.rank) + " k(0.1)=" + std::to_string(mk) +
                         ", usps k(0.1)=" + std::to_string(uk));
}

Outcome mnist_usps(const Settings& settings) {
  const fs::path mnist_dir = data_subdir(settings.data, "mnist");
  const fs::path usps_dir = data_subdir(settings.data, "usps");
  if (mnist_dir.empty() || !fs::is_directory(mnist_dir) || !fs::is_directory(usps_dir)) {
    return {Status::kSkip, "needs <data>/mnist and <data>/usps"};
  }
  MnistUspsOptions options;
  options.columns = {ratio_column(0.1), ratio_column(1.0)};
  const RunReport r =
      run_mnist_usps(load_mnist_dir(mnist_dir), load_usps_dir(usps_dir), options);
  const auto& cols = r.summary["columns"];
  const double low_base = cols[0]["baseline_accuracy_pct"].get<double>();
  const double low_reg = cols[0]["regularizer_accuracy_pct"].get<double>();
  const double full_base = cols[1]["baseline_accuracy_pct"].get<double>();
  const double full_reg = cols[1]["regularizer_accuracy_pct"].get<double>();
  return verdict(low_reg - low_base >= 3.0 && full_reg >= full_base,
                 "0.1->U " + num(low_base) + " -> " + num(low_reg) + ", M->U " +
                     num(full_base) + " -> " + num(full_reg));
}

Outcome emergence() {
  EmergenceOptions options;
  options.noise_levels = {0.01, 0.05, 0.1};
  const RunReport r = run_emergence(options);
  return verdict(r.violations.empty(),
                 std::to_string(r.summary["applicable"].get<int>()) + "/" +
                     std::to_string(r.summary["rows"].get<int>()) +
                     " rows applicable, " + std::to_string(r.violations.size()) +
                     " violations");
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const Settings& settings) {
  if (settings.cli.empty()) return {Status::kSkip, "needs --cli"};
  std::string detail;
  bool ok = true;
  for (const char* format : {"json", "csv"}) {
    std::vector<fs::path> dirs;
    for (const char* run : {"a", "b"}) {
      const fs::path dir = settings.work / (std::string("synth_") + format + "_" + run);
      fs::remove_all(dir);
      const std::string cmd = "\"" + settings.cli.string() + "\" --seed 11 --format " +
                              format + " --no-timestamp --out \"" + dir.string() +
                              "\" synth --runs 2 > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {Status::kFail, "cli run failed: " + cmd};
      dirs.push_back(dir);
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const fs::path other = dirs[1] / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        ok = false;
        detail += entry.path().filename().string() + " differs, ";
      }
      ++files;
    }
    if (!detail.empty()) detail += ", ";
    detail += std::string(format) + " " + std::to_string(files) + " files identical";
  }
  return verdict(ok, detail);
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"labalign acceptance checks"};
  std::vector<int> only;
  Settings settings;
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  app.add_option("--cli", settings.cli, "labalign executable");
  app.add_option("--work", settings.work, "Scratch directory");
  app.add_option("--data", settings.data, "Directory with mnist/ and usps/");
  CLI11_PARSE(app, argc, argv);
  if (settings.work.empty()) settings.work = fs::temp_directory_path() / "labalign_acceptance";
  fs::create_directories(settings.work);

  const std::vector<Criterion> criteria{
      {1, "objective rewrite identity", 5, rewrite_identity},
      {2, "solver cross-check", 30, solver_cross_check},
      {3, "solution distance bounds", 30, distance_bounds},
      {4, "synthetic classification", 60, synthetic_classification},
      {5, "synthetic regression", 60, synthetic_regression},
      {6, "alignment diagnostics", 120, [&] { return alignment_diagnostics(settings); }},
      {7, "mnist-usps subset", 900, [&] { return mnist_usps(settings); }},
      {8, "emergence bound", 10, emergence},
      {9, "determinism", 60, [&] { return determinism(settings); }},
  };

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0, skipped = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {Status::kFail, std::string("error: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.status == Status::kPass && seconds > c.limit_seconds) {
      outcome.status = Status::kFail;
      outcome.detail += " (over the " + num(c.limit_seconds) + " s limit)";
    }
    const char* label = outcome.status == Status::kPass   ? "PASS"
                        : outcome.status == Status::kSkip ? "SKIP"
                                                          : "FAIL";
    std::printf("%s %d %s [%.2f s]: %s\n", label, c.id, c.name, seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (outcome.status == Status::kFail) ++failed;
    if (outcome.status == Status::kSkip) ++skipped;
  }
  if (failed > 0) return 1;
  return ran > 0 && skipped == ran ? 77 : 0;
}

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

#include <doctest.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include "digits.hpp"
#include "labalign/datagen.hpp"
#include "labalign/harness/config.hpp"
#include "labalign/harness/experiments.hpp"
#include "labalign/harness/metrics.hpp"
#include "labalign/harness/report.hpp"
#include "labalign/harness/sweep.hpp"
#include "support.hpp"

using namespace labalign;
using namespace labalign::harness;

namespace {

const std::filesystem::path kFixtures = LABALIGN_FIXTURE_DIR;

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

struct Confusion {
  int tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion count(const Vector& scores, const Vector& labels) {
  Confusion c;
  for (Index i = 0; i < scores.size(); ++i) {
    const bool predicted = !(scores(i) < 0.0);
    const bool actual = labels(i) > 0.0;
    if (predicted && actual) ++c.tp;
    if (predicted && !actual) ++c.fp;
    if (!predicted && actual) ++c.fn;
    if (!predicted && !actual) ++c.tn;
  }
  return c;
}

SweepRow row(double lambda, int k, int kt, double validation, bool ok = true) {
  SweepRow r;
  r.lambda = lambda;
  r.source_cutoff = k;
  r.target_cutoff = kt;
  r.validation = validation;
  r.ok = ok;
  return r;
}

std::string cell_text(const Cell& cell) {
  std::ostringstream out;
  std::visit([&](const auto& v) { out << v; }, cell);
  return out.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("metric examples") {
  const Vector labels = vec({1, -1, 1, -1});
  CHECK(accuracy(vec({2, -1, 0, 0.5}), labels) == 0.75);
  CHECK(accuracy(labels, labels) == 1.0);
  CHECK(f1_score(vec({1, 1, -1, -1}), labels).value == doctest::Approx(0.5));
  CHECK(mean_squared_error(vec({1, 2}), vec({0, 4})) == 2.5);
  CHECK(param_distance(vec({3, 0}), vec({0, 4})) == 5.0);

  const F1Score none = f1_score(vec({-1, -1}), vec({-1, -1}));
  CHECK(none.undefined);
  CHECK(none.value == 0.0);
  CHECK_FALSE(f1_score(vec({1, -1}), vec({-1, -1})).undefined);

  CHECK(parse_metric("f1") == Metric::kF1);
  CHECK(metric_name(Metric::kMse) == "mse");
  CHECK_FALSE(higher_is_better(Metric::kMse));
  CHECK_THROWS_AS(parse_metric("auc"), std::invalid_argument);
  CHECK_THROWS_AS(accuracy(vec({1}), vec({1, 1})), std::invalid_argument);
}

TEST_CASE("metrics agree with a brute-force confusion count") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = testing::random_int(rng, 1, 40);
    Vector scores = testing::random_vector(rng, n);
    Vector labels(n);
    for (Index i = 0; i < n; ++i) {
      labels(i) = rng.uniform() < 0.5 ? 1.0 : -1.0;
      if (rng.uniform() < 0.1) scores(i) = 0.0;
    }
    const Confusion c = count(scores, labels);
    CHECK(accuracy(scores, labels) == doctest::Approx(double(c.tp + c.tn) / double(n)));
    const F1Score f1 = f1_score(scores, labels);
    if (c.tp + c.fp + c.fn == 0) {
      CHECK(f1.undefined);
    } else {
      CHECK(f1.value == doctest::Approx(2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn)));
    }
  }
}

TEST_CASE("doubling cutoffs") {
  CHECK(doubling_cutoffs(3) == std::vector<int>{3});
  CHECK(doubling_cutoffs(8) == std::vector<int>{8});
  CHECK(doubling_cutoffs(100) == std::vector<int>{8, 16, 32, 64});
  CHECK(doubling_cutoffs(128) == std::vector<int>{8, 16, 32, 64, 128});
}

TEST_CASE("config selection prefers the best validation score then the smallest config") {
  std::vector<SweepRow> rows{row(10, 8, 8, 0.9), row(0.1, 16, 8, 0.95),
                             row(0.1, 8, 16, 0.95), row(1000, 8, 8, 0.99, false)};
  CHECK(select_config(rows, Metric::kAccuracy) == 2u);
  CHECK(select_config(rows, Metric::kMse) == 0u);
  rows[0].ok = rows[1].ok = rows[2].ok = false;
  CHECK_FALSE(select_config(rows, Metric::kAccuracy).has_value());

  // Whatever the position of the oracle-best row, it is selected.
  Rng rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SweepRow> grid;
    for (int i = 0; i < 12; ++i) grid.push_back(row(i, 1, 1, 0.5 * rng.uniform()));
    const auto best = static_cast<std::size_t>(rng.below(12));
    grid[best].validation = 0.75;
    CHECK(select_config(grid, Metric::kAccuracy) == best);
  }
}

TEST_CASE("a single-configuration sweep matches a direct fit") {
  SyntheticSpec spec;
  spec.n_source = 300;
  spec.n_target = 300;
  spec.seed = 4;
  const SyntheticTask task = synth_task(spec);
  const RegularizedProblem prob(task.source.design, task.source.labels, task.target.design);
  std::vector<Index> val(50), eval(250);
  std::iota(val.begin(), val.end(), Index{0});
  std::iota(eval.begin(), eval.end(), Index{50});
  const TargetSplit split{select_rows(task.target.design.data(), task.target.labels, val),
                          select_rows(task.target.design.data(), task.target.labels, eval)};
  SweepGrid grid;
  grid.lambdas = {100.0};
  grid.source_cutoffs = {1};
  grid.target_cutoffs = {1};
  const SweepResult result = run_sweep(prob, grid, split, {});
  REQUIRE(result.rows.size() == 1);
  AdaptConfig config;
  config.lambda = 100.0;
  const Vector w = fit_closed_form(prob.with_config(config)).weights;
  CHECK((result.weights - w).norm() <= 1e-10 * w.norm());
  CHECK(result.rows[0].evaluation ==
        accuracy(split.evaluation.features * w, split.evaluation.labels));

  grid.target_cutoffs = {4};
  CHECK_THROWS_AS(run_sweep(prob, grid, split, {}), std::invalid_argument);
}

TEST_CASE("a sweep where every configuration fails reports each failure") {
  Rng rng(73);
  const Matrix x = testing::random_matrix(rng, 10, 3);
  Matrix t = testing::random_matrix(rng, 10, 3);
  t.col(2).setZero();
  const RegularizedProblem prob(DesignMatrix(x, false), testing::random_vector(rng, 10),
                                DesignMatrix(t, false));
  SweepGrid grid;
  grid.lambdas = {1.0, 2.0};
  grid.source_cutoffs = {0};
  grid.target_cutoffs = {0};
  const TargetSplit split{{t.topRows(3), Vector::Ones(3)}, {t.bottomRows(7), Vector::Ones(7)}};
  try {
    run_sweep(prob, grid, split, {});
    FAIL("expected a NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("lambda=2") != std::string::npos);
  }
}

TEST_CASE("parallel_for gives identical results for any job count") {
  const auto run = [](int jobs) {
    std::vector<double> out(64);
    parallel_for(out.size(), jobs, [&](std::size_t i) {
      Rng rng(derive_seed(9, i));
      double acc = 0.0;
      for (int j = 0; j < 1000; ++j) acc += rng.normal();
      out[i] = acc;
    });
    return out;
  };
  CHECK(run(1) == run(4));
  std::atomic<int> calls{0};
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [&](std::size_t i) {
                                   ++calls;
                                   if (i == 5) throw std::runtime_error("boom");
                                 }),
                    "boom");
  CHECK(calls == 10);
}

TEST_CASE("config files in both syntaxes") {
  const nlohmann::json conf = load_config(kFixtures / "synth.conf");
  const nlohmann::json json = load_config(kFixtures / "synth.json");
  CHECK(conf == json);
  CHECK(config_value<int>(conf, "synth.runs", 1) == 2);
  CHECK(config_value<std::vector<double>>(conf, "synth.lambdas", {}) ==
        std::vector<double>{0.1, 1000});
  CHECK(config_value<std::string>(conf, "format", "json") == "csv");
  CHECK(config_value<int>(conf, "synth.absent", 7) == 7);
  CHECK_THROWS_AS(config_value<int>(conf, "format", 0), DataError);

  const nlohmann::json text = parse_config("a = hello world # note\n[x.y]\nz = true\n");
  CHECK(text["a"] == "hello world");
  CHECK(text["x"]["y"]["z"] == true);
  CHECK_THROWS_AS(parse_config("just words\n"), DataError);
  CHECK_THROWS_AS(parse_config("{ broken"), DataError);
}

TEST_CASE("report formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");

  RunReport report;
  report.command = "demo";
  Table& t = report.table("t", {"name", "value", "count"});
  t.add_row({std::string("a,b"), 0.5, std::int64_t{3}});
  CHECK_THROWS_AS(t.add_row({0.5}), std::invalid_argument);
  CHECK(to_csv(t) == "name,value,count\n\"a,b\",0.5,3\n");

  const auto doc = to_json(report, true, false);
  CHECK(doc["command"] == "demo");
  CHECK_FALSE(doc.contains("timestamp"));
  CHECK(doc["tables"]["t"][0]["count"] == 3);
  CHECK(to_json(report, false, true).contains("timestamp"));

  testing::TempDir dir("report");
  const auto csv = write_report(report, dir.path() / "csv", Format::kCsv, false);
  CHECK(csv.size() == 2);
  CHECK(std::filesystem::exists(dir.path() / "csv" / "t.csv"));
  CHECK(std::filesystem::exists(dir.path() / "csv" / "summary.json"));
  const auto js = write_report(report, dir.path() / "json", Format::kJson, false);
  REQUIRE(js.size() == 1);
  std::ifstream in(js[0]);
  CHECK(nlohmann::json::parse(in)["tables"]["t"][0]["name"] == "a,b");
  CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
}

TEST_CASE("synthetic report") {
  SynthOptions options;
  options.spec.n_source = 400;
  options.spec.n_target = 400;
  options.spec.seed = 2;
  options.runs = 2;
  const RunReport report = run_synth(options);
  const Table& la = report.tables[0];
  const Table& base = report.tables[2];
  REQUIRE(la.name == "label_align");
  REQUIRE(base.name == "unregularized");
  CHECK(la.rows.size() == 8);
  // The lambda = 0 row repeats the unregularized fit exactly.
  CHECK(std::get<double>(la.rows[0][2]) == 0.0);
  CHECK(la.rows[0][5] == base.rows[0][2]);
  CHECK(la.rows[0][6] == base.rows[0][3]);
  CHECK(report.summary["runs"] == 2);
  CHECK(report.summary["label_align"].size() == 3);
  CHECK(report.summary["selected_lambdas"].size() == 2);
  CHECK(report.tables[3].rows.size() == 2);
  CHECK(cell_text(la.rows[4][1]) == "3");
}

TEST_CASE("bound and emergence reports") {
  BoundCheckOptions bounds;
  bounds.count = 10;
  bounds.seed = 5;
  const RunReport b = run_bound_check(bounds);
  CHECK(b.violations.empty());
  CHECK(b.tables[0].rows.size() == 12);
  CHECK(b.summary["instances"] == 12);

  EmergenceOptions emergence;
  emergence.noise_levels = {0.0, 0.01, 10.0};
  emergence.seeds = {0, 1};
  const RunReport e = run_emergence(emergence);
  CHECK(e.violations.empty());
  CHECK(e.tables[0].rows.size() == 6);
  CHECK(e.summary["applicable"].get<int>() >= 2);
  emergence.correlated = 0;
  CHECK_THROWS_AS(run_emergence(emergence), std::invalid_argument);
}

TEST_CASE("diagnose report") {
  SyntheticSpec spec;
  spec.n_source = 500;
  const SyntheticTask task = synth_task(spec);
  const RunReport r = run_diagnose("synthetic", task.source.design, task.source.labels,
                                   {0.1, 0.5});
  CHECK(r.tables[0].rows.size() == 2);
  CHECK(r.tables[1].rows.size() == 4);
  CHECK(r.summary["k_eps"]["0.1"] == 1);
  CHECK(r.summary["in_span_fraction"].get<double>() > 0.7);
}

TEST_CASE("pair parsing") {
  const auto pairs = parse_pairs("0-1,3-8");
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[1].lo == 3);
  CHECK(pairs[1].hi == 8);
  CHECK(all_pairs().size() == 45);
  CHECK(subset_pairs().size() == 10);
  CHECK_THROWS_AS(parse_pairs("1-1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_pairs("1-x"), std::invalid_argument);
  CHECK(ratio_column(0.2).name == "0.2->U");
  CHECK(ratio_column(1.0).name == "M->U");
}

TEST_CASE("mnist-usps end to end on toy digits") {
  const DigitCorpus mnist = testing::make_corpus(12, 6, 28, 11);
  const DigitCorpus usps = testing::make_corpus(10, 8, 16, 12);
  MnistUspsOptions options;
  options.pairs = {{2, 7}};
  options.columns = {{"M->U", Direction::kMnistToUsps, 1.0}};
  options.validation_size = 4;
  options.solver = {Solver::kGradientDescent, 2000, {}, 1};
  const RunReport r = run_mnist_usps(mnist, usps, options);
  REQUIRE(r.tables[0].rows.size() == 1);
  const auto& task = r.tables[0].rows[0];
  CHECK(std::get<std::int64_t>(task[3]) == 24);
  CHECK(std::get<std::int64_t>(task[4]) == 16);
  CHECK(std::get<double>(task[6]) >= 0.0);
  CHECK(std::get<double>(task[6]) <= 1.0);
  CHECK(r.summary["columns"][0]["column"] == "M->U");

  const RunReport again = run_mnist_usps(mnist, usps, options);
  CHECK(to_json(again, true, false) == to_json(r, true, false));
}

}

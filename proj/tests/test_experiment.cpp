#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "rfsgd/config.hpp"
#include "rfsgd/csv.hpp"
#include "rfsgd/experiment.hpp"
#include "test_support.hpp"

using namespace rfsgd;

namespace {

Dataset two_point_test(double y0, double y1, Task task) {
  Dataset d;
  d.X.resize(2, 1);
  d.X << 0.0, 0.0;
  d.y.resize(2);
  d.y << y0, y1;
  d.meta.n = 2;
  d.meta.D = 1;
  d.meta.task = task;
  return d;
}

ExperimentConfig regime_sweep_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.data.n = 64;
  cfg.data.n_test = 50;
  cfg.data.D = 4;
  cfg.data.noise_sd = 0.1;
  cfg.regime = RegimeSpec{};
  cfg.sweep.push_back({"M", {8.0, 32.0}});
  cfg.replications = 2;
  cfg.seed = 5;
  cfg.out_dir = out_dir;
  return cfg;
}

ExperimentConfig explicit_config() {
  ExperimentConfig cfg;
  cfg.data.n = 32;
  cfg.data.n_test = 8;
  cfg.data.D = 4;
  cfg.data.noise_sd = 0.1;
  cfg.sgd = ExplicitSgd{};
  cfg.sgd->gamma = 0.05;
  cfg.sgd->T = 50;
  cfg.features.M = 6;
  cfg.replications = 2;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("prediction metrics for a regression holdout") {
  const Dataset test = two_point_test(1.0, -1.0, Task::regression);
  Eigen::VectorXd pred(2);
  pred << 0.3, -0.2;
  const EvalMetrics m = evaluate_predictions(pred, test);
  CHECK(m.mse == doctest::Approx(0.565).epsilon(1e-15));
  CHECK(std::isnan(m.excess_risk));
  CHECK(std::isnan(m.classification_error));
}

TEST_CASE("excess risk scores against the noise-free target") {
  Dataset test = two_point_test(1.0, -1.0, Task::regression);
  test.truth = Eigen::VectorXd(2);
  (*test.truth) << 0.5, -0.5;
  Eigen::VectorXd pred = *test.truth;
  pred.array() += 0.3;
  const EvalMetrics m = evaluate_predictions(pred, test);
  CHECK(m.excess_risk == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("sign agreement treats 0 as the positive class") {
  const Dataset both_positive = two_point_test(1.0, 1.0, Task::binary_classification);
  Eigen::VectorXd pred(2);
  pred << 0.3, -0.2;
  CHECK(evaluate_predictions(pred, both_positive).classification_error ==
        doctest::Approx(0.5));

  const Dataset mixed = two_point_test(1.0, -1.0, Task::binary_classification);
  pred << 0.0, 0.0;
  CHECK(evaluate_predictions(pred, mixed).classification_error ==
        doctest::Approx(0.5));
}

TEST_CASE("evaluation rejects shape mismatches") {
  const Dataset test = two_point_test(1.0, -1.0, Task::regression);
  CHECK_THROWS_WITH_AS(evaluate_predictions(Eigen::VectorXd::Zero(3), test),
                       doctest::Contains("prediction count"),
                       std::invalid_argument);
  Dataset empty;
  CHECK_THROWS_WITH_AS(evaluate_predictions(Eigen::VectorXd(), empty),
                       doctest::Contains("empty test set"),
                       std::invalid_argument);
}

TEST_CASE("model evaluation matches scoring its predictions") {
  const ExperimentConfig cfg = explicit_config();
  const Model model = run_single(cfg);
  const auto [train_part, test_part] = build_data(cfg, 0);
  const EvalMetrics direct = evaluate(model, test_part);
  const EvalMetrics via_pred =
      evaluate_predictions(predict(model, test_part.X), test_part);
  CHECK(direct.mse == via_pred.mse);
  CHECK(direct.excess_risk == via_pred.excess_risk);
}

TEST_CASE("build_data is a pure function of config and replication") {
  ExperimentConfig cfg;
  cfg.data.n = 20;
  cfg.data.n_test = 10;
  cfg.data.D = 3;
  const auto [train_a, test_a] = build_data(cfg, 0);
  const auto [train_b, test_b] = build_data(cfg, 0);
  CHECK(train_a.meta.n == 20);
  CHECK(test_a.meta.n == 10);
  CHECK(train_a.meta.D == 3);
  CHECK(train_a.X == train_b.X);
  CHECK(train_a.y == train_b.y);
  CHECK(test_a.X == test_b.X);
  REQUIRE(train_a.truth.has_value());
  REQUIRE(test_a.truth.has_value());

  const auto [train_c, test_c] = build_data(cfg, 1);
  CHECK(train_a.y != train_c.y);
}

TEST_CASE("build_data splits file datasets by seeded permutation") {
  const std::string dir = test_support::make_temp_dir("bdata");
  const std::string path = dir + "/pts.csv";
  std::string body;
  for (int i = 0; i < 8; ++i) {
    body += std::to_string(0.1 * i) + "," + std::to_string(1.0 - 0.1 * i) +
            "," + std::to_string(i % 2) + "\n";
  }
  test_support::write_file(path, body);

  ExperimentConfig cfg;
  cfg.data.kind = DataKind::csv;
  cfg.data.path = path;
  cfg.data.schema.target_column = 2;
  cfg.data.test_fraction = 0.25;
  const auto [train_a, test_a] = build_data(cfg, 0);
  CHECK(train_a.meta.n == 6);
  CHECK(test_a.meta.n == 2);
  const auto [train_b, test_b] = build_data(cfg, 0);
  CHECK(train_a.X == train_b.X);
  const auto [train_c, test_c] = build_data(cfg, 1);
  CHECK(train_a.y != train_c.y);
}

TEST_CASE("a sweep writes one metrics row per point, replication, checkpoint") {
  const std::string dir = test_support::make_temp_dir("run");
  const ExperimentConfig cfg = regime_sweep_config(dir);
  const RunResult res = run(cfg);
  CHECK(res.failed_jobs == 0);
  CHECK(res.metric_rows == 4);

  const CsvTable metrics = read_csv_table(res.metrics_path, true);
  const std::vector<std::string> expected_header{
      "point", "M", "seed", "t", "pass", "gamma_t",
      "holdout_mse", "holdout_excess_risk", "classification_error"};
  CHECK(metrics.header == expected_header);
  REQUIRE(metrics.rows.size() == 4);
  // (point, replication) order with one final checkpoint each
  CHECK(metrics.rows[0][0] == "0");
  CHECK(metrics.rows[0][1] == "8");
  CHECK(metrics.rows[0][2] == "5");
  CHECK(metrics.rows[1][2] == "6");
  CHECK(metrics.rows[2][0] == "1");
  CHECK(metrics.rows[2][1] == "32");
  for (const auto& row : metrics.rows) {
    CHECK(row[3] == "64");
    CHECK(row[4] == "1");
    CHECK(!row[6].empty());
    CHECK(!row[7].empty());
    CHECK(row[8].empty());
  }

  const CsvTable plan_rows = read_csv_table(res.plan_path, true);
  const std::vector<std::string> plan_header{
      "point", "M", "tag", "resolved_n", "resolved_b", "resolved_gamma",
      "resolved_theta", "resolved_T", "resolved_M", "kappa2",
      "predicted_passes", "predicted_rate_exponent", "admissible", "violations"};
  CHECK(plan_rows.header == plan_header);
  REQUIRE(plan_rows.rows.size() == 2);
  CHECK(plan_rows.rows[0][2] == "c1.2");
  CHECK(plan_rows.rows[0][3] == "64");
  CHECK(plan_rows.rows[0][8] == "8");
  CHECK(plan_rows.rows[1][8] == "32");

  // single-axis sweep with excess-risk data: the summary curve is drawn
  REQUIRE(res.curve_path.has_value());
  const std::string svg = test_support::read_file(*res.curve_path);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("holdout excess risk") != std::string::npos);

  CHECK(std::filesystem::exists(res.timings_path));
  CHECK(std::filesystem::exists(res.errors_path));
  const CsvTable errors = read_csv_table(res.errors_path, true);
  CHECK(errors.rows.empty());
}

TEST_CASE("metrics bytes do not depend on scheduling or reruns") {
  const std::string dir_a = test_support::make_temp_dir("det_a");
  const std::string dir_b = test_support::make_temp_dir("det_b");
  ExperimentConfig cfg = regime_sweep_config(dir_a);
  const RunResult first = run(cfg);
  cfg.out_dir = dir_b;
  cfg.threads = 3;
  const RunResult second = run(cfg);
  CHECK(test_support::read_file(first.metrics_path) ==
        test_support::read_file(second.metrics_path));
  CHECK(test_support::read_file(first.plan_path) ==
        test_support::read_file(second.plan_path));
}

TEST_CASE("a diverging sweep point is reported and the rest complete") {
  const std::string dir = test_support::make_temp_dir("diverge");
  ExperimentConfig cfg = explicit_config();
  cfg.out_dir = dir;
  cfg.sweep.push_back({"gamma", {0.05, 1e12}});
  const RunResult res = run(cfg);
  CHECK(res.failed_jobs == 2);
  CHECK(res.metric_rows == 2);
  const CsvTable errors = read_csv_table(res.errors_path, true);
  REQUIRE(errors.rows.size() == 2);
  CHECK(errors.rows[0][0] == "1");
  CHECK(errors.rows[0][2] == "1");
  CHECK(errors.rows[1][2] == "2");
  CHECK(errors.rows[0][3].find("gamma") != std::string::npos);
  const CsvTable metrics = read_csv_table(res.metrics_path, true);
  for (const auto& row : metrics.rows) CHECK(row[0] == "0");
}

TEST_CASE("a point the planner rejects is marked unresolved") {
  const std::string dir = test_support::make_temp_dir("unres");
  ExperimentConfig cfg;
  cfg.data.n = 64;
  cfg.data.n_test = 20;
  cfg.data.D = 4;
  cfg.regime = RegimeSpec{};
  cfg.sweep.push_back({"n", {2.0, 64.0}});
  cfg.replications = 2;
  cfg.out_dir = dir;
  const RunResult res = run(cfg);
  CHECK(res.failed_jobs == 1);
  CHECK(res.metric_rows == 2);

  const CsvTable plan_rows = read_csv_table(res.plan_path, true);
  REQUIRE(plan_rows.rows.size() == 2);
  CHECK(plan_rows.rows[0][2] == "unresolved");
  CHECK(plan_rows.rows[0].back().find("n must be >= 4") != std::string::npos);
  CHECK(plan_rows.rows[1][2] == "c1.2");

  const CsvTable errors = read_csv_table(res.errors_path, true);
  REQUIRE(errors.rows.size() == 1);
  CHECK(errors.rows[0][0] == "0");
  CHECK(errors.rows[0][2].empty());
}

TEST_CASE("the curve is only drawn for single-axis sweeps") {
  const std::string dir = test_support::make_temp_dir("nocurve");
  ExperimentConfig cfg = regime_sweep_config(dir);
  cfg.curve = false;
  CHECK_FALSE(run(cfg).curve_path.has_value());

  ExperimentConfig two_axes = regime_sweep_config(dir + "/two");
  two_axes.sweep.push_back({"c_gamma", {0.5, 1.0}});
  CHECK_FALSE(run(two_axes).curve_path.has_value());
}

TEST_CASE("run_single trains one resolved job") {
  ExperimentConfig cfg = explicit_config();
  const Model a = run_single(cfg);
  const Model b = run_single(cfg);
  CHECK(a.w.size() == 6);
  REQUIRE(a.history.size() == 1);
  CHECK(a.w == b.w);

  cfg.sgd->T = 0;
  CHECK(run_single(cfg).w.norm() == 0.0);

  ExperimentConfig swept = explicit_config();
  swept.sweep.push_back({"T", {10.0}});
  CHECK_THROWS_WITH_AS(run_single(swept), doctest::Contains("sweep"),
                       ConfigError);
}

TEST_CASE("kernel residual quantiles shrink as features accumulate") {
  KernelCheckConfig cfg;
  cfg.D = 3;
  cfg.n_pairs = 5;
  cfg.M_values = {4, 16, 64};
  cfg.seeds = 30;
  const auto rows = kernel_check(cfg);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].M == cfg.M_values[i]);
    CHECK(rows[i].q25 >= 0.0);
    CHECK(rows[i].q25 <= rows[i].median);
    CHECK(rows[i].median <= rows[i].q75);
    CHECK(rows[i].mean_abs > 0.0);
  }
  CHECK(rows[2].median < rows[0].median);

  const auto again = kernel_check(cfg);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].median == again[i].median);
    CHECK(rows[i].mean_abs == again[i].mean_abs);
  }
}

TEST_CASE("kernel check rows round-trip through their CSV") {
  KernelCheckConfig cfg;
  cfg.D = 2;
  cfg.n_pairs = 3;
  cfg.M_values = {4, 8};
  cfg.seeds = 5;
  const auto rows = kernel_check(cfg);
  const std::string dir = test_support::make_temp_dir("kc");
  const std::string path = dir + "/kernel_check.csv";
  write_kernel_check_csv(rows, path);
  const CsvTable table = read_csv_table(path, true);
  CHECK(table.header ==
        std::vector<std::string>{"M", "q25", "median", "q75", "mean_abs"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == "4");
  CHECK(table.rows[1][0] == "8");
  CHECK(std::stod(table.rows[0][2]) == rows[0].median);
}

TEST_CASE("kernel check validates its configuration") {
  KernelCheckConfig cfg;
  cfg.M_values = {};
  CHECK_THROWS_WITH_AS(kernel_check(cfg), doctest::Contains("M_values"),
                       ConfigError);
  cfg.M_values = {0};
  CHECK_THROWS_WITH_AS(kernel_check(cfg), doctest::Contains("M values"),
                       ConfigError);
  cfg = KernelCheckConfig{};
  cfg.n_pairs = 0;
  CHECK_THROWS_WITH_AS(kernel_check(cfg), doctest::Contains("n_pairs"),
                       ConfigError);
  cfg = KernelCheckConfig{};
  cfg.seeds = 0;
  CHECK_THROWS_WITH_AS(kernel_check(cfg), doctest::Contains("seeds"),
                       ConfigError);
  cfg = KernelCheckConfig{};
  cfg.D = 0;
  CHECK_THROWS_WITH_AS(kernel_check(cfg), doctest::Contains("D"), ConfigError);
  cfg = KernelCheckConfig{};
  cfg.sigma = 0.0;
  CHECK_THROWS_WITH_AS(kernel_check(cfg), doctest::Contains("sigma"),
                       ConfigError);
}

TEST_SUITE_END();

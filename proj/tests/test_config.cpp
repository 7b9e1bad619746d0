#include <string>

#include "doctest.h"
#include "rfsgd/config.hpp"
#include "rfsgd/experiment.hpp"
#include "test_support.hpp"

using namespace rfsgd;

namespace {

ExperimentConfig base_regime_config() {
  ExperimentConfig cfg;
  cfg.regime = RegimeSpec{};
  return cfg;
}

ExperimentConfig base_explicit_config() {
  ExperimentConfig cfg;
  cfg.sgd = ExplicitSgd{};
  cfg.sgd->T = 10;
  cfg.features.M = 8;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("full document parses, including comments") {
  const std::string text = R"({
    // training source
    "data": {
      "kind": "synthetic",
      "n": 512, "n_test": 100, "D": 8,
      "alpha": 0.5, "r": 1.0, "noise_sd": 0.1,
      "standardize": true
    },
    "features": {"kind": "relu", "M": 40},
    "sgd": {"b": 4, "gamma": 0.25, "theta": 0.5, "T": 1000},
    "memory_mode": "stream",
    "checkpoint_every": 50,
    "sweep": {"M": [16, 64], "gamma": [0.1, 0.2]},
    "replications": 3,
    "seed": 99,
    "delta": 0.05,
    "out_dir": "out",
    "threads": 4,
    "curve": false
  })";
  const ExperimentConfig cfg = parse_experiment_config(text);
  CHECK(cfg.data.kind == DataKind::synthetic);
  CHECK(cfg.data.n == 512);
  CHECK(cfg.data.n_test == 100);
  CHECK(cfg.data.D == 8);
  CHECK(cfg.data.alpha == 0.5);
  CHECK(cfg.data.r == 1.0);
  CHECK(cfg.data.noise_sd == 0.1);
  CHECK(cfg.data.standardize);
  CHECK(cfg.features.kind == FeatureKind::relu);
  CHECK(cfg.features.M == 40);
  REQUIRE(cfg.sgd.has_value());
  CHECK_FALSE(cfg.regime.has_value());
  CHECK(cfg.sgd->b == 4);
  CHECK(cfg.sgd->gamma == 0.25);
  CHECK(cfg.sgd->theta == 0.5);
  CHECK(cfg.sgd->T == 1000);
  CHECK(cfg.memory_mode == MemoryMode::stream);
  CHECK(cfg.checkpoint_every == 50);
  REQUIRE(cfg.sweep.size() == 2);
  CHECK(cfg.sweep[0].name == "M");
  CHECK(cfg.sweep[0].values == std::vector<double>{16.0, 64.0});
  CHECK(cfg.sweep[1].name == "gamma");
  CHECK(cfg.replications == 3);
  CHECK(cfg.seed == 99);
  CHECK(cfg.delta == 0.05);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.threads == 4);
  CHECK_FALSE(cfg.curve);
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("an empty document keeps every default") {
  const ExperimentConfig cfg = parse_experiment_config("{}");
  CHECK(cfg.data.kind == DataKind::synthetic);
  CHECK(cfg.data.n == 1024);
  CHECK(cfg.data.n_test == 2000);
  CHECK(cfg.data.D == 16);
  CHECK(cfg.data.alpha == 1.0);
  CHECK(cfg.data.r == 0.5);
  CHECK(cfg.data.noise_sd == 0.3);
  CHECK_FALSE(cfg.data.standardize);
  CHECK(cfg.features.kind == FeatureKind::fourier_gaussian);
  CHECK(cfg.features.M == 0);
  CHECK(cfg.features.sigma == 1.0);
  CHECK_FALSE(cfg.sgd.has_value());
  CHECK_FALSE(cfg.regime.has_value());
  CHECK(cfg.memory_mode == MemoryMode::precompute);
  CHECK(cfg.checkpoint_every == 0);
  CHECK(cfg.sweep.empty());
  CHECK(cfg.replications == 10);
  CHECK(cfg.seed == 0);
  CHECK(cfg.delta == 0.1);
  CHECK(cfg.out_dir == ".");
  CHECK(cfg.threads == 1);
  CHECK(cfg.curve);
}

TEST_CASE("standardize defaults to on for file data only") {
  const ExperimentConfig file_cfg = parse_experiment_config(
      R"({"data": {"kind": "csv", "path": "x.csv"}})");
  CHECK(file_cfg.data.standardize);
  const ExperimentConfig off = parse_experiment_config(
      R"({"data": {"kind": "csv", "path": "x.csv", "standardize": false}})");
  CHECK_FALSE(off.data.standardize);
  CHECK_FALSE(parse_experiment_config("{}").data.standardize);
}

TEST_CASE("file schema fields reach the loader config") {
  const ExperimentConfig cfg = parse_experiment_config(R"({
    "data": {"kind": "libsvm", "path": "a.txt", "target_column": 3,
             "has_header": true, "task": "binary-classification",
             "test_fraction": 0.25}
  })");
  CHECK(cfg.data.kind == DataKind::libsvm);
  CHECK(cfg.data.path == "a.txt");
  CHECK(cfg.data.schema.target_column == 3);
  CHECK(cfg.data.schema.has_header);
  CHECK(cfg.data.task == Task::binary_classification);
  CHECK(cfg.data.test_fraction == 0.25);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"bogus": 1})"),
                       "config: unknown key 'bogus'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"data": {"bogus": 1}})"),
                       "config: unknown key 'data.bogus'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(R"({"features": {"bandwidth": 1}})"),
      "config: unknown key 'features.bandwidth'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"sgd": {"lr": 0.1}})"),
                       "config: unknown key 'sgd.lr'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"regime": {"name": "a"}})"),
                       "config: unknown key 'regime.name'", ConfigError);
}

TEST_CASE("type mismatches name the offending key") {
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"data": {"n": "big"}})"),
                       doctest::Contains("'data.n' must be an integer"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"data": {"n": 10.5}})"),
                       doctest::Contains("'data.n' must be an integer"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"data": {"alpha": "x"}})"),
                       doctest::Contains("'data.alpha' must be a number"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"curve": 1})"),
                       doctest::Contains("'.curve' must be a boolean"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"data": {"kind": 5}})"),
                       doctest::Contains("'data.kind' must be a string"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"seed": 1.5})"),
                       doctest::Contains("'seed' must be an integer"),
                       ConfigError);
}

TEST_CASE("malformed documents fail with a parse diagnostic") {
  CHECK_THROWS_WITH_AS(parse_experiment_config("{"),
                       doctest::Contains("JSON parse error"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config("[]"),
                       doctest::Contains("top level"), ConfigError);
}

TEST_CASE("enumerated names are checked") {
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"data": {"kind": "hdf5"}})"),
                       doctest::Contains("unknown data.kind 'hdf5'"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"data": {"task": "rank"}})"),
                       doctest::Contains("unknown task 'rank'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"features": {"kind": "poly"}})"),
                       doctest::Contains("unknown feature kind: poly"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"memory_mode": "mmap"})"),
                       doctest::Contains("unknown memory mode: mmap"),
                       ConfigError);
}

TEST_CASE("sweep section must map names to numeric arrays") {
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"sweep": [1, 2]})"),
                       doctest::Contains("must map axis names"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"sweep": {"M": 16}})"),
                       doctest::Contains("'sweep.M' must be an array"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"sweep": {"M": ["a"]}})"),
                       doctest::Contains("'sweep.M' entries must be numbers"),
                       ConfigError);
}

TEST_CASE("exactly one trainer block is required") {
  ExperimentConfig none;
  CHECK_THROWS_WITH_AS(validate(none), doctest::Contains("exactly one"),
                       ConfigError);
  ExperimentConfig both = base_explicit_config();
  both.regime = RegimeSpec{};
  CHECK_THROWS_WITH_AS(validate(both), doctest::Contains("exactly one"),
                       ConfigError);
  CHECK_NOTHROW(validate(base_regime_config()));
  CHECK_NOTHROW(validate(base_explicit_config()));
}

TEST_CASE("explicit mode needs a concrete feature count") {
  ExperimentConfig cfg = base_explicit_config();
  cfg.features.M = 0;
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("features.M >= 1"),
                       ConfigError);
  // a sweep over M supplies the count per point instead
  cfg.sweep.push_back({"M", {16.0, 64.0}});
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("trainer parameter ranges are enforced") {
  auto expect = [](void (*tweak)(ExperimentConfig&), const char* fragment) {
    ExperimentConfig cfg = base_explicit_config();
    tweak(cfg);
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains(fragment), ConfigError);
  };
  expect([](ExperimentConfig& c) { c.sgd->b = 0; }, "sgd.b");
  expect([](ExperimentConfig& c) { c.sgd->gamma = 0.0; }, "sgd.gamma");
  expect([](ExperimentConfig& c) { c.sgd->theta = 1.0; }, "sgd.theta");
  expect([](ExperimentConfig& c) { c.sgd->theta = -0.1; }, "sgd.theta");
  expect([](ExperimentConfig& c) { c.sgd->T = -1; }, "sgd.T");
  expect([](ExperimentConfig& c) { c.replications = 0; }, "replications");
  expect([](ExperimentConfig& c) { c.threads = 0; }, "threads");
  expect([](ExperimentConfig& c) { c.delta = 0.0; }, "delta");
  expect([](ExperimentConfig& c) { c.delta = 1.0; }, "delta");
  expect([](ExperimentConfig& c) { c.checkpoint_every = -1; },
         "checkpoint_every");
  expect([](ExperimentConfig& c) { c.features.sigma = 0.0; }, "features.sigma");
  expect([](ExperimentConfig& c) { c.features.M = -1; }, "features.M");
}

TEST_CASE("sigma is unconstrained away from the fourier family") {
  ExperimentConfig cfg = base_explicit_config();
  cfg.features.kind = FeatureKind::relu;
  cfg.features.sigma = 0.0;
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("regime block ranges are enforced") {
  auto expect = [](void (*tweak)(ExperimentConfig&), const char* fragment) {
    ExperimentConfig cfg = base_regime_config();
    tweak(cfg);
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains(fragment), ConfigError);
  };
  expect([](ExperimentConfig& c) { c.regime->tag = "c9.9"; },
         "unknown regime tag");
  expect([](ExperimentConfig& c) { c.regime->r = 0.4; }, "regime.r");
  expect([](ExperimentConfig& c) { c.regime->alpha = 1.5; }, "regime.alpha");
  expect([](ExperimentConfig& c) { c.regime->constants.c_gamma = 0.0; },
         "regime constants");
}

TEST_CASE("data ranges are enforced") {
  auto expect = [](void (*tweak)(ExperimentConfig&), const char* fragment) {
    ExperimentConfig cfg = base_regime_config();
    tweak(cfg);
    CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains(fragment), ConfigError);
  };
  expect([](ExperimentConfig& c) { c.data.n = 1; }, "data.n");
  expect([](ExperimentConfig& c) { c.data.n_test = 0; }, "data.n_test");
  expect([](ExperimentConfig& c) { c.data.D = 1; }, "data.D");
  expect([](ExperimentConfig& c) { c.data.alpha = 0.0; }, "data.alpha");
  expect([](ExperimentConfig& c) { c.data.r = 0.4; }, "data.r");
  expect([](ExperimentConfig& c) { c.data.noise_sd = -0.1; }, "data.noise_sd");
  expect([](ExperimentConfig& c) { c.data.kind = DataKind::csv; },
         "data.path is required");
  expect([](ExperimentConfig& c) {
    c.data.kind = DataKind::csv;
    c.data.path = "x.csv";
    c.data.test_fraction = 1.0;
  }, "test_fraction");
}

TEST_CASE("sweep axes are checked against the trainer mode") {
  auto with_axis = [](ExperimentConfig cfg, std::string name,
                      std::vector<double> values) {
    cfg.sweep.push_back({std::move(name), std::move(values)});
    return cfg;
  };
  CHECK_NOTHROW(validate(with_axis(base_explicit_config(), "gamma", {0.1, 0.2})));
  CHECK_NOTHROW(validate(with_axis(base_regime_config(), "c_gamma", {0.5})));
  CHECK_THROWS_WITH_AS(
      validate(with_axis(base_regime_config(), "gamma", {0.1})),
      doctest::Contains("does not name a sweepable parameter"), ConfigError);
  CHECK_THROWS_WITH_AS(
      validate(with_axis(base_explicit_config(), "c_gamma", {0.5})),
      doctest::Contains("does not name a sweepable parameter"), ConfigError);
  CHECK_THROWS_WITH_AS(validate(with_axis(base_regime_config(), "M", {})),
                       doctest::Contains("has no values"), ConfigError);
  CHECK_THROWS_WITH_AS(
      validate(with_axis(base_regime_config(), "n", {100.5})),
      doctest::Contains("requires positive integer values"), ConfigError);
  CHECK_THROWS_WITH_AS(
      validate(with_axis(base_regime_config(), "M", {0.0})),
      doctest::Contains("requires positive integer values"), ConfigError);
  CHECK_THROWS_WITH_AS(
      validate(with_axis(base_explicit_config(), "gamma", {-0.5})),
      doctest::Contains("requires positive values"), ConfigError);

  ExperimentConfig dup = with_axis(base_regime_config(), "M", {16.0});
  dup.sweep.push_back({"M", {64.0}});
  CHECK_THROWS_WITH_AS(validate(dup), doctest::Contains("duplicate sweep axis"),
                       ConfigError);

  ExperimentConfig file_n = with_axis(base_regime_config(), "n", {100.0});
  file_n.data.kind = DataKind::csv;
  file_n.data.path = "x.csv";
  CHECK_THROWS_WITH_AS(validate(file_n),
                       doctest::Contains("requires synthetic"), ConfigError);
}

TEST_CASE("configs load from disk with comments intact") {
  const std::string dir = test_support::make_temp_dir("cfg");
  const std::string path = dir + "/run.json";
  test_support::write_file(path, R"({
    // one-point smoke run
    "regime": {"tag": "c1.3"},
    "replications": 1
  })");
  const ExperimentConfig cfg = load_experiment_config(path);
  REQUIRE(cfg.regime.has_value());
  CHECK(cfg.regime->tag == "c1.3");
  CHECK(cfg.replications == 1);
  CHECK_THROWS_WITH_AS(load_experiment_config(dir + "/absent.json"),
                       doctest::Contains("cannot open"), ConfigError);
}

TEST_SUITE_END();

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfsgd/dataset.hpp"
#include "rfsgd/features.hpp"
#include "rfsgd/regimes.hpp"
#include "rfsgd/ridge.hpp"
#include "rfsgd/sgd.hpp"

namespace rfsgd {

struct EvalMetrics {
  double mse = 0.0;
  // Mean squared gap to the noise-free target; NaN when the target is unknown.
  double excess_risk = 0.0;
  // Sign-agreement error with sign(0) = +1; NaN for regression tasks.
  double classification_error = 0.0;
};

EvalMetrics evaluate_predictions(const Eigen::VectorXd& pred,
                                 const Dataset& test);
EvalMetrics evaluate(const Model& model, const Dataset& test);
EvalMetrics evaluate(const RidgeSolution& sol, const Dataset& test);

enum class DataKind { synthetic, csv, libsvm };

struct DataConfig {
  DataKind kind = DataKind::synthetic;
  // synthetic: n training points plus n_test holdout points are drawn from
  // one generator call so both score the same target function.
  Eigen::Index n = 1024;
  Eigen::Index n_test = 2000;
  Eigen::Index D = 16;
  double alpha = 1.0;
  double r = 0.5;
  double noise_sd = 0.3;
  // csv / libsvm
  std::string path;
  CsvSchema schema;
  Task task = Task::regression;
  double test_fraction = 0.2;
  bool standardize = false;
};

struct FeatureConfig {
  FeatureKind kind = FeatureKind::fourier_gaussian;
  // 0 defers to the regime planner's M; required >= 1 with explicit sgd.
  Eigen::Index M = 0;
  double sigma = 1.0;
  bool unscaled_cosine = false;
};

struct ExplicitSgd {
  Eigen::Index b = 1;
  double gamma = 0.1;
  double theta = 0.0;
  Eigen::Index T = 0;
};

struct RegimeSpec {
  std::string tag = "c1.2";
  double r = 0.5;
  double alpha = 1.0;
  RegimeConstants constants;
};

struct SweepAxis {
  // One of: n, M, b, gamma, T (explicit mode), n, M, c_gamma (regime mode).
  std::string name;
  std::vector<double> values;
};

struct ExperimentConfig {
  DataConfig data;
  FeatureConfig features;
  std::optional<ExplicitSgd> sgd;
  std::optional<RegimeSpec> regime;
  MemoryMode memory_mode = MemoryMode::precompute;
  Eigen::Index checkpoint_every = 0;
  std::vector<SweepAxis> sweep;
  int replications = 10;
  std::uint64_t seed = 0;
  double delta = 0.1;
  std::string out_dir = ".";
  int threads = 1;
  bool curve = true;
};

// Enforces the config invariants; throws ConfigError (see config.hpp).
void validate(const ExperimentConfig& config);

struct RunResult {
  std::string metrics_path;
  std::string plan_path;
  std::string timings_path;
  std::string errors_path;
  std::optional<std::string> curve_path;
  Eigen::Index metric_rows = 0;
  Eigen::Index failed_jobs = 0;
};

// Cartesian sweep x replications. Rows land in metrics.csv in (sweep point,
// replication, checkpoint) order no matter how jobs are scheduled; timing
// goes to timings.csv so metrics.csv stays byte-reproducible.
RunResult run(const ExperimentConfig& config);

// The (train, test) pair replication rep of any run sees: one synthetic
// draw of n + n_test points sliced in order, or a seeded file split.
std::pair<Dataset, Dataset> build_data(const ExperimentConfig& config, int rep);

// One resolved job of a sweep-free config; returns the trained model.
Model run_single(const ExperimentConfig& config, int rep = 0);

struct KernelCheckConfig {
  FeatureKind kind = FeatureKind::fourier_gaussian;
  double sigma = 1.0;
  bool unscaled_cosine = false;
  Eigen::Index D = 5;
  Eigen::Index n_pairs = 50;
  std::vector<Eigen::Index> M_values = {16, 64, 256, 1024, 4096};
  int seeds = 200;
  std::uint64_t seed = 0;
};

struct KernelCheckRow {
  Eigen::Index M = 0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double mean_abs = 0.0;
};

// |approx_kernel - limit kernel| quantiles over (seed, pair), one row per M.
// Feature draws are nested across M through the per-feature sub-streams.
std::vector<KernelCheckRow> kernel_check(const KernelCheckConfig& config);

void write_kernel_check_csv(const std::vector<KernelCheckRow>& rows,
                            const std::string& path);

}  // namespace rfsgd

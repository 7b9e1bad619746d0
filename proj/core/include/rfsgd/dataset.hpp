#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rfsgd {

enum class Task { regression, binary_classification };

struct DatasetMeta {
  Eigen::Index n = 0;
  Eigen::Index D = 0;
  Task task = Task::regression;
  std::string source;
  bool standardized = false;
  std::vector<Eigen::Index> dropped_columns;
};

struct Dataset {
  Eigen::MatrixXd X;            // n x D
  Eigen::VectorXd y;            // n
  std::optional<Eigen::VectorXd> truth;  // f_H(x_i) when known (synthetic)
  DatasetMeta meta;
};

struct SyntheticSpec {
  Eigen::Index n = 0;
  Eigen::Index D = 0;
  double alpha = 1.0;    // capacity exponent in (0, 1]
  double r = 0.5;        // source exponent >= 1/2
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

// Covariance eigenvalues of the synthetic generator: mu_i = i^{-1/alpha}.
Eigen::VectorXd synthetic_eigenvalues(Eigen::Index D, double alpha);

// Linear-model construction with exactly controlled capacity (alpha) and
// source (r) conditions: inputs have independent coordinates of variance mu_i,
// a seeded unit vector g defines f_H(x) = sum_i mu_i^{r-1/2} g_i x_i, and
// y = f_H(x) + noise_sd * eps. truth is always populated.
Dataset generate_synthetic(const SyntheticSpec& spec);

struct CsvSchema {
  int target_column = 0;  // 0-based
  bool has_header = false;
  Task task = Task::regression;
};

Dataset load_csv(const std::string& path, const CsvSchema& schema);

// LIBSVM-style lines "label idx:val idx:val ..." (1-based indices),
// materialized dense.
Dataset load_libsvm(const std::string& path, Task task);

// Contiguous row slice [begin, begin+count), truth carried along.
Dataset take_rows(const Dataset& data, Eigen::Index begin, Eigen::Index count);

// Z-scores both parts with train-part statistics (n-1 variance); constant
// train columns are dropped from both and recorded in meta.dropped_columns.
void standardize_train_test(Dataset& train, Dataset& test);

// Seeded-shuffle partition into (train, test) with test size floor(n * frac).
// With standardize, per-column statistics are computed on the train part and
// applied to both; constant columns are dropped and recorded in meta.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                  std::uint64_t seed, bool standardize);

}  // namespace rfsgd

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rfsgd/dataset.hpp"
#include "rfsgd/features.hpp"

namespace rfsgd {

enum class MemoryMode { precompute, stream };

std::string to_string(MemoryMode mode);
MemoryMode memory_mode_from_string(const std::string& name);

struct SgdConfig {
  Eigen::Index b = 1;
  double gamma = 0.1;
  // Step at iteration t (1-based) is gamma * t^(-theta).
  double theta = 0.0;
  Eigen::Index T = 0;
  MemoryMode memory_mode = MemoryMode::precompute;
  std::uint64_t sampling_seed = 0;
  // 0: record only the final iterate. k > 0: every k iterations plus the final.
  Eigen::Index checkpoint_every = 0;
};

struct CheckpointRecord {
  Eigen::Index t = 0;
  double pass = 0.0;
  double gamma_t = 0.0;
  // NaN when no holdout set was supplied / the field does not apply.
  double holdout_mse = 0.0;
  double holdout_excess_risk = 0.0;
  double classification_error = 0.0;
  double elapsed_ms = 0.0;
};

struct Model {
  Eigen::VectorXd w;
  FeatureMap fm;
  std::vector<CheckpointRecord> history;
};

// Iterations per pass over the data: ceil(n / b).
Eigen::Index iterations_per_pass(Eigen::Index n, Eigen::Index b);

using IndexBlock = std::vector<Eigen::Index>;

// The exact 0-based index draws train() consumes, block t first.
std::vector<IndexBlock> sampling_trace(const SgdConfig& cfg, Eigen::Index n,
                                       Eigen::Index upto_t);

// Mini-batch SGD with replacement sampling; starts from the zero vector.
// holdout, when given, is scored at every checkpoint.
Model train(const Dataset& data, const FeatureMap& fm, const SgdConfig& cfg,
            const Dataset* holdout = nullptr);

// Same update loop fed by explicit index blocks instead of the seeded sampler.
Model train_replay(const Dataset& data, const FeatureMap& fm,
                   const SgdConfig& cfg, const std::vector<IndexBlock>& blocks,
                   const Dataset* holdout = nullptr);

// Deterministic full-gradient descent on the same least-squares objective.
Model batch_gd(const Dataset& data, const FeatureMap& fm, double gamma,
               double theta, Eigen::Index T);

double predict(const Model& model, const Eigen::VectorXd& x);
Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& X);

}  // namespace rfsgd

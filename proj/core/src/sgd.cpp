#include "rfsgd/sgd.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rfsgd/metrics.hpp"
#include "rfsgd/rng.hpp"

namespace rfsgd {

namespace {

constexpr double kDivergenceNorm = 1e12;

void validate(const Dataset& data, const FeatureMap& fm, const SgdConfig& cfg) {
  const Eigen::Index n = data.meta.n;
  if (data.meta.D != fm.spec.D) {
    throw std::invalid_argument("train: data dimension " +
                                std::to_string(data.meta.D) +
                                " does not match feature map dimension " +
                                std::to_string(fm.spec.D));
  }
  if (cfg.b < 1 || cfg.b > n) {
    throw std::invalid_argument("train: batch size must lie in [1, n]");
  }
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("train: gamma must be > 0");
  if (!(cfg.theta >= 0.0 && cfg.theta < 1.0)) {
    throw std::invalid_argument("train: theta must lie in [0, 1)");
  }
  if (cfg.T < 0) throw std::invalid_argument("train: T must be >= 0");
  if (cfg.checkpoint_every < 0) {
    throw std::invalid_argument("train: checkpoint_every must be >= 0");
  }
  if (cfg.T > 0 && cfg.b > std::numeric_limits<Eigen::Index>::max() / cfg.T) {
    throw std::invalid_argument("train: T*b sampling draws overflow the index type");
  }
}

double step_at(const SgdConfig& cfg, Eigen::Index t) {
  if (cfg.theta == 0.0) return cfg.gamma;
  return cfg.gamma * std::pow(static_cast<double>(t), -cfg.theta);
}

void draw_block(Rng& rng, Eigen::Index n, Eigen::Index b, IndexBlock& out) {
  out.resize(static_cast<std::size_t>(b));
  for (Eigen::Index i = 0; i < b; ++i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  }
}

struct HoldoutEval {
  Eigen::MatrixXd Phi;
  const Dataset* data = nullptr;
};

void record_checkpoint(Model& model, const SgdConfig& cfg, Eigen::Index n,
                       Eigen::Index t, const HoldoutEval* holdout,
                       std::chrono::steady_clock::time_point start) {
  CheckpointRecord rec;
  rec.t = t;
  rec.pass = static_cast<double>(t) /
             static_cast<double>(iterations_per_pass(n, cfg.b));
  rec.gamma_t = step_at(cfg, t);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.holdout_mse = nan;
  rec.holdout_excess_risk = nan;
  rec.classification_error = nan;
  if (holdout != nullptr) {
    const Eigen::VectorXd pred = holdout->Phi * model.w;
    rec.holdout_mse = mean_squared_error(pred, holdout->data->y);
    if (holdout->data->truth.has_value()) {
      rec.holdout_excess_risk = mean_squared_error(pred, *holdout->data->truth);
    }
    if (holdout->data->meta.task == Task::binary_classification) {
      rec.classification_error = classification_error(pred, holdout->data->y);
    }
  }
  rec.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  model.history.push_back(rec);
}

bool is_checkpoint(const SgdConfig& cfg, Eigen::Index t) {
  if (t == cfg.T) return true;
  return cfg.checkpoint_every > 0 && t % cfg.checkpoint_every == 0;
}

// BlockSource fills the index block for iteration t (1-based).
template <typename BlockSource>
Model run_sgd(const Dataset& data, const FeatureMap& fm, const SgdConfig& cfg,
              BlockSource&& next_block, const Dataset* holdout) {
  validate(data, fm, cfg);
  const Eigen::Index n = data.meta.n;
  const Eigen::Index M = fm.spec.M;
  const Eigen::Index b = cfg.b;

  Model model;
  model.fm = fm;
  model.w = Eigen::VectorXd::Zero(M);

  HoldoutEval heval;
  const HoldoutEval* heval_ptr = nullptr;
  if (holdout != nullptr) {
    if (holdout->meta.D != fm.spec.D) {
      throw std::invalid_argument("train: holdout dimension mismatch");
    }
    heval.Phi = map_matrix(fm, holdout->X);
    heval.data = holdout;
    heval_ptr = &heval;
  }

  // Stored transposed (M x n): sampled points are then contiguous columns,
  // not strided rows of a column-major n x M matrix. Entries come from the
  // same per-point map_point expressions as the stream path.
  Eigen::MatrixXd PhiT;
  Eigen::VectorXd x(data.meta.D);
  if (cfg.memory_mode == MemoryMode::precompute) {
    PhiT.resize(M, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x = data.X.row(i).transpose();
      PhiT.col(i) = map_point(fm, x);
    }
  }

  const auto start = std::chrono::steady_clock::now();
  Eigen::MatrixXd batch(M, b);
  Eigen::VectorXd yb(b), resid(b);
  IndexBlock block;
  for (Eigen::Index t = 1; t <= cfg.T; ++t) {
    next_block(t, block);
    for (Eigen::Index i = 0; i < b; ++i) {
      const Eigen::Index j = block[static_cast<std::size_t>(i)];
      if (j < 0 || j >= n) {
        throw std::invalid_argument("train: sampled index out of range at iteration " +
                                    std::to_string(t));
      }
      if (cfg.memory_mode == MemoryMode::precompute) {
        batch.col(i) = PhiT.col(j);
      } else {
        x = data.X.row(j).transpose();
        batch.col(i) = map_point(fm, x);
      }
      yb[i] = data.y[j];
    }
    resid.noalias() = batch.transpose() * model.w;
    resid -= yb;
    model.w.noalias() -= (step_at(cfg, t) / static_cast<double>(b)) *
                         (batch * resid);
    if (!model.w.allFinite()) {
      throw std::runtime_error("train: non-finite update at iteration " +
                               std::to_string(t));
    }
    if (model.w.norm() > kDivergenceNorm) {
      throw std::runtime_error("train: weight norm exceeded 1e12 at iteration " +
                               std::to_string(t) + "; reduce gamma");
    }
    if (is_checkpoint(cfg, t)) {
      record_checkpoint(model, cfg, n, t, heval_ptr, start);
    }
  }
  return model;
}

}  // namespace

std::string to_string(MemoryMode mode) {
  return mode == MemoryMode::precompute ? "precompute" : "stream";
}

MemoryMode memory_mode_from_string(const std::string& name) {
  if (name == "precompute") return MemoryMode::precompute;
  if (name == "stream") return MemoryMode::stream;
  throw std::invalid_argument("unknown memory mode: " + name);
}

Eigen::Index iterations_per_pass(Eigen::Index n, Eigen::Index b) {
  return (n + b - 1) / b;
}

std::vector<IndexBlock> sampling_trace(const SgdConfig& cfg, Eigen::Index n,
                                       Eigen::Index upto_t) {
  if (upto_t < 0 || upto_t > cfg.T) {
    throw std::invalid_argument("sampling_trace: upto_t must lie in [0, T]");
  }
  Rng rng(cfg.sampling_seed);
  std::vector<IndexBlock> blocks(static_cast<std::size_t>(upto_t));
  for (auto& block : blocks) draw_block(rng, n, cfg.b, block);
  return blocks;
}

Model train(const Dataset& data, const FeatureMap& fm, const SgdConfig& cfg,
            const Dataset* holdout) {
  Rng rng(cfg.sampling_seed);
  const Eigen::Index n = data.meta.n;
  return run_sgd(
      data, fm, cfg,
      [&rng, n, &cfg](Eigen::Index, IndexBlock& block) {
        draw_block(rng, n, cfg.b, block);
      },
      holdout);
}

Model train_replay(const Dataset& data, const FeatureMap& fm,
                   const SgdConfig& cfg, const std::vector<IndexBlock>& blocks,
                   const Dataset* holdout) {
  if (static_cast<Eigen::Index>(blocks.size()) < cfg.T) {
    throw std::invalid_argument("train_replay: fewer index blocks than iterations");
  }
  return run_sgd(
      data, fm, cfg,
      [&blocks, &cfg](Eigen::Index t, IndexBlock& block) {
        const auto& src = blocks[static_cast<std::size_t>(t - 1)];
        if (static_cast<Eigen::Index>(src.size()) != cfg.b) {
          throw std::invalid_argument("train_replay: block length does not equal b");
        }
        block = src;
      },
      holdout);
}

Model batch_gd(const Dataset& data, const FeatureMap& fm, double gamma,
               double theta, Eigen::Index T) {
  SgdConfig probe;
  probe.b = 1;
  probe.gamma = gamma;
  probe.theta = theta;
  probe.T = T;
  validate(data, fm, probe);

  const Eigen::Index n = data.meta.n;
  Model model;
  model.fm = fm;
  model.w = Eigen::VectorXd::Zero(fm.spec.M);
  const Eigen::MatrixXd Phi = map_matrix(fm, data.X);
  Eigen::VectorXd resid(n);
  for (Eigen::Index t = 1; t <= T; ++t) {
    resid.noalias() = Phi * model.w;
    resid -= data.y;
    model.w.noalias() -= (step_at(probe, t) / static_cast<double>(n)) *
                         (Phi.transpose() * resid);
    if (!model.w.allFinite()) {
      throw std::runtime_error("batch_gd: non-finite update at iteration " +
                               std::to_string(t));
    }
    if (model.w.norm() > kDivergenceNorm) {
      throw std::runtime_error("batch_gd: weight norm exceeded 1e12 at iteration " +
                               std::to_string(t) + "; reduce gamma");
    }
  }
  return model;
}

double predict(const Model& model, const Eigen::VectorXd& x) {
  return map_point(model.fm, x).dot(model.w);
}

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& X) {
  return map_matrix(model.fm, X) * model.w;
}

}  // namespace rfsgd

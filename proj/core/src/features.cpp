#include "rfsgd/features.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rfsgd/csv.hpp"
#include "rfsgd/rng.hpp"

namespace rfsgd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_dim(const FeatureMap& fm, const Eigen::VectorXd& x,
               const char* where) {
  if (x.size() != fm.spec.D) {
    throw std::invalid_argument(std::string(where) + ": expected dimension " +
                                std::to_string(fm.spec.D) + ", got " +
                                std::to_string(x.size()));
  }
}

double cosine_scale(const FeatureMapSpec& spec) {
  return spec.unscaled_cosine ? 1.0 : std::sqrt(2.0);
}

}  // namespace

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::fourier_gaussian: return "fourier-gaussian";
    case FeatureKind::relu: return "relu";
    case FeatureKind::linear_sketch: return "linear-sketch";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& name) {
  if (name == "fourier-gaussian") return FeatureKind::fourier_gaussian;
  if (name == "relu") return FeatureKind::relu;
  if (name == "linear-sketch") return FeatureKind::linear_sketch;
  throw std::invalid_argument("unknown feature kind: " + name);
}

double kappa_squared(const FeatureMapSpec& spec) {
  if (spec.kind == FeatureKind::fourier_gaussian) {
    return spec.unscaled_cosine ? 1.0 : 2.0;
  }
  return 1.0;
}

FeatureMap build(const FeatureMapSpec& spec) {
  if (spec.M < 1) throw std::invalid_argument("build: M must be >= 1");
  if (spec.D < 1) throw std::invalid_argument("build: D must be >= 1");
  const bool fourier = spec.kind == FeatureKind::fourier_gaussian;
  if (fourier && !(spec.sigma > 0.0)) {
    throw std::invalid_argument("build: sigma must be > 0");
  }

  FeatureMap fm;
  fm.spec = spec;
  fm.W.resize(spec.M, spec.D);
  fm.q.resize(fourier ? spec.M : 0);
  const double inv_sigma = fourier ? 1.0 / spec.sigma : 1.0;
  for (Eigen::Index j = 0; j < spec.M; ++j) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
    for (Eigen::Index d = 0; d < spec.D; ++d) {
      fm.W(j, d) = inv_sigma * rng.normal();
    }
    if (fourier) fm.q[j] = rng.uniform(0.0, kTwoPi);
  }
  return fm;
}

FeatureMap make_feature_map(const FeatureMapSpec& spec, Eigen::MatrixXd W,
                            Eigen::VectorXd q) {
  if (W.rows() != spec.M || W.cols() != spec.D) {
    throw std::invalid_argument("make_feature_map: W shape mismatch");
  }
  FeatureMap fm;
  fm.spec = spec;
  fm.W = std::move(W);
  fm.q = std::move(q);
  return fm;
}

Eigen::VectorXd raw_features(const FeatureMap& fm, const Eigen::VectorXd& x) {
  check_dim(fm, x, "raw_features");
  Eigen::VectorXd z = fm.W * x;
  switch (fm.spec.kind) {
    case FeatureKind::fourier_gaussian:
      return (cosine_scale(fm.spec) * (z + fm.q).array().cos()).matrix();
    case FeatureKind::relu:
      return z.array().max(0.0).matrix();
    case FeatureKind::linear_sketch:
      return z;
  }
  throw std::logic_error("raw_features: unreachable");
}

Eigen::VectorXd map_point(const FeatureMap& fm, const Eigen::VectorXd& x) {
  const double inv_root_m = 1.0 / std::sqrt(static_cast<double>(fm.spec.M));
  return inv_root_m * raw_features(fm, x);
}

Eigen::MatrixXd map_matrix(const FeatureMap& fm, const Eigen::MatrixXd& X) {
  if (X.cols() != fm.spec.D) {
    throw std::invalid_argument("map_matrix: expected dimension " +
                                std::to_string(fm.spec.D) + ", got " +
                                std::to_string(X.cols()));
  }
  Eigen::MatrixXd Phi(X.rows(), fm.spec.M);
  Eigen::VectorXd x(fm.spec.D);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    x = X.row(i).transpose();
    Phi.row(i) = map_point(fm, x).transpose();
  }
  return Phi;
}

double approx_kernel(const FeatureMap& fm, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& xp) {
  check_dim(fm, x, "approx_kernel");
  check_dim(fm, xp, "approx_kernel");
  return map_point(fm, x).dot(map_point(fm, xp));
}

double exact_kernel(FeatureKind kind, double sigma, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& xp) {
  if (x.size() != xp.size()) {
    throw std::invalid_argument("exact_kernel: dimension mismatch");
  }
  switch (kind) {
    case FeatureKind::fourier_gaussian: {
      if (!(sigma > 0.0)) throw std::invalid_argument("exact_kernel: sigma <= 0");
      return std::exp(-(x - xp).squaredNorm() / (2.0 * sigma * sigma));
    }
    case FeatureKind::linear_sketch:
      return x.dot(xp);
    case FeatureKind::relu: {
      // E[relu<w,x> relu<w,x'>] for standard normal w: half the arc-cosine
      // degree-1 kernel (our relu features carry no sqrt(2) scaling).
      const double nx = x.norm(), nxp = xp.norm();
      if (nx == 0.0 || nxp == 0.0) return 0.0;
      double c = x.dot(xp) / (nx * nxp);
      c = std::min(1.0, std::max(-1.0, c));
      const double theta = std::acos(c);
      constexpr double kPi = 3.14159265358979323846264338328;
      return nx * nxp / (2.0 * kPi) * (std::sin(theta) + (kPi - theta) * c);
    }
  }
  throw std::logic_error("exact_kernel: unreachable");
}

Eigen::MatrixXd exact_kernel_gram(FeatureKind kind, double sigma,
                                  const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  K.noalias() = X * X.transpose();
  if (kind == FeatureKind::linear_sketch) return K;
  if (kind == FeatureKind::fourier_gaussian) {
    if (!(sigma > 0.0)) throw std::invalid_argument("exact_kernel: sigma <= 0");
    const Eigen::VectorXd sq = K.diagonal();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        // |x_i - x_j|^2 via the norm identity; clamped, rounding can make it
        // slightly negative.
        const double d2 = std::max(0.0, sq[i] + sq[j] - 2.0 * K(i, j));
        const double v = std::exp(-d2 * inv);
        K(i, j) = v;
        K(j, i) = v;
      }
    }
    return K;
  }
  const Eigen::VectorXd norms = K.diagonal().cwiseSqrt();
  constexpr double kPi = 3.14159265358979323846264338328;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double a = norms[i] * norms[j];
      double v = 0.0;
      if (a != 0.0) {
        double c = K(i, j) / a;
        c = std::min(1.0, std::max(-1.0, c));
        const double theta = std::acos(c);
        v = a / (2.0 * kPi) * (std::sin(theta) + (kPi - theta) * c);
      }
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

void save_feature_map(const FeatureMap& fm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_string(fm.spec.kind) << ',' << fm.spec.M << ',' << fm.spec.D << ','
      << format_double(fm.spec.sigma) << ',' << fm.spec.seed << ','
      << (fm.spec.unscaled_cosine ? 1 : 0) << '\n';
  for (Eigen::Index j = 0; j < fm.W.rows(); ++j) {
    for (Eigen::Index d = 0; d < fm.W.cols(); ++d) {
      if (d) out << ',';
      out << format_double(fm.W(j, d));
    }
    out << '\n';
  }
  for (Eigen::Index j = 0; j < fm.q.size(); ++j) {
    if (j) out << ',';
    out << format_double(fm.q[j]);
  }
  if (fm.q.size() > 0) out << '\n';
}

FeatureMap load_feature_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::stringstream head(line);
  std::string kind_s, m_s, d_s, sigma_s, seed_s, unscaled_s;
  if (!std::getline(head, kind_s, ',') || !std::getline(head, m_s, ',') ||
      !std::getline(head, d_s, ',') || !std::getline(head, sigma_s, ',') ||
      !std::getline(head, seed_s, ',') || !std::getline(head, unscaled_s, ',')) {
    throw std::runtime_error(path + ": malformed header line");
  }
  FeatureMapSpec spec;
  spec.kind = feature_kind_from_string(kind_s);
  spec.M = std::stol(m_s);
  spec.D = std::stol(d_s);
  spec.sigma = std::stod(sigma_s);
  spec.seed = std::stoull(seed_s);
  spec.unscaled_cosine = unscaled_s == "1";

  Eigen::MatrixXd W(spec.M, spec.D);
  for (Eigen::Index j = 0; j < spec.M; ++j) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(path + ": truncated projection rows");
    }
    std::stringstream ss(line);
    std::string cell;
    for (Eigen::Index d = 0; d < spec.D; ++d) {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error(path + ": short projection row");
      }
      W(j, d) = std::stod(cell);
    }
  }
  Eigen::VectorXd q(0);
  if (spec.kind == FeatureKind::fourier_gaussian) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing offsets");
    q.resize(spec.M);
    std::stringstream ss(line);
    std::string cell;
    for (Eigen::Index j = 0; j < spec.M; ++j) {
      if (!std::getline(ss, cell, ',')) {
        throw std::runtime_error(path + ": short offset row");
      }
      q[j] = std::stod(cell);
    }
  }
  return make_feature_map(spec, std::move(W), std::move(q));
}

}  // namespace rfsgd

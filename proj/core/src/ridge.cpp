#include "rfsgd/ridge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rfsgd/sgd.hpp"

namespace rfsgd {

namespace {

constexpr std::uint64_t kGapSplitSeed = 17;

// LLT solve with one diagonal-jitter retry; reports the jitter used.
Eigen::VectorXd spd_solve(Eigen::MatrixXd A, const Eigen::VectorXd& rhs,
                          double* jitter_out, const char* who) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-10 * A.trace() / static_cast<double>(A.rows());
    A.diagonal().array() += jitter;
    llt.compute(A);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(std::string(who) +
                               ": factorization failed even with jitter");
    }
    *jitter_out = jitter;
  }
  Eigen::VectorXd sol = llt.solve(rhs);
  if (!sol.allFinite()) {
    throw std::runtime_error(std::string(who) + ": solve produced non-finite values");
  }
  return sol;
}

}  // namespace

RidgeSolution krr_fit(const Dataset& data, FeatureKind kernel_kind, double sigma,
                      double lambda, Eigen::Index cap) {
  const Eigen::Index n = data.meta.n;
  if (n > cap) {
    throw std::invalid_argument(
        "krr_fit: n=" + std::to_string(n) + " exceeds the cap " +
        std::to_string(cap) + " for the O(n^3) solve; subsample the training set");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("krr_fit: lambda must be > 0");

  Eigen::MatrixXd K = exact_kernel_gram(kernel_kind, sigma, data.X);
  K.diagonal().array() += static_cast<double>(n) * lambda;

  RidgeSolution sol;
  sol.kind = RidgeSolution::Kind::krr;
  sol.lambda = lambda;
  sol.coefficients = spd_solve(std::move(K), data.y, &sol.jitter, "krr_fit");
  sol.train_X = data.X;
  sol.kernel_kind = kernel_kind;
  sol.sigma = sigma;
  return sol;
}

RidgeSolution rf_ridge_fit(const Dataset& data, const FeatureMap& fm,
                           double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("rf_ridge_fit: lambda must be > 0");
  }
  if (data.meta.D != fm.spec.D) {
    throw std::invalid_argument("rf_ridge_fit: data dimension does not match feature map");
  }
  const double n = static_cast<double>(data.meta.n);
  const Eigen::MatrixXd Phi = map_matrix(fm, data.X);
  Eigen::MatrixXd A = Phi.transpose() * Phi / n;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = Phi.transpose() * data.y / n;

  RidgeSolution sol;
  sol.kind = RidgeSolution::Kind::rf_ridge;
  sol.lambda = lambda;
  sol.coefficients = spd_solve(std::move(A), rhs, &sol.jitter, "rf_ridge_fit");
  sol.fm = fm;
  return sol;
}

double ridge_predict(const RidgeSolution& sol, const Eigen::VectorXd& x) {
  if (sol.kind == RidgeSolution::Kind::rf_ridge) {
    return map_point(sol.fm, x).dot(sol.coefficients);
  }
  if (x.size() != sol.train_X.cols()) {
    throw std::invalid_argument("ridge_predict: dimension mismatch");
  }
  double acc = 0.0;
  Eigen::VectorXd xi;
  for (Eigen::Index i = 0; i < sol.train_X.rows(); ++i) {
    xi = sol.train_X.row(i).transpose();
    acc += sol.coefficients[i] * exact_kernel(sol.kernel_kind, sol.sigma, xi, x);
  }
  return acc;
}

Eigen::VectorXd ridge_predict(const RidgeSolution& sol, const Eigen::MatrixXd& X) {
  if (sol.kind == RidgeSolution::Kind::rf_ridge) {
    return map_matrix(sol.fm, X) * sol.coefficients;
  }
  Eigen::VectorXd out(X.rows());
  Eigen::VectorXd x;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    x = X.row(i).transpose();
    out[i] = ridge_predict(sol, x);
  }
  return out;
}

double gd_filter(double c, double gamma, Eigen::Index T) {
  if (c == 0.0) return gamma * static_cast<double>(T);
  return (1.0 - std::pow(1.0 - gamma * c, static_cast<double>(T))) / c;
}

double ridge_filter(double c, double lambda) { return 1.0 / (c + lambda); }

double weighted_filter_gap(double gamma, Eigen::Index T, double weight_exponent,
                           const std::vector<double>& c_grid) {
  if (T < 1) throw std::invalid_argument("weighted_filter_gap: T must be >= 1");
  const double lambda = 1.0 / (gamma * static_cast<double>(T));
  double sup = 0.0;
  for (double c : c_grid) {
    const double gap = std::pow(c, weight_exponent) *
                       std::abs(gd_filter(c, gamma, T) - ridge_filter(c, lambda));
    if (gap > sup) sup = gap;
  }
  return sup;
}

double gd_ridge_gap(const Dataset& data, const FeatureMap& fm, double gamma,
                    Eigen::Index T) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gd_ridge_gap: gamma must be > 0");
  if (T < 0) throw std::invalid_argument("gd_ridge_gap: T must be >= 0");
  if (T == 0) return 0.0;

  auto [train_part, test_part] = split(data, 0.2, kGapSplitSeed, false);

  const Eigen::MatrixXd Phi = map_matrix(fm, train_part.X);
  const Eigen::MatrixXd C =
      Phi.transpose() * Phi / static_cast<double>(train_part.meta.n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
  const double lambda_max = es.eigenvalues().maxCoeff();
  if (!(gamma * lambda_max < 1.0)) {
    throw std::invalid_argument(
        "gd_ridge_gap: gamma=" + std::to_string(gamma) +
        " violates gamma*lambda_max < 1 (lambda_max=" + std::to_string(lambda_max) +
        ")");
  }

  const Model gd = batch_gd(train_part, fm, gamma, 0.0, T);
  const RidgeSolution ridge =
      rf_ridge_fit(train_part, fm, 1.0 / (gamma * static_cast<double>(T)));

  const Eigen::MatrixXd Phi_test = map_matrix(fm, test_part.X);
  const Eigen::VectorXd diff = Phi_test * (gd.w - ridge.coefficients);
  return std::sqrt(diff.squaredNorm() / static_cast<double>(test_part.meta.n));
}

}  // namespace rfsgd

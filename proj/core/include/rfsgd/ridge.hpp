#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rfsgd/dataset.hpp"
#include "rfsgd/features.hpp"

namespace rfsgd {

struct RidgeSolution {
  enum class Kind { krr, rf_ridge };
  Kind kind = Kind::rf_ridge;
  double lambda = 0.0;
  // Jitter added to the diagonal on factorization retry; 0 when none was needed.
  double jitter = 0.0;
  // krr: length-n dual vector. rf_ridge: length-M weight vector.
  Eigen::VectorXd coefficients;

  // krr prediction state.
  Eigen::MatrixXd train_X;
  FeatureKind kernel_kind = FeatureKind::linear_sketch;
  double sigma = 1.0;

  // rf_ridge prediction state.
  FeatureMap fm;
};

// Solves (K + n*lambda*I) alpha = y on the exact kernel Gram matrix.
RidgeSolution krr_fit(const Dataset& data, FeatureKind kernel_kind, double sigma,
                      double lambda, Eigen::Index cap = 8192);

// Solves (Phi^T Phi / n + lambda*I) w = Phi^T y / n.
RidgeSolution rf_ridge_fit(const Dataset& data, const FeatureMap& fm,
                           double lambda);

double ridge_predict(const RidgeSolution& sol, const Eigen::VectorXd& x);
Eigen::VectorXd ridge_predict(const RidgeSolution& sol, const Eigen::MatrixXd& X);

// Spectral filter applied to eigenvalue c by T steps of gradient descent at
// constant step gamma: (1 - (1-gamma*c)^T) / c, with limit gamma*T at c=0.
double gd_filter(double c, double gamma, Eigen::Index T);

// Spectral filter of ridge regression: 1 / (c + lambda).
double ridge_filter(double c, double lambda);

// sup over c_grid of c^weight_exponent * |gd_filter - ridge_filter| with the
// ridge level tied to the descent horizon: lambda = 1/(gamma*T).
double weighted_filter_gap(double gamma, Eigen::Index T, double weight_exponent,
                           const std::vector<double>& c_grid);

// Holdout RMS gap between batch_gd at horizon T and rf_ridge at
// lambda = 1/(gamma*T), on an internal deterministic 80/20 split of data.
double gd_ridge_gap(const Dataset& data, const FeatureMap& fm, double gamma,
                    Eigen::Index T);

}  // namespace rfsgd

#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace rfsgd {

inline double mean_squared_error(const Eigen::VectorXd& pred,
                                 const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument("mean_squared_error: size mismatch");
  }
  if (pred.size() == 0) {
    throw std::invalid_argument("mean_squared_error: empty input");
  }
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

// Labels in {-1, +1}; sign(0) counts as +1.
inline double classification_error(const Eigen::VectorXd& pred,
                                   const Eigen::VectorXd& labels) {
  if (pred.size() != labels.size()) {
    throw std::invalid_argument("classification_error: size mismatch");
  }
  if (pred.size() == 0) {
    throw std::invalid_argument("classification_error: empty input");
  }
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double s = pred[i] < 0.0 ? -1.0 : 1.0;
    if (s != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(pred.size());
}

}  // namespace rfsgd

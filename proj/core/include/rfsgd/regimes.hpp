#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace rfsgd {

struct RegimeConstants {
  double c_gamma = 1.0;
  double c_b = 1.0;
  double c_T = 1.0;
  double c_M = 1.0;
};

struct RegimePlan {
  std::string tag;
  Eigen::Index n = 0;
  double r = 0.5;
  double alpha = 1.0;
  Eigen::Index b = 1;
  double gamma = 0.0;
  double theta = 0.0;
  Eigen::Index T = 0;
  Eigen::Index M = 0;
  double predicted_passes = 0.0;
  double predicted_rate_exponent = 0.0;
  RegimeConstants constants;
  // The step normalization divided out of gamma; see plan().
  double kappa2 = 1.0;
};

const std::vector<std::string>& regime_tags();

// Parameter schedules for tags c1.1..c1.4 (r=1/2, alpha=1) and c2.1..c2.4.
// gamma is returned ready for SgdConfig: the schedule's step divided by
// kappa2, the squared feature-family constant from kappa_squared().
RegimePlan plan(const std::string& tag, Eigen::Index n, double r = 0.5,
                double alpha = 1.0, const RegimeConstants& constants = {},
                double kappa2 = 1.0);

struct Violation {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AdmissibilityReport {
  bool ok = true;
  std::vector<Violation> violations;
};

// Step-size caps and the feature-count lower bound, evaluated literally on
// gamma*kappa^2 (undoing plan()'s folding). Natural logarithms throughout.
AdmissibilityReport admissible(const RegimePlan& plan, double delta,
                               double kappa = 1.0);

}  // namespace rfsgd

#include "rfsgd/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfsgd {

namespace {

Eigen::Index ceil_to_index(double v) {
  const double c = std::ceil(v - 1e-12);
  if (c < 1.0) return 1;
  return static_cast<Eigen::Index>(c);
}

}  // namespace

const std::vector<std::string>& regime_tags() {
  static const std::vector<std::string> tags = {"c1.1", "c1.2", "c1.3", "c1.4",
                                                "c2.1", "c2.2", "c2.3", "c2.4"};
  return tags;
}

RegimePlan plan(const std::string& tag, Eigen::Index n, double r, double alpha,
                const RegimeConstants& constants, double kappa2) {
  const auto& tags = regime_tags();
  if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
    throw std::invalid_argument("plan: unknown tag '" + tag + "'");
  }
  if (n < 4) throw std::invalid_argument("plan: n must be >= 4");
  if (!(kappa2 > 0.0)) throw std::invalid_argument("plan: kappa2 must be > 0");
  const bool refined = tag[1] == '2';
  if (refined) {
    if (!(r >= 0.5)) throw std::invalid_argument("plan: r must be >= 1/2");
    if (!(alpha > 0.0 && alpha <= 1.0)) {
      throw std::invalid_argument("plan: alpha must lie in (0, 1]");
    }
  } else {
    r = 0.5;
    alpha = 1.0;
  }

  const double nd = static_cast<double>(n);
  const double s = 2.0 * r + alpha;
  const int variant = tag[3] - '0';

  RegimePlan p;
  p.tag = tag;
  p.n = n;
  p.r = r;
  p.alpha = alpha;
  p.theta = 0.0;
  p.constants = constants;
  p.kappa2 = kappa2;

  double gamma_sched = 0.0;
  double T_real = 0.0;
  double b_real = 1.0;
  switch (variant) {
    case 1:
      b_real = 1.0;
      gamma_sched = constants.c_gamma / nd;
      T_real = constants.c_T * std::pow(nd, (s + 1.0) / s);
      break;
    case 2:
      b_real = 1.0;
      gamma_sched = constants.c_gamma * std::pow(nd, -2.0 * r / s);
      T_real = constants.c_T * std::pow(nd, (2.0 * r + 1.0) / s);
      break;
    case 3:
      b_real = constants.c_b * std::pow(nd, 2.0 * r / s);
      gamma_sched = constants.c_gamma;
      T_real = constants.c_T * std::pow(nd, 1.0 / s);
      break;
    case 4:
      b_real = constants.c_b * nd;
      gamma_sched = constants.c_gamma;
      T_real = constants.c_T * std::pow(nd, 1.0 / s);
      break;
    default:
      throw std::invalid_argument("plan: unknown tag '" + tag + "'");
  }

  p.b = std::clamp<Eigen::Index>(ceil_to_index(b_real), 1, n);
  p.gamma = gamma_sched / kappa2;
  p.T = ceil_to_index(T_real);
  const double m_exp = (1.0 + alpha * (2.0 * r - 1.0)) / s;
  p.M = ceil_to_index(constants.c_M * std::pow(nd, m_exp) *
                      std::max(1.0, std::log(nd)));
  const Eigen::Index per_pass = (n + p.b - 1) / p.b;
  p.predicted_passes = static_cast<double>(p.T) / static_cast<double>(per_pass);
  p.predicted_rate_exponent = -2.0 * r / s;
  return p;
}

AdmissibilityReport admissible(const RegimePlan& plan, double delta,
                               double kappa) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("admissible: delta must lie in (0, 1)");
  }
  if (!(kappa > 0.0)) throw std::invalid_argument("admissible: kappa must be > 0");

  AdmissibilityReport report;
  auto check_le = [&report](const std::string& name, double lhs, double rhs) {
    if (!(lhs <= rhs)) {
      report.ok = false;
      report.violations.push_back({name, lhs, rhs});
    }
  };
  auto check_ge = [&report](const std::string& name, double lhs, double rhs) {
    if (!(lhs >= rhs)) {
      report.ok = false;
      report.violations.push_back({name, lhs, rhs});
    }
  };

  const double gk = plan.gamma * kappa * kappa;
  const double nd = static_cast<double>(plan.n);
  const double Td = static_cast<double>(std::max<Eigen::Index>(plan.T, 1));
  const double t_pow = std::pow(Td, 1.0 - plan.theta);

  check_le("gamma*kappa^2 <= n/(9*T^(1-theta)*log(n/delta))", gk,
           nd / (9.0 * t_pow * std::log(nd / delta)));
  if (plan.theta == 0.0) {
    check_le("gamma*kappa^2 <= 1/(8*(1+log T))", gk,
             1.0 / (8.0 * (1.0 + std::log(Td))));
  } else {
    check_le("gamma*kappa^2 <= min(theta,1-theta)/7", gk,
             std::min(plan.theta, 1.0 - plan.theta) / 7.0);
  }
  const double gT = gk * t_pow;
  const double arg = 12.0 * gT / delta;
  const double m_floor = arg > 1.0 ? (4.0 + 18.0 * gT) * std::log(arg) : 0.0;
  check_ge("M >= (4+18*gamma*kappa^2*T^(1-theta))*log(12*gamma*kappa^2*T^(1-theta)/delta)",
           static_cast<double>(plan.M), m_floor);
  return report;
}

}  // namespace rfsgd

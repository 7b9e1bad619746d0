#include "rfsgd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rfsgd {

namespace {

SpectralSummary decompose(const Eigen::MatrixXd& A, SpectrumSource source,
                          Eigen::Index n_used, Eigen::Index cap,
                          const char* who) {
  if (A.rows() > cap) {
    throw std::invalid_argument(std::string(who) + ": matrix side " +
                                std::to_string(A.rows()) +
                                " exceeds the eigendecomposition cap " +
                                std::to_string(cap));
  }
  if (!A.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite matrix entries");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error(std::string(who) + ": eigendecomposition failed");
  }
  return make_summary(es.eigenvalues(), source, n_used, A.trace());
}

}  // namespace

std::string to_string(SpectrumSource source) {
  switch (source) {
    case SpectrumSource::exact_synthetic: return "exact-synthetic";
    case SpectrumSource::empirical_kernel: return "empirical-kernel";
    case SpectrumSource::empirical_features: return "empirical-features";
  }
  return "?";
}

SpectralSummary make_summary(Eigen::VectorXd eigenvalues, SpectrumSource source,
                             Eigen::Index n_used, double expected_trace) {
  const double sum = eigenvalues.sum();
  const double tol = 1e-8 * std::max(1.0, std::abs(expected_trace));
  if (std::abs(sum - expected_trace) > tol) {
    throw std::invalid_argument("make_summary: eigenvalue sum " +
                                std::to_string(sum) + " does not match trace " +
                                std::to_string(expected_trace));
  }
  const double max_ev = eigenvalues.size() > 0 ? eigenvalues.maxCoeff() : 0.0;
  const double neg_tol = 1e-10 * std::max(0.0, max_ev);
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] < -neg_tol) {
      throw std::invalid_argument("make_summary: eigenvalue " +
                                  std::to_string(eigenvalues[i]) +
                                  " below the negative tolerance");
    }
    if (eigenvalues[i] < 0.0) eigenvalues[i] = 0.0;
  }
  std::sort(eigenvalues.data(), eigenvalues.data() + eigenvalues.size(),
            std::greater<double>());
  SpectralSummary out;
  out.eigenvalues = std::move(eigenvalues);
  out.source = source;
  out.n_used = n_used;
  return out;
}

SpectralSummary spectrum(const Dataset& data, FeatureKind kernel_kind,
                         double sigma, Eigen::Index cap) {
  const Eigen::Index n = data.meta.n;
  Eigen::MatrixXd K = exact_kernel_gram(kernel_kind, sigma, data.X);
  K /= static_cast<double>(n);
  return decompose(K, SpectrumSource::empirical_kernel, n, cap, "spectrum");
}

SpectralSummary spectrum(const Eigen::MatrixXd& Phi, Eigen::Index cap) {
  const Eigen::Index n = Phi.rows();
  if (n < 1) throw std::invalid_argument("spectrum: empty feature matrix");
  const Eigen::MatrixXd C = Phi.transpose() * Phi / static_cast<double>(n);
  return decompose(C, SpectrumSource::empirical_features, n, cap, "spectrum");
}

SpectralSummary exact_synthetic_spectrum(Eigen::Index D, double alpha) {
  SpectralSummary out;
  out.eigenvalues = synthetic_eigenvalues(D, alpha);
  out.source = SpectrumSource::exact_synthetic;
  out.n_used = 0;
  return out;
}

double effective_dimension(const SpectralSummary& summary, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("effective_dimension: lambda must be > 0");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < summary.eigenvalues.size(); ++i) {
    const double mu = summary.eigenvalues[i];
    acc += mu / (mu + lambda);
  }
  return acc;
}

CapacityFit fit_capacity(const SpectralSummary& summary,
                         const std::vector<double>& lambda_grid) {
  if (lambda_grid.size() < 4) {
    throw std::invalid_argument("fit_capacity: grid needs at least 4 points");
  }
  if (summary.eigenvalues.size() == 0 || summary.eigenvalues.maxCoeff() <= 0.0) {
    throw std::invalid_argument("fit_capacity: spectrum has no positive mass");
  }
  double lo = lambda_grid[0], hi = lambda_grid[0];
  for (double l : lambda_grid) {
    if (!(l > 0.0)) throw std::invalid_argument("fit_capacity: lambda must be > 0");
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  if (std::log10(hi / lo) < 2.0 - 1e-9) {
    throw std::invalid_argument("fit_capacity: grid must span at least 2 decades");
  }
  const double mu_max = summary.eigenvalues.maxCoeff();
  const double mu_min = summary.eigenvalues.minCoeff();
  if (lo < mu_min - 1e-15 || hi > mu_max * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "fit_capacity: grid must stay inside [mu_min, mu_max] = [" +
        std::to_string(mu_min) + ", " + std::to_string(mu_max) + "]");
  }

  const auto n = static_cast<double>(lambda_grid.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (double l : lambda_grid) {
    const double x = std::log(l);
    const double nl = effective_dimension(summary, l);
    if (!(nl > 0.0)) {
      throw std::invalid_argument("fit_capacity: zero effective dimension on grid");
    }
    const double y = std::log(nl);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::invalid_argument("fit_capacity: degenerate grid");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  double ss_res = 0.0;
  const double mean_y = sy / n;
  double ss_tot = syy - n * mean_y * mean_y;
  for (double l : lambda_grid) {
    const double x = std::log(l);
    const double y = std::log(effective_dimension(summary, l));
    const double e = y - (intercept + slope * x);
    ss_res += e * e;
  }

  CapacityFit fit;
  fit.alpha_hat = std::clamp(-slope, 0.0, 1.0);
  fit.Q_hat = std::exp(intercept / 2.0);
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace rfsgd

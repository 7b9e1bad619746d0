#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rfsgd/dataset.hpp"
#include "rfsgd/features.hpp"

namespace rfsgd {

enum class SpectrumSource { exact_synthetic, empirical_kernel, empirical_features };

std::string to_string(SpectrumSource source);

struct SpectralSummary {
  // Sorted descending, nonnegative.
  Eigen::VectorXd eigenvalues;
  SpectrumSource source = SpectrumSource::exact_synthetic;
  Eigen::Index n_used = 0;
};

// Validates raw eigenvalues (negatives beyond -1e-10*max are an error, small
// ones clamp to 0; sum must match expected_trace to 1e-8 relative), sorts.
SpectralSummary make_summary(Eigen::VectorXd eigenvalues, SpectrumSource source,
                             Eigen::Index n_used, double expected_trace);

// Eigendecomposition of the exact-kernel Gram matrix divided by n.
SpectralSummary spectrum(const Dataset& data, FeatureKind kernel_kind,
                         double sigma, Eigen::Index cap = 4096);

// Eigendecomposition of the feature covariance Phi^T Phi / n.
SpectralSummary spectrum(const Eigen::MatrixXd& Phi, Eigen::Index cap = 4096);

// The generator's covariance eigenvalues mu_i = i^(-1/alpha), descending.
SpectralSummary exact_synthetic_spectrum(Eigen::Index D, double alpha);

// N(lambda) = sum_i mu_i / (mu_i + lambda).
double effective_dimension(const SpectralSummary& summary, double lambda);

struct CapacityFit {
  double alpha_hat = 0.0;
  double Q_hat = 0.0;
  double r2 = 0.0;
};

// OLS of log N(lambda) against log lambda; alpha_hat = -slope clamped to [0,1].
// Grid: >= 4 points spanning >= 2 decades, inside [mu_min, mu_max].
CapacityFit fit_capacity(const SpectralSummary& summary,
                         const std::vector<double>& lambda_grid);

}  // namespace rfsgd

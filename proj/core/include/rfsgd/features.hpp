#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace rfsgd {

enum class FeatureKind { fourier_gaussian, relu, linear_sketch };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

struct FeatureMapSpec {
  FeatureKind kind = FeatureKind::fourier_gaussian;
  Eigen::Index M = 1;
  Eigen::Index D = 1;
  double sigma = 1.0;  // fourier_gaussian bandwidth
  std::uint64_t seed = 0;
  // fourier_gaussian draws sqrt(2)*cos(<w,x>+q) so the limit kernel is the
  // full Gaussian kernel; unscaled_cosine drops the sqrt(2) (limit is then
  // half the Gaussian kernel, and the per-feature bound kappa becomes 1).
  bool unscaled_cosine = false;
};

// kappa^2: the uniform bound on psi^2 for bounded families (2 for the scaled
// cosine, 1 for the unscaled); relu/linear_sketch are unbounded on unbounded
// domains and report 1 as the step-folding convention.
double kappa_squared(const FeatureMapSpec& spec);

struct FeatureMap {
  FeatureMapSpec spec;
  Eigen::MatrixXd W;  // M x D projection rows
  Eigen::VectorXd q;  // M offsets (fourier_gaussian only, else size 0)
};

// Draws frozen parameters. Feature j's parameters come from the sub-stream
// (seed, j), so maps of sizes M < M' with equal seeds share their first M
// features exactly.
FeatureMap build(const FeatureMapSpec& spec);

// Test-override constructor: wraps given parameters without drawing.
FeatureMap make_feature_map(const FeatureMapSpec& spec, Eigen::MatrixXd W,
                            Eigen::VectorXd q);

// psi_j(x) for j = 1..M, without the 1/sqrt(M) scaling. Prefix dot products
// of raw features over the first m entries give the size-m approximate kernel.
Eigen::VectorXd raw_features(const FeatureMap& fm, const Eigen::VectorXd& x);

// phi_M(x): length-M vector, 1/sqrt(M) scaling included.
Eigen::VectorXd map_point(const FeatureMap& fm, const Eigen::VectorXd& x);

// Rows phi_M(x_i)^T for each row of X. Computed row-by-row with the same
// expressions as map_point so streaming recomputation is bit-identical.
Eigen::MatrixXd map_matrix(const FeatureMap& fm, const Eigen::MatrixXd& X);

double approx_kernel(const FeatureMap& fm, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& xp);

// M -> infinity limit kernel: Gaussian exp(-|x-x'|^2/(2 sigma^2)) for
// fourier_gaussian, <x,x'> for linear_sketch, and for relu half the
// arc-cosine degree-1 kernel (the relu features carry no sqrt(2) scaling,
// so E[psi psi'] is |x||x'|/(2 pi) * (sin t + (pi - t) cos t)).
double exact_kernel(FeatureKind kind, double sigma, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& xp);

// Pairwise limit kernel over the rows of X. Every kernel above depends only
// on inner products and norms, so the whole matrix comes from one X X^T
// product instead of n^2/2 row extractions.
Eigen::MatrixXd exact_kernel_gram(FeatureKind kind, double sigma,
                                  const Eigen::MatrixXd& X);

// Sidecar for exact run replay: W row-major, then q.
void save_feature_map(const FeatureMap& fm, const std::string& path);
FeatureMap load_feature_map(const std::string& path);

}  // namespace rfsgd

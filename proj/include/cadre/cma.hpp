#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cadre {

using Rng = std::mt19937_64;

/// Derives an independent generator for stream `stream` of a run seeded with `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Gaussian search distribution with covariance matrix adaptation.
///
/// Samples are x = mean + sigma * scale .* (B D z), z ~ N(0, I), where C = B D^2 B^T
/// lives in coordinates divided by `scale`, so C = I means one standard
/// deviation of sigma * scale per coordinate. Samples are clamped into
/// [lower, upper] and the update uses the clamped points.
///
/// Learning rates, recombination weights and cumulation constants are the
/// usual defaults for the dimension; weights are recomputed for the number of
/// parents handed to each update.
class CmaDistribution {
 public:
  CmaDistribution(Eigen::VectorXd mean, double sigma0, Eigen::VectorXd scale,
                  Eigen::VectorXd lower, Eigen::VectorXd upper);

  std::size_t dimension() const { return static_cast<std::size_t>(mean_.size()); }

  /// Draws `n` clamped samples. Returns an empty batch if the covariance is
  /// no longer numerically positive definite.
  std::vector<Eigen::VectorXd> sample(std::size_t n, Rng& rng);

  /// One generation update from parents sorted best first. `batch_size` is
  /// the number of samples the parents were selected from.
  void update(std::span<const Eigen::VectorXd> ranked_parents, std::size_t batch_size);

  /// Fresh distribution around `mean`: C = I, sigma = sigma0, zero paths.
  void reset(Eigen::VectorXd mean);

  /// False once C has a non-positive or non-finite eigenvalue, an extreme
  /// condition number, or sigma has collapsed.
  bool healthy();

  const Eigen::VectorXd& mean() const { return mean_; }
  double sigma() const { return sigma_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  std::size_t generation() const { return generation_; }

 private:
  void decompose();

  Eigen::VectorXd mean_;
  double sigma0_;
  double sigma_;
  Eigen::VectorXd scale_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;

  Eigen::MatrixXd cov_;
  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_sqrt_;
  Eigen::MatrixXd inv_sqrt_;
  Eigen::VectorXd path_sigma_;
  Eigen::VectorXd path_c_;

  std::size_t generation_ = 0;
  std::size_t evals_since_decompose_ = 0;
  std::size_t evals_seen_ = 0;
  bool decomposed_ = false;
  bool healthy_ = true;
};

}  // namespace cadre

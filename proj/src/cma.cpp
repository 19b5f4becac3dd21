#include "cadre/cma.hpp"

#include <algorithm>
#include <cmath>

#include "cadre/errors.hpp"

namespace cadre {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

namespace {

struct Strategy {
  Eigen::VectorXd weights;
  double mueff;
  double c_sigma;
  double d_sigma;
  double c_c;
  double c1;
  double c_mu;
};

Strategy strategy_for(std::size_t mu, double n) {
  Strategy s;
  s.weights.resize(static_cast<Eigen::Index>(mu));
  for (std::size_t i = 0; i < mu; ++i) {
    s.weights[static_cast<Eigen::Index>(i)] =
        std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
  }
  s.weights /= s.weights.sum();
  s.mueff = 1.0 / s.weights.squaredNorm();
  const double me = s.mueff;
  s.c_sigma = (me + 2.0) / (n + me + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((me - 1.0) / (n + 1.0)) - 1.0) + s.c_sigma;
  s.c_c = (4.0 + me / n) / (n + 4.0 + 2.0 * me / n);
  s.c1 = 2.0 / ((n + 1.3) * (n + 1.3) + me);
  s.c_mu = std::min(1.0 - s.c1, 2.0 * (me - 2.0 + 1.0 / me) / ((n + 2.0) * (n + 2.0) + me));
  return s;
}

}  // namespace

CmaDistribution::CmaDistribution(Eigen::VectorXd mean, double sigma0, Eigen::VectorXd scale,
                                 Eigen::VectorXd lower, Eigen::VectorXd upper)
    : sigma0_(sigma0),
      scale_(std::move(scale)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  const auto n = mean.size();
  if (n == 0 || scale_.size() != n || lower_.size() != n || upper_.size() != n) {
    throw ValidationError("CMA distribution: mean, scale and bounds must share a nonzero dimension");
  }
  if (!(sigma0 > 0.0) || (scale_.array() <= 0.0).any()) {
    throw ValidationError("CMA distribution: sigma0 and scale must be positive");
  }
  reset(std::move(mean));
}

void CmaDistribution::reset(Eigen::VectorXd mean) {
  const auto n = mean.size();
  mean_ = mean.cwiseMax(lower_).cwiseMin(upper_);
  sigma_ = sigma0_;
  cov_ = Eigen::MatrixXd::Identity(n, n);
  eigvecs_ = Eigen::MatrixXd::Identity(n, n);
  eigvals_sqrt_ = Eigen::VectorXd::Ones(n);
  inv_sqrt_ = Eigen::MatrixXd::Identity(n, n);
  path_sigma_ = Eigen::VectorXd::Zero(n);
  path_c_ = Eigen::VectorXd::Zero(n);
  generation_ = 0;
  evals_since_decompose_ = 0;
  evals_seen_ = 0;
  decomposed_ = true;
  healthy_ = true;
}

void CmaDistribution::decompose() {
  decomposed_ = true;
  evals_since_decompose_ = 0;
  if (!cov_.allFinite()) {
    healthy_ = false;
    return;
  }
  Eigen::MatrixXd sym = 0.5 * (cov_ + cov_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    healthy_ = false;
    return;
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || !std::isfinite(hi) || hi / lo > 1e14) {
    healthy_ = false;
    return;
  }
  cov_ = sym;
  eigvecs_ = solver.eigenvectors();
  eigvals_sqrt_ = ev.cwiseSqrt();
  inv_sqrt_ = eigvecs_ * eigvals_sqrt_.cwiseInverse().asDiagonal() * eigvecs_.transpose();
}

bool CmaDistribution::healthy() {
  if (!decomposed_) decompose();
  if (!(sigma_ > 1e-12) || !std::isfinite(sigma_)) healthy_ = false;
  return healthy_;
}

std::vector<Eigen::VectorXd> CmaDistribution::sample(std::size_t n, Rng& rng) {
  if (!healthy()) return {};
  const auto dim = mean_.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::MatrixXd transform = eigvecs_ * eigvals_sqrt_.asDiagonal();
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  Eigen::VectorXd z(dim);
  for (std::size_t k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = normal(rng);
    Eigen::VectorXd x = mean_ + sigma_ * scale_.cwiseProduct(transform * z);
    out.push_back(x.cwiseMax(lower_).cwiseMin(upper_));
  }
  return out;
}

void CmaDistribution::update(std::span<const Eigen::VectorXd> ranked_parents,
                             std::size_t batch_size) {
  if (ranked_parents.empty()) return;
  if (!decomposed_) decompose();
  const double n = static_cast<double>(mean_.size());
  const Strategy s = strategy_for(ranked_parents.size(), n);
  const double chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  // Steps in the scaled coordinate system where C lives.
  Eigen::MatrixXd steps(mean_.size(), static_cast<Eigen::Index>(ranked_parents.size()));
  for (std::size_t i = 0; i < ranked_parents.size(); ++i) {
    steps.col(static_cast<Eigen::Index>(i)) =
        (ranked_parents[i] - mean_).cwiseQuotient(scale_) / sigma_;
  }
  const Eigen::VectorXd step_w = steps * s.weights;
  mean_ = (mean_ + sigma_ * scale_.cwiseProduct(step_w)).cwiseMax(lower_).cwiseMin(upper_);

  ++generation_;
  path_sigma_ = (1.0 - s.c_sigma) * path_sigma_ +
                std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mueff) * (inv_sqrt_ * step_w);
  const double ps_norm = path_sigma_.norm();
  const double correction =
      std::sqrt(1.0 - std::pow(1.0 - s.c_sigma, 2.0 * static_cast<double>(generation_)));
  const bool h_sigma = ps_norm / correction < (1.4 + 2.0 / (n + 1.0)) * chi_n;
  path_c_ = (1.0 - s.c_c) * path_c_;
  if (h_sigma) path_c_ += std::sqrt(s.c_c * (2.0 - s.c_c) * s.mueff) * step_w;

  const double old_weight =
      1.0 - s.c1 - s.c_mu + (h_sigma ? 0.0 : s.c1 * s.c_c * (2.0 - s.c_c));
  cov_ *= old_weight;
  cov_.noalias() += s.c1 * path_c_ * path_c_.transpose();
  cov_.noalias() += s.c_mu * (steps * s.weights.asDiagonal() * steps.transpose());

  sigma_ *= std::exp(std::min(1.0, (s.c_sigma / s.d_sigma) * (ps_norm / chi_n - 1.0)));

  evals_seen_ += batch_size;
  evals_since_decompose_ += batch_size;
  const double gap = static_cast<double>(batch_size) / (s.c1 + s.c_mu) / n / 10.0;
  if (static_cast<double>(evals_since_decompose_) > gap) decomposed_ = false;
}

}  // namespace cadre

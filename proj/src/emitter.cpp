#include "cadre/emitter.hpp"

#include <algorithm>

#include "cadre/errors.hpp"

namespace cadre {

namespace {

Eigen::VectorXd initial_scale(const SearchBox& box, double fraction) {
  return (box.upper - box.lower) * fraction;
}

}  // namespace

SearchBox SearchBox::for_perturbation(std::size_t dimension, const PerturbationBounds& bounds) {
  if (dimension == 0 || dimension % 2 != 0) {
    throw ValidationError("perturbation search space must hold (accel, steer) pairs");
  }
  SearchBox box;
  box.lower.resize(static_cast<Eigen::Index>(dimension));
  box.upper.resize(static_cast<Eigen::Index>(dimension));
  for (Eigen::Index k = 0; k < box.lower.size(); ++k) {
    const double b = (k % 2 == 0) ? bounds.accel_bound : bounds.steer_bound;
    box.lower[k] = -b;
    box.upper[k] = b;
  }
  return box;
}

ImprovementEmitter::ImprovementEmitter(SearchBox box, EmitterConfig cfg, std::uint64_t seed)
    : box_(std::move(box)),
      cfg_(cfg),
      dist_(Eigen::VectorXd::Zero(box_.lower.size()), cfg.sigma0,
            initial_scale(box_, cfg.init_std_fraction), box_.lower, box_.upper),
      rng_(make_rng(seed, 1)) {
  if (cfg_.batch_size == 0) throw ValidationError("emitter batch size must be at least 1");
}

std::vector<std::vector<double>> ImprovementEmitter::ask(std::size_t n) {
  std::vector<std::vector<double>> out;
  for (const auto& x : dist_.sample(n, rng_)) {
    out.emplace_back(x.data(), x.data() + x.size());
  }
  return out;
}

std::vector<std::size_t> ImprovementEmitter::rank_parents(std::span<const InsertResult> results) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].status != InsertStatus::Rejected) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const bool new_a = results[a].status == InsertStatus::NewCell;
    const bool new_b = results[b].status == InsertStatus::NewCell;
    if (new_a != new_b) return new_a;
    return results[a].delta > results[b].delta;
  });
  return order;
}

bool ImprovementEmitter::tell(std::span<const std::vector<double>> thetas,
                              std::span<const InsertResult> results) {
  if (thetas.size() != results.size()) {
    throw ValidationError("emitter tell: thetas and results differ in length");
  }
  const auto order = rank_parents(results);
  if (order.empty()) return true;

  // Recombine the better half of the ranked parents.
  const std::size_t mu = (order.size() + 1) / 2;
  std::vector<Eigen::VectorXd> parents;
  parents.reserve(mu);
  for (std::size_t r = 0; r < mu; ++r) {
    const auto& t = thetas[order[r]];
    parents.emplace_back(Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size())));
  }
  dist_.update(parents, thetas.size());
  return !dist_.healthy();
}

void ImprovementEmitter::restart(std::span<const double> mean) {
  if (mean.size() != box_.dimension()) {
    throw ValidationError("emitter restart mean has the wrong dimension");
  }
  dist_.reset(Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())));
  ++restarts_;
}

}  // namespace cadre

#include "cadre/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "cadre/errors.hpp"

namespace cadre {

RunResult run_random(const Evaluator& evaluate, std::size_t dimension, const RunSettings& settings) {
  settings.validate();
  const SearchBox box = SearchBox::for_perturbation(dimension, settings.sim.bounds);
  RunResult result{GridArchive(settings.spec), {}, 0};
  Rng rng = make_rng(settings.seed, 3);

  std::size_t spent = 0;
  while (spent < settings.budget) {
    const std::size_t n = std::min(settings.batch_size, settings.budget - spent);
    std::vector<std::vector<double>> thetas(n, std::vector<double>(dimension));
    for (auto& theta : thetas) {
      for (std::size_t k = 0; k < dimension; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        theta[k] = std::uniform_real_distribution<double>(box.lower[i], box.upper[i])(rng);
      }
    }
    const auto evals = evaluate_batch(evaluate, thetas, settings.threads);
    for (std::size_t b = 0; b < n; ++b) result.archive.insert(thetas[b], evals[b].f, evals[b].m);
    spent += n;
    result.log.push_back(metric_row(result.archive));
  }
  return result;
}

RunResult run_cmaes(const Evaluator& evaluate, std::size_t dimension, const RunSettings& settings) {
  settings.validate();
  const SearchBox box = SearchBox::for_perturbation(dimension, settings.sim.bounds);
  RunResult result{GridArchive(settings.spec), {}, 0};
  Rng rng = make_rng(settings.seed, 4);
  CmaDistribution dist(Eigen::VectorXd::Zero(box.lower.size()), settings.sigma0,
                       (box.upper - box.lower) * settings.init_std_fraction, box.lower, box.upper);

  double best = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  auto restart = [&] {
    Eigen::VectorXd mean(box.lower.size());
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
      mean[k] = std::uniform_real_distribution<double>(box.lower[k], box.upper[k])(rng);
    }
    dist.reset(std::move(mean));
    best = -std::numeric_limits<double>::infinity();
    stale = 0;
    ++result.restarts;
  };

  std::size_t spent = 0;
  while (spent < settings.budget) {
    const std::size_t n = std::min(settings.batch_size, settings.budget - spent);
    const auto samples = dist.sample(n, rng);
    if (samples.empty()) {
      restart();
      continue;
    }
    std::vector<std::vector<double>> thetas;
    thetas.reserve(n);
    for (const auto& x : samples) thetas.emplace_back(x.data(), x.data() + x.size());
    const auto evals = evaluate_batch(evaluate, thetas, settings.threads);
    for (std::size_t b = 0; b < n; ++b) result.archive.insert(thetas[b], evals[b].f, evals[b].m);
    spent += n;
    result.log.push_back(metric_row(result.archive));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return evals[a].f > evals[b].f; });
    std::vector<Eigen::VectorXd> parents;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, n / 2); ++r) parents.push_back(samples[order[r]]);
    dist.update(parents, n);

    const double batch_best = evals[order.front()].f;
    if (batch_best > best) {
      best = batch_best;
      stale = 0;
    } else if (++stale >= settings.stagnation_iterations) {
      restart();
    }
  }
  return result;
}

RunResult run_random(const Scenario& scenario, std::size_t target, const RunSettings& settings) {
  const TrafficSimulator sim(scenario, target, settings.sim);
  return run_random(make_evaluator(sim), sim.dimension(), settings);
}

RunResult run_cmaes(const Scenario& scenario, std::size_t target, const RunSettings& settings) {
  const TrafficSimulator sim(scenario, target, settings.sim);
  return run_cmaes(make_evaluator(sim), sim.dimension(), settings);
}

}  // namespace cadre

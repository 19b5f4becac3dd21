#include "cadre/qd.hpp"

#include <algorithm>
#include <exception>
#include <memory>
#include <thread>

#include "cadre/baselines.hpp"
#include "cadre/errors.hpp"

namespace cadre {

Evaluator make_evaluator(const TrafficSimulator& sim) {
  auto shared = std::make_shared<const TrafficSimulator>(sim);
  return [shared](std::span<const double> theta) {
    const SimResult r = shared->run(theta);
    return Evaluation{r.f, r.m};
  };
}

std::vector<Evaluation> evaluate_batch(const Evaluator& evaluate,
                                       std::span<const std::vector<double>> thetas,
                                       std::size_t threads) {
  std::vector<Evaluation> out(thetas.size());
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), thetas.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < thetas.size(); ++i) out[i] = evaluate(thetas[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < thetas.size(); i += workers) out[i] = evaluate(thetas[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Cadre:
      return "cadre";
    case Method::Random:
      return "random";
    case Method::CmaEs:
      return "cmaes";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "cadre") return Method::Cadre;
  if (name == "random") return Method::Random;
  if (name == "cmaes") return Method::CmaEs;
  throw ValidationError("unknown method '" + name + "' (expected cadre, random or cmaes)");
}

void RunSettings::validate() const {
  if (batch_size == 0) throw ValidationError("batch size must be at least 1");
  if (budget < batch_size) throw ValidationError("budget must be at least the batch size");
  if (!(sigma0 > 0.0) || !(init_std_fraction > 0.0)) {
    throw ValidationError("sigma0 and init_std_fraction must be positive");
  }
  spec.validate();
  oar.validate();
  sim.ego.validate();
  sim.bounds.validate();
}

RunResult run_cadre(const Evaluator& evaluate, std::size_t dimension, const RunSettings& settings) {
  settings.validate();
  RunResult result{GridArchive(settings.spec), {}, 0};
  GridArchive& archive = result.archive;
  ImprovementEmitter emitter(SearchBox::for_perturbation(dimension, settings.sim.bounds),
                             EmitterConfig{settings.batch_size, settings.sigma0,
                                           settings.init_std_fraction},
                             settings.seed);
  Rng restart_rng = make_rng(settings.seed, 2);
  const std::vector<double> zero(dimension, 0.0);

  auto restart = [&] {
    const Elite* elite = oar_restart(archive, settings.oar, restart_rng);
    emitter.restart(elite ? std::span<const double>(elite->theta) : std::span<const double>(zero));
  };

  std::size_t spent = 0;
  while (spent < settings.budget) {
    const std::size_t n = std::min(settings.batch_size, settings.budget - spent);
    auto thetas = emitter.ask(n);
    if (thetas.empty()) {
      restart();
      continue;
    }
    const auto evals = evaluate_batch(evaluate, thetas, settings.threads);
    std::vector<InsertResult> inserts;
    inserts.reserve(n);
    for (std::size_t b = 0; b < n; ++b) {
      inserts.push_back(archive.insert(thetas[b], evals[b].f, evals[b].m));
    }
    spent += n;
    result.log.push_back(metric_row(archive));
    if (emitter.tell(thetas, inserts)) restart();
  }
  result.restarts = emitter.restarts();
  return result;
}

RunResult run_cadre(const Scenario& scenario, std::size_t target, const RunSettings& settings) {
  const TrafficSimulator sim(scenario, target, settings.sim);
  return run_cadre(make_evaluator(sim), sim.dimension(), settings);
}

RunResult run_method(Method method, const Evaluator& evaluate, std::size_t dimension,
                     const RunSettings& settings) {
  switch (method) {
    case Method::Cadre:
      return run_cadre(evaluate, dimension, settings);
    case Method::Random:
      return run_random(evaluate, dimension, settings);
    case Method::CmaEs:
      return run_cmaes(evaluate, dimension, settings);
  }
  throw ValidationError("unknown method");
}

RunResult run_method(Method method, const Scenario& scenario, std::size_t target,
                     const RunSettings& settings) {
  const TrafficSimulator sim(scenario, target, settings.sim);
  return run_method(method, make_evaluator(sim), sim.dimension(), settings);
}

}  // namespace cadre

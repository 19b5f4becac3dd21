#include "cadre/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "cadre/baselines.hpp"
#include "cadre/errors.hpp"
#include "cadre/io.hpp"
#include "cadre/metrics.hpp"
#include "cadre/qd.hpp"
#include "cadre/scenes.hpp"

namespace cadre {

namespace fs = std::filesystem;

namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("CADRE_THREADS")) {
    char* end = nullptr;
    const unsigned long n = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RetrieveMode parse_mode(const std::string& mode) {
  if (mode == "exact") return RetrieveMode::Exact;
  if (mode == "nearest") return RetrieveMode::Nearest;
  throw ValidationError("mode must be exact or nearest");
}

struct Options {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<std::string> method;
  std::optional<std::string> tau;
  std::optional<std::string> target;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::string archive;
  std::optional<double> m1, m2, m3;
  std::string mode = "exact";
  std::string kind;
  std::size_t k = 5;
};

std::optional<MeasureValues> query_of(const Options& o) {
  if (!o.m1 && !o.m2 && !o.m3) return std::nullopt;
  if (!o.m1 || !o.m2 || !o.m3) throw ValidationError("a measure query needs all of --m1 --m2 --m3");
  return MeasureValues{*o.m1, *o.m2, *o.m3};
}

nlohmann::json elite_summary(const Elite& e) {
  return {{"cell", e.cell},
          {"f", e.f},
          {"m", {e.m.m1, e.m.m2, e.m.m3}},
          {"discovered_at", e.discovered_at}};
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (!o.config.empty()) cfg = load_run_config(o.config);
  if (!o.scenario.empty()) cfg.scenario = o.scenario;
  if (o.seed) cfg.settings.seed = *o.seed;
  if (o.budget) cfg.settings.budget = *o.budget;
  if (o.method) cfg.method = parse_method(*o.method);
  if (o.tau) {
    nlohmann::json patch = {{"tau", *o.tau == "inf" ? nlohmann::json("inf")
                                                    : nlohmann::json(std::stod(*o.tau))}};
    cfg.settings.oar.temperature = run_config_from_json(patch).settings.oar.temperature;
  }
  if (o.target) {
    nlohmann::json patch = {{"target", nlohmann::json::parse(*o.target, nullptr, false)}};
    if (patch["target"].is_discarded()) patch["target"] = *o.target;
    cfg.target = run_config_from_json(patch).target;
  }
  if (o.out) cfg.out_dir = *o.out;
  cfg.settings.threads = o.threads ? *o.threads : default_threads();
  cfg.validate();

  const Scenario scenario = load_scenario(cfg.scenario);
  std::vector<std::size_t> targets;
  if (cfg.target.kind == TargetSelection::Kind::Index) {
    targets.push_back(cfg.target.index);
  } else {
    targets = select_targets(scenario, cfg.target.count);
  }
  for (const auto t : targets) {
    if (t >= scenario.num_vehicles()) {
      throw ValidationError("target " + std::to_string(t) + " does not exist in scenario '" +
                            scenario.id + "'");
    }
  }

  const std::string hash = config_hash(cfg);
  struct Finished {
    fs::path dir;
    RunResult result;
    std::size_t target;
  };
  std::vector<Finished> done;
  for (const auto t : targets) {
    err << "running " << to_string(cfg.method) << " on '" << scenario.id << "' target " << t
        << " (budget " << cfg.settings.budget << ")\n";
    const fs::path dir =
        targets.size() == 1 ? cfg.out_dir : cfg.out_dir / ("target_" + std::to_string(t));
    done.push_back({dir, run_method(cfg.method, scenario, t, cfg.settings), t});
  }
  for (const auto& d : done) {
    save_archive(d.result.archive, {scenario.id, d.target, to_string(cfg.method), hash},
                 d.dir / "archive.cadre.json");
    write_metrics_csv(d.result.log, d.dir / "metrics.csv");
    out << format_metric_row(metric_row(d.result.archive)) << "\n";
  }
  return 0;
}

int cmd_retrieve(const Options& o, std::ostream& out, std::ostream& err) {
  const auto query = query_of(o);
  if (!query) throw ValidationError("retrieve needs --m1 --m2 --m3");
  const RetrieveMode mode = parse_mode(o.mode);
  const auto loaded = load_archive(o.archive);
  const auto elite = retrieve(loaded.archive, *query, mode);
  if (!elite) {
    err << "no elite for the query in " << o.archive << "\n";
    out << "no elite\n";
    return 0;
  }
  nlohmann::json doc = elite_summary(*elite);
  out << doc.dump() << "\n";
  if (o.out) {
    doc["theta"] = elite->theta;
    doc["scenario_id"] = loaded.header.scenario_id;
    doc["target"] = loaded.header.target;
    const fs::path path = fs::path(*o.out) / "retrieved.json";
    std::error_code ec;
    fs::create_directories(*o.out, ec);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file << doc.dump(1) << "\n";
    if (!file) throw IoError("error writing " + path.string());
  }
  return 0;
}

int cmd_metrics(const Options& o, std::ostream& out, std::ostream&) {
  const auto loaded = load_archive(o.archive);
  out << format_metric_row(metric_row(loaded.archive)) << "\n";
  return 0;
}

int cmd_export(const Options& o, std::ostream& out, std::ostream& err) {
  if (!o.out) throw ValidationError("export needs --out");
  const auto query = query_of(o);
  const RetrieveMode mode = parse_mode(o.mode);
  const auto loaded = load_archive(o.archive);
  const fs::path dir = *o.out;

  std::optional<Scenario> scenario;
  std::optional<Elite> elite;
  if (!o.scenario.empty()) {
    scenario = load_scenario(o.scenario);
    if (scenario->id != loaded.header.scenario_id) {
      throw ValidationError("archive was generated on scenario '" + loaded.header.scenario_id +
                            "', not '" + scenario->id + "'");
    }
    if (query) {
      elite = retrieve(loaded.archive, *query, mode);
    } else {
      for (const Elite* e : loaded.archive.elites()) {
        if (!elite || e->f > elite->f) elite = *e;
      }
    }
  }

  write_archive_export(loaded.archive, dir / "archive_export.csv");
  out << (dir / "archive_export.csv").string() << "\n";
  if (scenario && elite) {
    const TrafficSimulator sim(*scenario, loaded.header.target);
    const auto replay = sim.run(elite->theta, true);
    write_trajectory_export(replay.outcome.scene_trace, dir / "trajectory_export.csv");
    out << (dir / "trajectory_export.csv").string() << "\n";
  } else if (scenario) {
    err << "no elite to replay; trajectory export skipped\n";
  }
  return 0;
}

int cmd_make_scene(const Options& o, std::ostream& out, std::ostream&) {
  const SceneKind kind = parse_scene_kind(o.kind);
  const Scenario sc = make_synthetic_scene(kind, o.seed.value_or(0));
  const fs::path path = fs::path(o.out.value_or(".")) / (sc.id + ".json");
  save_scenario(sc, path);
  out << path.string() << "\n";
  return 0;
}

int cmd_select_targets(const Options& o, std::ostream& out, std::ostream&) {
  const Scenario sc = load_scenario(o.scenario);
  const auto targets = select_targets(sc, o.k);
  for (std::size_t i = 0; i < targets.size(); ++i) out << (i ? " " : "") << targets[i];
  out << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quality-diversity generation of safety-critical driving scenarios"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "run an optimizer and write archive + metrics");
  gen->add_option("--config", o.config, "run configuration JSON");
  gen->add_option("--scenario", o.scenario, "scenario JSON (overrides config)");
  gen->add_option("--seed", o.seed);
  gen->add_option("--budget", o.budget, "number of evaluations");
  gen->add_option("--method", o.method)->check(CLI::IsMember({"cadre", "random", "cmaes"}));
  gen->add_option("--tau", o.tau, "restart temperature, or 'inf' for uniform restarts");
  gen->add_option("--target", o.target, "vehicle index, 'auto' or 'auto-top-K'");
  gen->add_option("--out", o.out, "output directory");
  gen->add_option("--threads", o.threads, "worker threads (default: $CADRE_THREADS or all cores)");

  auto* ret = app.add_subcommand("retrieve", "look up an elite by measure values");
  ret->add_option("archive", o.archive)->required();
  ret->add_option("--m1", o.m1);
  ret->add_option("--m2", o.m2);
  ret->add_option("--m3", o.m3);
  ret->add_option("--mode", o.mode)->check(CLI::IsMember({"exact", "nearest"}));
  ret->add_option("--out", o.out, "directory for retrieved.json");

  auto* met = app.add_subcommand("metrics", "print coverage, mean objective and QD score");
  met->add_option("archive", o.archive)->required();

  auto* exp = app.add_subcommand("export", "write CSV exports for plotting");
  exp->add_option("archive", o.archive)->required();
  exp->add_option("--scenario", o.scenario, "scenario to replay the selected elite on");
  exp->add_option("--m1", o.m1);
  exp->add_option("--m2", o.m2);
  exp->add_option("--m3", o.m3);
  exp->add_option("--mode", o.mode)->check(CLI::IsMember({"exact", "nearest"}));
  exp->add_option("--out", o.out)->required();

  auto* mk = app.add_subcommand("make-scene", "write a bundled synthetic scenario");
  mk->add_option("--kind", o.kind)->required()->check(
      CLI::IsMember({"cross_turn", "lane_change", "u_turn"}));
  mk->add_option("--seed", o.seed);
  mk->add_option("--out", o.out, "output directory");

  auto* sel = app.add_subcommand("select-targets", "rank background vehicles by distance to ego");
  sel->add_option("scenario", o.scenario)->required();
  sel->add_option("--k", o.k);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out, err);
    if (ret->parsed()) return cmd_retrieve(o, out, err);
    if (met->parsed()) return cmd_metrics(o, out, err);
    if (exp->parsed()) return cmd_export(o, out, err);
    if (mk->parsed()) return cmd_make_scene(o, out, err);
    if (sel->parsed()) return cmd_select_targets(o, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace cadre

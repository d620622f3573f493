// rtslab command-line driver: single matches, round-robin tournaments,
// evaluator overhead benchmarks and config validation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rtslab/rtslab.hpp"

#ifndef RTSLAB_VERSION
#define RTSLAB_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace rtslab;

namespace {

enum Exit { kOk = 0, kUsage = 2, kConfig = 3, kRuntime = 4 };

struct UsageError : Error {
  using Error::Error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

nlohmann::json versions() {
  return {{"rtslab", RTSLAB_VERSION},
          {"compiler", __VERSION__},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

// Flag > RTSLAB_WORKERS > config.
int worker_count(int flag, int configured) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("RTSLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end || v < 1) throw UsageError("RTSLAB_WORKERS must be a positive integer");
    return int(v);
  }
  return configured;
}

// ---------------------------------------------------------------------------

struct MatchArgs {
  std::string map, p0, p1, out, config;
  double budget_ms = 0;
  int max_cycles = 0;
  std::uint64_t seed = 1;
};

int cmd_match(const MatchArgs& a) {
  RunConfig rc;
  if (!a.config.empty()) rc = load_run_config(a.config);
  PlannerSettings settings = rc.settings;
  if (a.budget_ms > 0) settings.budget.wall_ms = a.budget_ms;
  const int max_cycles = a.max_cycles > 0 ? a.max_cycles : rc.max_cycles;

  AgentSpec s0, s1;
  try {
    s0 = AgentSpec::parse(a.p0);
    s1 = AgentSpec::parse(a.p1);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  MapSpec map;
  try {
    map = resolve_map(a.map);
  } catch (const Error& e) {
    throw ConfigError("--map", e.what());
  }
  const auto rec = run_match(map, s0, s1, settings, max_cycles, a.seed, rc.tournament.table());
  std::cout << rec.map << ' ' << rec.agent0 << " vs " << rec.agent1 << ": " << to_string(rec.result.winner)
            << " (" << to_string(rec.result.reason) << ") at cycle " << rec.cycles << ", digest "
            << hex64(rec.digest) << '\n';
  if (!a.out.empty()) write_text(a.out, to_json(rec).dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------

struct TournamentArgs {
  std::string config, replay, out_dir;
  int workers = 0;
  bool dry_run = false;
  bool quiet = false;
};

int cmd_tournament(const TournamentArgs& a) {
  if (a.config.empty() == a.replay.empty()) throw UsageError("give exactly one of --config or --replay");
  RunConfig rc;
  std::string hash;
  if (!a.replay.empty()) {
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(detail::read_file(a.replay));
    } catch (const std::exception& e) {
      throw ConfigError(a.replay, e.what());
    }
    if (!m.contains("config") || !m.contains("config_hash")) throw ConfigError(a.replay, "not a run manifest");
    hash = config_hash(m["config"]);
    if (hash != m["config_hash"].get<std::string>())
      throw ConfigError(a.replay, "config hash mismatch; the manifest was edited");
    rc = parse_run_config(m["config"], fs::path(a.replay).parent_path());
  } else {
    rc = load_run_config(a.config);
    hash = config_hash(rc.source);
  }
  auto& t = rc.tournament;
  t.parallel_matches = worker_count(a.workers, t.parallel_matches);
  t.validate();

  const auto jobs = schedule(t);
  const auto pairs = pairings(t).size();
  std::cout << pairs << " pairings x " << t.games_per_pairing << " games x " << t.maps.size()
            << " maps = " << jobs.size() << " matches\n";
  if (a.dry_run) return kOk;

  const auto t0 = std::chrono::steady_clock::now();
  const auto records = run_round_robin(t, [&](std::size_t done, std::size_t total) {
    if (!a.quiet && (done % 10 == 0 || done == total)) std::cerr << "\r" << done << "/" << total << std::flush;
  });
  if (!a.quiet) std::cerr << '\n';
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = a.out_dir.empty() ? fs::path(rc.output_dir) : fs::path(a.out_dir);
  std::ostringstream matches, scores;
  write_matches_csv(matches, records);
  const auto table = score_table(records);
  write_score_table_csv(scores, table);
  write_text(dir / "matches.csv", matches.str());
  write_text(dir / "scores.csv", scores.str());

  nlohmann::json manifest{{"config_hash", hash},
                          {"seed", t.seed},
                          {"matches", records.size()},
                          {"versions", versions()},
                          {"config", rc.source}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_text(dir / "timing.json",
             nlohmann::json{{"wall_seconds", secs}, {"workers", t.parallel_matches}}.dump(2) + "\n");

  std::cout << scores.str();
  int errors = 0;
  for (const auto& r : records) errors += !r.error.empty();
  if (errors) {
    std::cerr << errors << " matches failed; see " << (dir / "matches.csv").string() << '\n';
    return kRuntime;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string corpus, generate, out, save_corpus;
  long reps = 200'000;
  long batch = 1000;
  int states = 100;
};

int cmd_bench_eval(const BenchArgs& a) {
  if (a.corpus.empty() == a.generate.empty()) throw UsageError("give exactly one of --corpus or --generate-corpus");
  if (a.reps < 1) throw UsageError("--reps must be >= 1");
  if (a.batch < 1) throw UsageError("--batch must be >= 1");

  std::vector<GameState> corpus;
  if (!a.generate.empty()) {
    corpus = generate_corpus(resolve_map(a.generate), std::size_t(a.states));
  } else {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(detail::read_file(a.corpus));
    } catch (const std::exception& e) {
      throw ConfigError(a.corpus, e.what());
    }
    if (!j.is_array()) throw ConfigError(a.corpus, "corpus must be an array of states");
    for (const auto& s : j) corpus.push_back(state_from_json(s));
  }
  if (!a.save_corpus.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : corpus) arr.push_back(to_json(s));
    write_text(a.save_corpus, arr.dump() + "\n");
  }

  OverheadOptions opt;
  opt.reps = a.reps;
  opt.batch = std::min(a.batch, a.reps);
  opt.warmup = std::min<long>(opt.warmup, a.reps);
  const auto stats = measure_eval_overhead(corpus, opt);
  for (const auto& r : stats.rows)
    std::cout << to_string(r.kind) << ": static " << fmt6(r.static_eval.mean_ns) << " ns, dynamic "
              << fmt6(r.dynamic_eval.mean_ns) << " ns, per-call ratio " << fmt6(r.ratio_per_call)
              << ", in-planner ratio " << fmt6(r.ratio_in_planner) << " (K=" << fmt6(r.evals_per_decision)
              << ")\n";
  std::cout << "self ratio " << fmt6(stats.self_ratio) << '\n';
  if (!a.out.empty()) write_text(a.out, to_json(stats).dump(2) + "\n");
  return kOk;
}

int cmd_validate(const std::string& path) {
  const auto rc = load_run_config(path);
  std::cout << "ok " << config_hash(rc.source) << ": " << rc.tournament.agents.size() << " agents, "
            << (rc.tournament.agents.size() >= 2 ? schedule(rc.tournament).size() : 0) << " matches\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time strategy search and evaluation lab"};
  app.set_version_flag("--version", RTSLAB_VERSION);
  app.require_subcommand(1);

  MatchArgs ma;
  auto* match = app.add_subcommand("match", "Play one game and write its record");
  match->add_option("--map", ma.map, "Bundled map (D8, M1, M2, M3) or map file")->required();
  match->add_option("--p0", ma.p0, "Seat 0 agent, e.g. idabcd:DL")->required();
  match->add_option("--p1", ma.p1, "Seat 1 agent")->required();
  match->add_option("--budget-ms", ma.budget_ms, "Per-decision budget")->check(CLI::PositiveNumber);
  match->add_option("--max-cycles", ma.max_cycles, "Game length cap")->check(CLI::PositiveNumber);
  match->add_option("--seed", ma.seed, "Match seed");
  match->add_option("--config", ma.config, "Run config supplying planner settings");
  match->add_option("--out", ma.out, "Record JSON path");

  TournamentArgs ta;
  auto* tour = app.add_subcommand("tournament", "Run a round-robin tournament");
  tour->add_option("--config", ta.config, "Run config");
  tour->add_option("--replay", ta.replay, "Rerun from a manifest written by an earlier run");
  tour->add_option("--out-dir", ta.out_dir, "Output directory (overrides the config)");
  tour->add_option("--workers", ta.workers, "Parallel matches (overrides RTSLAB_WORKERS and the config)")
      ->check(CLI::PositiveNumber);
  tour->add_flag("--dry-run", ta.dry_run, "Print the match count and stop");
  tour->add_flag("--quiet", ta.quiet, "No progress output");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench-eval", "Time static against adaptive evaluation");
  bench->add_option("--corpus", ba.corpus, "JSON array of states");
  bench->add_option("--generate-corpus", ba.generate, "Sample the corpus from playouts on this map");
  bench->add_option("--states", ba.states, "Generated corpus size")->check(CLI::Range(100, 1'000'000));
  bench->add_option("--reps", ba.reps, "Calls per function");
  bench->add_option("--batch", ba.batch, "Calls per timed batch");
  bench->add_option("--save-corpus", ba.save_corpus, "Write the corpus used");
  bench->add_option("--out", ba.out, "Timing JSON path");

  std::string vpath;
  auto* validate = app.add_subcommand("validate-config", "Check a run config");
  validate->add_option("--config", vpath, "Run config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*match) return cmd_match(ma);
    if (*tour) return cmd_tournament(ta);
    if (*bench) return cmd_bench_eval(ba);
    if (*validate) return cmd_validate(vpath);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const MapError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

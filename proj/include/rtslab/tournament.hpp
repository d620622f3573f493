#pragma once

#include <atomic>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "rtslab/agent.hpp"
#include "rtslab/map_io.hpp"

namespace rtslab {

/// FNV-1a, 64 bit.
class Fnv64 {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void str(std::string_view s) { bytes(s.data(), s.size()); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Fixed 6-significant-digit formatting used by every CSV and report.
inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct MatchRecord {
  std::string map;
  std::string planner;  // shared planner name, or "mixed"
  std::string agent0, agent1;
  std::uint64_t seed = 0;
  GameResult result;
  int cycles = 0;
  std::array<AgentStats, 2> stats{};
  int forfeited = -1;  // seat that forfeited, if any
  std::uint64_t digest = 0;
  std::string error;

  /// Points earned by the agent in `seat`: win 1, draw 0.5.
  double points(int seat) const {
    if (result.winner == Winner::Draw) return 0.5;
    return (result.winner == Winner::P0) == (seat == 0) ? 1.0 : 0.0;
  }
};

namespace detail {

inline void digest_actions(Fnv64& h, int cycle, const JointAction& a, int seat) {
  for (const auto& x : a) {
    h.i64(cycle);
    h.i64(seat);
    h.i64(x.unit_id);
    h.i64(int(x.verb));
    h.i64(int(x.dir));
    h.i64(x.target_id);
    h.i64(x.target_pos.x);
    h.i64(x.target_pos.y);
    h.i64(int(x.produce));
    h.i64(x.duration);
  }
}

inline std::string shared_planner(const AgentSpec& a, const AgentSpec& b) {
  return a.planner == b.planner ? std::string(to_string(a.planner)) : "mixed";
}

}  // namespace detail

/// Plays one full game. Each agent decides whenever it has idle units; the
/// record's digest hashes every issued action.
inline MatchRecord run_match(const MapSpec& map, const AgentSpec& spec0, const AgentSpec& spec1,
                             const PlannerSettings& settings, int max_cycles, std::uint64_t seed,
                             const UnitTable& table = UnitTable::standard()) {
  MatchRecord rec;
  rec.map = map.name;
  rec.planner = detail::shared_planner(spec0, spec1);
  rec.agent0 = spec0.name();
  rec.agent1 = spec1.name();
  rec.seed = seed;

  GameState s = make_initial_state(map, table, max_cycles);
  std::array<Agent, 2> agents{Agent(spec0, settings, 0, mix64(seed ^ 0x5eed0)),
                              Agent(spec1, settings, 1, mix64(seed ^ 0x5eed1))};
  agents[0].start(s);
  agents[1].start(s);
  Fnv64 h;
  h.str(map.name);
  h.i64(std::int64_t(seed));

  std::optional<GameResult> end;
  while (!(end = winner(s))) {
    std::array<JointAction, 2> orders;
    for (int p = 0; p < 2; ++p) {
      if (!s.has_idle_units(p)) continue;
      orders[p] = agents[p].decide(s);
      if (agents[p].over_forfeit_limit() && rec.forfeited < 0) rec.forfeited = p;
    }
    if (rec.forfeited >= 0) {
      end = GameResult{rec.forfeited == 0 ? Winner::P1 : Winner::P0, s.cycle, EndReason::Forfeit};
      break;
    }
    detail::digest_actions(h, s.cycle, orders[0], 0);
    detail::digest_actions(h, s.cycle, orders[1], 1);
    step(s, orders[0], orders[1]);
    fast_forward(s, max_cycles);
  }
  rec.result = *end;
  rec.cycles = s.cycle;
  h.i64(int(rec.result.winner));
  h.i64(rec.result.end_cycle);
  rec.digest = h.value();
  rec.stats = {agents[0].stats(), agents[1].stats()};
  return rec;
}

inline nlohmann::json to_json(const AgentStats& a) {
  return {{"decisions", a.decisions}, {"mean_ms", a.mean_ms()},     {"max_ms", a.max_ms},
          {"eval_calls", a.eval_calls}, {"eval_ns", a.eval_ns},     {"adapt_calls", a.adapt_calls},
          {"nodes", a.nodes},           {"max_depth", a.max_depth_reached}};
}

inline nlohmann::json to_json(const MatchRecord& r) {
  nlohmann::json j{{"map", r.map},
                   {"planner", r.planner},
                   {"agent0", r.agent0},
                   {"agent1", r.agent1},
                   {"seed", r.seed},
                   {"winner", std::string(to_string(r.result.winner))},
                   {"reason", std::string(to_string(r.result.reason))},
                   {"end_cycle", r.result.end_cycle},
                   {"cycles", r.cycles},
                   {"digest", hex64(r.digest)},
                   {"stats", {to_json(r.stats[0]), to_json(r.stats[1])}}};
  if (r.forfeited >= 0) j["forfeited"] = r.forfeited;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

// ---------------------------------------------------------------------------
// Round robin

struct TournamentConfig {
  std::vector<std::string> maps{"D8"};  // bundled names or file paths
  std::vector<AgentSpec> agents;
  int games_per_pairing = 10;
  PlannerSettings settings;
  int max_cycles = kDefaultMaxCycles;
  std::uint64_t seed = 1;
  int parallel_matches = 1;
  bool pair_within_planner = true;  // only agents sharing a planner meet
  std::shared_ptr<const UnitTable> units;  // null: standard stats

  const UnitTable& table() const { return units ? *units : UnitTable::standard(); }

  void validate() const {
    if (agents.size() < 2) throw Error("tournament needs at least 2 agents");
    if (games_per_pairing < 2 || games_per_pairing % 2 != 0)
      throw Error("games_per_pairing must be even and >= 2");
    if (maps.empty()) throw Error("tournament needs at least one map");
    if (parallel_matches < 1) throw Error("parallel_matches must be >= 1");
    if (max_cycles < 1) throw Error("max_cycles must be >= 1");
  }
};

struct MatchJob {
  std::size_t map_index;
  std::size_t a, b;  // agent indices, a < b
  int game;          // game index within the pairing
  int seat0;         // agent index playing seat 0
  std::uint64_t seed;
};

inline std::vector<std::pair<std::size_t, std::size_t>> pairings(const TournamentConfig& cfg) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < cfg.agents.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.agents.size(); ++j)
      if (!cfg.pair_within_planner || cfg.agents[i].planner == cfg.agents[j].planner) out.emplace_back(i, j);
  return out;
}

/// The schedule: every pairing plays games_per_pairing games per map, the
/// first half with the lower-indexed agent in seat 0.
inline std::vector<MatchJob> schedule(const TournamentConfig& cfg) {
  std::vector<MatchJob> jobs;
  for (std::size_t m = 0; m < cfg.maps.size(); ++m)
    for (auto [a, b] : pairings(cfg))
      for (int g = 0; g < cfg.games_per_pairing; ++g) {
        Fnv64 h;
        h.i64(std::int64_t(cfg.seed));
        h.str(cfg.maps[m]);
        h.str(cfg.agents[a].name());
        h.str(cfg.agents[b].name());
        h.i64(g);
        const bool swapped = g >= cfg.games_per_pairing / 2;
        jobs.push_back({m, a, b, g, int(swapped ? b : a), h.value()});
      }
  return jobs;
}

/// Runs the schedule on a bounded worker pool. Records come back in schedule
/// order whatever the worker count.
inline std::vector<MatchRecord> run_round_robin(const TournamentConfig& cfg,
                                                const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  cfg.validate();
  std::vector<MapSpec> maps;
  for (const auto& m : cfg.maps) maps.push_back(resolve_map(m));
  const auto jobs = schedule(cfg);
  std::vector<MatchRecord> records(jobs.size());
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
      const auto& job = jobs[i];
      const std::size_t seat1 = job.seat0 == int(job.a) ? job.b : job.a;
      try {
        records[i] = run_match(maps[job.map_index], cfg.agents[job.seat0], cfg.agents[seat1], cfg.settings,
                               cfg.max_cycles, job.seed, cfg.table());
      } catch (const std::exception& e) {
        MatchRecord r;
        r.map = maps[job.map_index].name;
        r.agent0 = cfg.agents[job.seat0].name();
        r.agent1 = cfg.agents[seat1].name();
        r.planner = detail::shared_planner(cfg.agents[job.seat0], cfg.agents[seat1]);
        r.seed = job.seed;
        r.error = e.what();
        records[i] = r;
      }
      const auto n = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(n, jobs.size());
      }
    }
  };
  const int workers = std::min<int>(cfg.parallel_matches, int(jobs.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return records;
}

// ---------------------------------------------------------------------------
// Scores

struct ScoreCell {
  double points = 0;
  int games = 0;
  double score() const { return games ? points / games : 0; }
};

struct ScoreTable {
  // (map, planner, agent) -> cell; map "ALL" aggregates every map.
  std::map<std::tuple<std::string, std::string, std::string>, ScoreCell> by_group;
  // (agent, opponent) -> points of agent against opponent, over all maps.
  std::map<std::pair<std::string, std::string>, ScoreCell> pairing;
  // agent -> over everything
  std::map<std::string, ScoreCell> overall;

  double score(const std::string& agent) const {
    auto it = overall.find(agent);
    return it == overall.end() ? 0 : it->second.score();
  }
};

inline ScoreTable score_table(const std::vector<MatchRecord>& records) {
  if (records.empty()) throw Error("score_table: no records");
  ScoreTable t;
  for (const auto& r : records) {
    if (!r.error.empty()) continue;
    const std::array<std::string, 2> names{r.agent0, r.agent1};
    for (int seat = 0; seat < 2; ++seat) {
      const double pts = r.points(seat);
      for (const std::string& map : {r.map, std::string("ALL")}) {
        auto& c = t.by_group[{map, r.planner, names[seat]}];
        c.points += pts;
        ++c.games;
      }
      auto& p = t.pairing[{names[seat], names[1 - seat]}];
      p.points += pts;
      ++p.games;
      auto& o = t.overall[names[seat]];
      o.points += pts;
      ++o.games;
    }
  }
  return t;
}

/// Aggregate score of an evaluation variant ("DL", ...) across planners and maps.
inline ScoreCell variant_score(const std::vector<MatchRecord>& records, std::string_view variant) {
  ScoreCell c;
  for (const auto& r : records) {
    if (!r.error.empty()) continue;
    for (int seat = 0; seat < 2; ++seat) {
      const std::string& name = seat == 0 ? r.agent0 : r.agent1;
      const auto colon = name.find(':');
      if (colon == std::string::npos || std::string_view(name).substr(colon + 1) != variant) continue;
      c.points += r.points(seat);
      ++c.games;
    }
  }
  return c;
}

inline void write_matches_csv(std::ostream& out, const std::vector<MatchRecord>& records) {
  out << "map,planner,agent0,agent1,seed,winner,cycles,mean_ms_a0,mean_ms_a1,eval_ns_a0,eval_ns_a1,"
         "reason,digest\n";
  for (const auto& r : records) {
    out << r.map << ',' << r.planner << ',' << r.agent0 << ',' << r.agent1 << ',' << r.seed << ','
        << (r.error.empty() ? to_string(r.result.winner) : "ERROR") << ',' << r.cycles << ','
        << fmt6(r.stats[0].mean_ms()) << ',' << fmt6(r.stats[1].mean_ms()) << ',' << fmt6(r.stats[0].eval_ns)
        << ',' << fmt6(r.stats[1].eval_ns) << ',' << (r.error.empty() ? to_string(r.result.reason) : "ERROR")
        << ',' << hex64(r.digest) << '\n';
  }
}

/// Rows are (map, planner), columns the six evaluation variants.
inline void write_score_table_csv(std::ostream& out, const ScoreTable& t) {
  out << "map,planner";
  for (auto v : kVariants) out << ',' << v;
  out << '\n';
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> rows;
  for (const auto& [key, cell] : t.by_group) {
    const auto& [map, planner, agent] = key;
    const auto colon = agent.find(':');
    const std::string variant = colon == std::string::npos ? agent : agent.substr(colon + 1);
    rows[{map, planner}][variant] = cell.score();
  }
  for (const auto& [key, cols] : rows) {
    out << key.first << ',' << key.second;
    for (auto v : kVariants) {
      out << ',';
      if (auto it = cols.find(std::string(v)); it != cols.end()) out << fmt6(it->second);
    }
    out << '\n';
  }
}

}  // namespace rtslab

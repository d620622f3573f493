#include <sstream>

#include <gtest/gtest.h>

#include "../support/helpers.hpp"

using namespace rtslab;

namespace {

TournamentConfig script_league() {
  TournamentConfig t;
  t.maps = {"D8"};
  t.agents = {AgentSpec::parse("script:WORKER_RUSH"), AgentSpec::parse("script:LIGHT_RUSH"),
              AgentSpec::parse("script:HEAVY_RUSH")};
  t.games_per_pairing = 4;
  t.max_cycles = 800;
  t.seed = 77;
  return t;
}

TournamentConfig search_league() {
  TournamentConfig t;
  t.maps = {"D8"};
  t.agents = {AgentSpec::parse("idabcd:L"), AgentSpec::parse("idabcd:DL"), AgentSpec::parse("idabcd:S")};
  t.games_per_pairing = 2;
  t.max_cycles = 300;
  t.seed = 5;
  t.settings.budget.wall_ms = 1;
  t.settings.budget.max_depth = 3;
  return t;
}

MatchRecord fake(const std::string& a0, const std::string& a1, Winner w) {
  MatchRecord r;
  r.map = "D8";
  r.planner = "idabcd";
  r.agent0 = a0;
  r.agent1 = a1;
  r.result.winner = w;
  return r;
}

std::string csv(const std::vector<MatchRecord>& records) {
  std::ostringstream out;
  write_matches_csv(out, records);
  return out.str();
}

}  // namespace

TEST(Fnv, ReferenceValues) {
  Fnv64 empty;
  EXPECT_EQ(empty.value(), 0xcbf29ce484222325ULL);
  Fnv64 a;
  a.str("a");
  EXPECT_EQ(a.value(), 0xaf63dc4c8601ec8cULL);
  Fnv64 foobar;
  foobar.str("foobar");
  EXPECT_EQ(foobar.value(), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
  EXPECT_EQ(fmt6(1.0 / 3), "0.333333");
}

TEST(Schedule, CountsSeatsAndSeeds) {
  const auto t = script_league();
  const auto jobs = schedule(t);
  ASSERT_EQ(jobs.size(), 12u);
  std::map<std::size_t, int> seat0_games, games;
  std::set<std::uint64_t> seeds;
  for (const auto& j : jobs) {
    ++games[j.a];
    ++games[j.b];
    ++seat0_games[std::size_t(j.seat0)];
    seeds.insert(j.seed);
    EXPECT_EQ(j.seat0 == int(j.a), j.game < 2);
  }
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_EQ(games[a], 8);
    EXPECT_EQ(seat0_games[a], 4);
  }
  EXPECT_EQ(seeds.size(), 12u);
  EXPECT_EQ(schedule(t)[5].seed, jobs[5].seed);
  auto other = t;
  other.seed = 78;
  EXPECT_NE(schedule(other)[0].seed, jobs[0].seed);
}

TEST(Schedule, PairWithinPlanner) {
  TournamentConfig t;
  t.agents = {AgentSpec::parse("idabcd:L"), AgentSpec::parse("idabcd:DL"), AgentSpec::parse("idrtminimax:L"),
              AgentSpec::parse("idrtminimax:DL")};
  EXPECT_EQ(pairings(t).size(), 2u);
  t.pair_within_planner = false;
  EXPECT_EQ(pairings(t).size(), 6u);
  t.games_per_pairing = 3;
  EXPECT_THROW(t.validate(), Error);
}

TEST(Scores, HandComputedTable) {
  const std::vector<MatchRecord> recs{
      fake("idabcd:DL", "idabcd:L", Winner::P0), fake("idabcd:DL", "idabcd:L", Winner::P0),
      fake("idabcd:L", "idabcd:DL", Winner::P1), fake("idabcd:L", "idabcd:DL", Winner::Draw)};
  const auto t = score_table(recs);
  EXPECT_DOUBLE_EQ(t.score("idabcd:DL"), 0.875);
  EXPECT_DOUBLE_EQ(t.score("idabcd:L"), 0.125);
  EXPECT_EQ(t.overall.at("idabcd:DL").games, 4);
  EXPECT_DOUBLE_EQ(variant_score(recs, "DL").score(), 0.875);
  EXPECT_EQ(variant_score(recs, "DSQ").games, 0);

  std::ostringstream out;
  write_score_table_csv(out, t);
  EXPECT_EQ(out.str(),
            "map,planner,L,S,SQ,DL,DS,DSQ\n"
            "ALL,idabcd,0.125,,,0.875,,\n"
            "D8,idabcd,0.125,,,0.875,,\n");
  EXPECT_THROW(score_table({}), Error);
}

TEST(Scores, PointsAreZeroSum) {
  const auto recs = run_round_robin(script_league());
  for (const auto& r : recs) {
    ASSERT_TRUE(r.error.empty()) << r.error;
    EXPECT_DOUBLE_EQ(r.points(0) + r.points(1), 1.0);
  }
  const auto t = score_table(recs);
  double total = 0;
  for (const auto& [name, cell] : t.overall) total += cell.points;
  EXPECT_DOUBLE_EQ(total, 12.0);
}

TEST(Matches, ForfeitAwardsTheOpponent) {
  PlannerSettings st;
  st.budget.wall_ms = 1;
  st.forfeit_factor = 0.01;
  const auto rec = run_match(bundled_map("D8"), AgentSpec::parse("idrtminimax:L"),
                             AgentSpec::parse("script:WORKER_RUSH"), st, 500, 3);
  EXPECT_EQ(rec.forfeited, 0);
  EXPECT_EQ(rec.result.reason, EndReason::Forfeit);
  EXPECT_EQ(rec.points(1), 1.0);
  EXPECT_EQ(to_json(rec)["forfeited"], 0);
}

TEST(Matches, RecordsAndDigestsAreReproducible) {
  PlannerSettings st;
  st.budget.wall_ms = 2;
  st.budget.max_depth = 3;
  const auto a = run_match(bundled_map("D8"), AgentSpec::parse("idabcd:DSQ"), AgentSpec::parse("idabcd:SQ"), st,
                           400, 11);
  const auto b = run_match(bundled_map("D8"), AgentSpec::parse("idabcd:DSQ"), AgentSpec::parse("idabcd:SQ"), st,
                           400, 11);
  EXPECT_EQ(a.digest, b.digest);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_GT(a.stats[0].adapt_calls, 0);
  EXPECT_EQ(a.stats[1].adapt_calls, 0);
  const auto j = to_json(a);
  for (auto key : {"map", "planner", "agent0", "agent1", "seed", "winner", "reason", "end_cycle", "cycles",
                   "digest", "stats"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["digest"].get<std::string>().size(), 16u);
}

TEST(RoundRobin, IndependentOfWorkerCount) {
  auto one = search_league();
  auto many = one;
  many.parallel_matches = 3;
  const auto a = run_round_robin(one);
  const auto b = run_round_robin(many);
  EXPECT_EQ(csv(a), csv(b));
  std::size_t calls = 0;
  run_round_robin(many, [&](std::size_t done, std::size_t total) {
    ++calls;
    EXPECT_LE(done, total);
  });
  EXPECT_EQ(calls, a.size());
}

TEST(RoundRobin, MatchesCsvLayout) {
  const auto recs = run_round_robin(script_league());
  const auto text = csv(recs);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "map,planner,agent0,agent1,seed,winner,cycles,mean_ms_a0,mean_ms_a1,eval_ns_a0,eval_ns_a1,reason,"
            "digest");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 12) << line;
    EXPECT_EQ(line.rfind("D8,script,", 0), 0u) << line;
  }
  EXPECT_EQ(rows, 12);
}

TEST(RoundRobin, UnreadableMapFailsBeforeAnyMatch) {
  auto t = script_league();
  t.maps = {"/nonexistent/map.json"};
  EXPECT_THROW(run_round_robin(t), MapError);
}

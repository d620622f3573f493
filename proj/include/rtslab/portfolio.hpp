#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "rtslab/search.hpp"

namespace rtslab {

struct PortfolioConfig {
  std::vector<Script> scripts{kAllScripts.begin(), kAllScripts.end()};
  int response_iterations = 1;
  int playout_horizon = 100;
  // Assignment spaces up to this size are enumerated outright.
  std::size_t exhaustive_limit = 64;

  void validate() const {
    if (scripts.empty()) throw Error("portfolio needs at least one script");
    if (response_iterations < 1) throw Error("portfolio.response_iterations must be >= 1");
    if (playout_horizon < 1) throw Error("portfolio.playout_horizon must be >= 1");
  }
};

/// One candidate row of the maximin table: our assignment against every
/// uniform opponent script.
struct PortfolioRow {
  ScriptAssignment assignment;
  std::vector<double> scores;  // parallel to PortfolioConfig::scripts
  double worst = 0;
};

struct PortfolioDecision : Decision {
  ScriptAssignment chosen;
  ScriptAssignment seed;
  std::vector<PortfolioRow> table;  // complete rows only
  long playouts = 0;
};

namespace detail {

inline std::vector<int> own_unit_ids(const GameState& s, int player) {
  std::vector<int> ids;
  for (const auto& u : s.units)
    if (u.owner == player) ids.push_back(u.id);
  return ids;
}

/// Canonical form so equal behaviours share one cache entry: units that
/// follow the fallback are not listed.
inline ScriptAssignment canonical(ScriptAssignment a) {
  std::erase_if(a.per_unit, [&](const auto& e) { return e.second == a.fallback; });
  std::sort(a.per_unit.begin(), a.per_unit.end());
  return a;
}

template <class Eval>
class PortfolioSearch {
 public:
  PortfolioSearch(const GameState& s, int player, const SearchBudget& b, const PortfolioConfig& cfg,
                  const Eval& eval, SearchClock& clock)
      : s_(s), player_(player), b_(b), cfg_(cfg), eval_(eval), clock_(clock), start_(clock.now_ns()) {
    deadline_ = start_ + std::int64_t((b.wall_ms - b.safety_margin_ms) * 1e6);
  }

  /// Playout score for the deciding player; nullopt once the budget is gone.
  std::optional<double> score(const ScriptAssignment& mine, const ScriptAssignment& theirs) {
    const auto key = std::make_pair(canonical(mine), canonical(theirs));
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (out_of_budget()) return std::nullopt;
    const auto& a0 = player_ == 0 ? mine : theirs;
    const auto& a1 = player_ == 0 ? theirs : mine;
    GameState end = run_assignment_playout(s_, a0, a1, cfg_.playout_horizon);
    clock_.charge_playout_cycles(end.cycle - s_.cycle, std::int64_t(s_.units.size()));
    ++playouts_;
    ++evals_;
    const auto t0 = clock_.now_ns();
    clock_.charge_eval(std::int64_t(end.units.size()));
    const double v = eval_(end, player_);
    eval_ns_ += double(clock_.now_ns() - t0);
    cache_.emplace(key, v);
    return v;
  }

  bool out_of_budget() {
    if (b_.max_nodes > 0 && playouts_ >= b_.max_nodes) return true;
    return clock_.now_ns() >= deadline_;
  }

  const GameState& s_;
  int player_;
  const SearchBudget& b_;
  const PortfolioConfig& cfg_;
  const Eval& eval_;
  SearchClock& clock_;
  std::int64_t start_;
  std::int64_t deadline_;
  long playouts_ = 0;
  long evals_ = 0;
  double eval_ns_ = 0;
  std::map<std::pair<ScriptAssignment, ScriptAssignment>, double> cache_;
};

}  // namespace detail

/// Portfolio greedy search. Both sides are seeded with their best uniform
/// script against the first script, improved by per-unit hill climbing, and
/// the final pick maximises the worst playout score over the opponent's
/// uniform scripts.
template <class Eval>
PortfolioDecision portfolio_decide(const GameState& s, int player, const SearchBudget& budget,
                                   const PortfolioConfig& cfg, const Eval& eval, SearchClock& clock) {
  budget.validate();
  cfg.validate();
  detail::PortfolioSearch<Eval> ps(s, player, budget, cfg, eval, clock);
  PortfolioDecision d;
  const Script first = cfg.scripts.front();
  auto uniform = [](Script sc) { return ScriptAssignment{sc, {}}; };
  auto finish = [&]() -> PortfolioDecision {
    d.action = assignment_action(s, player, d.chosen);
    d.nodes_visited = ps.playouts_;
    d.eval_calls = ps.evals_;
    d.eval_ns = ps.eval_ns_;
    d.playouts = ps.playouts_;
    d.elapsed_ms = double(clock.now_ns() - ps.start_) / 1e6;
    return d;
  };
  d.chosen = d.seed = uniform(first);
  if (cfg.scripts.size() == 1 || winner(s)) {
    d.completed_depth = 1;
    return finish();
  }

  // Seeds: best uniform script for each side against the other's default.
  ScriptAssignment mine = uniform(first), theirs = uniform(first);
  {
    double best_me = -detail::kInf, best_them = detail::kInf;
    for (Script sc : cfg.scripts) {
      auto v = ps.score(uniform(sc), uniform(first));
      auto w = ps.score(uniform(first), uniform(sc));
      if (!v || !w) {
        d.budget_exhausted = true;
        return finish();
      }
      if (*v > best_me) best_me = *v, mine = uniform(sc);
      if (*w < best_them) best_them = *w, theirs = uniform(sc);
    }
  }
  d.seed = mine;
  d.chosen = mine;

  const auto my_units = detail::own_unit_ids(s, player);
  const auto their_units = detail::own_unit_ids(s, 1 - player);

  // Alternating per-unit improvement passes.
  bool exhausted = false;
  for (int it = 0; it < cfg.response_iterations && !exhausted; ++it) {
    for (int side = 0; side < 2 && !exhausted; ++side) {
      const bool me = side == 0;
      auto& cur = me ? mine : theirs;
      for (int id : me ? my_units : their_units) {
        for (Script sc : cfg.scripts) {
          ScriptAssignment trial = cur;
          std::erase_if(trial.per_unit, [id](const auto& e) { return e.first == id; });
          trial.per_unit.emplace_back(id, sc);
          auto base = me ? ps.score(cur, theirs) : ps.score(mine, cur);
          auto v = me ? ps.score(trial, theirs) : ps.score(mine, trial);
          if (!base || !v) {
            exhausted = true;
            break;
          }
          if (me ? *v > *base : *v < *base) cur = trial;
        }
        if (exhausted) break;
      }
    }
  }

  // Candidate rows: the seed, every uniform script, the climbed assignment,
  // and every per-unit assignment when that space is small.
  std::vector<ScriptAssignment> candidates{d.seed};
  for (Script sc : cfg.scripts) candidates.push_back(uniform(sc));
  candidates.push_back(mine);
  std::size_t space = 1;
  for (std::size_t i = 0; i < my_units.size() && space <= cfg.exhaustive_limit; ++i) space *= cfg.scripts.size();
  if (space <= cfg.exhaustive_limit) {
    for (std::size_t code = 0; code < space; ++code) {
      ScriptAssignment a{first, {}};
      std::size_t c = code;
      for (int id : my_units) {
        a.per_unit.emplace_back(id, cfg.scripts[c % cfg.scripts.size()]);
        c /= cfg.scripts.size();
      }
      candidates.push_back(detail::canonical(a));
    }
  }

  std::set<ScriptAssignment> seen;
  for (const auto& cand : candidates) {
    if (!seen.insert(detail::canonical(cand)).second) continue;
    PortfolioRow row{cand, {}, detail::kInf};
    bool complete = true;
    for (Script opp : cfg.scripts) {
      auto v = ps.score(cand, uniform(opp));
      if (!v) {
        complete = false;
        break;
      }
      row.scores.push_back(*v);
      row.worst = std::min(row.worst, *v);
    }
    if (!complete) {
      d.budget_exhausted = true;
      break;
    }
    d.table.push_back(std::move(row));
  }

  const PortfolioRow* best = nullptr;
  for (const auto& row : d.table)
    if (!best || row.worst > best->worst) best = &row;
  if (best) {
    d.chosen = best->assignment;
    d.value = best->worst;
    d.completed_depth = 1;
  }
  return finish();
}

template <class Eval>
PortfolioDecision portfolio_decide(const GameState& s, int player, const SearchBudget& budget,
                                   const PortfolioConfig& cfg, const Eval& eval) {
  SteadyClock clock;
  return portfolio_decide(s, player, budget, cfg, eval, clock);
}

}  // namespace rtslab

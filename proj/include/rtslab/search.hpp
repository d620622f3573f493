#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "rtslab/clock.hpp"
#include "rtslab/eval_static.hpp"
#include "rtslab/scripts.hpp"

namespace rtslab {

struct SearchBudget {
  double wall_ms = 100;
  int max_depth = 8;
  int playout_horizon = 100;
  double safety_margin_ms = 0;
  long max_nodes = 0;         // > 0: deterministic node budget (test mode)
  bool leaf_playout = false;  // score depth-0 leaves after a scripted playout
  int max_unit_choices = 4;   // per idle unit, IDLE included
  int max_joint_actions = 16;
  int idle_wait = 10;         // duration of the IDLE choice in search
  std::uint64_t seed = 0;     // 0: canonical ordering, otherwise hashed tie-breaks

  void validate() const {
    if (!(wall_ms > safety_margin_ms && safety_margin_ms >= 0))
      throw Error("budget needs wall_ms > safety_margin_ms >= 0");
    if (max_depth < 1) throw Error("budget.max_depth must be >= 1");
    if (playout_horizon < 1) throw Error("budget.playout_horizon must be >= 1");
    if (max_unit_choices < 1 || max_joint_actions < 1) throw Error("branching caps must be >= 1");
    if (idle_wait < 1) throw Error("budget.idle_wait must be >= 1");
  }
};

struct Decision {
  JointAction action;
  double value = 0;
  int completed_depth = 0;
  long nodes_visited = 0;
  long eval_calls = 0;
  double elapsed_ms = 0;
  double eval_ns = 0;  // clock time spent inside the evaluator
  bool budget_exhausted = false;
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// Move generation

namespace detail {

inline int nearest_distance(Pos p, const std::vector<Pos>& targets) {
  int best = std::numeric_limits<int>::max();
  for (Pos t : targets) best = std::min(best, manhattan(p, t));
  return best == std::numeric_limits<int>::max() ? 0 : best;
}

struct RankedAction {
  int prio;
  long key;
  std::uint64_t tie;
  UnitAction action;
};

}  // namespace detail

/// Capped, ordered choice list for every idle unit of `player`. Preference:
/// attack (weakest target first), return, harvest, produce (one direction
/// per kind), moves that close on the relevant target, other moves. Each
/// list ends with IDLE for `idle_wait` cycles.
inline std::vector<std::vector<UnitAction>> ranked_unit_choices(const GameState& s, int player,
                                                                const SearchBudget& b) {
  std::vector<Pos> enemies, own_bases, piles;
  for (const auto& u : s.units) {
    if (u.owner == player) {
      if (u.kind == UnitKind::MainBase) own_bases.push_back(u.pos);
    } else {
      enemies.push_back(u.pos);
    }
  }
  for (const auto& p : s.piles) piles.push_back(p.pos);

  std::vector<std::vector<UnitAction>> out;
  for (const auto& uc : legal_actions(s, player)) {
    const Unit& u = *s.find(uc.unit_id);
    std::vector<detail::RankedAction> ranked;
    std::uint64_t idx = 0;
    for (const auto& a : uc.actions) {
      ++idx;
      if (a.verb == Verb::Idle) continue;
      detail::RankedAction r{0, 0, 0, a};
      switch (a.verb) {
        case Verb::Attack:
          r.prio = 0;
          r.key = s.find(a.target_id)->hp;
          break;
        case Verb::Return: r.prio = 1; break;
        case Verb::Harvest: r.prio = 2; break;
        case Verb::Produce:
          r.prio = 3;
          r.key = long(index_of(a.produce)) * 1000 + detail::nearest_distance(a.target_pos, enemies);
          break;
        case Verb::Move: {
          const int to_enemy = detail::nearest_distance(a.target_pos, enemies) -
                               detail::nearest_distance(u.pos, enemies);
          r.prio = 5;
          r.key = to_enemy;
          if (u.kind == UnitKind::Worker) {
            const auto& goal = u.carried > 0 ? own_bases : piles;
            const int econ = detail::nearest_distance(a.target_pos, goal) - detail::nearest_distance(u.pos, goal);
            if (!goal.empty() && econ < 0) {
              r.prio = 4;
              r.key = econ;
            }
          } else if (to_enemy < 0) {
            r.prio = 4;
          }
          break;
        }
        default: break;
      }
      r.tie = b.seed ? mix64(b.seed ^ mix64((std::uint64_t(s.cycle) << 32) ^ (std::uint64_t(u.id) << 8) ^ idx))
                     : idx;
      ranked.push_back(r);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
      if (x.prio != y.prio) return x.prio < y.prio;
      if (x.key != y.key) return x.key < y.key;
      return x.tie < y.tie;
    });
    std::vector<UnitAction> list;
    KindSet produced;
    for (const auto& r : ranked) {
      if (int(list.size()) + 1 >= b.max_unit_choices) break;
      if (r.action.verb == Verb::Produce) {
        if (produced.contains(r.action.produce)) continue;
        produced.insert(r.action.produce);
      }
      list.push_back(r.action);
    }
    list.push_back(UnitAction::idle(u.id, b.idle_wait));
    out.push_back(std::move(list));
  }
  return out;
}

/// Joint actions for `player`: the full product of the per-unit lists when
/// it fits under `max_joint_actions`, otherwise the all-first-choice joint
/// action followed by single-unit deviations, lowest unit id first. A player
/// without idle units gets the single empty joint action.
inline std::vector<JointAction> candidate_moves(const GameState& s, int player, const SearchBudget& b) {
  const auto choices = ranked_unit_choices(s, player, b);
  const std::size_t cap = std::size_t(b.max_joint_actions);
  std::vector<JointAction> out;
  if (choices.empty()) {
    out.emplace_back();
    return out;
  }
  std::size_t product = 1;
  for (const auto& c : choices) {
    product *= c.size();
    if (product > cap) break;
  }
  JointAction top;
  for (const auto& c : choices) top.push_back(c.front());
  if (product <= cap) {
    std::vector<std::size_t> digit(choices.size(), 0);
    for (;;) {
      JointAction j;
      j.reserve(choices.size());
      for (std::size_t i = 0; i < choices.size(); ++i) j.push_back(choices[i][digit[i]]);
      out.push_back(std::move(j));
      std::size_t i = choices.size();
      while (i > 0) {
        --i;
        if (++digit[i] < choices[i].size()) break;
        digit[i] = 0;
        if (i == 0) return out;
      }
    }
  }
  out.push_back(top);
  for (std::size_t i = 0; i < choices.size(); ++i)
    for (std::size_t k = 1; k < choices[i].size(); ++k) {
      if (out.size() >= cap) return out;
      JointAction j = top;
      j[i] = choices[i][k];
      out.push_back(std::move(j));
    }
  return out;
}

/// Applies a pair of joint actions and skips ahead to the next decision point.
inline GameState apply_joint(const GameState& s, const JointAction& a0, const JointAction& a1) {
  GameState next = s;
  step(next, a0, a1);
  fast_forward(next, next.max_cycles);
  return next;
}

// ---------------------------------------------------------------------------
// Shared search plumbing

namespace detail {

struct BudgetExhausted {};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Eval>
class SearchCore {
 public:
  SearchCore(const SearchBudget& b, SearchClock& clock, const Eval& eval, int root)
      : b_(b), clock_(clock), eval_(eval), root_(root), start_(clock.now_ns()) {
    deadline_ = start_ + std::int64_t((b.wall_ms - b.safety_margin_ms) * 1e6);
  }

  void tick(const GameState& s) {
    ++nodes_;
    clock_.charge_node(std::int64_t(s.units.size()));
    if (!enforce_) return;
    if ((b_.max_nodes > 0 && nodes_ > b_.max_nodes) || clock_.now_ns() >= deadline_) {
      exhausted_ = true;
      throw BudgetExhausted{};
    }
  }

  double leaf(const GameState& s) {
    if (b_.leaf_playout && !winner(s)) {
      GameState end = run_script_playout(s, Script::WorkerRush, Script::WorkerRush, b_.playout_horizon);
      clock_.charge_playout_cycles(end.cycle - s.cycle, std::int64_t(s.units.size()));
      return score(end);
    }
    return score(s);
  }

  double score(const GameState& s) {
    ++evals_;
    const auto t0 = clock_.now_ns();
    clock_.charge_eval(std::int64_t(s.units.size()));
    const double v = eval_(s, root_);
    eval_ns_ += double(clock_.now_ns() - t0);
    return v;
  }

  void finish(Decision& d) {
    d.nodes_visited = nodes_;
    d.eval_calls = evals_;
    d.eval_ns = eval_ns_;
    d.elapsed_ms = double(clock_.now_ns() - start_) / 1e6;
    d.budget_exhausted = exhausted_;
  }

  const SearchBudget& b_;
  SearchClock& clock_;
  const Eval& eval_;
  int root_;
  std::int64_t start_;
  std::int64_t deadline_ = 0;
  long nodes_ = 0;
  long evals_ = 0;
  double eval_ns_ = 0;
  bool enforce_ = false;
  bool exhausted_ = false;
  bool depth_cut_ = false;  // some leaf was cut by the depth limit
};

// Root move order for the next iteration: previous best first.
inline std::vector<std::size_t> root_order(std::size_t n, std::optional<std::size_t> pv) {
  std::vector<std::size_t> order;
  if (pv) order.push_back(*pv);
  for (std::size_t i = 0; i < n; ++i)
    if (!pv || i != *pv) order.push_back(i);
  return order;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// IDABCD: alpha-beta over durative joint actions. Depth counts decision
// points; when both sides have idle units the max player commits first and
// the min player replies before the pair is applied.

template <class Eval>
class Abcd {
 public:
  Abcd(const SearchBudget& b, SearchClock& clock, const Eval& eval, int root)
      : core_(b, clock, eval, root), root_(root) {}

  /// Value of `s` at `depth` for the root player, alpha-beta pruned.
  double value(const GameState& s, int depth, double alpha, double beta) {
    core_.tick(s);
    if (winner(s)) return core_.score(s);
    if (depth == 0) {
      core_.depth_cut_ = true;
      return core_.leaf(s);
    }
    const bool max_idle = s.has_idle_units(root_);
    const bool min_idle = s.has_idle_units(1 - root_);
    if (max_idle) {
      double v = -detail::kInf;
      for (const auto& a : candidate_moves(s, root_, core_.b_)) {
        const double child = min_idle ? reply(s, a, depth, alpha, beta)
                                      : value(play(s, a, {}), depth - 1, alpha, beta);
        v = std::max(v, child);
        alpha = std::max(alpha, v);
        if (beta <= alpha) break;
      }
      return v;
    }
    double v = detail::kInf;
    for (const auto& m : candidate_moves(s, 1 - root_, core_.b_)) {
      v = std::min(v, value(play(s, {}, m), depth - 1, alpha, beta));
      beta = std::min(beta, v);
      if (beta <= alpha) break;
    }
    return v;
  }

  /// Min player's reply once the max player has committed to `a`.
  double reply(const GameState& s, const JointAction& a, int depth, double alpha, double beta) {
    core_.tick(s);
    double v = detail::kInf;
    for (const auto& m : candidate_moves(s, 1 - root_, core_.b_)) {
      v = std::min(v, value(play(s, a, m), depth - 1, alpha, beta));
      beta = std::min(beta, v);
      if (beta <= alpha) break;
    }
    return v;
  }

  GameState play(const GameState& s, const JointAction& max_a, const JointAction& min_a) const {
    return root_ == 0 ? apply_joint(s, max_a, min_a) : apply_joint(s, min_a, max_a);
  }

  detail::SearchCore<Eval> core_;
  int root_;
};

template <class Eval>
Decision idabcd_decide(const GameState& s, int player, const SearchBudget& budget, const Eval& eval,
                       SearchClock& clock) {
  budget.validate();
  Abcd<Eval> search(budget, clock, eval, player);
  Decision d;
  const auto moves = candidate_moves(s, player, budget);
  if (!s.has_idle_units(player) || winner(s)) {
    d.value = search.core_.score(s);
    search.core_.finish(d);
    return d;
  }
  const bool min_idle = s.has_idle_units(1 - player);
  std::optional<std::size_t> pv;
  for (int depth = 1; depth <= budget.max_depth; ++depth) {
    search.core_.enforce_ = depth > 1;
    search.core_.depth_cut_ = false;
    try {
      double alpha = -detail::kInf;
      std::size_t best = 0;
      double best_v = -detail::kInf;
      for (std::size_t i : detail::root_order(moves.size(), pv)) {
        const double v = min_idle ? search.reply(s, moves[i], depth, alpha, detail::kInf)
                                  : search.value(search.play(s, moves[i], {}), depth - 1, alpha,
                                                 detail::kInf);
        if (v > best_v) {
          best_v = v;
          best = i;
        }
        alpha = std::max(alpha, best_v);
      }
      pv = best;
      d.action = moves[best];
      d.value = best_v;
      d.completed_depth = depth;
    } catch (const detail::BudgetExhausted&) {
      break;
    }
    if (!search.core_.depth_cut_) break;  // whole tree resolved; deeper adds nothing
  }
  search.core_.finish(d);
  return d;
}

template <class Eval>
Decision idabcd_decide(const GameState& s, int player, const SearchBudget& budget, const Eval& eval) {
  SteadyClock clock;
  return idabcd_decide(s, player, budget, eval, clock);
}

// ---------------------------------------------------------------------------
// IDRTMinimax: depth counts single-player plies. Simultaneous decision points
// are serialized player 0 first, independent of who searches, so the tree
// (and its value up to sign) is the same from either side.

template <class Eval>
class RtMinimax {
 public:
  RtMinimax(const SearchBudget& b, SearchClock& clock, const Eval& eval, int root)
      : core_(b, clock, eval, root), root_(root) {}

  double value(const GameState& s, const JointAction* pending, int depth, double alpha, double beta,
               std::size_t* best_out = nullptr) {
    core_.tick(s);
    if (!pending && winner(s)) return core_.score(s);
    if (depth == 0) {
      core_.depth_cut_ = true;
      return core_.leaf(pending ? apply_joint(s, *pending, {}) : s);
    }
    const int mover = pending ? 1 : (s.has_idle_units(0) ? 0 : 1);
    const bool maximize = mover == root_;
    const bool then_p1 = mover == 0 && s.has_idle_units(1);
    const auto moves = candidate_moves(s, mover, core_.b_);
    double v = maximize ? -detail::kInf : detail::kInf;
    std::size_t best = 0;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      double child;
      if (then_p1)
        child = value(s, &moves[i], depth - 1, alpha, beta);
      else if (mover == 0)
        child = value(apply_joint(s, moves[i], {}), nullptr, depth - 1, alpha, beta);
      else
        child = value(apply_joint(s, pending ? *pending : JointAction{}, moves[i]), nullptr, depth - 1,
                      alpha, beta);
      if (maximize ? child > v : child < v) {
        v = child;
        best = i;
      }
      if (maximize)
        alpha = std::max(alpha, v);
      else
        beta = std::min(beta, v);
      if (beta <= alpha) break;
    }
    if (best_out) *best_out = best;
    return v;
  }

  detail::SearchCore<Eval> core_;
  int root_;
};

template <class Eval>
Decision idrtminimax_decide(const GameState& s, int player, const SearchBudget& budget, const Eval& eval,
                            SearchClock& clock) {
  budget.validate();
  RtMinimax<Eval> search(budget, clock, eval, player);
  Decision d;
  if (!s.has_idle_units(player) || winner(s)) {
    d.value = search.core_.score(s);
    search.core_.finish(d);
    return d;
  }
  const auto own = candidate_moves(s, player, budget);
  // Player 1 answers a committed player-0 move when both are idle.
  const bool answer_first = player == 1 && s.has_idle_units(0);
  const auto first = answer_first ? candidate_moves(s, 0, budget) : own;

  std::optional<std::size_t> pv;
  for (int depth = 1; depth <= budget.max_depth; ++depth) {
    search.core_.enforce_ = depth > 1;
    search.core_.depth_cut_ = false;
    try {
      std::size_t best = 0;
      double best_v = 0;
      if (!answer_first) {
        double alpha = -detail::kInf;
        best_v = -detail::kInf;
        for (std::size_t i : detail::root_order(own.size(), pv)) {
          const bool then_p1 = player == 0 && s.has_idle_units(1);
          const double v =
              then_p1 ? search.value(s, &own[i], depth - 1, alpha, detail::kInf)
                      : search.value(player == 0 ? apply_joint(s, own[i], {}) : apply_joint(s, {}, own[i]),
                                     nullptr, depth - 1, alpha, detail::kInf);
          if (v > best_v) {
            best_v = v;
            best = i;
          }
          alpha = std::max(alpha, best_v);
        }
        pv = best;
      } else {
        // Root is the opponent's commitment: minimize over it, keeping our
        // best reply to the principal line.
        double beta = detail::kInf;
        best_v = detail::kInf;
        for (std::size_t i = 0; i < first.size(); ++i) {
          std::size_t reply = 0;
          // At depth 1 our reply lies beyond the horizon and stays at the top choice.
          const double v = search.value(s, &first[i], depth - 1, -detail::kInf, beta, &reply);
          if (v < best_v) {
            best_v = v;
            best = reply;
          }
          beta = std::min(beta, best_v);
        }
      }
      d.action = own[best];
      d.value = best_v;
      d.completed_depth = depth;
    } catch (const detail::BudgetExhausted&) {
      break;
    }
    if (!search.core_.depth_cut_) break;
  }
  search.core_.finish(d);
  return d;
}

template <class Eval>
Decision idrtminimax_decide(const GameState& s, int player, const SearchBudget& budget, const Eval& eval) {
  SteadyClock clock;
  return idrtminimax_decide(s, player, budget, eval, clock);
}

}  // namespace rtslab

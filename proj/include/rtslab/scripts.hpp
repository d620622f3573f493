#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "rtslab/rules.hpp"

namespace rtslab {

/// Hard-coded rush policies; atoms of the portfolio planner and the default
/// playout drivers.
enum class Script : std::uint8_t { WorkerRush, LightRush, RangedRush, HeavyRush };

inline constexpr std::array<Script, 4> kAllScripts = {Script::WorkerRush, Script::LightRush,
                                                      Script::RangedRush, Script::HeavyRush};

constexpr std::string_view to_string(Script s) {
  switch (s) {
    case Script::WorkerRush: return "WORKER_RUSH";
    case Script::LightRush:  return "LIGHT_RUSH";
    case Script::RangedRush: return "RANGED_RUSH";
    case Script::HeavyRush:  return "HEAVY_RUSH";
  }
  return "?";
}

inline Script parse_script(std::string_view s) {
  for (auto sc : kAllScripts)
    if (to_string(sc) == s) return sc;
  throw Error("unknown script '" + std::string(s) + "'");
}

/// Cycles a scripted unit waits when it has nothing useful to do.
inline constexpr int kScriptIdleWait = 5;

namespace detail {

/// Direction preference. Player 1 uses the point-mirrored order so that
/// mirrored positions under identical scripts stay mirrored.
constexpr std::array<Dir, 4> dir_order(int player) {
  if (player == 0) return {Dir::North, Dir::East, Dir::South, Dir::West};
  return {Dir::South, Dir::West, Dir::North, Dir::East};
}

class ScriptPlanner {
 public:
  ScriptPlanner(const GameState& s, int player)
      : s_(s), player_(player), occ_(s), budget_(s.player_resources[player]) {}

  std::optional<UnitAction> act(const Unit& u, Script script, bool is_harvester) {
    const auto& spec = s_.spec(u);
    switch (u.kind) {
      case UnitKind::MainBase: {
        bool want_worker = script == Script::WorkerRush || count_own(UnitKind::Worker) == 0;
        if (want_worker)
          if (auto a = produce(u, UnitKind::Worker)) return a;
        return wait(u);
      }
      case UnitKind::Rax: {
        const UnitKind wanted = script == Script::RangedRush  ? UnitKind::Range
                                : script == Script::HeavyRush ? UnitKind::Heavy
                                                              : UnitKind::Light;
        if (script != Script::WorkerRush)
          if (auto a = produce(u, wanted)) return a;
        return wait(u);
      }
      case UnitKind::Worker: {
        if (script != Script::WorkerRush && is_harvester && u.carried == 0 && needs_barracks() &&
            budget_ >= (*s_.table)[UnitKind::Rax].cost) {
          if (auto a = produce(u, UnitKind::Rax)) {
            building_rax_ = true;
            return a;
          }
        }
        if (is_harvester)
          if (auto a = harvest(u)) return a;
        return attack(u, spec);
      }
      default:
        return attack(u, spec);
    }
  }

  int harvester_id() const {
    for (const auto& u : s_.units)
      if (u.owner == player_ && u.kind == UnitKind::Worker) return u.id;
    return kNoUnit;
  }

 private:
  int count_own(UnitKind k) const {
    int n = 0;
    for (const auto& u : s_.units) n += (u.owner == player_ && u.kind == k);
    return n;
  }

  bool needs_barracks() const {
    if (building_rax_) return false;
    for (const auto& u : s_.units) {
      if (u.owner != player_) continue;
      if (u.kind == UnitKind::Rax) return false;
      if (u.action && u.action->verb == Verb::Produce && u.action->produce == UnitKind::Rax) return false;
    }
    return true;
  }

  UnitAction wait(const Unit& u) const { return UnitAction::idle(u.id, kScriptIdleWait); }

  std::optional<UnitAction> produce(const Unit& u, UnitKind k) {
    const auto& made = (*s_.table)[k];
    if (!s_.spec(u).produces.contains(k) || budget_ < made.cost) return std::nullopt;
    for (Dir d : dir_order(player_)) {
      Pos t = step(u.pos, d);
      if (!occ_.free(t)) continue;
      UnitAction a;
      a.unit_id = u.id;
      a.verb = Verb::Produce;
      a.dir = d;
      a.target_pos = t;
      a.produce = k;
      a.duration = made.produce_period;
      occ_.mark(t);
      budget_ -= made.cost;
      return a;
    }
    return std::nullopt;
  }

  // Greedy single step that reduces Manhattan distance to `goal`; falls back
  // to a step that keeps it unchanged.
  std::optional<UnitAction> step_toward(const Unit& u, Pos goal) {
    const auto& spec = s_.spec(u);
    if (!spec.can_move) return std::nullopt;
    const int here = manhattan(u.pos, goal);
    std::optional<Dir> sideways;
    for (Dir d : dir_order(player_)) {
      Pos t = step(u.pos, d);
      if (!occ_.free(t)) continue;
      const int there = manhattan(t, goal);
      if (there < here) return move(u, d, t, spec);
      if (there == here && !sideways) sideways = d;
    }
    if (sideways) return move(u, *sideways, step(u.pos, *sideways), spec);
    return std::nullopt;
  }

  UnitAction move(const Unit& u, Dir d, Pos t, const UnitTypeSpec& spec) {
    UnitAction a;
    a.unit_id = u.id;
    a.verb = Verb::Move;
    a.dir = d;
    a.target_pos = t;
    a.duration = spec.move_period;
    occ_.mark(t);
    return a;
  }

  std::optional<UnitAction> harvest(const Unit& u) {
    const auto& spec = s_.spec(u);
    if (u.carried > 0) {
      const Unit* base = nearest(u.pos, [&](const Unit& b) {
        return b.owner == player_ && b.kind == UnitKind::MainBase;
      });
      if (!base) return std::nullopt;
      if (manhattan(base->pos, u.pos) == 1) {
        UnitAction a;
        a.unit_id = u.id;
        a.verb = Verb::Return;
        a.target_id = base->id;
        a.target_pos = base->pos;
        a.duration = spec.return_period;
        return a;
      }
      if (auto a = step_toward(u, base->pos)) return a;
      return wait(u);
    }
    for (Dir d : dir_order(player_)) {
      Pos t = step(u.pos, d);
      const auto* pile = s_.pile_at(t);
      if (pile && pile->amount > 0) {
        UnitAction a;
        a.unit_id = u.id;
        a.verb = Verb::Harvest;
        a.dir = d;
        a.target_pos = t;
        a.duration = spec.harvest_period;
        return a;
      }
    }
    const ResourcePile* best = nullptr;
    for (const auto& p : s_.piles) {
      if (p.amount <= 0) continue;
      if (!best || manhattan(p.pos, u.pos) < manhattan(best->pos, u.pos)) best = &p;
    }
    if (!best) return std::nullopt;
    if (auto a = step_toward(u, best->pos)) return a;
    return wait(u);
  }

  std::optional<UnitAction> attack(const Unit& u, const UnitTypeSpec& spec) {
    if (spec.can_attack()) {
      const Unit* target = nullptr;
      for (const auto& e : s_.units) {
        if (e.owner == player_ || manhattan(e.pos, u.pos) > spec.attack_range) continue;
        if (!target || e.hp < target->hp) target = &e;
      }
      if (target) {
        UnitAction a;
        a.unit_id = u.id;
        a.verb = Verb::Attack;
        a.target_id = target->id;
        a.target_pos = target->pos;
        a.duration = spec.attack_period;
        return a;
      }
    }
    const Unit* enemy = nearest(u.pos, [&](const Unit& e) { return e.owner != player_; });
    if (enemy && spec.can_attack())
      if (auto a = step_toward(u, enemy->pos)) return a;
    return wait(u);
  }

  template <class Pred>
  const Unit* nearest(Pos from, Pred pred) const {
    const Unit* best = nullptr;
    for (const auto& e : s_.units) {
      if (!pred(e)) continue;
      if (!best || manhattan(e.pos, from) < manhattan(best->pos, from)) best = &e;
    }
    return best;
  }

  const GameState& s_;
  int player_;
  Occupancy occ_;
  int budget_;
  bool building_rax_ = false;
};

}  // namespace detail

/// Per-unit script assignment: units not listed follow `fallback`.
struct ScriptAssignment {
  Script fallback = Script::WorkerRush;
  std::vector<std::pair<int, Script>> per_unit;  // (unit id, script)

  Script script_for(int unit_id) const {
    for (const auto& [id, sc] : per_unit)
      if (id == unit_id) return sc;
    return fallback;
  }
  auto operator<=>(const ScriptAssignment&) const = default;
};

/// Orders for every idle unit of `player` under the given assignment.
/// Deterministic: ties go to the lowest unit id and the player's direction
/// order.
inline JointAction assignment_action(const GameState& s, int player, const ScriptAssignment& assign) {
  JointAction out;
  detail::ScriptPlanner planner(s, player);
  const int harvester = planner.harvester_id();
  for (const auto& u : s.units) {
    if (u.owner != player || !u.idle()) continue;
    if (auto a = planner.act(u, assign.script_for(u.id), u.id == harvester)) out.push_back(*a);
  }
  return out;
}

inline JointAction script_action(const GameState& s, int player, Script script) {
  return assignment_action(s, player, ScriptAssignment{script, {}});
}

/// Plays both assignments forward until the game ends or `horizon` cycles
/// have elapsed.
inline GameState run_assignment_playout(GameState s, const ScriptAssignment& a0,
                                        const ScriptAssignment& a1, int horizon) {
  if (horizon < 1) throw Error("playout horizon must be >= 1");
  const int end = std::min(s.cycle + horizon, s.max_cycles);
  while (s.cycle < end && !winner(s)) {
    const bool idle0 = s.has_idle_units(0);
    const bool idle1 = s.has_idle_units(1);
    JointAction j0 = idle0 ? assignment_action(s, 0, a0) : JointAction{};
    JointAction j1 = idle1 ? assignment_action(s, 1, a1) : JointAction{};
    step(s, j0, j1);
    fast_forward(s, end);
  }
  return s;
}

inline GameState run_script_playout(GameState s, Script s0, Script s1, int horizon) {
  return run_assignment_playout(std::move(s), ScriptAssignment{s0, {}}, ScriptAssignment{s1, {}},
                                horizon);
}

}  // namespace rtslab

#pragma once

// Shared test fixtures: hand-built states, random and mirrored policies, and
// the mirror-symmetry check.

#include <random>
#include <set>
#include <string>

#include "rtslab/rtslab.hpp"

namespace rtslab::testing {

inline GameState empty_state(int w, int h, std::array<int, 2> res = {0, 0}) {
  GameState s;
  s.width = w;
  s.height = h;
  s.player_resources = res;
  return s;
}

inline Unit& add_unit(GameState& s, int owner, UnitKind kind, Pos pos, int hp = -1, int carried = 0) {
  Unit u;
  u.id = s.next_id++;
  u.owner = owner;
  u.kind = kind;
  u.pos = pos;
  u.hp = hp < 0 ? (*s.table)[kind].max_hp : hp;
  u.carried = carried;
  s.units.push_back(u);
  return s.units.back();
}

inline UnitAction find_action(const GameState& s, int unit, Verb verb) {
  for (const auto& a : unit_actions(s, unit))
    if (a.verb == verb) return a;
  throw Error("no " + std::string(to_string(verb)) + " for unit " + std::to_string(unit));
}

/// Steps with no new orders until every unit is idle again.
inline void run_until_idle(GameState& s, int limit = 1000) {
  auto busy = [&] {
    for (const auto& u : s.units)
      if (!u.idle()) return true;
    return false;
  };
  while (busy() && s.cycle < limit) step(s, {}, {});
}

/// Uniformly random legal verb for each idle unit of `player`.
inline JointAction random_policy(const GameState& s, int player, std::mt19937_64& rng) {
  JointAction out;
  for (const auto& c : legal_actions(s, player)) {
    std::uniform_int_distribution<std::size_t> pick(0, c.actions.size() - 1);
    out.push_back(c.actions[pick(rng)]);
  }
  return out;
}

inline Pos mirror(const GameState& s, Pos p) { return {s.width - 1 - p.x, s.height - 1 - p.y}; }

inline Dir mirror(Dir d) { return opposite(d); }

inline const Unit* unit_at(const GameState& s, Pos p) { return s.unit_at(p); }

/// The point-mirrored counterpart of `a`, issued by the mirrored unit.
inline UnitAction mirror_action(const GameState& s, const UnitAction& a) {
  const Unit* u = s.find(a.unit_id);
  const Unit* mu = s.unit_at(mirror(s, u->pos));
  UnitAction m = a;
  m.unit_id = mu->id;
  m.dir = mirror(a.dir);
  m.target_pos = mirror(s, a.target_pos);
  if (a.verb == Verb::Attack || a.verb == Verb::Return) m.target_id = s.unit_at(m.target_pos)->id;
  return m;
}

/// Random orders for player 0 and their mirror image for player 1. Orders of
/// the two sides that compete for one cell or one pile are dropped on both
/// sides, since the id tie-break is not mirror-symmetric.
inline std::pair<JointAction, JointAction> mirrored_policy(const GameState& s, std::mt19937_64& rng) {
  JointAction a0 = random_policy(s, 0, rng);
  JointAction a1;
  for (const auto& a : a0) a1.push_back(mirror_action(s, a));
  auto contested = [](const UnitAction& a) -> std::optional<Pos> {
    if (a.verb == Verb::Harvest) return a.target_pos;
    return a.claimed_cell();
  };
  for (std::size_t i = 0; i < a0.size(); ++i) {
    auto c0 = contested(a0[i]);
    if (!c0) continue;
    for (std::size_t j = 0; j < a1.size(); ++j) {
      auto c1 = contested(a1[j]);
      if (c1 && *c0 == *c1) {
        a0[i] = UnitAction::idle(a0[i].unit_id);
        a1[i] = UnitAction::idle(a1[i].unit_id);
        a0[j] = UnitAction::idle(a0[j].unit_id);
        a1[j] = UnitAction::idle(a1[j].unit_id);
      }
    }
  }
  return {a0, a1};
}

/// Empty string if the state is its own point mirror with players swapped,
/// otherwise a description of the first difference.
inline std::string mirror_mismatch(const GameState& s) {
  if (s.player_resources[0] != s.player_resources[1]) return "banked resources differ";
  if (s.resources_spent[0] != s.resources_spent[1]) return "spent resources differ";
  for (const auto& p : s.piles) {
    const auto* q = s.pile_at(mirror(s, p.pos));
    if (!q || q->amount != p.amount) return "pile mismatch";
  }
  if (s.unit_count(0) != s.unit_count(1)) return "unit counts differ";
  for (const auto& u : s.units) {
    const Unit* m = s.unit_at(mirror(s, u.pos));
    const std::string where = "unit " + std::to_string(u.id);
    if (!m || m->owner != 1 - u.owner) return where + ": no mirrored unit";
    if (m->kind != u.kind || m->hp != u.hp || m->carried != u.carried) return where + ": stats differ";
    if (m->busy_until != u.busy_until || m->idle() != u.idle()) return where + ": timing differs";
    if (u.action.has_value() != m->action.has_value()) return where + ": action differs";
    if (u.action && (u.action->verb != m->action->verb ||
                     (u.action->verb != Verb::Idle && m->action->target_pos != mirror(s, u.action->target_pos))))
      return where + ": action differs";
  }
  return {};
}

/// True if no two units share a cell and every unit is in bounds with
/// 0 < hp <= max_hp.
inline std::string physical_violation(const GameState& s) {
  std::set<std::pair<int, int>> seen;
  for (const auto& u : s.units) {
    if (!s.in_bounds(u.pos)) return "unit " + std::to_string(u.id) + " out of bounds";
    if (u.hp <= 0 || u.hp > s.spec(u).max_hp) return "unit " + std::to_string(u.id) + " hp out of range";
    if (u.carried != 0 && u.kind != UnitKind::Worker) return "non-worker carries resources";
    if (!seen.insert({u.pos.x, u.pos.y}).second) return "two units share a cell";
    if (s.pile_at(u.pos)) return "unit on a resource pile";
  }
  if (s.player_resources[0] < 0 || s.player_resources[1] < 0) return "negative resources";
  return {};
}

}  // namespace rtslab::testing

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtslab/game_state.hpp"

namespace rtslab {

class IllegalAction : public Error {
 public:
  IllegalAction(const UnitAction& a, const std::string& why)
      : Error("illegal action: " + describe(a) + ": " + why), action_(a) {}
  const UnitAction& action() const { return action_; }

 private:
  UnitAction action_;
};

using JointAction = std::vector<UnitAction>;

/// Legal verbs of one idle unit.
struct UnitChoices {
  int unit_id = kNoUnit;
  std::vector<UnitAction> actions;
};

/// Cell blocking map: units, piles, and cells claimed by in-progress moves
/// and productions.
class Occupancy {
 public:
  explicit Occupancy(const GameState& s) : width_(s.width), height_(s.height),
                                           cells_(std::size_t(s.width) * s.height, 0) {
    for (const auto& p : s.piles) mark(p.pos);
    for (const auto& u : s.units) {
      mark(u.pos);
      if (u.action)
        if (auto c = u.action->claimed_cell()) mark(*c);
    }
  }

  bool free(Pos p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_ &&
           cells_[std::size_t(p.y) * width_ + p.x] == 0;
  }
  void mark(Pos p) {
    if (p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_)
      cells_[std::size_t(p.y) * width_ + p.x] = 1;
  }

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
};

namespace detail {

inline bool adjacent_own_base(const GameState& s, const Unit& u, int* base_id = nullptr) {
  for (const auto& b : s.units) {
    if (b.owner == u.owner && b.kind == UnitKind::MainBase && manhattan(b.pos, u.pos) == 1) {
      if (base_id) *base_id = b.id;
      return true;
    }
  }
  return false;
}

inline void append_unit_choices(const GameState& s, const Occupancy& occ, const Unit& u,
                                std::vector<UnitAction>& out) {
  const auto& spec = s.spec(u);
  out.push_back(UnitAction::idle(u.id));

  if (spec.can_move) {
    for (Dir d : kDirs) {
      Pos t = step(u.pos, d);
      if (!occ.free(t)) continue;
      UnitAction a;
      a.unit_id = u.id;
      a.verb = Verb::Move;
      a.dir = d;
      a.target_pos = t;
      a.duration = spec.move_period;
      out.push_back(a);
    }
  }
  if (spec.can_attack()) {
    for (const auto& e : s.units) {
      if (e.owner == u.owner || manhattan(e.pos, u.pos) > spec.attack_range) continue;
      UnitAction a;
      a.unit_id = u.id;
      a.verb = Verb::Attack;
      a.target_id = e.id;
      a.target_pos = e.pos;
      a.duration = spec.attack_period;
      out.push_back(a);
    }
  }
  if (spec.can_harvest()) {
    if (u.carried == 0) {
      for (Dir d : kDirs) {
        Pos t = step(u.pos, d);
        const auto* pile = s.pile_at(t);
        if (!pile || pile->amount <= 0) continue;
        UnitAction a;
        a.unit_id = u.id;
        a.verb = Verb::Harvest;
        a.dir = d;
        a.target_pos = t;
        a.duration = spec.harvest_period;
        out.push_back(a);
      }
    } else {
      int base_id = kNoUnit;
      if (adjacent_own_base(s, u, &base_id)) {
        UnitAction a;
        a.unit_id = u.id;
        a.verb = Verb::Return;
        a.target_id = base_id;
        a.target_pos = s.find(base_id)->pos;
        a.duration = spec.return_period;
        out.push_back(a);
      }
    }
  }
  if (spec.is_producer()) {
    for (UnitKind k : kAllKinds) {
      if (!spec.produces.contains(k)) continue;
      const auto& made = (*s.table)[k];
      if (s.player_resources[u.owner] < made.cost) continue;
      for (Dir d : kDirs) {
        Pos t = step(u.pos, d);
        if (!occ.free(t)) continue;
        UnitAction a;
        a.unit_id = u.id;
        a.verb = Verb::Produce;
        a.dir = d;
        a.target_pos = t;
        a.produce = k;
        a.duration = made.produce_period;
        out.push_back(a);
      }
    }
  }
}

}  // namespace detail

/// Legal verbs of every idle unit of `player`, in unit-id order. IDLE is
/// always the first entry of each list.
inline std::vector<UnitChoices> legal_actions(const GameState& s, int player) {
  if (player != 0 && player != 1) throw Error("player must be 0 or 1");
  std::vector<UnitChoices> out;
  Occupancy occ(s);
  for (const auto& u : s.units) {
    if (u.owner != player || !u.idle()) continue;
    UnitChoices c;
    c.unit_id = u.id;
    detail::append_unit_choices(s, occ, u, c.actions);
    out.push_back(std::move(c));
  }
  return out;
}

/// Legal verbs of a single idle unit (empty if the unit is busy or missing).
inline std::vector<UnitAction> unit_actions(const GameState& s, int unit_id) {
  std::vector<UnitAction> out;
  const Unit* u = s.find(unit_id);
  if (!u || !u->idle()) return out;
  detail::append_unit_choices(s, Occupancy(s), *u, out);
  return out;
}

namespace detail {

inline std::optional<std::string> check_verb(const GameState& s, const Occupancy& occ,
                                             const Unit& u, const UnitAction& a) {
  const auto& spec = s.spec(u);
  switch (a.verb) {
    case Verb::Idle:
      if (a.duration < 1) return "idle duration must be >= 1";
      return std::nullopt;
    case Verb::Move:
      if (!spec.can_move) return "unit cannot move";
      if (a.target_pos != step(u.pos, a.dir)) return "move target is not the neighbouring cell";
      if (!occ.free(a.target_pos)) return "target cell is blocked";
      if (a.duration != spec.move_period) return "duration does not match move period";
      return std::nullopt;
    case Verb::Attack: {
      if (!spec.can_attack()) return "unit cannot attack";
      const Unit* t = s.find(a.target_id);
      if (!t || t->owner == u.owner) return "no enemy target " + std::to_string(a.target_id);
      if (manhattan(t->pos, u.pos) > spec.attack_range) return "target out of range";
      if (a.duration != spec.attack_period) return "duration does not match attack period";
      return std::nullopt;
    }
    case Verb::Harvest: {
      if (!spec.can_harvest()) return "unit cannot harvest";
      if (u.carried != 0) return "unit already carries resources";
      if (a.target_pos != step(u.pos, a.dir)) return "pile is not adjacent";
      const auto* pile = s.pile_at(a.target_pos);
      if (!pile || pile->amount <= 0) return "no resources at target";
      if (a.duration != spec.harvest_period) return "duration does not match harvest period";
      return std::nullopt;
    }
    case Verb::Return:
      if (!spec.can_harvest() || u.carried == 0) return "nothing to return";
      if (!adjacent_own_base(s, u)) return "no own base adjacent";
      if (a.duration != spec.return_period) return "duration does not match return period";
      return std::nullopt;
    case Verb::Produce: {
      if (!spec.produces.contains(a.produce)) return "unit cannot produce that kind";
      const auto& made = (*s.table)[a.produce];
      if (s.player_resources[u.owner] < made.cost) return "insufficient resources";
      if (a.target_pos != step(u.pos, a.dir)) return "production cell is not adjacent";
      if (!occ.free(a.target_pos)) return "production cell is blocked";
      if (a.duration != made.produce_period) return "duration does not match production period";
      return std::nullopt;
    }
  }
  return "unknown verb";
}

}  // namespace detail

/// Why `a` cannot be issued by `player` in `s`, or empty if it can.
inline std::optional<std::string> illegality(const GameState& s, int player, const UnitAction& a,
                                             const Occupancy* occ = nullptr) {
  const Unit* u = s.find(a.unit_id);
  if (!u) return "no such unit";
  if (u->owner != player) return "unit not owned by player " + std::to_string(player);
  if (!u->idle()) return "unit is busy";
  if (occ) return detail::check_verb(s, *occ, *u, a);
  return detail::check_verb(s, Occupancy(s), *u, a);
}

namespace detail {

inline void register_actions(GameState& s, std::span<const UnitAction> p0,
                             std::span<const UnitAction> p1) {
  struct Issued {
    int player;
    const UnitAction* action;
  };
  std::vector<Issued> issued;
  issued.reserve(p0.size() + p1.size());
  for (const auto& a : p0) issued.push_back({0, &a});
  for (const auto& a : p1) issued.push_back({1, &a});
  std::stable_sort(issued.begin(), issued.end(), [](const Issued& x, const Issued& y) {
    return x.action->unit_id < y.action->unit_id;
  });
  for (std::size_t i = 1; i < issued.size(); ++i)
    if (issued[i].action->unit_id == issued[i - 1].action->unit_id)
      throw IllegalAction(*issued[i].action, "unit assigned twice");

  Occupancy occ(s);
  for (const auto& is : issued)
    if (auto why = illegality(s, is.player, *is.action, &occ))
      throw IllegalAction(*is.action, *why);

  // Conflicts between individually legal actions: lowest unit id keeps its
  // claim, later claimants fall back to IDLE.
  std::array<int, 2> budget = s.player_resources;
  for (const auto& is : issued) {
    UnitAction a = *is.action;
    if (auto cell = a.claimed_cell()) {
      if (!occ.free(*cell)) {
        a = UnitAction::idle(a.unit_id);
      } else if (a.verb == Verb::Produce && budget[is.player] < (*s.table)[a.produce].cost) {
        a = UnitAction::idle(a.unit_id);
      } else {
        occ.mark(*cell);
      }
    }
    if (a.verb == Verb::Produce) {
      const int cost = (*s.table)[a.produce].cost;
      budget[is.player] -= cost;
      s.player_resources[is.player] -= cost;
      s.resources_spent[is.player] += cost;
    }
    Unit* u = s.find(a.unit_id);
    u->busy_until = s.cycle + a.duration;
    u->action = a;
  }
}

inline void resolve(GameState& s) {
  const int now = s.cycle;
  auto completes = [now](const Unit& u) { return u.action && u.busy_until <= now; };

  // Damage is gathered against pre-resolution positions, applied last.
  std::vector<std::pair<int, int>> damage;  // (target id, amount)
  for (const auto& u : s.units) {
    if (!completes(u) || u.action->verb != Verb::Attack) continue;
    const Unit* t = s.find(u.action->target_id);
    const auto& spec = s.spec(u);
    if (t && manhattan(t->pos, u.pos) <= spec.attack_range)
      damage.emplace_back(t->id, spec.attack_damage);
  }

  std::vector<Unit> spawned;
  for (auto& u : s.units) {
    if (!completes(u)) continue;
    const UnitAction& a = *u.action;
    switch (a.verb) {
      case Verb::Move:
        u.pos = a.target_pos;
        break;
      case Verb::Harvest:
        for (auto& p : s.piles) {
          if (p.pos == a.target_pos && p.amount > 0) {
            const int take = std::min(p.amount, s.spec(u).harvest_amount);
            p.amount -= take;
            u.carried += take;
            break;
          }
        }
        break;
      case Verb::Return:
        if (adjacent_own_base(s, u)) {
          s.player_resources[u.owner] += u.carried;
          u.carried = 0;
        }
        break;
      default:
        break;
    }
  }
  std::erase_if(s.piles, [](const ResourcePile& p) { return p.amount <= 0; });

  for (const auto& [id, amount] : damage) s.find(id)->hp -= amount;

  for (auto& u : s.units) {
    if (!completes(u)) continue;
    if (u.action->verb == Verb::Produce && u.hp > 0) {
      Unit made;
      made.owner = u.owner;
      made.kind = u.action->produce;
      made.pos = u.action->target_pos;
      made.hp = (*s.table)[made.kind].max_hp;
      spawned.push_back(made);
    }
    u.action.reset();
    u.busy_until = now;
  }

  for (const auto& u : s.units)
    if (u.hp <= 0) s.resources_destroyed += u.carried;
  std::erase_if(s.units, [](const Unit& u) { return u.hp <= 0; });

  for (auto& made : spawned) {
    made.id = s.next_id++;
    s.units.push_back(made);
  }
}

}  // namespace detail

/// One simultaneous game cycle, in place: registers both players' actions,
/// advances the clock by one cycle and resolves everything that completes.
/// Throws IllegalAction if any assignment is not legal in `s`.
inline void step(GameState& s, std::span<const UnitAction> p0, std::span<const UnitAction> p1) {
  detail::register_actions(s, p0, p1);
  ++s.cycle;
  detail::resolve(s);
}

inline GameState advance(GameState s, std::span<const UnitAction> p0, std::span<const UnitAction> p1) {
  step(s, p0, p1);
  return s;
}

inline GameState advance(GameState s) {
  step(s, {}, {});
  return s;
}

/// Advances with no new orders until some unit is idle or `limit` is reached.
/// Equivalent to repeated empty steps: nothing resolves in the skipped cycles.
inline void fast_forward(GameState& s, int limit) {
  limit = std::min(limit, s.max_cycles);
  while (s.cycle < limit) {
    int next = std::numeric_limits<int>::max();
    for (const auto& u : s.units) {
      if (u.idle()) return;
      next = std::min(next, u.busy_until);
    }
    if (next == std::numeric_limits<int>::max()) return;  // no units at all
    s.cycle = std::clamp(next, s.cycle + 1, limit) - 1;
    step(s, {}, {});
  }
}

/// Game outcome, or nothing while the game is still running.
inline std::optional<GameResult> winner(const GameState& s) {
  const int n0 = s.unit_count(0);
  const int n1 = s.unit_count(1);
  if (n0 == 0 || n1 == 0) {
    Winner w = (n0 == 0 && n1 == 0) ? Winner::Draw : (n1 == 0 ? Winner::P0 : Winner::P1);
    return GameResult{w, std::min(s.cycle, s.max_cycles), EndReason::Elimination};
  }
  if (s.cycle >= s.max_cycles) return GameResult{Winner::Draw, s.max_cycles, EndReason::CycleCap};
  return std::nullopt;
}

}  // namespace rtslab

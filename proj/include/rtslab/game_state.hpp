#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtslab/unit_types.hpp"

namespace rtslab {

struct Pos {
  int x = 0;
  int y = 0;
  constexpr bool operator==(const Pos&) const = default;
  constexpr auto operator<=>(const Pos&) const = default;
};

constexpr int manhattan(Pos a, Pos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

enum class Dir : std::uint8_t { North, East, South, West };

inline constexpr std::array<Dir, 4> kDirs = {Dir::North, Dir::East, Dir::South, Dir::West};

constexpr Pos step(Pos p, Dir d) {
  switch (d) {
    case Dir::North: return {p.x, p.y - 1};
    case Dir::East:  return {p.x + 1, p.y};
    case Dir::South: return {p.x, p.y + 1};
    case Dir::West:  return {p.x - 1, p.y};
  }
  return p;
}

constexpr Dir opposite(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 2) % 4); }

constexpr const char* to_string(Dir d) {
  constexpr const char* names[] = {"N", "E", "S", "W"};
  return names[static_cast<int>(d)];
}

enum class Verb : std::uint8_t { Idle, Move, Attack, Harvest, Return, Produce };

constexpr const char* to_string(Verb v) {
  constexpr const char* names[] = {"IDLE", "MOVE", "ATTACK", "HARVEST", "RETURN", "PRODUCE"};
  return names[static_cast<int>(v)];
}

inline constexpr int kNoUnit = -1;

struct UnitAction {
  int unit_id = kNoUnit;
  Verb verb = Verb::Idle;
  Dir dir = Dir::North;           // MOVE, PRODUCE
  int target_id = kNoUnit;        // ATTACK
  Pos target_pos{};               // HARVEST pile, or the cell a MOVE/PRODUCE claims
  UnitKind produce = UnitKind::Worker;
  int duration = 1;

  constexpr bool operator==(const UnitAction&) const = default;

  static UnitAction idle(int unit, int cycles = 1) {
    UnitAction a;
    a.unit_id = unit;
    a.verb = Verb::Idle;
    a.duration = cycles;
    return a;
  }

  /// Cell the action reserves while it is in progress, if any.
  std::optional<Pos> claimed_cell() const {
    if (verb == Verb::Move || verb == Verb::Produce) return target_pos;
    return std::nullopt;
  }
};

inline std::string describe(const UnitAction& a);

struct Unit {
  int id = kNoUnit;
  int owner = 0;
  UnitKind kind = UnitKind::Worker;
  Pos pos{};
  int hp = 1;
  int carried = 0;
  int busy_until = 0;
  std::optional<UnitAction> action;

  bool idle() const { return !action.has_value(); }
  constexpr bool operator==(const Unit&) const = default;
};

struct ResourcePile {
  Pos pos{};
  int amount = 0;
  constexpr bool operator==(const ResourcePile&) const = default;
};

struct InitialUnit {
  int owner = 0;
  UnitKind kind = UnitKind::Worker;
  Pos pos{};
};

struct MapSpec {
  std::string name;
  int width = 8;
  int height = 8;
  std::vector<ResourcePile> resource_piles;
  std::vector<InitialUnit> initial_units;
  std::array<int, 2> starting_resources{5, 5};

  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
};

enum class Winner : std::uint8_t { P0, P1, Draw };
enum class EndReason : std::uint8_t { Elimination, CycleCap, Forfeit };

constexpr const char* to_string(Winner w) {
  constexpr const char* names[] = {"P0", "P1", "DRAW"};
  return names[static_cast<int>(w)];
}
constexpr const char* to_string(EndReason r) {
  constexpr const char* names[] = {"ELIMINATION", "CYCLE_CAP", "FORFEIT"};
  return names[static_cast<int>(r)];
}

struct GameResult {
  Winner winner = Winner::Draw;
  int end_cycle = 0;
  EndReason reason = EndReason::CycleCap;
  constexpr bool operator==(const GameResult&) const = default;
};

inline constexpr int kDefaultMaxCycles = 10'000;

/// Complete observable battlefield. A plain value: copy it to branch.
///
/// `table` is non-owning; the stats table must outlive every state built on
/// it (UnitTable::standard() lives for the whole program).
struct GameState {
  const UnitTable* table = &UnitTable::standard();
  int width = 8;
  int height = 8;
  int cycle = 0;
  int max_cycles = kDefaultMaxCycles;
  int next_id = 0;
  std::array<int, 2> player_resources{0, 0};
  std::vector<Unit> units;  // sorted by id
  std::vector<ResourcePile> piles;
  // Resources that left the economy: spent on production, or carried by a
  // worker when it died. Lets the conservation check be exact.
  std::array<int, 2> resources_spent{0, 0};
  int resources_destroyed = 0;

  const UnitTypeSpec& spec(const Unit& u) const { return (*table)[u.kind]; }

  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }

  int free_resources() const {
    int total = 0;
    for (const auto& p : piles) total += p.amount;
    return total;
  }

  const Unit* find(int id) const {
    auto it = std::lower_bound(units.begin(), units.end(), id,
                               [](const Unit& u, int v) { return u.id < v; });
    return (it != units.end() && it->id == id) ? &*it : nullptr;
  }
  Unit* find(int id) {
    return const_cast<Unit*>(static_cast<const GameState&>(*this).find(id));
  }

  const Unit* unit_at(Pos p) const {
    for (const auto& u : units)
      if (u.pos == p) return &u;
    return nullptr;
  }

  const ResourcePile* pile_at(Pos p) const {
    for (const auto& r : piles)
      if (r.pos == p) return &r;
    return nullptr;
  }

  int unit_count(int player) const {
    int n = 0;
    for (const auto& u : units) n += (u.owner == player);
    return n;
  }

  bool has_idle_units(int player) const {
    for (const auto& u : units)
      if (u.owner == player && u.idle()) return true;
    return false;
  }

  /// Total of pile, banked and carried resources plus everything that has
  /// left the economy. Constant over the life of a game.
  long total_resources_ever() const {
    long total = free_resources() + player_resources[0] + player_resources[1] +
                 resources_spent[0] + resources_spent[1] + resources_destroyed;
    for (const auto& u : units) total += u.carried;
    return total;
  }

  bool operator==(const GameState& o) const {
    return cycle == o.cycle && width == o.width && height == o.height &&
           max_cycles == o.max_cycles && next_id == o.next_id &&
           player_resources == o.player_resources && units == o.units && piles == o.piles &&
           resources_spent == o.resources_spent && resources_destroyed == o.resources_destroyed;
  }
};

inline GameState make_initial_state(const MapSpec& map, const UnitTable& table = UnitTable::standard(),
                                    int max_cycles = kDefaultMaxCycles) {
  GameState s;
  s.table = &table;
  s.width = map.width;
  s.height = map.height;
  s.max_cycles = max_cycles;
  s.player_resources = map.starting_resources;
  s.piles = map.resource_piles;
  for (const auto& iu : map.initial_units) {
    Unit u;
    u.id = s.next_id++;
    u.owner = iu.owner;
    u.kind = iu.kind;
    u.pos = iu.pos;
    u.hp = table[iu.kind].max_hp;
    s.units.push_back(u);
  }
  return s;
}

inline std::string describe(const UnitAction& a) {
  std::string out = "unit " + std::to_string(a.unit_id) + " " + to_string(a.verb);
  switch (a.verb) {
    case Verb::Move: out += std::string("(") + to_string(a.dir) + ")"; break;
    case Verb::Attack: out += "(" + std::to_string(a.target_id) + ")"; break;
    case Verb::Harvest:
      out += "(" + std::to_string(a.target_pos.x) + "," + std::to_string(a.target_pos.y) + ")";
      break;
    case Verb::Produce:
      out += "(" + std::string(to_string(a.produce)) + "," + to_string(a.dir) + ")";
      break;
    default: break;
  }
  return out;
}

}  // namespace rtslab

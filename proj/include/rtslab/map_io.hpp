#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rtslab/game_state.hpp"

namespace rtslab {

/// Map or stats document problem; `where` names the offending entry.
class MapError : public Error {
 public:
  MapError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline nlohmann::json parse_document(std::string_view text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MapError(origin, std::string("parse failure: ") + e.what());
  }
}

inline int get_int(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw MapError(where, std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw MapError(where, std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

inline void check_schema(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw MapError(where, "document must be a JSON object");
  if (j.contains("schema") && get_int(j, "schema", where) != kSchemaVersion)
    throw MapError(where, "unsupported schema version");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MapError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses and validates a map document:
/// {"schema":1, "width", "height", "resources":[{x,y,amount}], "units":[{owner,kind,x,y}]}
inline MapSpec parse_map(std::string_view text, const std::string& origin = "map") {
  const auto j = detail::parse_document(text, origin);
  detail::check_schema(j, origin);

  MapSpec m;
  m.name = j.value("name", origin);
  m.width = detail::get_int(j, "width", origin);
  m.height = detail::get_int(j, "height", origin);
  if (m.width < 8 || m.width > 64 || m.height < 8 || m.height > 64)
    throw MapError(origin, "width and height must lie in [8, 64]");
  if (j.contains("starting_resources")) {
    const auto& r = j.at("starting_resources");
    if (!r.is_array() || r.size() != 2) throw MapError(origin, "starting_resources must be [r0, r1]");
    m.starting_resources = {r[0].get<int>(), r[1].get<int>()};
    if (m.starting_resources[0] < 0 || m.starting_resources[1] < 0)
      throw MapError(origin, "starting_resources must be >= 0");
  }

  std::set<Pos> taken;
  auto place = [&](Pos p, const std::string& where) {
    if (!m.in_bounds(p))
      throw MapError(where, "position (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                                ") out of bounds");
    if (!taken.insert(p).second)
      throw MapError(where, "position (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                                ") overlaps another entity");
  };

  const auto resources = j.value("resources", nlohmann::json::array());
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const std::string where = origin + ".resources[" + std::to_string(i) + "]";
    ResourcePile r{{detail::get_int(resources[i], "x", where), detail::get_int(resources[i], "y", where)},
                   detail::get_int(resources[i], "amount", where)};
    if (r.amount < 1) throw MapError(where, "amount must be >= 1");
    place(r.pos, where);
    m.resource_piles.push_back(r);
  }

  const auto units = j.value("units", nlohmann::json::array());
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string where = origin + ".units[" + std::to_string(i) + "]";
    InitialUnit u;
    u.owner = detail::get_int(units[i], "owner", where);
    if (u.owner != 0 && u.owner != 1) throw MapError(where, "owner must be 0 or 1");
    if (!units[i].contains("kind") || !units[i]["kind"].is_string())
      throw MapError(where, "missing string field 'kind'");
    try {
      u.kind = parse_unit_kind(units[i]["kind"].get<std::string>());
    } catch (const Error& e) {
      throw MapError(where, e.what());
    }
    u.pos = {detail::get_int(units[i], "x", where), detail::get_int(units[i], "y", where)};
    place(u.pos, where);
    m.initial_units.push_back(u);
  }
  return m;
}

inline MapSpec load_map(const std::string& path) { return parse_map(detail::read_file(path), path); }

inline nlohmann::json to_json(const MapSpec& m) {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  j["name"] = m.name;
  j["width"] = m.width;
  j["height"] = m.height;
  j["starting_resources"] = m.starting_resources;
  j["resources"] = nlohmann::json::array();
  for (const auto& r : m.resource_piles)
    j["resources"].push_back({{"x", r.pos.x}, {"y", r.pos.y}, {"amount", r.amount}});
  j["units"] = nlohmann::json::array();
  for (const auto& u : m.initial_units)
    j["units"].push_back({{"owner", u.owner}, {"kind", std::string(to_string(u.kind))},
                          {"x", u.pos.x}, {"y", u.pos.y}});
  return j;
}

/// Two-player base layout on an n x n board, point-symmetric about the centre:
/// each side starts with a base, one worker and two resource piles in its
/// corner.
inline MapSpec symmetric_base_map(std::string name, int n, int pile_amount = 25) {
  MapSpec m;
  m.name = std::move(name);
  m.width = n;
  m.height = n;
  auto mirror = [n](Pos p) { return Pos{n - 1 - p.x, n - 1 - p.y}; };
  for (Pos p : {Pos{0, 0}, Pos{0, 1}}) {
    m.resource_piles.push_back({p, pile_amount});
    m.resource_piles.push_back({mirror(p), pile_amount});
  }
  const Pos base{2, 1};
  const Pos worker{1, 1};
  m.initial_units = {{0, UnitKind::MainBase, base},   {1, UnitKind::MainBase, mirror(base)},
                     {0, UnitKind::Worker, worker},   {1, UnitKind::Worker, mirror(worker)}};
  return m;
}

/// Maps shipped with the library: "D8" (desk-scale 8x8), "M1" 16x16,
/// "M2" 24x24, "M3" 32x32.
inline MapSpec bundled_map(std::string_view name) {
  if (name == "D8") return symmetric_base_map("D8", 8);
  if (name == "M1") return symmetric_base_map("M1", 16);
  if (name == "M2") return symmetric_base_map("M2", 24);
  if (name == "M3") return symmetric_base_map("M3", 32);
  throw Error("unknown bundled map '" + std::string(name) + "'");
}

/// Resolves a map argument: a bundled map name, or a path to a map file.
inline MapSpec resolve_map(const std::string& name_or_path) {
  for (auto n : {"D8", "M1", "M2", "M3"})
    if (name_or_path == n) return bundled_map(n);
  return load_map(name_or_path);
}

// ---------------------------------------------------------------------------
// Unit statistics documents: {"schema":1, "WORKER": {...}, ...}

inline nlohmann::json to_json(const UnitTypeSpec& s) {
  nlohmann::json produces = nlohmann::json::array();
  for (auto k : kAllKinds)
    if (s.produces.contains(k)) produces.push_back(std::string(to_string(k)));
  return {{"cost", s.cost},
          {"max_hp", s.max_hp},
          {"attack_damage", s.attack_damage},
          {"attack_range", s.attack_range},
          {"move_period", s.move_period},
          {"attack_period", s.attack_period},
          {"produce_period", s.produce_period},
          {"harvest_amount", s.harvest_amount},
          {"harvest_period", s.harvest_period},
          {"return_period", s.return_period},
          {"can_move", s.can_move},
          {"produces", produces}};
}

inline nlohmann::json to_json(const UnitTable& t) {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  for (auto k : kAllKinds) j[std::string(to_string(k))] = to_json(t[k]);
  return j;
}

inline UnitTable parse_unit_table(std::string_view text, const std::string& origin = "units") {
  const auto j = detail::parse_document(text, origin);
  detail::check_schema(j, origin);
  auto specs = UnitTable::defaults();
  for (auto k : kAllKinds) {
    const std::string key(to_string(k));
    const std::string where = origin + "." + key;
    if (!j.contains(key)) throw MapError(where, "missing unit kind");
    const auto& e = j.at(key);
    auto& s = specs[index_of(k)];
    s.kind = k;
    s.cost = detail::get_int(e, "cost", where);
    s.max_hp = detail::get_int(e, "max_hp", where);
    s.attack_damage = e.value("attack_damage", 0);
    s.attack_range = e.value("attack_range", 0);
    s.move_period = e.value("move_period", 0);
    s.attack_period = e.value("attack_period", 0);
    s.produce_period = detail::get_int(e, "produce_period", where);
    s.harvest_amount = e.value("harvest_amount", 0);
    s.harvest_period = e.value("harvest_period", 0);
    s.return_period = e.value("return_period", 0);
    s.can_move = e.value("can_move", false);
    s.produces = {};
    for (const auto& p : e.value("produces", nlohmann::json::array())) {
      try {
        s.produces.insert(parse_unit_kind(p.get<std::string>()));
      } catch (const std::exception& ex) {
        throw MapError(where, ex.what());
      }
    }
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "schema") continue;
    try {
      parse_unit_kind(it.key());
    } catch (const Error&) {
      throw MapError(origin + "." + it.key(), "unknown unit kind");
    }
  }
  try {
    return UnitTable(specs);
  } catch (const MapError&) {
    throw;
  } catch (const Error& e) {
    throw MapError(origin, e.what());
  }
}

inline UnitTable load_unit_table(const std::string& path) {
  return parse_unit_table(detail::read_file(path), path);
}

// ---------------------------------------------------------------------------
// Game states (benchmark corpora). Units keep their ids and in-progress
// actions, so a round trip is exact.

inline nlohmann::json to_json(const UnitAction& a) {
  return {{"unit", a.unit_id}, {"verb", to_string(a.verb)}, {"dir", to_string(a.dir)},
          {"target", a.target_id}, {"tx", a.target_pos.x}, {"ty", a.target_pos.y},
          {"produce", std::string(to_string(a.produce))}, {"duration", a.duration}};
}

inline UnitAction action_from_json(const nlohmann::json& j) {
  UnitAction a;
  a.unit_id = j.at("unit").get<int>();
  const auto verb = j.at("verb").get<std::string>();
  bool found = false;
  for (int v = 0; v <= int(Verb::Produce); ++v)
    if (verb == to_string(Verb(v))) a.verb = Verb(v), found = true;
  if (!found) throw Error("unknown verb '" + verb + "'");
  const auto dir = j.at("dir").get<std::string>();
  for (Dir d : kDirs)
    if (dir == to_string(d)) a.dir = d;
  a.target_id = j.at("target").get<int>();
  a.target_pos = {j.at("tx").get<int>(), j.at("ty").get<int>()};
  a.produce = parse_unit_kind(j.at("produce").get<std::string>());
  a.duration = j.at("duration").get<int>();
  return a;
}

inline nlohmann::json to_json(const GameState& s) {
  nlohmann::json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["cycle"] = s.cycle;
  j["max_cycles"] = s.max_cycles;
  j["next_id"] = s.next_id;
  j["player_resources"] = s.player_resources;
  j["resources_spent"] = s.resources_spent;
  j["resources_destroyed"] = s.resources_destroyed;
  j["resources"] = nlohmann::json::array();
  for (const auto& r : s.piles) j["resources"].push_back({{"x", r.pos.x}, {"y", r.pos.y}, {"amount", r.amount}});
  j["units"] = nlohmann::json::array();
  for (const auto& u : s.units) {
    nlohmann::json ju = {{"id", u.id},           {"owner", u.owner}, {"kind", std::string(to_string(u.kind))},
                         {"x", u.pos.x},         {"y", u.pos.y},     {"hp", u.hp},
                         {"carried", u.carried}, {"busy_until", u.busy_until}};
    if (u.action) ju["action"] = to_json(*u.action);
    j["units"].push_back(ju);
  }
  return j;
}

inline GameState state_from_json(const nlohmann::json& j, const UnitTable& table = UnitTable::standard()) {
  GameState s;
  s.table = &table;
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.cycle = j.at("cycle").get<int>();
  s.max_cycles = j.at("max_cycles").get<int>();
  s.next_id = j.at("next_id").get<int>();
  s.player_resources = j.at("player_resources").get<std::array<int, 2>>();
  s.resources_spent = j.at("resources_spent").get<std::array<int, 2>>();
  s.resources_destroyed = j.at("resources_destroyed").get<int>();
  for (const auto& r : j.at("resources"))
    s.piles.push_back({{r.at("x").get<int>(), r.at("y").get<int>()}, r.at("amount").get<int>()});
  for (const auto& ju : j.at("units")) {
    Unit u;
    u.id = ju.at("id").get<int>();
    u.owner = ju.at("owner").get<int>();
    u.kind = parse_unit_kind(ju.at("kind").get<std::string>());
    u.pos = {ju.at("x").get<int>(), ju.at("y").get<int>()};
    u.hp = ju.at("hp").get<int>();
    u.carried = ju.at("carried").get<int>();
    u.busy_until = ju.at("busy_until").get<int>();
    if (ju.contains("action")) u.action = action_from_json(ju.at("action"));
    s.units.push_back(u);
  }
  std::sort(s.units.begin(), s.units.end(), [](const Unit& a, const Unit& b) { return a.id < b.id; });
  return s;
}

}  // namespace rtslab

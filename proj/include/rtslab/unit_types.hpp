#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rtslab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class UnitKind : std::uint8_t { MainBase, Rax, Worker, Light, Range, Heavy };

inline constexpr std::size_t kUnitKinds = 6;

inline constexpr std::array<UnitKind, kUnitKinds> kAllKinds = {
    UnitKind::MainBase, UnitKind::Rax,   UnitKind::Worker,
    UnitKind::Light,    UnitKind::Range, UnitKind::Heavy};

constexpr std::size_t index_of(UnitKind k) { return static_cast<std::size_t>(k); }

constexpr bool is_building(UnitKind k) {
  return k == UnitKind::MainBase || k == UnitKind::Rax;
}

constexpr std::string_view to_string(UnitKind k) {
  switch (k) {
    case UnitKind::MainBase: return "MAINBASE";
    case UnitKind::Rax:      return "RAX";
    case UnitKind::Worker:   return "WORKER";
    case UnitKind::Light:    return "LIGHT";
    case UnitKind::Range:    return "RANGE";
    case UnitKind::Heavy:    return "HEAVY";
  }
  return "?";
}

inline UnitKind parse_unit_kind(std::string_view s) {
  for (auto k : kAllKinds)
    if (to_string(k) == s) return k;
  // Accept the lowercase spellings used in hand-written map files.
  static constexpr std::array<std::string_view, kUnitKinds> lower = {
      "base", "barracks", "worker", "light", "ranged", "heavy"};
  for (std::size_t i = 0; i < kUnitKinds; ++i)
    if (lower[i] == s) return kAllKinds[i];
  throw Error("unknown unit kind '" + std::string(s) + "'");
}

/// Small bitset of unit kinds (what a producer can build).
class KindSet {
 public:
  constexpr KindSet() = default;
  constexpr KindSet(std::initializer_list<UnitKind> kinds) {
    for (auto k : kinds) insert(k);
  }
  constexpr void insert(UnitKind k) { bits_ |= std::uint8_t(1u << index_of(k)); }
  constexpr bool contains(UnitKind k) const { return bits_ & (1u << index_of(k)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const KindSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Static statistics of one unit kind. Periods are in game cycles;
/// `produce_period` is the time needed to build a unit of *this* kind.
struct UnitTypeSpec {
  UnitKind kind = UnitKind::Worker;
  int cost = 1;
  int max_hp = 1;
  int attack_damage = 0;
  int attack_range = 0;
  int move_period = 0;
  int attack_period = 0;
  int produce_period = 1;
  int harvest_amount = 0;
  int harvest_period = 0;
  int return_period = 0;
  bool can_move = false;
  KindSet produces;

  bool can_attack() const { return attack_damage > 0 && attack_range > 0; }
  bool can_harvest() const { return harvest_amount > 0; }
  bool is_producer() const { return !produces.empty(); }
};

/// The six-entry stats table an engine instance runs with.
class UnitTable {
 public:
  UnitTable() : UnitTable(defaults()) {}

  explicit UnitTable(std::array<UnitTypeSpec, kUnitKinds> specs) : specs_(specs) {
    validate();
  }

  const UnitTypeSpec& operator[](UnitKind k) const { return specs_[index_of(k)]; }

  /// Stats of the reference microRTS platform.
  static std::array<UnitTypeSpec, kUnitKinds> defaults() {
    std::array<UnitTypeSpec, kUnitKinds> t{};
    t[index_of(UnitKind::MainBase)] = {UnitKind::MainBase, 10, 10, 0, 0, 0, 0, 250, 0, 0, 0, false, {UnitKind::Worker}};
    t[index_of(UnitKind::Rax)]      = {UnitKind::Rax, 5, 4, 0, 0, 0, 0, 200, 0, 0, 0, false,
                                  {UnitKind::Light, UnitKind::Range, UnitKind::Heavy}};
    t[index_of(UnitKind::Worker)]   = {UnitKind::Worker, 1, 1, 1, 1, 10, 5, 50, 1, 20, 10, true, {UnitKind::Rax}};
    t[index_of(UnitKind::Light)]    = {UnitKind::Light, 2, 4, 2, 1, 8, 5, 80, 0, 0, 0, true, {}};
    t[index_of(UnitKind::Range)]    = {UnitKind::Range, 2, 1, 1, 3, 10, 5, 100, 0, 0, 0, true, {}};
    t[index_of(UnitKind::Heavy)]    = {UnitKind::Heavy, 3, 8, 4, 1, 12, 5, 120, 0, 0, 0, true, {}};
    return t;
  }

  /// Shared immutable default table; states may point at it for their lifetime.
  static const UnitTable& standard() {
    static const UnitTable table;
    return table;
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < kUnitKinds; ++i) {
      const auto& s = specs_[i];
      const std::string name(to_string(kAllKinds[i]));
      if (s.kind != kAllKinds[i]) throw Error("unit table entry " + name + " has mismatched kind");
      if (s.cost < 1) throw Error(name + ": cost must be >= 1");
      if (s.max_hp < 1) throw Error(name + ": max_hp must be >= 1");
      if (s.can_move && s.move_period < 1) throw Error(name + ": mobile kinds need move_period >= 1");
      if (s.can_attack() && s.attack_period < 1) throw Error(name + ": attack_period must be >= 1");
      if (s.can_harvest() && (s.harvest_period < 1 || s.return_period < 1))
        throw Error(name + ": harvest/return periods must be >= 1");
      if (s.produce_period < 1) throw Error(name + ": produce_period must be >= 1");
    }
    const auto& base = specs_[index_of(UnitKind::MainBase)].produces;
    if (!(base == KindSet{UnitKind::Worker}))
      throw Error("MAINBASE must produce only WORKER");
    const auto& rax = specs_[index_of(UnitKind::Rax)].produces;
    if (!(rax == KindSet{UnitKind::Light, UnitKind::Range, UnitKind::Heavy}))
      throw Error("RAX must produce only LIGHT, RANGE and HEAVY");
  }

  std::array<UnitTypeSpec, kUnitKinds> specs_;
};

}  // namespace rtslab

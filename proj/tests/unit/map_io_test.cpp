#include <gtest/gtest.h>

#include "../support/helpers.hpp"

using namespace rtslab;

namespace {

const std::string kSource = RTSLAB_SOURCE_DIR;

bool same_map(const MapSpec& a, const MapSpec& b) {
  if (a.name != b.name || a.width != b.width || a.height != b.height) return false;
  if (a.resource_piles != b.resource_piles || a.starting_resources != b.starting_resources) return false;
  if (a.initial_units.size() != b.initial_units.size()) return false;
  for (std::size_t i = 0; i < a.initial_units.size(); ++i) {
    const auto &x = a.initial_units[i], &y = b.initial_units[i];
    if (x.owner != y.owner || x.kind != y.kind || x.pos != y.pos) return false;
  }
  return true;
}

}  // namespace

TEST(MapIo, EmptyMapIsValid) {
  const auto m = parse_map(R"({"schema":1,"width":8,"height":8})");
  EXPECT_EQ(m.width, 8);
  EXPECT_TRUE(m.initial_units.empty());
  EXPECT_TRUE(m.resource_piles.empty());
}

TEST(MapIo, OverlapIsReportedWithLocation) {
  try {
    parse_map(R"({"width":8,"height":8,"units":[
      {"owner":0,"kind":"WORKER","x":3,"y":3},{"owner":1,"kind":"WORKER","x":3,"y":3}]})",
              "two.json");
    FAIL() << "expected an overlap error";
  } catch (const MapError& e) {
    EXPECT_NE(std::string(e.what()).find("two.json.units[1]"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("overlaps"), std::string::npos) << e.what();
  }
}

TEST(MapIo, RejectsBadDocuments) {
  EXPECT_THROW(parse_map("{not json"), MapError);
  EXPECT_THROW(parse_map(R"({"width":8})"), MapError);
  EXPECT_THROW(parse_map(R"({"width":4,"height":8})"), MapError);
  EXPECT_THROW(parse_map(R"({"width":8,"height":8,"resources":[{"x":9,"y":0,"amount":5}]})"), MapError);
  EXPECT_THROW(parse_map(R"({"width":8,"height":8,"units":[{"owner":2,"kind":"WORKER","x":1,"y":1}]})"),
               MapError);
  EXPECT_THROW(parse_map(R"({"width":8,"height":8,"units":[{"owner":0,"kind":"DRAGON","x":1,"y":1}]})"),
               MapError);
  EXPECT_THROW(parse_map(R"({"schema":2,"width":8,"height":8})"), MapError);
}

TEST(MapIo, RoundTripAndLowercaseKinds) {
  const auto m = bundled_map("M2");
  EXPECT_TRUE(same_map(parse_map(to_json(m).dump()), m));
  const auto lower = parse_map(R"({"width":8,"height":8,"units":[{"owner":0,"kind":"barracks","x":1,"y":1}]})");
  EXPECT_EQ(lower.initial_units[0].kind, UnitKind::Rax);
}

TEST(MapIo, ShippedFilesMatchBundledMaps) {
  for (auto [file, name] : {std::pair{"d8", "D8"}, {"m1", "M1"}, {"m2", "M2"}, {"m3", "M3"}}) {
    const auto m = load_map(kSource + "/maps/" + file + ".json");
    EXPECT_TRUE(same_map(m, bundled_map(name))) << file;
  }
  EXPECT_EQ(bundled_map("M3").width, 32);
  EXPECT_THROW(bundled_map("M9"), Error);
}

TEST(MapIo, ShippedUnitStatsMatchDefaults) {
  const auto t = load_unit_table(kSource + "/data/units.json");
  for (auto k : kAllKinds) {
    const auto &a = t[k], &b = UnitTable::standard()[k];
    EXPECT_EQ(a.cost, b.cost);
    EXPECT_EQ(a.max_hp, b.max_hp);
    EXPECT_EQ(a.attack_damage, b.attack_damage);
    EXPECT_EQ(a.attack_range, b.attack_range);
    EXPECT_EQ(a.move_period, b.move_period);
    EXPECT_EQ(a.produce_period, b.produce_period);
    EXPECT_EQ(a.produces, b.produces);
  }
}

TEST(MapIo, SyntheticUnitTableDrivesTheEngine) {
  auto j = to_json(UnitTable::standard());
  j["WORKER"]["attack_damage"] = 5;
  const UnitTable t = parse_unit_table(j.dump());
  auto s = make_initial_state(parse_map(R"({"width":8,"height":8,"units":[
      {"owner":0,"kind":"WORKER","x":3,"y":3},{"owner":1,"kind":"LIGHT","x":4,"y":3}]})"),
                              t);
  step(s, JointAction{rtslab::testing::find_action(s, 0, Verb::Attack)}, {});
  rtslab::testing::run_until_idle(s);
  EXPECT_EQ(s.unit_count(1), 0);

  auto bad = to_json(UnitTable::standard());
  bad.erase("HEAVY");
  EXPECT_THROW(parse_unit_table(bad.dump()), MapError);
  auto extra = to_json(UnitTable::standard());
  extra["TANK"] = extra["HEAVY"];
  EXPECT_THROW(parse_unit_table(extra.dump()), MapError);
}

TEST(MapIo, GameStateRoundTripIsExact) {
  auto s = make_initial_state(bundled_map("M1"));
  s = run_script_playout(s, Script::LightRush, Script::WorkerRush, 400);
  const auto back = state_from_json(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(back, s);
}

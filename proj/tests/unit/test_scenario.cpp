#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "vecsim/scenario.hpp"

using namespace vecsim;

namespace {

bool has_issue(const ScenarioLoad& l, const std::string& path) {
  return std::any_of(l.issues.begin(), l.issues.end(),
                     [&](const ValidationIssue& i) { return i.path == path; });
}

std::string issue_dump(const ScenarioLoad& l) {
  std::string out;
  for (const auto& i : l.issues) out += i.path + ": " + i.message + "\n";
  return out;
}

}  // namespace

TEST_CASE("built-in presets serialize, re-validate, and keep their identity") {
  for (const Scenario& s : {desk_scenario(), table2_scenario()}) {
    const auto j = scenario_to_json(s);
    const auto back = scenario_from_json(j);
    CAPTURE(issue_dump(back));
    REQUIRE(back.issues.empty());
    REQUIRE(back.scenario.has_value());
    CHECK(scenario_hash_hex(*back.scenario) == scenario_hash_hex(s));
    CHECK(scenario_to_json(*back.scenario) == j);
  }
}

TEST_CASE("the hash is a stable 16-hex-digit identity that tracks content") {
  const Scenario a = desk_scenario();
  const std::string h = scenario_hash_hex(a);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(scenario_hash_hex(desk_scenario()) == h);

  Scenario b = desk_scenario();
  b.seed = a.seed + 1;
  CHECK(scenario_hash_hex(b) != h);
  Scenario c = desk_scenario();
  c.clock.horizon_ticks += 1;
  CHECK(scenario_hash_hex(c) != h);
  CHECK(scenario_hash_hex(table2_scenario()) != h);
}

TEST_CASE("a round trip preserves every configured field") {
  Scenario s = table2_scenario();
  s.seed = 424242;
  s.gen.density = {3.0, 1.0};
  s.gen.rsu_count = 2;
  s.metrics.window = MetricsConfig::Window::Sliding;
  s.metrics.power_stat = MetricsConfig::PowerStat::EnergyPerByte;
  s.mobility.boundary = MobilityParams::Boundary::Wrap;
  s.events.push_back({10, ScriptedEvent::Kind::Pause, 0, -1, 1.0, 0, -1});
  s.events.push_back({20, ScriptedEvent::Kind::Resume, 0, -1, 1.0, 0, -1});
  s.events.push_back({30, ScriptedEvent::Kind::KillRsu, 0, -1, 1.0, 0, 1});
  s.events.push_back({40, ScriptedEvent::Kind::ReviveRsu, 0, -1, 1.0, 0, 1});
  s.events.push_back({50, ScriptedEvent::Kind::InjectServices, 7, 2, 1.0, 0, -1});
  s.events.push_back({60, ScriptedEvent::Kind::TrendBurst, 0, -1, 2.5, 30, -1});

  const auto back = scenario_from_json(scenario_to_json(s));
  CAPTURE(issue_dump(back));
  REQUIRE(back.scenario.has_value());
  const Scenario& t = *back.scenario;
  CHECK(t.seed == 424242);
  CHECK(t.gen.density == std::vector<double>{3.0, 1.0});
  CHECK(t.gen.sdv_count == s.gen.sdv_count);
  CHECK(t.gen.service_count == s.gen.service_count);
  CHECK(t.gen.size_min_bytes == s.gen.size_min_bytes);
  CHECK(t.gen.sdv_cache_choices == s.gen.sdv_cache_choices);
  CHECK(t.channel.backhaul_rate_bps == s.channel.backhaul_rate_bps);
  CHECK(t.demand.window_num == s.demand.window_num);
  CHECK(t.demand.payload_max_bytes == s.demand.payload_max_bytes);
  CHECK(t.mobility.boundary == MobilityParams::Boundary::Wrap);
  CHECK(t.clock.stepping == s.clock.stepping);
  CHECK(t.cache.rsu_policy == s.cache.rsu_policy);
  CHECK(t.offload.deploy_rate_Bps == s.offload.deploy_rate_Bps);
  CHECK(t.metrics.window == MetricsConfig::Window::Sliding);
  CHECK(t.metrics.power_stat == MetricsConfig::PowerStat::EnergyPerByte);
  REQUIRE(t.events.size() == 6);
  CHECK(t.events[0].kind == ScriptedEvent::Kind::Pause);
  CHECK(t.events[2].kind == ScriptedEvent::Kind::KillRsu);
  CHECK(t.events[2].rsu == 1);
  CHECK(t.events[4].kind == ScriptedEvent::Kind::InjectServices);
  CHECK(t.events[4].count == 7);
  CHECK(t.events[4].cluster == 2);
  CHECK(t.events[5].kind == ScriptedEvent::Kind::TrendBurst);
  CHECK(t.events[5].multiplier == 2.5);
  CHECK(t.events[5].duration_ticks == 30);
}

TEST_CASE("an empty document falls back to the desk preset wholesale") {
  const auto l = scenario_from_json(nlohmann::json::object());
  CAPTURE(issue_dump(l));
  REQUIRE(l.scenario.has_value());
  CHECK(scenario_hash_hex(*l.scenario) == scenario_hash_hex(desk_scenario()));
}

TEST_CASE("a rectangular canvas with width above height is legal") {
  const auto l = scenario_from_json({{"gen", {{"canvas_m", {8000.0, 2000.0}}}}});
  CAPTURE(issue_dump(l));
  REQUIRE(l.scenario.has_value());
  CHECK(l.scenario->gen.canvas.x == 8000.0);
  CHECK(l.scenario->gen.canvas.y == 2000.0);
}

TEST_CASE("unknown keys are flagged with their dotted path") {
  auto l = scenario_from_json({{"seed", 1}, {"bogus", 2}});
  CHECK(!l.scenario.has_value());
  CHECK(has_issue(l, "bogus"));

  l = scenario_from_json({{"gen", {{"nope", 1}}}});
  CHECK(has_issue(l, "gen.nope"));

  l = scenario_from_json({{"gen", {{"hardware", {{"warp_drive", 1}}}}}});
  CHECK(has_issue(l, "gen.hardware.warp_drive"));

  l = scenario_from_json({{"clock", {{"dt", 0.1}}}});
  CHECK(has_issue(l, "clock.dt"));
}

TEST_CASE("bad values are rejected, not silently clamped") {
  auto l = scenario_from_json({{"gen", {{"sdv_count", -3}}}});
  CHECK(!l.scenario.has_value());
  CHECK(has_issue(l, "gen.sdv_count"));

  l = scenario_from_json({{"clock", {{"dt_s", 0.0}}}});
  CHECK(has_issue(l, "clock.dt_s"));

  l = scenario_from_json({{"cache", {{"rsu_policy", "mru"}}}});
  CHECK(has_issue(l, "cache.rsu_policy"));

  l = scenario_from_json({{"offload", {{"policy", "teleport"}}}});
  CHECK(has_issue(l, "offload.policy"));

  l = scenario_from_json({{"gen", {{"size_range_bytes", {100, 10}}}}});
  CHECK(has_issue(l, "gen.size_range_bytes"));
}

TEST_CASE("scripted events are validated against the clock and topology") {
  // desk-preset defaults: horizon 5000, five nodes
  auto l = scenario_from_json({{"events", {{{"tick", 99999}, {"command", "pause"}}}}});
  CHECK(has_issue(l, "events[0].tick"));

  l = scenario_from_json({{"events", {{{"tick", 5}, {"command", "kill_rsu"}, {"rsu", 99}}}}});
  CHECK(has_issue(l, "events[0].rsu"));

  l = scenario_from_json({{"events", {{{"tick", 5}, {"command", "kill_rsu"}}}}});
  CHECK(has_issue(l, "events[0].rsu"));  // rsu id is mandatory for kill

  l = scenario_from_json({{"events", {{{"tick", 5}, {"command", "inject_services"}, {"count", 0}}}}});
  CHECK(has_issue(l, "events[0].count"));

  l = scenario_from_json({{"events", {{{"tick", 5}, {"command", "self_destruct"}}}}});
  CHECK(has_issue(l, "events[0].command"));

  l = scenario_from_json({{"events", {{{"command", "pause"}}}}});
  CHECK(has_issue(l, "events[0].tick"));

  l = scenario_from_json({{"events", 7}});
  CHECK(has_issue(l, "events"));
}

TEST_CASE("all problems are reported in one pass") {
  const auto l = scenario_from_json({{"bogus", 1},
                                     {"gen", {{"sdv_count", -3}}},
                                     {"events",
                                      {{{"tick", 99999}, {"command", "pause"}},
                                       {{"tick", 5}, {"command", "self_destruct"}}}}});
  CHECK(!l.scenario.has_value());
  CHECK(l.issues.size() >= 4);
  CHECK(has_issue(l, "bogus"));
  CHECK(has_issue(l, "gen.sdv_count"));
  CHECK(has_issue(l, "events[0].tick"));
  CHECK(has_issue(l, "events[1].command"));
}

TEST_CASE("file loading distinguishes missing files from malformed ones") {
  auto l = load_scenario_file("/nonexistent/path/scenario.json");
  REQUIRE(l.issues.size() == 1);
  CHECK(l.issues[0].message == "cannot open file");

  const std::string path = "scenario_under_test.json";
  {
    std::ofstream out(path);
    out << "{ this is not json";
  }
  l = load_scenario_file(path);
  REQUIRE(l.issues.size() == 1);
  CHECK(l.issues[0].message == "malformed json");

  {
    std::ofstream out(path);
    out << scenario_to_json(desk_scenario()).dump();
  }
  l = load_scenario_file(path);
  CAPTURE(issue_dump(l));
  CHECK(l.scenario.has_value());
  std::remove(path.c_str());
}

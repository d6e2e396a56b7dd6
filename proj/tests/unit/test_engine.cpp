#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vecsim/engine.hpp"

using namespace vecsim;

namespace {

// small-but-busy configuration: a few vehicles on the desk parameters, short
// horizon, so full runs stay in the millisecond range
Scenario tiny_scenario(std::uint64_t seed, Tick horizon, int sdvs = 12) {
  Scenario sc = desk_scenario();
  sc.seed = seed;
  sc.gen.sdv_count = sdvs;
  sc.gen.rsu_count = 3;
  sc.gen.service_count = 40;
  sc.gen.cluster_count = 1;
  sc.gen.rsu_cache_bytes = 256LL << 20;
  sc.demand.window_num = 40;
  sc.demand.hot_list_len = 8;
  sc.demand.hot_window_ticks = 200;
  sc.clock.horizon_ticks = horizon;
  sc.metrics.anchor_every_ticks = 100;
  return sc;
}

std::int64_t count_type(const EventLog& log, RecType t) {
  std::int64_t n = 0;
  for (const auto& rec : log.records())
    if (rec.type == t) ++n;
  return n;
}

std::int64_t count_type_before(const EventLog& log, RecType t, Tick boundary) {
  std::int64_t n = 0;
  for (const auto& rec : log.records())
    if (rec.type == t && rec.tick < boundary) ++n;
  return n;
}

ScriptedEvent make_event(ScriptedEvent::Kind kind, Tick tick = 0) {
  ScriptedEvent ev;
  ev.kind = kind;
  ev.tick = tick;
  return ev;
}

}  // namespace

TEST_CASE("run header opens the journal with the run identity") {
  const Scenario sc = tiny_scenario(21, 50);
  Engine eng(sc);

  REQUIRE(eng.log().size() == 1);
  const LogRecord& rec = eng.log().records().front();
  CHECK(rec.tick == 0);
  CHECK(rec.type == RecType::RunHeader);
  CHECK(rec.body.at("seed").get<std::uint64_t>() == 21);
  CHECK(rec.body.at("scenario_hash").get<std::string>() == scenario_hash_hex(sc));
  CHECK(rec.body.at("dt_s").get<double>() == sc.clock.dt_s);
  CHECK(rec.body.at("horizon_ticks").get<Tick>() == 50);
  CHECK(rec.body.at("stepping").get<int>() == 1);
  CHECK(rec.body.at("sdvs").get<int>() == 12);
  CHECK(rec.body.at("catalog").get<std::int64_t>() == 40);

  const auto& rsus = rec.body.at("rsus");
  REQUIRE(rsus.size() == 3);
  for (std::size_t i = 0; i < rsus.size(); ++i) {
    CHECK(rsus[i].at("id").get<RsuId>() == static_cast<RsuId>(i));
    CHECK(rsus[i].at("tx_power_w").get<double>() == sc.gen.rsu_tx_w);
    CHECK(rsus[i].at("cache_bytes").get<std::int64_t>() == sc.gen.rsu_cache_bytes);
  }
}

TEST_CASE("identical scenarios replay to byte-identical journals") {
  const Scenario sc = tiny_scenario(7, 300);
  const RunResult a = run_scenario(sc);
  const RunResult b = run_scenario(sc);

  REQUIRE(a.log.size() > 1);
  CHECK(a.scenario_hash == b.scenario_hash);
  CHECK(a.log.to_ndjson() == b.log.to_ndjson());
  CHECK(a.issued == b.issued);
  CHECK(a.completed == b.completed);
  CHECK(a.failed == b.failed);
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i)
    CHECK(a.frames[i].to_json() == b.frames[i].to_json());

  Scenario other = sc;
  other.seed = 8;
  CHECK(run_scenario(other).scenario_hash != a.scenario_hash);
}

TEST_CASE("manual stepping and the run loop produce the same journal") {
  const Scenario sc = tiny_scenario(13, 200);

  Engine stepped(sc);
  while (stepped.step()) {
  }
  CHECK(stepped.finished());
  CHECK(stepped.tick() == 200);
  CHECK_FALSE(stepped.step());  // idempotent once done

  Engine looped(sc);
  looped.run();
  CHECK(looped.finished());

  CHECK(stepped.log().to_ndjson() == looped.log().to_ndjson());
  REQUIRE(stepped.frames().size() == looped.frames().size());
  for (std::size_t i = 0; i < stepped.frames().size(); ++i)
    CHECK(stepped.frames()[i].to_json() == looped.frames()[i].to_json());
}

TEST_CASE("a zero-tick horizon finishes immediately with a single frame") {
  Scenario sc = tiny_scenario(3, 0);
  Engine eng(sc);

  CHECK_FALSE(eng.step());
  CHECK(eng.finished());
  CHECK(eng.tick() == 0);
  CHECK(eng.issued() == 0);
  REQUIRE(eng.frames().size() == 1);
  CHECK(eng.frames().front().tick == 0);
  CHECK(eng.frames().front().catalog_size == 40);
  CHECK(eng.frames().front().per_rsu.size() == 3);
  CHECK(count_type(eng.log(), RecType::RsuWindow) == 0);

  CHECK_FALSE(eng.step());
  CHECK(eng.frames().size() == 1);
  CHECK(eng.status_json().at("state").get<std::string>() == "finished");
  CHECK(eng.enqueue_control(make_event(ScriptedEvent::Kind::Pause)) ==
        Engine::ControlResult::RunFinished);
}

TEST_CASE("a world without vehicles idles to the horizon") {
  Scenario sc = tiny_scenario(5, 120, 0);
  sc.metrics.anchor_every_ticks = 50;
  Engine eng(sc);
  eng.run();

  CHECK(eng.finished());
  CHECK(eng.issued() == 0);
  CHECK(eng.completed() == 0);
  CHECK(eng.failed() == 0);
  CHECK(count_type(eng.log(), RecType::Request) == 0);

  REQUIRE(eng.frames().size() == 3);
  CHECK(eng.frames()[0].tick == 50);
  CHECK(eng.frames()[1].tick == 100);
  CHECK(eng.frames()[2].tick == 120);
  for (const auto& f : eng.frames()) {
    CHECK(f.issued == 0);
    CHECK(f.in_flight == 0);
    CHECK_FALSE(f.global_hit_rate_defined);
    CHECK(f.space_utilization_pct == 0.0);
    CHECK(f.per_rsu.size() == 3);
  }
  // one window block per node per anchor
  CHECK(count_type(eng.log(), RecType::RsuWindow) == 9);
}

TEST_CASE("anchors land on the cadence and the horizon exactly once") {
  SUBCASE("horizon aligned with the cadence") {
    Scenario sc = tiny_scenario(5, 100, 0);
    sc.metrics.anchor_every_ticks = 50;
    Engine eng(sc);
    eng.run();
    REQUIRE(eng.frames().size() == 2);
    CHECK(eng.frames()[0].tick == 50);
    CHECK(eng.frames()[1].tick == 100);
  }
  SUBCASE("horizon shorter than one window") {
    Scenario sc = tiny_scenario(5, 30, 0);
    sc.metrics.anchor_every_ticks = 100;
    Engine eng(sc);
    eng.run();
    REQUIRE(eng.frames().size() == 1);
    CHECK(eng.frames().front().tick == 30);
  }
}

TEST_CASE("request accounting balances against the journal at every anchor") {
  const Scenario sc = tiny_scenario(17, 300);
  Engine eng(sc);
  eng.run();

  REQUIRE(eng.issued() > 0);
  REQUIRE(eng.completed() > 0);

  // run totals equal the journal tallies
  CHECK(eng.issued() == count_type(eng.log(), RecType::Request));
  CHECK(eng.completed() == count_type(eng.log(), RecType::TaskDone));
  CHECK(eng.failed() == count_type(eng.log(), RecType::TaskFailed));
  CHECK(eng.issued() >= eng.completed() + eng.failed());

  // terminal tasks are retired from the live table, so what remains is
  // exactly the in-flight population
  const std::int64_t in_flight = eng.issued() - eng.completed() - eng.failed();
  CHECK(static_cast<std::int64_t>(eng.tasks().size()) == in_flight);
  for (const auto& [id, t] : eng.tasks()) CHECK_FALSE(t.terminal());

  // each frame counts records strictly before its anchor tick
  std::int64_t prev_issued = 0;
  for (const auto& f : eng.frames()) {
    CHECK(f.issued == count_type_before(eng.log(), RecType::Request, f.tick));
    CHECK(f.completed == count_type_before(eng.log(), RecType::TaskDone, f.tick));
    CHECK(f.failed == count_type_before(eng.log(), RecType::TaskFailed, f.tick));
    CHECK(f.in_flight == f.issued - f.completed - f.failed);
    CHECK(f.in_flight >= 0);
    CHECK(f.issued >= prev_issued);
    prev_issued = f.issued;
  }
}

TEST_CASE("replaying the journal reproduces the run's frames") {
  SUBCASE("busy run") {
    const Scenario sc = tiny_scenario(19, 300);
    const RunResult r = run_scenario(sc);
    const auto replayed = frames_from_log(r.log, sc.metrics, sc.clock.dt_s);
    REQUIRE(replayed.size() == r.frames.size());
    for (std::size_t i = 0; i < replayed.size(); ++i)
      CHECK(replayed[i].to_json() == r.frames[i].to_json());
  }
  SUBCASE("degenerate zero-tick run") {
    const Scenario sc = tiny_scenario(19, 0);
    const RunResult r = run_scenario(sc);
    const auto replayed = frames_from_log(r.log, sc.metrics, sc.clock.dt_s);
    REQUIRE(replayed.size() == 1);
    REQUIRE(r.frames.size() == 1);
    CHECK(replayed.front().to_json() == r.frames.front().to_json());
  }
}

TEST_CASE("scripted outage and recovery flip the node's liveness") {
  Scenario sc = tiny_scenario(23, 80);
  ScriptedEvent kill = make_event(ScriptedEvent::Kind::KillRsu, 10);
  kill.rsu = 1;
  ScriptedEvent revive = make_event(ScriptedEvent::Kind::ReviveRsu, 40);
  revive.rsu = 1;
  sc.events = {kill, revive};

  Engine eng(sc);
  for (int i = 0; i < 10; ++i) eng.step();
  CHECK(eng.world().rsus[1].alive);  // fires while tick 10 executes
  eng.step();
  CHECK_FALSE(eng.world().rsus[1].alive);
  CHECK(eng.world().rsus[1].running.empty());
  CHECK(eng.world().rsus[1].queue.empty());

  while (eng.tick() < 41) eng.step();
  CHECK(eng.world().rsus[1].alive);
  eng.run();
  CHECK(eng.finished());

  // both mutations are journaled as scripted commands at their trigger tick
  std::vector<std::pair<Tick, std::string>> seen;
  for (const auto& rec : eng.log().records())
    if (rec.type == RecType::Scripted)
      seen.emplace_back(rec.tick, rec.body.at("command").get<std::string>());
  REQUIRE(seen.size() == 2);
  CHECK(seen[0] == std::pair<Tick, std::string>{10, "kill_rsu"});
  CHECK(seen[1] == std::pair<Tick, std::string>{40, "revive_rsu"});

  // while the node is down nothing resolves there
  for (const auto& rec : eng.log().records())
    if (rec.type == RecType::Cache && rec.tick > 10 && rec.tick <= 40)
      CHECK(rec.body.at("rsu").get<RsuId>() != 1);
}

TEST_CASE("scripted pause is recorded but ignored in batch runs") {
  Scenario sc = tiny_scenario(29, 60);
  sc.events = {make_event(ScriptedEvent::Kind::Pause, 5)};

  Engine eng(sc);
  eng.run();  // must not hang
  CHECK(eng.finished());
  CHECK_FALSE(eng.paused());

  bool found = false;
  for (const auto& rec : eng.log().records()) {
    if (rec.type != RecType::Scripted) continue;
    REQUIRE(rec.tick == 5);
    CHECK(rec.body.at("command").get<std::string>() == "pause");
    CHECK(rec.body.at("ignored").get<bool>());
    found = true;
  }
  CHECK(found);
}

TEST_CASE("scripted pause takes effect when a controller is attached") {
  Scenario sc = tiny_scenario(29, 60);
  sc.events = {make_event(ScriptedEvent::Kind::Pause, 5)};

  Engine eng(sc);
  eng.set_interactive(true);
  for (int i = 0; i < 5; ++i) eng.step();
  CHECK_FALSE(eng.paused());
  eng.step();
  CHECK(eng.paused());
  CHECK(eng.status_json().at("state").get<std::string>() == "paused");

  for (const auto& rec : eng.log().records())
    if (rec.type == RecType::Scripted) CHECK_FALSE(rec.body.contains("ignored"));

  CHECK(eng.enqueue_control(make_event(ScriptedEvent::Kind::Resume)) ==
        Engine::ControlResult::Accepted);
  CHECK_FALSE(eng.paused());
  eng.run();
  CHECK(eng.finished());
}

TEST_CASE("control commands are validated and applied between ticks") {
  Engine eng(tiny_scenario(31, 50));

  ScriptedEvent bad_kill = make_event(ScriptedEvent::Kind::KillRsu);
  bad_kill.rsu = 99;
  CHECK(eng.enqueue_control(bad_kill) == Engine::ControlResult::Rejected);
  ScriptedEvent bad_revive = make_event(ScriptedEvent::Kind::ReviveRsu);
  bad_revive.rsu = -1;
  CHECK(eng.enqueue_control(bad_revive) == Engine::ControlResult::Rejected);

  ScriptedEvent kill = make_event(ScriptedEvent::Kind::KillRsu);
  kill.rsu = 1;
  CHECK(eng.enqueue_control(kill) == Engine::ControlResult::Accepted);
  CHECK(eng.world().rsus[1].alive);  // queued, not yet applied
  eng.step();
  CHECK_FALSE(eng.world().rsus[1].alive);

  ScriptedEvent revive = make_event(ScriptedEvent::Kind::ReviveRsu);
  revive.rsu = 1;
  CHECK(eng.enqueue_control(revive) == Engine::ControlResult::Accepted);
  eng.step();
  CHECK(eng.world().rsus[1].alive);

  // operator commands are journaled on their own channel
  std::vector<std::string> commands;
  for (const auto& rec : eng.log().records())
    if (rec.type == RecType::Control) commands.push_back(rec.body.at("command").get<std::string>());
  CHECK(commands == std::vector<std::string>{"kill_rsu", "revive_rsu"});
  CHECK(count_type(eng.log(), RecType::Scripted) == 0);

  // pause/resume act immediately instead of queueing
  CHECK(eng.enqueue_control(make_event(ScriptedEvent::Kind::Pause)) ==
        Engine::ControlResult::Accepted);
  CHECK(eng.paused());
  CHECK(eng.enqueue_control(make_event(ScriptedEvent::Kind::Resume)) ==
        Engine::ControlResult::Accepted);
  CHECK_FALSE(eng.paused());

  eng.run();
  CHECK(eng.finished());
  CHECK(eng.enqueue_control(kill) == Engine::ControlResult::RunFinished);
}

TEST_CASE("abort unblocks a paused run loop") {
  Engine eng(tiny_scenario(37, 500));
  eng.set_interactive(true);
  CHECK(eng.enqueue_control(make_event(ScriptedEvent::Kind::Pause)) ==
        Engine::ControlResult::Accepted);
  REQUIRE(eng.paused());

  std::thread runner([&] { eng.run(); });
  eng.abort();
  runner.join();
  CHECK_FALSE(eng.finished());
  CHECK(eng.tick() == 0);
}

TEST_CASE("resume over the control surface wakes a paused run") {
  Engine eng(tiny_scenario(41, 60));
  eng.set_interactive(true);
  CHECK(eng.enqueue_control(make_event(ScriptedEvent::Kind::Pause)) ==
        Engine::ControlResult::Accepted);

  std::thread runner([&] { eng.run(); });
  CHECK(eng.enqueue_control(make_event(ScriptedEvent::Kind::Resume)) ==
        Engine::ControlResult::Accepted);
  runner.join();
  CHECK(eng.finished());
  CHECK(eng.tick() == 60);
}

TEST_CASE("status endpoint mirrors engine counters") {
  Engine eng(tiny_scenario(43, 200));

  nlohmann::json before = eng.status_json();
  CHECK(before.at("tick").get<Tick>() == 0);
  CHECK(before.at("horizon_ticks").get<Tick>() == 200);
  CHECK(before.at("state").get<std::string>() == "running");
  CHECK(before.at("sdvs").get<std::size_t>() == eng.world().sdvs.size());
  CHECK(before.at("rsus").get<std::size_t>() == eng.world().rsus.size());
  CHECK(before.at("services").get<std::size_t>() == eng.world().services.size());
  CHECK(before.at("issued").get<std::int64_t>() == 0);

  for (int i = 0; i < 150; ++i) eng.step();
  nlohmann::json mid = eng.status_json();
  CHECK(mid.at("tick").get<Tick>() == 150);
  CHECK(mid.at("state").get<std::string>() == "running");
  CHECK(mid.at("issued").get<std::int64_t>() == eng.issued());
  CHECK(mid.at("in_flight").get<std::int64_t>() ==
        eng.issued() - eng.completed() - eng.failed());
  CHECK(mid.at("in_flight").get<std::int64_t>() ==
        static_cast<std::int64_t>(eng.tasks().size()));

  MetricsFrame live = eng.live_frame();
  CHECK(live.tick == 150);
  CHECK(live.issued == eng.issued());
  CHECK(live.completed == eng.completed());

  eng.run();
  nlohmann::json after = eng.status_json();
  CHECK(after.at("state").get<std::string>() == "finished");
  CHECK(after.at("tick").get<Tick>() == 200);
}

TEST_CASE("deadline expiry fails every task too heavy to finish") {
  Scenario sc = tiny_scenario(47, 100);
  sc.gen.cpu_min_flop = 1e18;  // centuries of compute at any tier
  sc.gen.cpu_max_flop = 1e18;
  sc.gen.timeout_s = 1.0;

  Engine eng(sc);
  eng.run();

  CHECK(eng.issued() >= 5);
  CHECK(eng.completed() == 0);
  CHECK(eng.failed() >= 5);

  const std::set<std::string> movement_reasons{"range", "no_coverage", "no_route"};
  std::int64_t timeouts = 0;
  for (const auto& rec : eng.log().records()) {
    if (rec.type != RecType::TaskFailed) continue;
    const std::string reason = rec.body.at("reason").get<std::string>();
    if (reason == "timeout")
      ++timeouts;
    else
      CHECK(movement_reasons.count(reason) == 1);
  }
  CHECK(timeouts >= 5);
}

TEST_CASE("service injection grows the catalog mid-run") {
  Scenario sc = tiny_scenario(53, 200);
  ScriptedEvent inject = make_event(ScriptedEvent::Kind::InjectServices, 20);
  inject.count = 5;
  inject.cluster = 0;
  ScriptedEvent burst = make_event(ScriptedEvent::Kind::TrendBurst, 30);
  burst.multiplier = 3.0;
  burst.duration_ticks = 50;
  sc.events = {inject, burst};

  Engine eng(sc);
  eng.run();

  REQUIRE(eng.world().services.size() == 45);
  for (ServiceId id = 40; id < 45; ++id) {
    const ServiceSpec& s = eng.world().services[static_cast<std::size_t>(id)];
    CHECK(s.id == id);
    CHECK(s.cluster_id == 0);
    CHECK(s.uploaded_tick == 20);
  }

  bool upload_seen = false;
  for (const auto& rec : eng.log().records()) {
    if (rec.type != RecType::ServiceUpload) continue;
    upload_seen = true;
    CHECK(rec.tick == 20);
    CHECK(rec.body.at("count").get<std::int64_t>() == 5);
    CHECK(rec.body.at("first_id").get<ServiceId>() == 40);
  }
  CHECK(upload_seen);
  CHECK(count_type(eng.log(), RecType::Scripted) == 2);

  // frames anchored after the upload see the larger catalog
  for (const auto& f : eng.frames()) {
    if (f.tick <= 20)
      CHECK(f.catalog_size == 40);
    else
      CHECK(f.catalog_size == 45);
  }
}

TEST_CASE("every pinned image belongs to an in-flight task") {
  Engine eng(tiny_scenario(59, 300));
  eng.run();

  std::map<std::pair<RsuId, ServiceId>, int> held;
  for (const auto& [id, t] : eng.tasks()) {
    if (t.pinned_at_rsu < 0) continue;
    REQUIRE(t.rsu >= 0);
    held[{t.rsu, t.pinned_at_rsu}] += 1;
  }
  for (const auto& [key, n] : held)
    CHECK(eng.world().rsus[static_cast<std::size_t>(key.first)].cache.contains(key.second));

  for (const auto& r : eng.world().rsus) {
    for (const auto& [sid, meta] : r.cache.entries()) {
      const auto it = held.find({r.id, sid});
      const int expected = it == held.end() ? 0 : it->second;
      CHECK(meta.pin_count == expected);
    }
  }
}

TEST_CASE("summary row condenses the final frame") {
  const Scenario sc = tiny_scenario(61, 300);
  const RunResult r = run_scenario(sc);
  const SummaryRow row = summarize(r);

  CHECK(row.policy == sc.cache.rsu_policy);
  CHECK(row.cache_bytes == sc.gen.rsu_cache_bytes);
  CHECK(row.seed == sc.seed);

  REQUIRE_FALSE(r.frames.empty());
  const MetricsFrame& f = r.frames.back();
  CHECK(row.hit_rate_pct == doctest::Approx(100.0 * f.global_hit_rate).epsilon(1e-12));
  CHECK(row.space_utilization_pct == doctest::Approx(f.space_utilization_pct).epsilon(1e-12));

  double resp_sum = 0.0;
  std::int64_t resp_n = 0;
  double qos_sum = 0.0;
  int qos_n = 0;
  for (const auto& m : f.per_rsu) {
    resp_sum += m.avg_response_s * static_cast<double>(m.responses);
    resp_n += m.responses;
    if (m.qos_defined) {
      qos_sum += m.qos;
      qos_n += 1;
    }
  }
  REQUIRE(resp_n > 0);
  CHECK(row.avg_response_s == doctest::Approx(resp_sum / static_cast<double>(resp_n)).epsilon(1e-12));
  REQUIRE(qos_n > 0);
  CHECK(row.qos == doctest::Approx(qos_sum / qos_n).epsilon(1e-12));

  RunResult empty;
  empty.scenario = sc;
  const SummaryRow zero = summarize(empty);
  CHECK(zero.policy == sc.cache.rsu_policy);
  CHECK(zero.hit_rate_pct == 0.0);
  CHECK(zero.avg_response_s == 0.0);
  CHECK(zero.qos == 0.0);
}

TEST_CASE("coarser stepping still yields a deterministic balanced run") {
  Scenario sc = tiny_scenario(67, 300);
  sc.clock.stepping = 4;

  const RunResult a = run_scenario(sc);
  const RunResult b = run_scenario(sc);
  CHECK(a.log.to_ndjson() == b.log.to_ndjson());
  CHECK(a.issued == count_type(a.log, RecType::Request));
  CHECK(a.completed == count_type(a.log, RecType::TaskDone));
  CHECK(a.failed == count_type(a.log, RecType::TaskFailed));
  CHECK(a.issued >= a.completed + a.failed);
  CHECK(a.issued > 0);

  // the cadence is part of the run identity
  Scenario fine = sc;
  fine.clock.stepping = 1;
  CHECK(scenario_hash_hex(fine) != scenario_hash_hex(sc));
}

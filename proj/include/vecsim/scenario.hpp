#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vecsim/channel.hpp"
#include "vecsim/demand.hpp"
#include "vecsim/metrics.hpp"
#include "vecsim/mobility.hpp"
#include "vecsim/synthgen.hpp"

namespace vecsim {

struct ClockConfig {
  double dt_s = 0.1;
  Tick horizon_ticks = 2000;
  int stepping = 1;
};

struct CacheConfig {
  std::string rsu_policy = "lfu";
  std::string sdv_policy = "lru";
  int collab_max_hops = 1;
};

struct OffloadConfig {
  std::string policy = "nearest";
  double deploy_rate_Bps = 1e9;
};

struct ScriptedEvent {
  enum class Kind { InjectServices, TrendBurst, Pause, Resume, KillRsu, ReviveRsu };
  Tick tick = 0;
  Kind kind = Kind::Pause;
  std::int64_t count = 0;      // InjectServices
  int cluster = -1;            // InjectServices; -1 = random
  double multiplier = 1.0;     // TrendBurst
  Tick duration_ticks = 0;     // TrendBurst
  RsuId rsu = -1;              // KillRsu / ReviveRsu
};

std::string_view to_string(ScriptedEvent::Kind k);

struct Scenario {
  std::uint64_t seed = 1;
  GenConfig gen;
  ChannelParams channel;
  DemandParams demand;
  MobilityParams mobility;
  ClockConfig clock;
  CacheConfig cache;
  OffloadConfig offload;
  MetricsConfig metrics;
  std::vector<ScriptedEvent> events;
};

Scenario desk_scenario();
Scenario table2_scenario();

nlohmann::json scenario_to_json(const Scenario& s);

struct ValidationIssue {
  std::string path;  // dotted field path
  std::string message;
};

struct ScenarioLoad {
  std::optional<Scenario> scenario;  // set only when issues is empty
  std::vector<ValidationIssue> issues;
};

ScenarioLoad scenario_from_json(const nlohmann::json& j);
ScenarioLoad load_scenario_file(const std::string& path);

// stable identity of a run's configuration
std::string scenario_hash_hex(const Scenario& s);

}  // namespace vecsim

#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "vecsim/events.hpp"
#include "vecsim/world.hpp"

namespace vecsim {

struct MetricsConfig {
  Tick anchor_every_ticks = 100;
  enum class Window { Cumulative, Sliding } window = Window::Cumulative;
  Tick sliding_ticks = 1000;
  enum class PowerStat { MeanTxPower, EnergyPerByte } power_stat = PowerStat::MeanTxPower;
};

struct RsuMetrics {
  RsuId id = -1;
  std::int64_t requests = 0;  // resolves at this node
  std::int64_t hits = 0;
  std::int64_t peer_hits = 0;
  std::int64_t miss_cdc = 0;
  double hit_rate = 0.0;  // local hits only
  bool hit_rate_defined = false;
  double peer_hit_rate = 0.0;
  std::int64_t responses = 0;
  double avg_response_s = 0.0;
  bool response_defined = false;
  double qos = 0.0;
  bool qos_defined = false;
  double avg_load = 0.0;  // busy compute fraction
  double power_stat = 0.0;
  std::int64_t bytes_moved = 0;
};

struct MetricsFrame {
  Tick tick = 0;
  std::vector<RsuMetrics> per_rsu;
  double load_stddev = 0.0;
  double load_balancing = 0.0;  // 1/(stddev+guard); higher = more balanced
  bool load_balancing_capped = false;
  std::int64_t issued = 0;
  std::int64_t completed = 0;
  std::int64_t failed = 0;
  std::int64_t in_flight = 0;
  double global_hit_rate = 0.0;
  bool global_hit_rate_defined = false;
  double space_utilization_pct = 0.0;
  std::int64_t catalog_size = 0;

  nlohmann::json to_json() const;
  static MetricsFrame from_json(const nlohmann::json& j);
};

// single-pass event consumer; frames snapshot the running state at anchors.
// Sliding mode replays the trailing window through a fresh cumulative pass.
class MetricsAccumulator {
public:
  explicit MetricsAccumulator(MetricsConfig cfg = {});
  void consume(const LogRecord& rec);
  MetricsFrame frame_at(Tick tick, double dt) const;

private:
  struct RsuAcc {
    RsuId id = -1;
    double tx_power_w = 0.0;
    std::int64_t cache_capacity = 0;
    std::int64_t hits = 0, peer_hits = 0, miss_cdc = 0;
    double resp_sum_s = 0.0;
    std::int64_t resp_count = 0;
    double qos_bytes = 0.0, qos_time_s = 0.0;
    double busy_s = 0.0, tx_s = 0.0;
    std::int64_t tx_bytes = 0;
    std::int64_t bytes_moved = 0;
    std::int64_t occupied = 0;  // latest sample
  };
  MetricsConfig cfg_;
  nlohmann::json header_;
  std::vector<RsuAcc> rsus_;
  std::int64_t issued_ = 0, completed_ = 0, failed_ = 0;
  std::int64_t catalog_ = 0;
  std::deque<LogRecord> recent_;  // kept only in sliding mode
  void apply_(const LogRecord& rec);
  MetricsFrame snapshot_(Tick tick, double dt, Tick window_start) const;
};

// replay a full log, emitting a frame at every anchor tick present
std::vector<MetricsFrame> frames_from_log(const EventLog& log, const MetricsConfig& cfg, double dt);

// direct formulas, for spot checks and small windows
double hit_rate_of(std::int64_t hits, std::int64_t requests);
double qos_of(double sum_bytes, double sum_time_s, double power_w);
struct LoadBalance {
  double stddev = 0.0;
  double l_value = 0.0;
  bool capped = false;
};
LoadBalance load_balancing_of(const std::vector<double>& loads);
double space_utilization_pct_of(const std::vector<std::pair<std::int64_t, std::int64_t>>& occ_cap);

// Table-style summary row (one per finished run)
struct SummaryRow {
  std::string policy;
  std::int64_t cache_bytes = 0;
  std::uint64_t seed = 0;
  double hit_rate_pct = 0.0;
  double avg_response_s = 0.0;
  double qos = 0.0;
  double space_utilization_pct = 0.0;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace vecsim

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string_view>
#include <vector>

#include "vecsim/geometry.hpp"

namespace vecsim {

using ServiceId = std::int64_t;
using SdvId = std::int32_t;
using RsuId = std::int32_t;
using ConnId = std::int64_t;
using TaskId = std::int64_t;
using Tick = std::int64_t;

struct ServiceSpec {
  ServiceId id = -1;
  std::int64_t size_bytes = 0;
  double cpu_demand_flop = 0.0;
  double charm = 0.0;  // demand-side attractiveness weight
  std::vector<float> feature;
  int cluster_id = -1;
  double timeout_s = 0.0;
  Tick uploaded_tick = 0;
};

// ---------------------------------------------------------------------------
// cache store: byte-budgeted id -> metadata map shared by every policy

struct CacheEntryMeta {
  std::int64_t size_bytes = 0;
  Tick inserted = 0;
  Tick last_used = 0;
  std::int64_t freq = 0;        // insert counts as first use
  std::int64_t insert_seq = 0;  // global order of insertion
  bool ref_bit = false;
  int pin_count = 0;  // pinned entries are never evicted (transfer in flight)
};

class CacheStore {
public:
  CacheStore() = default;
  explicit CacheStore(std::int64_t capacity_bytes) : capacity_(capacity_bytes) {}

  std::int64_t capacity_bytes() const { return capacity_; }
  std::int64_t occupied_bytes() const { return occupied_; }
  std::int64_t free_bytes() const { return capacity_ - occupied_; }
  std::size_t entry_count() const { return entries_.size(); }

  bool contains(ServiceId id) const { return entries_.count(id) != 0; }
  const CacheEntryMeta* find(ServiceId id) const;

  // hit bookkeeping; returns false if the id is absent
  bool touch(ServiceId id, Tick now);

  // returns false (and leaves the store unchanged) if the entry does not fit
  bool insert(ServiceId id, std::int64_t size_bytes, Tick now);
  bool erase(ServiceId id);

  void pin(ServiceId id);
  void unpin(ServiceId id);

  // deterministic iteration (ascending id)
  const std::map<ServiceId, CacheEntryMeta>& entries() const { return entries_; }

  // insertion-ordered ring walked by the clock hand
  const std::vector<ServiceId>& ring() const { return ring_; }
  std::size_t clock_hand() const { return hand_; }
  void set_clock_hand(std::size_t h) { hand_ = ring_.empty() ? 0 : h % ring_.size(); }
  void clear_ref_bit(ServiceId id);

private:
  std::int64_t capacity_ = 0;
  std::int64_t occupied_ = 0;
  std::int64_t next_seq_ = 0;
  std::map<ServiceId, CacheEntryMeta> entries_;
  std::vector<ServiceId> ring_;
  std::size_t hand_ = 0;
};

// ---------------------------------------------------------------------------
// connection lifecycle

enum class ConnKind { V2R, V2V, R2R, R2C };

enum class ConnStatus { Pending, Established, Transmitting, Computing, Finished, Failed };

enum class ConnEvent { Establish, StartTransmit, StartCompute, Finish, Fail };

std::string_view to_string(ConnStatus s);
std::string_view to_string(ConnKind k);

// legal transitions; terminal states absorb nothing
bool conn_transition_allowed(ConnStatus from, ConnEvent ev);
ConnStatus conn_transition(ConnStatus from, ConnEvent ev);  // precondition: allowed

struct EndpointRef {
  enum class Kind { Sdv, Rsu, Cdc } kind = Kind::Sdv;
  std::int32_t id = -1;
  bool operator==(const EndpointRef&) const = default;
};

struct Conn {
  ConnId id = -1;
  ConnKind kind = ConnKind::V2R;
  EndpointRef a;  // initiating side
  EndpointRef b;
  ConnStatus status = ConnStatus::Pending;
  Tick created = 0;
  std::int64_t total_bytes = 0;
  double remaining_bytes = 0.0;
  double setup_countdown_s = 0.0;  // propagation / round-trip delay before transmit
  double fading_gain = 1.0;        // |h|^2, resampled on the stepping cadence
  double fixed_rate_bps = -1.0;    // >=0 pins the rate (backhaul / relayed paths)
  double relay_extra_delay_s = 0.0;  // store-and-forward tail after the radio leg
  RsuId via_rsu = -1;              // hop actually carrying the radio leg, when relayed
  TaskId task = -1;
  bool counts_toward_radio = true;

  bool terminal() const { return status == ConnStatus::Finished || status == ConnStatus::Failed; }
  bool can_apply(ConnEvent ev) const { return conn_transition_allowed(status, ev); }
  // returns false and leaves the status untouched when the transition is illegal
  bool apply(ConnEvent ev) {
    if (!can_apply(ev)) return false;
    status = conn_transition(status, ev);
    return true;
  }
};

// ---------------------------------------------------------------------------
// entities

enum class Activity { Active, Sleeping };

struct SdvState {
  SdvId id = -1;
  Vec2 position;
  double heading_rad = 0.0;
  double speed_mps = 0.0;     // theta_v
  double accel_mps2 = 0.0;    // theta_a
  double compute_flops = 0.0;
  double tx_power_w = 1.0;
  int cluster_id = -1;
  std::vector<float> preference;
  CacheStore cache;
  Activity activity = Activity::Active;
  Tick sleep_until = 0;
  TaskId active_task = -1;
  std::map<ServiceId, Tick> accessed;  // service -> last request tick
};

struct RsuState {
  RsuId id = -1;
  Vec2 position;
  double coverage_m = 0.0;
  double compute_flops = 0.0;
  double tx_power_w = 3.0;
  int concurrency = 1;  // compute slots (omega)
  bool alive = true;
  CacheStore cache;
  std::vector<TaskId> running;
  std::deque<TaskId> queue;
};

struct CdcState {
  Vec2 position;
  double compute_flops = 0.0;
  int active_tasks = 0;
};

struct World {
  Vec2 canvas{10000.0, 10000.0};
  std::vector<ServiceSpec> services;  // the CDC disk holds every image
  std::vector<SdvState> sdvs;
  std::vector<RsuState> rsus;
  CdcState cdc;

  const ServiceSpec& service(ServiceId id) const { return services.at(static_cast<std::size_t>(id)); }
};

// coverage is exclusive at the boundary
inline bool in_range(const SdvState& v, const RsuState& r) {
  return distance(v.position, r.position) < r.coverage_m;
}

inline bool rsus_linked(const RsuState& a, const RsuState& b) {
  const double d = distance(a.position, b.position);
  return d < a.coverage_m && d < b.coverage_m;
}

}  // namespace vecsim

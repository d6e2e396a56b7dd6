#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vecsim/world.hpp"

namespace vecsim {

struct TaskRequest {
  TaskId id = -1;
  SdvId origin = -1;
  ServiceId service = -1;
  double delta_flop = 0.0;       // required compute
  std::int64_t eta_bytes = 0;    // input payload
  double deadline_s = 0.0;
  Tick issue_tick = 0;
};

enum class OffloadTarget { Local, Rsu, Cdc };
std::string_view to_string(OffloadTarget t);

struct OffloadDecision {
  OffloadTarget target = OffloadTarget::Cdc;
  RsuId rsu = -1;  // meaningful for Rsu targets
};

// queue snapshot for the waiting-time recurrence
struct RsuQueueView {
  int concurrency = 1;
  std::vector<double> running_remaining_s;
  std::vector<double> queued_duration_s;  // full durations, arrival order
};

double queue_time_s(const RsuQueueView& q);

double time_local_s(const TaskRequest& task, double sdv_flops);
double time_rsu_s(const TaskRequest& task, double uplink_bps, const RsuQueueView& q, double rsu_flops);
double time_cdc_s(const TaskRequest& task, double uplink_bps, double cdc_share_flops, double rtt_s);

struct TimingBreakdown {
  double upload_s = 0.0;
  double queue_s = 0.0;
  double compute_s = 0.0;
  double rtt_s = 0.0;
  double total_s = 0.0;
};

struct SnapshotInputs {
  double uplink_bps = 0.0;        // requester to the decided execution point
  RsuQueueView queue;             // decided RSU's queue
  double rsu_flops = 0.0;
  double sdv_flops = 0.0;
  double cdc_share_flops = 0.0;   // fair share of datacenter capacity
  double rtt_s = 0.0;             // backhaul round trip
};

// dispatch to the tier-specific sum; the breakdown mirrors each term
TimingBreakdown total_task_time(const OffloadDecision& d, const TaskRequest& task,
                                const SnapshotInputs& in);

// ---------------------------------------------------------------------------
// pluggable decision policies (executed by the datacenter controller)

struct RsuView {
  RsuId id = -1;
  bool alive = true;
  bool in_range = false;
  bool relay_reachable = false;  // reachable through the mesh from an in-range node
  double dist_m = 0.0;
  int queue_len = 0;
  int running = 0;
  int concurrency = 1;
  int active_conns = 0;
  double flops = 0.0;
  bool has_image = false;
  std::int64_t cache_capacity_bytes = 0;
  std::int64_t cache_free_bytes = 0;
  std::vector<ServiceId> cached;
  double est_uplink_bps = 0.0;
  std::vector<double> running_remaining_s;
  std::vector<double> queued_duration_s;
};

struct PolicyContext {
  Tick tick = 0;
  double dt = 0.1;
  TaskRequest task;
  std::int64_t image_size_bytes = 0;
  Vec2 sdv_position;
  double sdv_flops = 0.0;
  std::int64_t sdv_cache_capacity_bytes = 0;
  std::int64_t sdv_cache_free_bytes = 0;
  bool sdv_has_image = false;
  std::vector<RsuView> rsus;  // ascending id
  double cdc_flops = 0.0;
  int cdc_active = 0;
  double cdc_rtt_s = 0.0;       // via the nearest in-range node
  double cdc_uplink_bps = 0.0;
  bool cdc_reachable = false;
};

class OffloadPolicy {
public:
  virtual ~OffloadPolicy() = default;
  virtual const char* name() const = 0;
  // must be a pure function of the context
  virtual OffloadDecision decide(const PolicyContext& ctx) const = 0;
};

using OffloadPolicyFactory = std::function<std::unique_ptr<OffloadPolicy>()>;
bool register_offload_policy(const std::string& name, OffloadPolicyFactory factory);
std::unique_ptr<OffloadPolicy> make_offload_policy(const std::string& name);
std::vector<std::string> registered_offload_policies();

}  // namespace vecsim

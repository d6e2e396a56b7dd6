#include "vecsim/offload.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <queue>

namespace vecsim {

std::string_view to_string(OffloadTarget t) {
  switch (t) {
    case OffloadTarget::Local: return "local";
    case OffloadTarget::Rsu: return "rsu";
    case OffloadTarget::Cdc: return "cdc";
  }
  return "?";
}

double queue_time_s(const RsuQueueView& q) {
  const auto omega = static_cast<std::size_t>(std::max(1, q.concurrency));
  if (q.running_remaining_s.size() < omega) return 0.0;
  // simulate slot turnover: every queued task ahead occupies the earliest slot
  std::priority_queue<double, std::vector<double>, std::greater<double>> slots(
      q.running_remaining_s.begin(), q.running_remaining_s.end());
  for (double d : q.queued_duration_s) {
    const double t = slots.top();
    slots.pop();
    slots.push(t + d);
  }
  return slots.top();
}

double time_local_s(const TaskRequest& task, double sdv_flops) {
  return task.delta_flop / sdv_flops;
}

double time_rsu_s(const TaskRequest& task, double uplink_bps, const RsuQueueView& q,
                  double rsu_flops) {
  const double upload = static_cast<double>(task.eta_bytes) * 8.0 / uplink_bps;
  return upload + queue_time_s(q) + task.delta_flop / rsu_flops;
}

double time_cdc_s(const TaskRequest& task, double uplink_bps, double cdc_share_flops,
                  double rtt_s) {
  const double upload = static_cast<double>(task.eta_bytes) * 8.0 / uplink_bps;
  return upload + task.delta_flop / cdc_share_flops + rtt_s;
}

TimingBreakdown total_task_time(const OffloadDecision& d, const TaskRequest& task,
                                const SnapshotInputs& in) {
  TimingBreakdown b;
  switch (d.target) {
    case OffloadTarget::Local:
      b.compute_s = task.delta_flop / in.sdv_flops;
      b.total_s = time_local_s(task, in.sdv_flops);
      break;
    case OffloadTarget::Rsu:
      b.upload_s = static_cast<double>(task.eta_bytes) * 8.0 / in.uplink_bps;
      b.queue_s = queue_time_s(in.queue);
      b.compute_s = task.delta_flop / in.rsu_flops;
      b.total_s = time_rsu_s(task, in.uplink_bps, in.queue, in.rsu_flops);
      break;
    case OffloadTarget::Cdc:
      b.upload_s = static_cast<double>(task.eta_bytes) * 8.0 / in.uplink_bps;
      b.compute_s = task.delta_flop / in.cdc_share_flops;
      b.rtt_s = in.rtt_s;
      b.total_s = time_cdc_s(task, in.uplink_bps, in.cdc_share_flops, in.rtt_s);
      break;
  }
  return b;
}

// ---------------------------------------------------------------------------

namespace {

std::map<std::string, OffloadPolicyFactory>& policy_registry() {
  static std::map<std::string, OffloadPolicyFactory> r;
  return r;
}

std::mutex& policy_mutex() {
  static std::mutex m;
  return m;
}

bool rsu_feasible(const PolicyContext& ctx, const RsuView& r) {
  return r.alive && (r.in_range || r.relay_reachable) &&
         ctx.image_size_bytes <= r.cache_capacity_bytes;
}

double est_time_cdc(const PolicyContext& ctx) {
  TaskRequest t = ctx.task;
  const double share = ctx.cdc_flops / static_cast<double>(ctx.cdc_active + 1);
  return time_cdc_s(t, ctx.cdc_uplink_bps, share, ctx.cdc_rtt_s);
}

// least-loaded nearby node when it beats shipping everything upstream
class NearestPolicy final : public OffloadPolicy {
public:
  const char* name() const override { return "nearest"; }
  OffloadDecision decide(const PolicyContext& ctx) const override {
    const RsuView* best = nullptr;
    for (const auto& r : ctx.rsus) {
      if (!rsu_feasible(ctx, r)) continue;
      if (!best) {
        best = &r;
        continue;
      }
      const int la = r.queue_len + r.running;
      const int lb = best->queue_len + best->running;
      if (la != lb ? la < lb : (r.dist_m != best->dist_m ? r.dist_m < best->dist_m : r.id < best->id))
        best = &r;
    }
    if (!best) {
      if (ctx.image_size_bytes <= ctx.sdv_cache_capacity_bytes && ctx.sdv_flops > 0.0) {
        const double local = time_local_s(ctx.task, ctx.sdv_flops);
        if (!ctx.cdc_reachable || local <= est_time_cdc(ctx)) return {OffloadTarget::Local, -1};
      }
      return {OffloadTarget::Cdc, -1};
    }
    RsuQueueView q{best->concurrency, best->running_remaining_s, best->queued_duration_s};
    const double t_rsu = time_rsu_s(ctx.task, best->est_uplink_bps, q, best->flops);
    if (ctx.cdc_reachable && est_time_cdc(ctx) < t_rsu) return {OffloadTarget::Cdc, -1};
    return {OffloadTarget::Rsu, best->id};
  }
};

class AlwaysLocalPolicy final : public OffloadPolicy {
public:
  const char* name() const override { return "always_local"; }
  OffloadDecision decide(const PolicyContext&) const override { return {OffloadTarget::Local, -1}; }
};

class AlwaysCdcPolicy final : public OffloadPolicy {
public:
  const char* name() const override { return "always_cdc"; }
  OffloadDecision decide(const PolicyContext&) const override { return {OffloadTarget::Cdc, -1}; }
};

// deterministic pseudo-random spread across feasible nodes
class HashSpreadPolicy final : public OffloadPolicy {
public:
  const char* name() const override { return "hash_spread"; }
  OffloadDecision decide(const PolicyContext& ctx) const override {
    std::vector<const RsuView*> feasible;
    for (const auto& r : ctx.rsus)
      if (rsu_feasible(ctx, r)) feasible.push_back(&r);
    if (feasible.empty()) return {OffloadTarget::Cdc, -1};
    auto h = static_cast<std::uint64_t>(ctx.task.id) * 0x9e3779b97f4a7c15ull;
    h ^= h >> 29;
    return {OffloadTarget::Rsu, feasible[h % feasible.size()]->id};
  }
};

}  // namespace

bool register_offload_policy(const std::string& name, OffloadPolicyFactory factory) {
  std::lock_guard<std::mutex> lock(policy_mutex());
  return policy_registry().emplace(name, std::move(factory)).second;
}

std::unique_ptr<OffloadPolicy> make_offload_policy(const std::string& name) {
  if (name == "nearest") return std::make_unique<NearestPolicy>();
  if (name == "always_local") return std::make_unique<AlwaysLocalPolicy>();
  if (name == "always_cdc") return std::make_unique<AlwaysCdcPolicy>();
  if (name == "hash_spread") return std::make_unique<HashSpreadPolicy>();
  std::lock_guard<std::mutex> lock(policy_mutex());
  auto it = policy_registry().find(name);
  if (it == policy_registry().end()) return nullptr;
  return it->second();
}

std::vector<std::string> registered_offload_policies() {
  std::vector<std::string> names{"nearest", "always_local", "always_cdc", "hash_spread"};
  std::lock_guard<std::mutex> lock(policy_mutex());
  for (const auto& [n, f] : policy_registry()) names.push_back(n);
  return names;
}

}  // namespace vecsim

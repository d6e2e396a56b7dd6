#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "vecsim/cache.hpp"
#include "vecsim/events.hpp"
#include "vecsim/metrics.hpp"
#include "vecsim/offload.hpp"
#include "vecsim/scenario.hpp"
#include "vecsim/zipf.hpp"

namespace vecsim {

enum class TaskPhase {
  Decision,      // dispatch request travelling to the datacenter
  Upload,        // input payload on the air
  AwaitImage,    // parked at an RSU until its cache answers
  Fetching,      // image moving from a peer or the datacenter
  Downloading,   // image moving down to the vehicle
  DeployRsu,
  DeploySdv,
  Queued,
  Running,
  CdcSend,       // payload forwarded over the backhaul
  CdcCompute,
  LocalCompute,
  Done,
  Failed,
};

std::string_view to_string(TaskPhase p);

struct EngineTask {
  TaskRequest req;
  OffloadTarget target = OffloadTarget::Cdc;
  RsuId rsu = -1;  // serving RSU, or the hop the task currently depends on
  TaskPhase phase = TaskPhase::Decision;
  double countdown_s = 0.0;     // deploy timers
  double remaining_flop = 0.0;  // compute left in the execution phase
  ConnId decision_conn = -1;
  ConnId upload_conn = -1;
  ConnId fetch_conn = -1;
  ConnId download_conn = -1;
  ConnId cdcsend_conn = -1;
  ServiceId pinned_at_rsu = -1;  // image held down in the RSU cache until completion

  bool terminal() const { return phase == TaskPhase::Done || phase == TaskPhase::Failed; }
};

// One simulation run. step()/run() belong to the owning thread; the control
// surface (enqueue_control, status_json, live_frame, pause flags) is safe to
// call from another thread — commands land between ticks, never inside one.
class Engine {
public:
  explicit Engine(Scenario sc);

  bool step();  // one tick; false once the horizon is reached
  void run();   // step to the horizon, honoring pause when interactive

  Tick tick() const;
  bool finished() const;
  bool paused() const;

  enum class ControlResult { Accepted, RunFinished, Rejected };
  ControlResult enqueue_control(const ScriptedEvent& ev);
  void set_interactive(bool on) { interactive_ = on; }
  void abort();  // unblock run() and stop stepping

  nlohmann::json status_json() const;
  MetricsFrame live_frame() const;

  const Scenario& scenario() const { return sc_; }
  const World& world() const { return world_; }
  const EventLog& log() const { return log_; }
  const std::vector<MetricsFrame>& frames() const { return frames_; }
  std::int64_t issued() const { return issued_; }
  std::int64_t completed() const { return completed_; }
  std::int64_t failed() const { return failed_; }
  const std::map<TaskId, EngineTask>& tasks() const { return tasks_; }

private:
  friend class EngineProbe;  // test hook

  struct RsuWindowAcc {
    double busy_s = 0.0;
    double tx_s = 0.0;
    std::int64_t tx_bytes = 0;
  };
  struct Burst {
    Tick until = 0;
    double multiplier = 1.0;
  };

  void emit_(Tick t, RecType type, nlohmann::json body);
  void apply_scripted_(const ScriptedEvent& ev, bool from_control);
  void drain_control_();
  void check_timeouts_();
  void rsu_phase_();
  void conn_phase_();
  void sdv_phase_();
  void service_phase_();
  void maybe_anchor_();
  void anchor_(Tick at, bool with_windows);

  bool stepping_due_() const { return tick_ % sc_.clock.stepping == 0; }
  double drift_multiplier_() const;

  RsuId nearest_in_range_(const SdvState& v) const;
  double cdc_rtt_from_(RsuId hop) const;
  PolicyContext build_policy_context_(const EngineTask& t) const;

  void issue_request_(SdvState& v);
  void decide_(EngineTask& t);
  bool start_upload_(EngineTask& t, RsuId target_rsu, std::int64_t bytes);
  Conn& new_conn_(ConnKind kind, EndpointRef a, EndpointRef b, std::int64_t bytes, double setup_s,
                  TaskId task, bool radio);
  void start_fetch_(EngineTask& t, const ResolveResult& rr);
  void start_download_(EngineTask& t);
  void complete_conn_(Conn& c);
  void conn_failed_(Conn& c, const char* reason);
  void resolve_at_rsu_(EngineTask& t, RsuState& r);
  void done_task_(EngineTask& t);
  void fail_task_(EngineTask& t, const char* reason);
  void unpin_task_(EngineTask& t);
  void fail_task_conns_(EngineTask& t);
  void inject_services_(std::int64_t count, int cluster);
  void kill_rsu_(RsuId id);

  Scenario sc_;
  RngStreams streams_;
  World world_;
  std::vector<std::vector<float>> centers_;
  ZipfTable ranks_;
  CachePolicy rsu_policy_;
  CachePolicy sdv_policy_;
  std::unique_ptr<OffloadPolicy> offload_;

  std::vector<Rng> sel_rng_;    // per-SDV selection/sleep draws
  std::vector<Rng> drift_rng_;  // per-SDV preference drift
  std::vector<Rng> rsu_store_rng_;
  std::vector<Rng> sdv_store_rng_;

  EventLog log_;
  MetricsAccumulator acc_;
  std::vector<MetricsFrame> frames_;
  std::map<TaskId, EngineTask> tasks_;
  std::map<ConnId, Conn> conns_;
  RequestLog reqlog_;
  std::vector<ServiceId> hot_;
  std::vector<RsuWindowAcc> wins_;
  std::vector<Burst> bursts_;
  std::vector<std::int64_t> sdv_issued_;

  TaskId next_task_ = 0;
  ConnId next_conn_ = 0;
  ServiceId next_service_ = 0;
  Tick tick_ = 0;
  std::int64_t issued_ = 0;
  std::int64_t completed_ = 0;
  std::int64_t failed_ = 0;
  bool finished_ = false;
  bool interactive_ = false;

  mutable std::mutex mtx_;
  std::condition_variable cv_;
  bool paused_ = false;
  bool abort_ = false;
  std::deque<ScriptedEvent> control_q_;
};

struct RunResult {
  Scenario scenario;
  std::string scenario_hash;
  EventLog log;
  std::vector<MetricsFrame> frames;
  std::int64_t issued = 0;
  std::int64_t completed = 0;
  std::int64_t failed = 0;
  double wall_ms = 0.0;  // informational only; never written into reports
};

RunResult run_scenario(const Scenario& sc);
SummaryRow summarize(const RunResult& r);

}  // namespace vecsim

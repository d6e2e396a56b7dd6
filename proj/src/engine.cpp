#include "vecsim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vecsim/channel.hpp"
#include "vecsim/demand.hpp"
#include "vecsim/mobility.hpp"

namespace vecsim {

namespace {
constexpr double kEps = 1e-12;

bool is_rsu(const EndpointRef& e) { return e.kind == EndpointRef::Kind::Rsu; }
bool is_sdv(const EndpointRef& e) { return e.kind == EndpointRef::Kind::Sdv; }
}  // namespace

std::string_view to_string(TaskPhase p) {
  switch (p) {
    case TaskPhase::Decision: return "decision";
    case TaskPhase::Upload: return "upload";
    case TaskPhase::AwaitImage: return "await_image";
    case TaskPhase::Fetching: return "fetching";
    case TaskPhase::Downloading: return "downloading";
    case TaskPhase::DeployRsu: return "deploy_rsu";
    case TaskPhase::DeploySdv: return "deploy_sdv";
    case TaskPhase::Queued: return "queued";
    case TaskPhase::Running: return "running";
    case TaskPhase::CdcSend: return "cdc_send";
    case TaskPhase::CdcCompute: return "cdc_compute";
    case TaskPhase::LocalCompute: return "local_compute";
    case TaskPhase::Done: return "done";
    case TaskPhase::Failed: return "failed";
  }
  return "?";
}

Engine::Engine(Scenario sc)
    : sc_(std::move(sc)),
      streams_(sc_.seed),
      ranks_(std::max<std::int64_t>(1, sc_.gen.service_count), sc_.gen.zipf_alpha),
      acc_(sc_.metrics) {
  auto built = make_world(sc_.gen, streams_);
  world_ = std::move(built.world);
  centers_ = std::move(built.centers);
  world_.cdc.compute_flops = sc_.gen.cdc_flops;
  next_service_ = static_cast<ServiceId>(world_.services.size());

  auto rp = parse_cache_policy(sc_.cache.rsu_policy);
  auto sp = parse_cache_policy(sc_.cache.sdv_policy);
  if (!rp || !sp) throw std::invalid_argument("unknown cache policy name");
  rsu_policy_ = *rp;
  sdv_policy_ = *sp;
  offload_ = make_offload_policy(sc_.offload.policy);
  if (!offload_) throw std::invalid_argument("unknown offload policy: " + sc_.offload.policy);

  sel_rng_.reserve(world_.sdvs.size());
  drift_rng_.reserve(world_.sdvs.size());
  sdv_store_rng_.reserve(world_.sdvs.size());
  for (std::size_t i = 0; i < world_.sdvs.size(); ++i) {
    sel_rng_.emplace_back(derive_seed(sc_.seed, "demand/select/" + std::to_string(i)));
    drift_rng_.emplace_back(derive_seed(sc_.seed, "demand/drift/" + std::to_string(i)));
    sdv_store_rng_.emplace_back(derive_seed(sc_.seed, "policy/sdv/" + std::to_string(i)));
  }
  rsu_store_rng_.reserve(world_.rsus.size());
  for (std::size_t i = 0; i < world_.rsus.size(); ++i)
    rsu_store_rng_.emplace_back(derive_seed(sc_.seed, "policy/rsu/" + std::to_string(i)));

  wins_.resize(world_.rsus.size());
  sdv_issued_.assign(world_.sdvs.size(), 0);

  nlohmann::json head;
  head["seed"] = sc_.seed;
  head["scenario_hash"] = scenario_hash_hex(sc_);
  head["dt_s"] = sc_.clock.dt_s;
  head["horizon_ticks"] = sc_.clock.horizon_ticks;
  head["stepping"] = sc_.clock.stepping;
  head["sdvs"] = world_.sdvs.size();
  head["catalog"] = static_cast<std::int64_t>(world_.services.size());
  nlohmann::json rsus = nlohmann::json::array();
  for (const auto& r : world_.rsus) {
    nlohmann::json e;
    e["id"] = r.id;
    e["tx_power_w"] = r.tx_power_w;
    e["cache_bytes"] = r.cache.capacity_bytes();
    rsus.push_back(std::move(e));
  }
  head["rsus"] = std::move(rsus);
  emit_(0, RecType::RunHeader, std::move(head));
}

Tick Engine::tick() const {
  std::lock_guard lk(mtx_);
  return tick_;
}

bool Engine::finished() const {
  std::lock_guard lk(mtx_);
  return finished_;
}

bool Engine::paused() const {
  std::lock_guard lk(mtx_);
  return paused_;
}

void Engine::abort() {
  std::lock_guard lk(mtx_);
  abort_ = true;
  cv_.notify_all();
}

void Engine::emit_(Tick t, RecType type, nlohmann::json body) {
  log_.append(t, type, std::move(body));
  acc_.consume(log_.records().back());
}

// ---------------------------------------------------------------------------
// control surface

Engine::ControlResult Engine::enqueue_control(const ScriptedEvent& ev) {
  std::lock_guard lk(mtx_);
  if (finished_) return ControlResult::RunFinished;
  if (ev.kind == ScriptedEvent::Kind::Pause || ev.kind == ScriptedEvent::Kind::Resume) {
    // loop control applies immediately; the tick in progress still completes
    paused_ = ev.kind == ScriptedEvent::Kind::Pause;
    nlohmann::json body;
    body["command"] = std::string(to_string(ev.kind));
    body["source"] = "control";
    emit_(tick_, RecType::Control, std::move(body));
    cv_.notify_all();
    return ControlResult::Accepted;
  }
  if ((ev.kind == ScriptedEvent::Kind::KillRsu || ev.kind == ScriptedEvent::Kind::ReviveRsu) &&
      (ev.rsu < 0 || ev.rsu >= static_cast<RsuId>(world_.rsus.size())))
    return ControlResult::Rejected;
  control_q_.push_back(ev);
  return ControlResult::Accepted;
}

void Engine::drain_control_() {
  std::deque<ScriptedEvent> q;
  q.swap(control_q_);
  for (const auto& ev : q) apply_scripted_(ev, true);
}

void Engine::apply_scripted_(const ScriptedEvent& ev, bool from_control) {
  nlohmann::json body;
  body["command"] = std::string(to_string(ev.kind));
  switch (ev.kind) {
    case ScriptedEvent::Kind::Pause:
      // a scripted pause is only meaningful when something can resume us
      if (interactive_)
        paused_ = true;
      else
        body["ignored"] = true;
      break;
    case ScriptedEvent::Kind::Resume:
      paused_ = false;
      break;
    case ScriptedEvent::Kind::InjectServices:
      body["count"] = ev.count;
      body["cluster"] = ev.cluster;
      inject_services_(ev.count, ev.cluster);
      break;
    case ScriptedEvent::Kind::TrendBurst:
      body["multiplier"] = ev.multiplier;
      body["duration_ticks"] = ev.duration_ticks;
      bursts_.push_back({tick_ + ev.duration_ticks, ev.multiplier});
      break;
    case ScriptedEvent::Kind::KillRsu:
      body["rsu"] = ev.rsu;
      kill_rsu_(ev.rsu);
      break;
    case ScriptedEvent::Kind::ReviveRsu:
      body["rsu"] = ev.rsu;
      if (ev.rsu >= 0 && ev.rsu < static_cast<RsuId>(world_.rsus.size()))
        world_.rsus[static_cast<std::size_t>(ev.rsu)].alive = true;
      break;
  }
  emit_(tick_, from_control ? RecType::Control : RecType::Scripted, std::move(body));
}

double Engine::drift_multiplier_() const {
  double m = 1.0;
  for (const auto& b : bursts_)
    if (tick_ < b.until) m *= b.multiplier;
  return m;
}

// ---------------------------------------------------------------------------
// world helpers

RsuId Engine::nearest_in_range_(const SdvState& v) const {
  RsuId best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& r : world_.rsus) {
    if (!r.alive || !in_range(v, r)) continue;
    const double d = distance(v.position, r.position);
    if (d < best_d) {
      best_d = d;
      best = r.id;
    }
  }
  return best;
}

double Engine::cdc_rtt_from_(RsuId hop) const {
  if (hop < 0) return 0.0;
  return rtt_backhaul_s(world_.rsus[static_cast<std::size_t>(hop)], world_.cdc, sc_.channel);
}

PolicyContext Engine::build_policy_context_(const EngineTask& t) const {
  const SdvState& v = world_.sdvs[static_cast<std::size_t>(t.req.origin)];
  const ServiceSpec& svc = world_.service(t.req.service);

  PolicyContext ctx;
  ctx.tick = tick_;
  ctx.dt = sc_.clock.dt_s;
  ctx.task = t.req;
  ctx.image_size_bytes = svc.size_bytes;
  ctx.sdv_position = v.position;
  ctx.sdv_flops = v.compute_flops;
  ctx.sdv_cache_capacity_bytes = v.cache.capacity_bytes();
  ctx.sdv_cache_free_bytes = v.cache.free_bytes();
  ctx.sdv_has_image = v.cache.contains(t.req.service);

  std::vector<int> conn_count(world_.rsus.size(), 0);
  for (const auto& [id, c] : conns_) {
    if (c.status != ConnStatus::Transmitting || !c.counts_toward_radio) continue;
    const RsuId radio = c.via_rsu >= 0 ? c.via_rsu : (is_rsu(c.a) ? c.a.id : (is_rsu(c.b) ? c.b.id : -1));
    if (radio >= 0) conn_count[static_cast<std::size_t>(radio)] += 1;
  }

  const RsuId hop = nearest_in_range_(v);
  for (const auto& r : world_.rsus) {
    RsuView rv;
    rv.id = r.id;
    rv.alive = r.alive;
    rv.in_range = r.alive && in_range(v, r);
    rv.dist_m = distance(v.position, r.position);
    if (!rv.in_range && r.alive && hop >= 0) {
      const auto path = find_relay_path(world_.rsus[static_cast<std::size_t>(hop)], r, world_.rsus);
      rv.relay_reachable = path.has_value();
    }
    rv.queue_len = static_cast<int>(r.queue.size());
    rv.running = static_cast<int>(r.running.size());
    rv.concurrency = r.concurrency;
    rv.active_conns = conn_count[static_cast<std::size_t>(r.id)];
    rv.flops = r.compute_flops;
    rv.has_image = r.cache.contains(t.req.service);
    rv.cache_capacity_bytes = r.cache.capacity_bytes();
    rv.cache_free_bytes = r.cache.free_bytes();
    for (const auto& [sid, meta] : r.cache.entries()) rv.cached.push_back(sid);
    rv.est_uplink_bps = link_rate_bps(v, r, sc_.channel, 1.0);
    for (TaskId rid : r.running) {
      const auto it = tasks_.find(rid);
      if (it != tasks_.end())
        rv.running_remaining_s.push_back(it->second.remaining_flop / r.compute_flops);
    }
    for (TaskId qid : r.queue) {
      const auto it = tasks_.find(qid);
      if (it != tasks_.end())
        rv.queued_duration_s.push_back(it->second.req.delta_flop / r.compute_flops);
    }
    ctx.rsus.push_back(std::move(rv));
  }

  ctx.cdc_flops = world_.cdc.compute_flops;
  ctx.cdc_active = world_.cdc.active_tasks;
  ctx.cdc_reachable = hop >= 0;
  ctx.cdc_rtt_s = cdc_rtt_from_(hop);
  ctx.cdc_uplink_bps =
      hop >= 0 ? link_rate_bps(v, world_.rsus[static_cast<std::size_t>(hop)], sc_.channel, 1.0) : 0.0;
  return ctx;
}

// ---------------------------------------------------------------------------
// connection plumbing

Conn& Engine::new_conn_(ConnKind kind, EndpointRef a, EndpointRef b, std::int64_t bytes,
                        double setup_s, TaskId task, bool radio) {
  Conn c;
  c.id = next_conn_++;
  c.kind = kind;
  c.a = a;
  c.b = b;
  c.created = tick_;
  c.total_bytes = bytes;
  c.remaining_bytes = static_cast<double>(bytes);
  c.setup_countdown_s = setup_s;
  c.fading_gain = streams_.fading.exponential(1.0);
  c.task = task;
  c.counts_toward_radio = radio;
  return conns_.emplace(c.id, c).first->second;
}

bool Engine::start_upload_(EngineTask& t, RsuId target_rsu, std::int64_t bytes) {
  const SdvState& v = world_.sdvs[static_cast<std::size_t>(t.req.origin)];
  const RsuState& r = world_.rsus[static_cast<std::size_t>(target_rsu)];
  RsuId via = -1;
  std::vector<Hop> path;
  if (!r.alive) return false;
  if (!in_range(v, r)) {
    const RsuId hop = nearest_in_range_(v);
    if (hop < 0) return false;
    auto p = find_relay_path(world_.rsus[static_cast<std::size_t>(hop)], r, world_.rsus);
    if (!p) return false;
    via = hop;
    path = std::move(*p);
  }
  const RsuState& radio = world_.rsus[static_cast<std::size_t>(via >= 0 ? via : target_rsu)];
  const double setup = propagation_delay_s(distance(v.position, radio.position), sc_.channel);
  Conn& c = new_conn_(ConnKind::V2R, {EndpointRef::Kind::Sdv, t.req.origin},
                      {EndpointRef::Kind::Rsu, target_rsu}, bytes, setup, t.req.id, true);
  c.via_rsu = via;
  if (!path.empty())
    c.relay_extra_delay_s = mesh_path_time_s(path, bytes, world_.rsus, sc_.channel);
  t.upload_conn = c.id;
  t.phase = TaskPhase::Upload;
  return true;
}

void Engine::start_fetch_(EngineTask& t, const ResolveResult& rr) {
  const ServiceSpec& svc = world_.service(t.req.service);
  const RsuState& r = world_.rsus[static_cast<std::size_t>(t.rsu)];
  if (rr.outcome == CacheOutcome::PeerHit) {
    Conn& c = new_conn_(ConnKind::R2R, {EndpointRef::Kind::Rsu, rr.peer},
                        {EndpointRef::Kind::Rsu, t.rsu}, svc.size_bytes, 0.0, t.req.id, false);
    double prop = 0.0;
    for (const auto& h : rr.peer_path) prop += propagation_delay_s(h.dist_m, sc_.channel);
    c.setup_countdown_s = prop;
    // store-and-forward: serial per-hop transfer collapses to a harmonic rate
    double inv = 0.0;
    for (const auto& h : rr.peer_path) {
      const auto& ra = world_.rsus[static_cast<std::size_t>(h.from)];
      const auto& rb = world_.rsus[static_cast<std::size_t>(h.to)];
      const double rate = link_rate_bps(ra, rb, sc_.channel, c.fading_gain);
      inv += rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    }
    c.fixed_rate_bps = inv > 0.0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
    t.fetch_conn = c.id;
  } else {
    Conn& c = new_conn_(ConnKind::R2C, {EndpointRef::Kind::Cdc, 0}, {EndpointRef::Kind::Rsu, t.rsu},
                        svc.size_bytes, propagation_delay_s(distance(r.position, world_.cdc.position),
                                                            sc_.channel),
                        t.req.id, false);
    c.fixed_rate_bps = sc_.channel.backhaul_rate_bps > 0.0
                           ? sc_.channel.backhaul_rate_bps
                           : std::numeric_limits<double>::infinity();
    t.fetch_conn = c.id;
  }
  t.phase = TaskPhase::Fetching;
}

void Engine::start_download_(EngineTask& t) {
  const ServiceSpec& svc = world_.service(t.req.service);
  const RsuState& r = world_.rsus[static_cast<std::size_t>(t.rsu)];
  const SdvState& v = world_.sdvs[static_cast<std::size_t>(t.req.origin)];
  const double setup = propagation_delay_s(distance(v.position, r.position), sc_.channel);
  Conn& c = new_conn_(ConnKind::V2R, {EndpointRef::Kind::Rsu, t.rsu},
                      {EndpointRef::Kind::Sdv, t.req.origin}, svc.size_bytes, setup, t.req.id, true);
  t.download_conn = c.id;
  t.phase = TaskPhase::Downloading;
}

// runs when a connection's transfer (plus relay tail) has fully drained
void Engine::complete_conn_(Conn& c) {
  auto it = tasks_.find(c.task);
  if (it == tasks_.end()) {
    c.apply(ConnEvent::Finish);
    return;
  }
  EngineTask& t = it->second;
  const ServiceSpec& svc = world_.service(t.req.service);

  if (c.id == t.decision_conn) {
    c.apply(ConnEvent::Finish);
    decide_(t);
    return;
  }
  if (c.id == t.upload_conn) {
    // the vehicle's session stays open while its task executes upstream
    c.apply(ConnEvent::StartCompute);
    if (t.target == OffloadTarget::Rsu) {
      t.phase = TaskPhase::AwaitImage;
    } else {  // datacenter execution: payload continues over the backhaul
      const RsuState& hop = world_.rsus[static_cast<std::size_t>(t.rsu)];
      Conn& s = new_conn_(ConnKind::R2C, {EndpointRef::Kind::Rsu, t.rsu}, {EndpointRef::Kind::Cdc, 0},
                          0, rtt_backhaul_s(hop, world_.cdc, sc_.channel), t.req.id, false);
      t.cdcsend_conn = s.id;
      t.phase = TaskPhase::CdcSend;
    }
    return;
  }
  if (c.id == t.fetch_conn) {
    c.apply(ConnEvent::Finish);
    if (t.target == OffloadTarget::Local) {
      start_download_(t);
    } else {
      t.phase = TaskPhase::DeployRsu;
      t.countdown_s = static_cast<double>(svc.size_bytes) / sc_.offload.deploy_rate_Bps;
    }
    return;
  }
  if (c.id == t.download_conn) {
    c.apply(ConnEvent::Finish);
    SdvState& v = world_.sdvs[static_cast<std::size_t>(t.req.origin)];
    auto res = admit(sdv_policy_, v.cache, t.req.service, svc.size_bytes, tick_,
                     sdv_store_rng_[static_cast<std::size_t>(v.id)]);
    nlohmann::json body;
    body["rsu"] = -1;
    body["sdv"] = v.id;
    body["service"] = t.req.service;
    body["outcome"] = std::string(to_string(CacheOutcome::MissCdc));
    body["peer"] = t.rsu;
    body["bytes"] = svc.size_bytes;
    body["admitted"] = res.admitted;
    body["evicted"] = res.evicted;
    emit_(tick_, RecType::Cache, std::move(body));
    t.phase = TaskPhase::DeploySdv;
    t.countdown_s = static_cast<double>(svc.size_bytes) / sc_.offload.deploy_rate_Bps;
    return;
  }
  if (c.id == t.cdcsend_conn) {
    c.apply(ConnEvent::Finish);
    t.phase = TaskPhase::CdcCompute;
    t.remaining_flop = t.req.delta_flop;
    world_.cdc.active_tasks += 1;
    return;
  }
  c.apply(ConnEvent::Finish);
}

void Engine::conn_failed_(Conn& c, const char* reason) {
  c.apply(ConnEvent::Fail);
  auto it = tasks_.find(c.task);
  if (it == tasks_.end()) return;
  EngineTask& t = it->second;
  if (t.terminal()) return;
  // a lost peer transfer can fall back to the datacenter copy
  if (c.id == t.fetch_conn && c.kind == ConnKind::R2R && t.rsu >= 0 &&
      world_.rsus[static_cast<std::size_t>(t.rsu)].alive) {
    ResolveResult rr;
    rr.outcome = CacheOutcome::MissCdc;
    start_fetch_(t, rr);
    return;
  }
  fail_task_(t, reason);
}

// ---------------------------------------------------------------------------
// request lifecycle

void Engine::issue_request_(SdvState& v) {
  const RsuId hop = nearest_in_range_(v);
  if (hop < 0) return;  // outside all coverage: nothing to talk to

  Rng& rng = sel_rng_[static_cast<std::size_t>(v.id)];
  const ServiceId svc_id = select_service(v, world_.services, hot_, sc_.demand, rng);
  if (svc_id < 0) return;
  const ServiceSpec& svc = world_.service(svc_id);

  EngineTask t;
  t.req.id = next_task_++;
  t.req.origin = v.id;
  t.req.service = svc_id;
  t.req.delta_flop = svc.cpu_demand_flop;
  t.req.eta_bytes = draw_payload_bytes(sc_.demand, rng);
  t.req.deadline_s = svc.timeout_s;
  t.req.issue_tick = tick_;
  t.rsu = hop;
  t.phase = TaskPhase::Decision;

  Conn& c = new_conn_(ConnKind::R2C, {EndpointRef::Kind::Rsu, hop}, {EndpointRef::Kind::Cdc, 0}, 0,
                      cdc_rtt_from_(hop), t.req.id, false);
  t.decision_conn = c.id;

  v.active_task = t.req.id;
  v.accessed[svc_id] = tick_;
  reqlog_.record(tick_, svc_id);
  issued_ += 1;
  sdv_issued_[static_cast<std::size_t>(v.id)] += 1;

  nlohmann::json body;
  body["task"] = t.req.id;
  body["sdv"] = v.id;
  body["service"] = svc_id;
  body["eta_bytes"] = t.req.eta_bytes;
  body["delta_flop"] = t.req.delta_flop;
  body["deadline_s"] = t.req.deadline_s;
  body["hop"] = hop;
  emit_(tick_, RecType::Request, std::move(body));
  tasks_.emplace(t.req.id, std::move(t));

  // issuing may put the vehicle to sleep while the request is in flight
  bool sleep_now = sc_.demand.sleep_trigger_prob > 0.0 &&
                   rng.uniform01() < sc_.demand.sleep_trigger_prob;
  if (sc_.demand.sleep_after_requests > 0 &&
      sdv_issued_[static_cast<std::size_t>(v.id)] % sc_.demand.sleep_after_requests == 0)
    sleep_now = true;
  if (sleep_now) {
    const Tick dur = sleep_duration_ticks(v.accel_mps2, v.speed_mps, sc_.demand, sc_.clock.dt_s, rng);
    v.activity = Activity::Sleeping;
    v.sleep_until = tick_ + 1 + dur;
  }
}

void Engine::decide_(EngineTask& t) {
  SdvState& v = world_.sdvs[static_cast<std::size_t>(t.req.origin)];
  const ServiceSpec& svc = world_.service(t.req.service);
  const PolicyContext ctx = build_policy_context_(t);
  const OffloadDecision d = offload_->decide(ctx);
  t.target = d.target;

  nlohmann::json body;
  body["task"] = t.req.id;
  body["sdv"] = v.id;
  body["service"] = t.req.service;
  body["target"] = std::string(to_string(d.target));
  body["rsu"] = d.target == OffloadTarget::Rsu ? d.rsu : RsuId{-1};
  emit_(tick_, RecType::Decision, std::move(body));

  switch (d.target) {
    case OffloadTarget::Local: {
      if (v.cache.contains(t.req.service)) {
        lookup(v.cache, t.req.service, tick_);
        nlohmann::json ev;
        ev["rsu"] = -1;
        ev["sdv"] = v.id;
        ev["service"] = t.req.service;
        ev["outcome"] = std::string(to_string(CacheOutcome::Hit));
        ev["peer"] = -1;
        ev["bytes"] = 0;
        ev["admitted"] = false;
        ev["evicted"] = nlohmann::json::array();
        emit_(tick_, RecType::Cache, std::move(ev));
        t.rsu = -1;
        t.phase = TaskPhase::DeploySdv;
        t.countdown_s = static_cast<double>(svc.size_bytes) / sc_.offload.deploy_rate_Bps;
      } else {
        const RsuId hop = nearest_in_range_(v);
        if (hop < 0) {
          fail_task_(t, "no_coverage");
          return;
        }
        t.rsu = hop;
        t.phase = TaskPhase::AwaitImage;
      }
      break;
    }
    case OffloadTarget::Rsu: {
      if (d.rsu < 0 || d.rsu >= static_cast<RsuId>(world_.rsus.size()) ||
          !world_.rsus[static_cast<std::size_t>(d.rsu)].alive) {
        fail_task_(t, "infeasible_decision");
        return;
      }
      t.rsu = d.rsu;
      if (!start_upload_(t, d.rsu, t.req.eta_bytes)) fail_task_(t, "no_route");
      break;
    }
    case OffloadTarget::Cdc: {
      const RsuId hop = nearest_in_range_(v);
      if (hop < 0) {
        fail_task_(t, "no_coverage");
        return;
      }
      t.rsu = hop;
      if (!start_upload_(t, hop, t.req.eta_bytes)) fail_task_(t, "no_route");
      break;
    }
  }
}

void Engine::resolve_at_rsu_(EngineTask& t, RsuState& r) {
  const ServiceSpec& svc = world_.service(t.req.service);
  ResolveResult rr = resolve(r, t.req.service, world_, sc_.channel, rsu_policy_, tick_,
                             rsu_store_rng_[static_cast<std::size_t>(r.id)],
                             sc_.offload.deploy_rate_Bps, sc_.cache.collab_max_hops);
  nlohmann::json body;
  body["rsu"] = r.id;
  body["sdv"] = t.req.origin;
  body["service"] = t.req.service;
  body["outcome"] = std::string(to_string(rr.outcome));
  body["peer"] = rr.peer;
  body["bytes"] = rr.event.bytes_moved;
  body["admitted"] = rr.event.admitted;
  body["evicted"] = rr.event.evicted;
  body["est_s"] = rr.fetch_s;
  emit_(tick_, RecType::Cache, std::move(body));

  if (r.cache.contains(t.req.service)) {
    r.cache.pin(t.req.service);
    t.pinned_at_rsu = t.req.service;
  }

  if (rr.outcome == CacheOutcome::Hit) {
    if (t.target == OffloadTarget::Local) {
      start_download_(t);
    } else {
      t.phase = TaskPhase::DeployRsu;
      t.countdown_s = static_cast<double>(svc.size_bytes) / sc_.offload.deploy_rate_Bps;
    }
  } else {
    start_fetch_(t, rr);
  }
}

void Engine::done_task_(EngineTask& t) {
  t.phase = TaskPhase::Done;
  unpin_task_(t);
  const double latency = static_cast<double>(tick_ - t.req.issue_tick + 1) * sc_.clock.dt_s;
  // the vehicle's open session closes with the response
  if (t.upload_conn >= 0) {
    auto it = conns_.find(t.upload_conn);
    if (it != conns_.end() && !it->second.terminal()) it->second.apply(ConnEvent::Finish);
  }
  RsuId attributed = -1;
  if (t.target == OffloadTarget::Rsu || t.target == OffloadTarget::Cdc) attributed = t.rsu;
  nlohmann::json body;
  body["task"] = t.req.id;
  body["sdv"] = t.req.origin;
  body["service"] = t.req.service;
  body["target"] = std::string(to_string(t.target));
  body["rsu"] = attributed;
  body["latency_s"] = latency;
  body["eta_bytes"] = static_cast<double>(t.req.eta_bytes);
  emit_(tick_, RecType::TaskDone, std::move(body));
  completed_ += 1;
  world_.sdvs[static_cast<std::size_t>(t.req.origin)].active_task = -1;
}

void Engine::unpin_task_(EngineTask& t) {
  if (t.pinned_at_rsu >= 0 && t.rsu >= 0) {
    world_.rsus[static_cast<std::size_t>(t.rsu)].cache.unpin(t.pinned_at_rsu);
    t.pinned_at_rsu = -1;
  }
}

void Engine::fail_task_conns_(EngineTask& t) {
  for (ConnId cid : {t.decision_conn, t.upload_conn, t.fetch_conn, t.download_conn, t.cdcsend_conn}) {
    if (cid < 0) continue;
    auto it = conns_.find(cid);
    if (it != conns_.end() && !it->second.terminal()) it->second.apply(ConnEvent::Fail);
  }
}

void Engine::fail_task_(EngineTask& t, const char* reason) {
  if (t.terminal()) return;
  if (t.phase == TaskPhase::CdcCompute && world_.cdc.active_tasks > 0) world_.cdc.active_tasks -= 1;
  t.phase = TaskPhase::Failed;
  unpin_task_(t);
  fail_task_conns_(t);
  if (t.rsu >= 0) {
    auto& r = world_.rsus[static_cast<std::size_t>(t.rsu)];
    std::erase(r.running, t.req.id);
    std::erase(r.queue, t.req.id);
  }
  nlohmann::json body;
  body["task"] = t.req.id;
  body["sdv"] = t.req.origin;
  body["service"] = t.req.service;
  body["target"] = std::string(to_string(t.target));
  body["rsu"] = t.rsu;
  body["reason"] = reason;
  emit_(tick_, RecType::TaskFailed, std::move(body));
  failed_ += 1;
  world_.sdvs[static_cast<std::size_t>(t.req.origin)].active_task = -1;
}

void Engine::check_timeouts_() {
  for (auto& [id, t] : tasks_) {
    if (t.terminal()) continue;
    const double elapsed = static_cast<double>(tick_ - t.req.issue_tick) * sc_.clock.dt_s;
    if (elapsed > t.req.deadline_s) fail_task_(t, "timeout");
  }
}

// ---------------------------------------------------------------------------
// scripted world mutations

void Engine::inject_services_(std::int64_t count, int cluster) {
  if (centers_.empty() || count <= 0) return;
  const std::int64_t n = static_cast<std::int64_t>(ranks_.size());
  std::int64_t first = next_service_;
  for (std::int64_t i = 0; i < count; ++i) {
    Rng& rng = streams_.services;
    const int cl = cluster >= 0 ? cluster
                                : static_cast<int>(rng.uniform_index(centers_.size()));
    ServiceSpec s;
    s.id = next_service_++;
    s.cluster_id = cl;
    s.feature = vector_around(centers_[static_cast<std::size_t>(cl)], sc_.gen.dispersion, rng);
    s.size_bytes = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(rank_to_value(ranks_.sample(rng), n,
                                                   static_cast<double>(sc_.gen.size_min_bytes),
                                                   static_cast<double>(sc_.gen.size_max_bytes))));
    s.cpu_demand_flop = rank_to_value(ranks_.sample(rng), n, sc_.gen.cpu_min_flop, sc_.gen.cpu_max_flop);
    s.charm = rank_to_value(ranks_.sample(rng), n, sc_.gen.charm_min, sc_.gen.charm_max);
    s.timeout_s = sc_.gen.timeout_s;
    s.uploaded_tick = tick_;
    world_.services.push_back(std::move(s));
  }
  nlohmann::json body;
  body["count"] = count;
  body["first_id"] = first;
  body["cluster"] = cluster;
  emit_(tick_, RecType::ServiceUpload, std::move(body));
}

void Engine::kill_rsu_(RsuId id) {
  if (id < 0 || id >= static_cast<RsuId>(world_.rsus.size())) return;
  auto& r = world_.rsus[static_cast<std::size_t>(id)];
  r.alive = false;
  // strand everything that depends on the node; cached bytes survive the outage
  for (auto& [tid, t] : tasks_) {
    if (t.terminal()) continue;
    if (t.rsu == id) {
      fail_task_(t, "rsu_down");
      continue;
    }
    for (ConnId cid : {t.decision_conn, t.upload_conn, t.fetch_conn, t.download_conn, t.cdcsend_conn}) {
      if (cid < 0) continue;
      auto it = conns_.find(cid);
      if (it == conns_.end() || it->second.terminal()) continue;
      const Conn& c = it->second;
      const bool touches = (is_rsu(c.a) && c.a.id == id) || (is_rsu(c.b) && c.b.id == id) ||
                           c.via_rsu == id;
      if (touches) {
        fail_task_(t, "rsu_down");
        break;
      }
    }
  }
  r.running.clear();
  r.queue.clear();
}

// ---------------------------------------------------------------------------
// the four phases

void Engine::rsu_phase_() {
  const double dt = sc_.clock.dt_s;

  // datacenter executes its share-scheduled tasks first
  {
    int active = 0;
    for (const auto& [id, t] : tasks_)
      if (t.phase == TaskPhase::CdcCompute) ++active;
    world_.cdc.active_tasks = active;
    if (active > 0) {
      const double share = world_.cdc.compute_flops / static_cast<double>(active);
      for (auto& [id, t] : tasks_) {
        if (t.phase != TaskPhase::CdcCompute) continue;
        t.remaining_flop -= share * dt;
        if (t.remaining_flop <= kEps) {
          world_.cdc.active_tasks -= 1;
          done_task_(t);
        }
      }
    }
  }

  for (auto& r : world_.rsus) {
    if (!r.alive) continue;

    // pull from the waiting line into free execution slots
    while (static_cast<int>(r.running.size()) < r.concurrency && !r.queue.empty()) {
      const TaskId tid = r.queue.front();
      r.queue.pop_front();
      auto it = tasks_.find(tid);
      if (it == tasks_.end() || it->second.terminal()) continue;
      it->second.phase = TaskPhase::Running;
      it->second.remaining_flop = it->second.req.delta_flop;
      r.running.push_back(tid);
    }

    // answer requests that arrived since the last tick
    for (auto& [tid, t] : tasks_) {
      if (t.phase == TaskPhase::AwaitImage && t.rsu == r.id) resolve_at_rsu_(t, r);
    }

    // container instantiation countdowns
    for (auto& [tid, t] : tasks_) {
      if (t.phase != TaskPhase::DeployRsu || t.rsu != r.id) continue;
      t.countdown_s -= dt;
      if (t.countdown_s <= kEps) {
        t.phase = TaskPhase::Queued;
        r.queue.push_back(tid);
      }
    }

    // execute
    const double busy_frac =
        std::min<double>(1.0, static_cast<double>(r.running.size()) / std::max(1, r.concurrency));
    wins_[static_cast<std::size_t>(r.id)].busy_s += busy_frac * dt;
    std::vector<TaskId> finished;
    for (TaskId tid : r.running) {
      auto it = tasks_.find(tid);
      if (it == tasks_.end()) continue;
      EngineTask& t = it->second;
      t.remaining_flop -= r.compute_flops * dt;
      if (t.remaining_flop <= kEps) finished.push_back(tid);
    }
    for (TaskId tid : finished) {
      std::erase(r.running, tid);
      done_task_(tasks_.at(tid));
    }
  }
}

void Engine::conn_phase_() {
  const double dt = sc_.clock.dt_s;

  // fading redraws ride the stepping cadence
  if (tick_ > 0 && stepping_due_() && tick_ % sc_.channel.resample_fading_every == 0) {
    for (auto& [id, c] : conns_)
      if (!c.terminal()) c.fading_gain = streams_.fading.exponential(1.0);
  }

  // radio sharing is frozen at phase entry
  std::vector<int> sharing(world_.rsus.size(), 0);
  for (const auto& [id, c] : conns_) {
    if (c.status != ConnStatus::Transmitting || !c.counts_toward_radio) continue;
    const RsuId radio = c.via_rsu >= 0 ? c.via_rsu : (is_rsu(c.a) ? c.a.id : (is_rsu(c.b) ? c.b.id : -1));
    if (radio >= 0) sharing[static_cast<std::size_t>(radio)] += 1;
  }

  for (auto it = conns_.begin(); it != conns_.end(); ++it) {
    Conn& c = it->second;
    if (c.terminal()) continue;
    if (c.status == ConnStatus::Computing) continue;  // parked on task completion

    // liveness of infrastructure endpoints
    RsuId rsu_end = is_rsu(c.a) ? c.a.id : (is_rsu(c.b) ? c.b.id : -1);
    bool dead = false;
    for (RsuId rid : {c.a.kind == EndpointRef::Kind::Rsu ? c.a.id : RsuId{-1},
                      c.b.kind == EndpointRef::Kind::Rsu ? c.b.id : RsuId{-1}, c.via_rsu}) {
      if (rid >= 0 && !world_.rsus[static_cast<std::size_t>(rid)].alive) dead = true;
    }
    if (dead) {
      conn_failed_(c, "rsu_down");
      continue;
    }

    // a moving vehicle can slide out of coverage mid-transfer
    if (c.kind == ConnKind::V2R) {
      const SdvId vid = is_sdv(c.a) ? c.a.id : c.b.id;
      const SdvState& v = world_.sdvs[static_cast<std::size_t>(vid)];
      const RsuId radio_id = c.via_rsu >= 0 ? c.via_rsu : rsu_end;
      const RsuState& radio = world_.rsus[static_cast<std::size_t>(radio_id)];
      if (!in_range(v, radio)) {
        const RsuId hop = nearest_in_range_(v);
        bool rerouted = false;
        if (hop >= 0) {
          auto path = find_relay_path(world_.rsus[static_cast<std::size_t>(hop)],
                                      world_.rsus[static_cast<std::size_t>(rsu_end)], world_.rsus);
          if (path) {
            c.via_rsu = hop == rsu_end ? RsuId{-1} : hop;
            c.relay_extra_delay_s = std::max(
                c.relay_extra_delay_s,
                mesh_path_time_s(*path, static_cast<std::int64_t>(c.remaining_bytes), world_.rsus,
                                 sc_.channel));
            rerouted = true;
          }
        }
        if (!rerouted) {
          conn_failed_(c, "range");
          continue;
        }
      }
    }

    double budget = dt;
    if (c.status == ConnStatus::Pending) c.apply(ConnEvent::Establish);
    if (c.status == ConnStatus::Established) {
      const double burn = std::min(c.setup_countdown_s, budget);
      c.setup_countdown_s -= burn;
      budget -= burn;
      if (c.setup_countdown_s > kEps) continue;
      c.apply(ConnEvent::StartTransmit);
    }
    if (c.status != ConnStatus::Transmitting) continue;

    if (c.remaining_bytes > kEps && budget > kEps) {
      double rate = c.fixed_rate_bps;
      if (rate < 0.0) {
        const SdvId vid = is_sdv(c.a) ? c.a.id : c.b.id;
        const SdvState& v = world_.sdvs[static_cast<std::size_t>(vid)];
        const RsuId radio_id = c.via_rsu >= 0 ? c.via_rsu : rsu_end;
        const RsuState& radio = world_.rsus[static_cast<std::size_t>(radio_id)];
        rate = link_rate_bps(v, radio, sc_.channel, c.fading_gain);
        rate = effective_rate_bps(rate, sharing[static_cast<std::size_t>(radio_id)]);
      }
      if (std::isinf(rate)) {
        c.remaining_bytes = 0.0;
      } else if (rate > 0.0) {
        const double can = rate / 8.0 * budget;
        const double moved = std::min(c.remaining_bytes, can);
        const double spent = moved * 8.0 / rate;
        c.remaining_bytes -= moved;
        budget -= spent;
        // transmit accounting goes to the sending infrastructure radio
        RsuId tx_rsu = -1;
        if (is_rsu(c.a)) tx_rsu = c.kind == ConnKind::V2R && c.via_rsu >= 0 ? c.via_rsu : c.a.id;
        if (tx_rsu >= 0 && moved > 0.0) {
          auto& w = wins_[static_cast<std::size_t>(tx_rsu)];
          w.tx_s += std::min(dt, spent);
          w.tx_bytes += static_cast<std::int64_t>(moved);
        }
      }
      // rate == 0: stalled in a deep fade; the task deadline is the backstop
    }

    if (c.remaining_bytes <= kEps) {
      const double burn = std::min(c.relay_extra_delay_s, budget);
      c.relay_extra_delay_s -= burn;
      budget -= burn;
      if (c.relay_extra_delay_s <= kEps) complete_conn_(c);
    }
  }
}

void Engine::sdv_phase_() {
  const double dt = sc_.clock.dt_s;
  const bool drift_now =
      stepping_due_() && sc_.demand.drift_std > 0.0 && tick_ % sc_.demand.drift_every == 0;
  const double mult = drift_multiplier_();

  for (auto& v : world_.sdvs) {
    mobility_step(v, sc_.mobility, dt, world_.canvas, streams_.mobility);
    if (drift_now)
      drift_preferences(v, sc_.demand, drift_rng_[static_cast<std::size_t>(v.id)], mult);

    if (v.activity == Activity::Sleeping && tick_ >= v.sleep_until) v.activity = Activity::Active;

    if (v.active_task >= 0) {
      EngineTask& t = tasks_.at(v.active_task);
      if (t.phase == TaskPhase::DeploySdv) {
        t.countdown_s -= dt;
        if (t.countdown_s <= kEps) {
          t.phase = TaskPhase::LocalCompute;
          t.remaining_flop = t.req.delta_flop;
        }
      } else if (t.phase == TaskPhase::LocalCompute) {
        t.remaining_flop -= v.compute_flops * dt;
        if (t.remaining_flop <= kEps) done_task_(t);
      }
    }

    if (v.activity == Activity::Active && v.active_task < 0) issue_request_(v);
  }
}

void Engine::service_phase_() {
  if (sc_.demand.upload_rate > 0.0) {
    const auto arrivals = static_cast<std::int64_t>(streams_.services.poisson(sc_.demand.upload_rate));
    if (arrivals > 0) inject_services_(arrivals, -1);
  }
  if (stepping_due_()) {
    hot_ = reqlog_.hot_ranking(sc_.demand, tick_);
    reqlog_.prune(tick_ - sc_.demand.hot_window_ticks);
  }
  // retire settled work so the tables stay proportional to live traffic
  for (auto it = conns_.begin(); it != conns_.end();) {
    if (it->second.terminal())
      it = conns_.erase(it);
    else
      ++it;
  }
  for (auto it = tasks_.begin(); it != tasks_.end();) {
    if (it->second.terminal())
      it = tasks_.erase(it);
    else
      ++it;
  }
}

void Engine::anchor_(Tick at, bool with_windows) {
  if (with_windows) {
    for (const auto& r : world_.rsus) {
      auto& w = wins_[static_cast<std::size_t>(r.id)];
      nlohmann::json body;
      body["rsu"] = r.id;
      body["busy_s"] = w.busy_s;
      body["tx_s"] = w.tx_s;
      body["tx_bytes"] = w.tx_bytes;
      body["occupied_bytes"] = r.cache.occupied_bytes();
      emit_(at, RecType::RsuWindow, std::move(body));
      w = RsuWindowAcc{};
    }
  }
  frames_.push_back(acc_.frame_at(at, sc_.clock.dt_s));
}

void Engine::maybe_anchor_() {
  const Tick done = tick_ + 1;
  const Tick every = std::max<Tick>(1, sc_.metrics.anchor_every_ticks);
  if (done % every == 0 || done == sc_.clock.horizon_ticks) anchor_(done, true);
}

bool Engine::step() {
  std::lock_guard lk(mtx_);
  if (finished_) return false;
  if (tick_ >= sc_.clock.horizon_ticks) {
    if (frames_.empty()) anchor_(tick_, false);
    finished_ = true;
    return false;
  }

  drain_control_();
  for (const auto& ev : sc_.events)
    if (ev.tick == tick_) apply_scripted_(ev, false);

  check_timeouts_();
  rsu_phase_();
  conn_phase_();
  sdv_phase_();
  service_phase_();
  maybe_anchor_();
  ++tick_;

  if (tick_ >= sc_.clock.horizon_ticks) {
    if (frames_.empty()) anchor_(tick_, false);
    finished_ = true;
  }
  return !finished_;
}

void Engine::run() {
  for (;;) {
    {
      std::unique_lock lk(mtx_);
      cv_.wait(lk, [&] { return !paused_ || abort_ || finished_; });
      if (abort_ || finished_) return;
    }
    if (!step()) return;
  }
}

nlohmann::json Engine::status_json() const {
  std::lock_guard lk(mtx_);
  nlohmann::json j;
  j["tick"] = tick_;
  j["horizon_ticks"] = sc_.clock.horizon_ticks;
  j["state"] = finished_ ? "finished" : (paused_ ? "paused" : "running");
  j["sdvs"] = world_.sdvs.size();
  j["rsus"] = world_.rsus.size();
  j["services"] = world_.services.size();
  j["issued"] = issued_;
  j["completed"] = completed_;
  j["failed"] = failed_;
  j["in_flight"] = issued_ - completed_ - failed_;
  return j;
}

MetricsFrame Engine::live_frame() const {
  std::lock_guard lk(mtx_);
  return acc_.frame_at(tick_, sc_.clock.dt_s);
}

// ---------------------------------------------------------------------------

RunResult run_scenario(const Scenario& sc) {
  const auto t0 = std::chrono::steady_clock::now();
  Engine eng(sc);
  eng.run();
  const auto t1 = std::chrono::steady_clock::now();

  RunResult r;
  r.scenario = sc;
  r.scenario_hash = scenario_hash_hex(sc);
  r.log = eng.log();
  r.frames = eng.frames();
  r.issued = eng.issued();
  r.completed = eng.completed();
  r.failed = eng.failed();
  r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return r;
}

SummaryRow summarize(const RunResult& r) {
  SummaryRow row;
  row.policy = r.scenario.cache.rsu_policy;
  row.cache_bytes = r.scenario.gen.rsu_cache_bytes;
  row.seed = r.scenario.seed;
  if (r.frames.empty()) return row;
  const MetricsFrame& f = r.frames.back();
  row.hit_rate_pct = 100.0 * f.global_hit_rate;
  row.space_utilization_pct = f.space_utilization_pct;
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
  row.avg_response_s = resp_n > 0 ? resp_sum / static_cast<double>(resp_n) : 0.0;
  row.qos = qos_n > 0 ? qos_sum / qos_n : 0.0;
  return row;
}

}  // namespace vecsim

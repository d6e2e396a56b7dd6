#include <doctest.h>

#include <cmath>

#include "vecsim/offload.hpp"

using namespace vecsim;

namespace {

TaskRequest task_of(double flop, std::int64_t eta) {
  TaskRequest t;
  t.id = 1;
  t.origin = 0;
  t.service = 0;
  t.delta_flop = flop;
  t.eta_bytes = eta;
  t.deadline_s = 120.0;
  return t;
}

RsuView feasible_rsu(RsuId id) {
  RsuView r;
  r.id = id;
  r.alive = true;
  r.in_range = true;
  r.concurrency = 2;
  r.flops = 100e9;
  r.cache_capacity_bytes = 4LL << 30;
  r.cache_free_bytes = 4LL << 30;
  r.est_uplink_bps = 1e8;
  return r;
}

PolicyContext base_ctx() {
  PolicyContext ctx;
  ctx.task = task_of(1e9, 1 << 20);
  ctx.image_size_bytes = 16 << 20;
  ctx.sdv_flops = 10e9;
  ctx.sdv_cache_capacity_bytes = 4LL << 30;
  ctx.cdc_flops = 400e9;
  ctx.cdc_active = 0;
  ctx.cdc_rtt_s = 0.003;
  ctx.cdc_uplink_bps = 1e8;
  ctx.cdc_reachable = true;
  return ctx;
}

}  // namespace

TEST_CASE("waiting time is zero while a compute slot is open") {
  RsuQueueView q;
  q.concurrency = 2;
  q.running_remaining_s = {4.0};
  q.queued_duration_s = {5.0, 1.0};
  CHECK(queue_time_s(q) == 0.0);

  q.running_remaining_s.clear();
  CHECK(queue_time_s(q) == 0.0);
}

TEST_CASE("waiting time follows slot turnover through the queue") {
  // one slot: wait for the runner (2), then the queued task ahead (3)
  RsuQueueView q;
  q.concurrency = 1;
  q.running_remaining_s = {2.0};
  q.queued_duration_s = {3.0};
  CHECK(queue_time_s(q) == doctest::Approx(5.0));

  // two slots busy (4, 2): queued 5 lands on the 2-slot -> 7, queued 1 on the
  // 4-slot -> 5; the next arrival waits for the earliest slot, 5
  q.concurrency = 2;
  q.running_remaining_s = {4.0, 2.0};
  q.queued_duration_s = {5.0, 1.0};
  CHECK(queue_time_s(q) == doctest::Approx(5.0));

  // full slots, empty queue: wait for the earliest runner
  q.queued_duration_s.clear();
  CHECK(queue_time_s(q) == doctest::Approx(2.0));
}

TEST_CASE("tier times are the sums of their parts") {
  const TaskRequest t = task_of(5e9, 2 << 20);

  CHECK(time_local_s(t, 10e9) == doctest::Approx(0.5).epsilon(1e-15));

  RsuQueueView q;
  q.concurrency = 1;
  q.running_remaining_s = {2.0};
  q.queued_duration_s = {3.0};
  const double upload = (2 << 20) * 8.0 / 1e8;
  CHECK(time_rsu_s(t, 1e8, q, 100e9) == doctest::Approx(upload + 5.0 + 0.05).epsilon(1e-12));

  CHECK(time_cdc_s(t, 1e8, 200e9, 0.004) == doctest::Approx(upload + 0.025 + 0.004).epsilon(1e-12));
}

TEST_CASE("the breakdown mirrors each term and sums to the total") {
  const TaskRequest t = task_of(5e9, 2 << 20);
  SnapshotInputs in;
  in.uplink_bps = 1e8;
  in.queue.concurrency = 1;
  in.queue.running_remaining_s = {2.0};
  in.queue.queued_duration_s = {3.0};
  in.rsu_flops = 100e9;
  in.sdv_flops = 10e9;
  in.cdc_share_flops = 200e9;
  in.rtt_s = 0.004;

  SUBCASE("local") {
    const auto b = total_task_time({OffloadTarget::Local, -1}, t, in);
    CHECK(b.upload_s == 0.0);
    CHECK(b.queue_s == 0.0);
    CHECK(b.rtt_s == 0.0);
    CHECK(b.compute_s == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b.total_s == doctest::Approx(b.compute_s).epsilon(1e-15));
  }
  SUBCASE("rsu") {
    const auto b = total_task_time({OffloadTarget::Rsu, 0}, t, in);
    CHECK(b.upload_s == doctest::Approx((2 << 20) * 8.0 / 1e8).epsilon(1e-15));
    CHECK(b.queue_s == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(b.compute_s == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(b.rtt_s == 0.0);
    CHECK(b.total_s == doctest::Approx(b.upload_s + b.queue_s + b.compute_s).epsilon(1e-12));
  }
  SUBCASE("cdc") {
    const auto b = total_task_time({OffloadTarget::Cdc, -1}, t, in);
    CHECK(b.upload_s == doctest::Approx((2 << 20) * 8.0 / 1e8).epsilon(1e-15));
    CHECK(b.queue_s == 0.0);
    CHECK(b.compute_s == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(b.rtt_s == 0.004);
    CHECK(b.total_s == doctest::Approx(b.upload_s + b.compute_s + b.rtt_s).epsilon(1e-12));
  }
}

TEST_CASE("policy lookup knows the built-ins and rejects strangers") {
  for (const char* n : {"nearest", "always_local", "always_cdc", "hash_spread"}) {
    auto p = make_offload_policy(n);
    REQUIRE(p != nullptr);
    CHECK(p->name() == std::string(n));
  }
  CHECK(make_offload_policy("bogus") == nullptr);
  const auto names = registered_offload_policies();
  CHECK(names.size() >= 4);
}

TEST_CASE("custom policies can be registered and resolved") {
  struct PickFirst : OffloadPolicy {
    const char* name() const override { return "pick_first"; }
    OffloadDecision decide(const PolicyContext& ctx) const override {
      for (const auto& r : ctx.rsus)
        if (r.alive && r.in_range) return {OffloadTarget::Rsu, r.id};
      return {OffloadTarget::Cdc, -1};
    }
  };
  CHECK(register_offload_policy("pick_first", [] { return std::make_unique<PickFirst>(); }));
  CHECK(!register_offload_policy("pick_first", [] { return std::make_unique<PickFirst>(); }));
  auto p = make_offload_policy("pick_first");
  REQUIRE(p != nullptr);
  auto ctx = base_ctx();
  ctx.rsus = {feasible_rsu(3)};
  CHECK(p->decide(ctx).rsu == 3);
}

TEST_CASE("nearest picks the least-loaded node, then closest, then lowest id") {
  auto p = make_offload_policy("nearest");
  auto ctx = base_ctx();
  ctx.cdc_reachable = false;  // isolate the load comparison

  RsuView a = feasible_rsu(0);
  a.queue_len = 2;
  a.dist_m = 10.0;
  RsuView b = feasible_rsu(1);
  b.queue_len = 0;
  b.running = 1;
  b.dist_m = 900.0;
  ctx.rsus = {a, b};
  auto d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Rsu);
  CHECK(d.rsu == 1);  // load 1 beats load 2 despite the distance

  ctx.rsus[1].running = 2;  // tie at load 2: distance decides
  d = p->decide(ctx);
  CHECK(d.rsu == 0);

  ctx.rsus[0].dist_m = 900.0;  // full tie: id decides
  d = p->decide(ctx);
  CHECK(d.rsu == 0);
}

TEST_CASE("nearest skips infeasible nodes") {
  auto p = make_offload_policy("nearest");
  auto ctx = base_ctx();
  ctx.cdc_reachable = false;

  RsuView dead = feasible_rsu(0);
  dead.alive = false;
  RsuView far = feasible_rsu(1);
  far.in_range = false;
  far.relay_reachable = false;
  RsuView tiny = feasible_rsu(2);
  tiny.cache_capacity_bytes = 1;  // image cannot ever fit
  RsuView relay = feasible_rsu(3);
  relay.in_range = false;
  relay.relay_reachable = true;
  ctx.rsus = {dead, far, tiny, relay};

  const auto d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Rsu);
  CHECK(d.rsu == 3);
}

TEST_CASE("nearest ships upstream when the datacenter is estimated faster") {
  auto p = make_offload_policy("nearest");
  auto ctx = base_ctx();
  RsuView r = feasible_rsu(0);
  r.running_remaining_s = {50.0, 50.0};  // both slots pinned for a long time
  r.running = 2;
  ctx.rsus = {r};
  // cdc: upload 0.084 s + 1e9/400e9 + 0.003 << rsu's 50 s queue
  auto d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Cdc);

  ctx.rsus[0].running_remaining_s.clear();
  ctx.rsus[0].running = 0;
  ctx.task.delta_flop = 1e8;  // small enough that edge compute beats the round trip
  d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Rsu);  // idle edge node wins again

  // contended datacenter loses its edge: share shrinks with active tasks
  ctx.rsus[0].running_remaining_s = {50.0, 50.0};
  ctx.rsus[0].running = 2;
  ctx.rsus[0].queued_duration_s = {};
  ctx.task.delta_flop = 4e12;
  ctx.cdc_active = 999;  // share 400e9/1000 = 4e8 -> 10000 s compute
  d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Rsu);
}

TEST_CASE("nearest falls back to local or upstream when no node is usable") {
  auto p = make_offload_policy("nearest");
  auto ctx = base_ctx();
  ctx.rsus.clear();

  // local 0.1 s vs cdc upload 0.084 + 0.0025 + 0.003 = 0.0895 s: cdc wins
  auto d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Cdc);

  ctx.task.delta_flop = 1e8;  // local now 0.01 s, beats the fixed upload
  d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Local);

  ctx.cdc_reachable = false;  // nothing reachable: compute where you stand
  ctx.task.delta_flop = 1e12;
  d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Local);

  ctx.sdv_cache_capacity_bytes = 0;  // image cannot even fit locally
  d = p->decide(ctx);
  CHECK(d.target == OffloadTarget::Cdc);
}

TEST_CASE("hash spread is deterministic per task and stays feasible") {
  auto p = make_offload_policy("hash_spread");
  auto ctx = base_ctx();
  ctx.rsus = {feasible_rsu(0), feasible_rsu(1), feasible_rsu(2)};
  ctx.rsus[1].alive = false;

  const auto first = p->decide(ctx);
  CHECK(first.target == OffloadTarget::Rsu);
  CHECK(first.rsu != 1);
  for (int i = 0; i < 5; ++i) CHECK(p->decide(ctx).rsu == first.rsu);

  // different ids spread across both live nodes
  bool saw0 = false, saw2 = false;
  for (TaskId id = 0; id < 64; ++id) {
    ctx.task.id = id;
    const auto d = p->decide(ctx);
    saw0 = saw0 || d.rsu == 0;
    saw2 = saw2 || d.rsu == 2;
    CHECK(d.rsu != 1);
  }
  CHECK(saw0);
  CHECK(saw2);

  ctx.rsus.clear();
  CHECK(p->decide(ctx).target == OffloadTarget::Cdc);
}

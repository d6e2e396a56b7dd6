#include "vecsim/cache.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace vecsim {

namespace {

std::map<std::string, EvictionFactory>& registry() {
  static std::map<std::string, EvictionFactory> r;
  return r;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

ServiceId pick_random(const CacheStore& store, Rng& rng) {
  std::vector<ServiceId> ids;
  ids.reserve(store.entry_count());
  for (const auto& [id, m] : store.entries())
    if (m.pin_count == 0) ids.push_back(id);
  if (ids.empty()) return -1;
  return ids[static_cast<std::size_t>(rng.uniform_index(ids.size()))];
}

ServiceId pick_fifo(const CacheStore& store) {
  ServiceId best = -1;
  std::int64_t best_seq = 0;
  for (const auto& [id, m] : store.entries()) {
    if (m.pin_count != 0) continue;
    if (best < 0 || m.insert_seq < best_seq) {
      best = id;
      best_seq = m.insert_seq;
    }
  }
  return best;
}

ServiceId pick_lru(const CacheStore& store) {
  ServiceId best = -1;
  Tick best_used = 0;
  std::int64_t best_seq = 0;
  for (const auto& [id, m] : store.entries()) {
    if (m.pin_count != 0) continue;
    if (best < 0 || m.last_used < best_used ||
        (m.last_used == best_used && m.insert_seq < best_seq)) {
      best = id;
      best_used = m.last_used;
      best_seq = m.insert_seq;
    }
  }
  return best;
}

ServiceId pick_lfu(const CacheStore& store) {
  ServiceId best = -1;
  std::int64_t best_freq = 0;
  std::int64_t best_seq = 0;
  for (const auto& [id, m] : store.entries()) {
    if (m.pin_count != 0) continue;
    if (best < 0 || m.freq < best_freq || (m.freq == best_freq && m.insert_seq < best_seq)) {
      best = id;
      best_freq = m.freq;
      best_seq = m.insert_seq;
    }
  }
  return best;
}

ServiceId pick_clock(CacheStore& store) {
  const auto& ring = store.ring();
  if (ring.empty()) return -1;
  // two sweeps: first may clear every reference bit, second must land
  const std::size_t limit = 2 * ring.size() + 1;
  std::size_t hand = store.clock_hand();
  for (std::size_t step = 0; step < limit; ++step) {
    const ServiceId id = ring[hand];
    const CacheEntryMeta* m = store.find(id);
    if (m->pin_count != 0) {
      hand = (hand + 1) % ring.size();
      continue;
    }
    if (m->ref_bit) {
      store.clear_ref_bit(id);
      hand = (hand + 1) % ring.size();
      continue;
    }
    store.set_clock_hand(hand);
    return id;
  }
  return -1;
}

}  // namespace

std::optional<CachePolicy> parse_cache_policy(const std::string& name) {
  if (name == "random") return CachePolicy{CachePolicyKind::Random, name};
  if (name == "fifo") return CachePolicy{CachePolicyKind::Fifo, name};
  if (name == "lru") return CachePolicy{CachePolicyKind::Lru, name};
  if (name == "lfu") return CachePolicy{CachePolicyKind::Lfu, name};
  if (name == "clock") return CachePolicy{CachePolicyKind::Clock, name};
  std::lock_guard<std::mutex> lock(registry_mutex());
  if (registry().count(name)) return CachePolicy{CachePolicyKind::UserDefined, name};
  return std::nullopt;
}

bool register_eviction_policy(const std::string& name, EvictionFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  return registry().emplace(name, std::move(factory)).second;
}

std::vector<std::string> registered_eviction_policies() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [n, f] : registry()) names.push_back(n);
  return names;
}

std::string_view to_string(CacheOutcome o) {
  switch (o) {
    case CacheOutcome::Hit: return "hit";
    case CacheOutcome::PeerHit: return "peer";
    case CacheOutcome::MissCdc: return "cdc";
  }
  return "?";
}

bool lookup(CacheStore& store, ServiceId id, Tick now) { return store.touch(id, now); }

AdmitResult admit(const CachePolicy& policy, CacheStore& store, ServiceId id,
                  std::int64_t size_bytes, Tick now, Rng& rng) {
  AdmitResult res;
  if (store.contains(id)) return res;
  if (size_bytes > store.capacity_bytes()) return res;

  // check reclaimable space up front so evictions never need rolling back
  std::int64_t reclaimable = store.free_bytes();
  for (const auto& [eid, m] : store.entries())
    if (m.pin_count == 0) reclaimable += m.size_bytes;
  if (size_bytes > reclaimable) return res;

  std::unique_ptr<EvictionPolicy> user;
  if (policy.kind == CachePolicyKind::UserDefined) {
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = registry().find(policy.name);
    if (it == registry().end()) return res;
    user = it->second();
  }

  while (store.free_bytes() < size_bytes) {
    ServiceId victim = -1;
    switch (policy.kind) {
      case CachePolicyKind::Random: victim = pick_random(store, rng); break;
      case CachePolicyKind::Fifo: victim = pick_fifo(store); break;
      case CachePolicyKind::Lru: victim = pick_lru(store); break;
      case CachePolicyKind::Lfu: victim = pick_lfu(store); break;
      case CachePolicyKind::Clock: victim = pick_clock(store); break;
      case CachePolicyKind::UserDefined: victim = user->choose_victim(store, rng); break;
    }
    if (victim < 0) return res;  // nothing evictable (reclaimable check makes this unreachable)
    store.erase(victim);
    res.evicted.push_back(victim);
  }
  store.insert(id, size_bytes, now);
  res.admitted = true;
  return res;
}

std::vector<PeerCandidate> collaboration_peers(const RsuState& target, ServiceId id,
                                               std::int64_t size_bytes,
                                               const std::vector<RsuState>& rsus,
                                               const ChannelParams& ch, int max_hops) {
  std::vector<PeerCandidate> out;
  for (const auto& peer : rsus) {
    if (peer.id == target.id || !peer.alive || !peer.cache.contains(id)) continue;
    auto path = find_relay_path(peer, target, rsus);
    if (!path || path->empty()) continue;
    if (static_cast<int>(path->size()) > max_hops) continue;
    PeerCandidate c;
    c.id = peer.id;
    c.path = std::move(*path);
    c.est_fetch_s = mesh_path_time_s(c.path, size_bytes, rsus, ch, 1.0);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const PeerCandidate& a, const PeerCandidate& b) {
    if (a.est_fetch_s != b.est_fetch_s) return a.est_fetch_s < b.est_fetch_s;
    return a.id < b.id;
  });
  return out;
}

ResolveResult resolve(RsuState& target, ServiceId id, World& world, const ChannelParams& ch,
                      const CachePolicy& policy, Tick now, Rng& rng, double deploy_rate_Bps,
                      int collab_max_hops) {
  ResolveResult res;
  const ServiceSpec& svc = world.service(id);
  const double deploy_s = static_cast<double>(svc.size_bytes) / deploy_rate_Bps;
  const double rtt = rtt_backhaul_s(target, world.cdc, ch);

  res.event.tick = now;
  res.event.rsu = target.id;
  res.event.service = id;

  if (lookup(target.cache, id, now)) {
    res.outcome = CacheOutcome::Hit;
    res.fetch_s = rtt + deploy_s;
    res.event.outcome = CacheOutcome::Hit;
    return res;
  }

  auto peers = collaboration_peers(target, id, svc.size_bytes, world.rsus, ch, collab_max_hops);

  AdmitResult adm = admit(policy, target.cache, id, svc.size_bytes, now, rng);
  res.event.admitted = adm.admitted;
  res.event.evicted = std::move(adm.evicted);
  res.event.bytes_moved = svc.size_bytes;

  if (!peers.empty()) {
    res.outcome = CacheOutcome::PeerHit;
    res.peer = peers.front().id;
    res.peer_path = std::move(peers.front().path);
    res.fetch_s = rtt + peers.front().est_fetch_s + deploy_s;
    res.event.outcome = CacheOutcome::PeerHit;
    res.event.peer = res.peer;
    return res;
  }

  res.outcome = CacheOutcome::MissCdc;
  double pull_s = propagation_delay_s(distance(target.position, world.cdc.position), ch);
  if (ch.backhaul_rate_bps > 0)
    pull_s += static_cast<double>(svc.size_bytes) * 8.0 / ch.backhaul_rate_bps;
  res.fetch_s = rtt + pull_s + deploy_s;
  res.event.outcome = CacheOutcome::MissCdc;
  return res;
}

}  // namespace vecsim

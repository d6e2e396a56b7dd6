#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vecsim/channel.hpp"
#include "vecsim/rng.hpp"
#include "vecsim/world.hpp"

namespace vecsim {

enum class CachePolicyKind { Random, Fifo, Lru, Lfu, Clock, UserDefined };

struct CachePolicy {
  CachePolicyKind kind = CachePolicyKind::Lru;
  std::string name = "lru";
};

std::optional<CachePolicy> parse_cache_policy(const std::string& name);

// victim pickers for UserDefined policies; built-ins are handled internally
class EvictionPolicy {
public:
  virtual ~EvictionPolicy() = default;
  // choose an unpinned entry to evict, or -1 to refuse
  virtual ServiceId choose_victim(const CacheStore& store, Rng& rng) = 0;
};

using EvictionFactory = std::function<std::unique_ptr<EvictionPolicy>()>;
bool register_eviction_policy(const std::string& name, EvictionFactory factory);
std::vector<std::string> registered_eviction_policies();

enum class CacheOutcome { Hit, PeerHit, MissCdc };
std::string_view to_string(CacheOutcome o);

struct CacheEvent {
  Tick tick = 0;
  RsuId rsu = -1;   // -1 when the store belongs to an SDV
  SdvId sdv = -1;
  ServiceId service = -1;
  CacheOutcome outcome = CacheOutcome::Hit;
  RsuId peer = -1;  // PeerHit source
  std::int64_t bytes_moved = 0;
  bool admitted = false;
  std::vector<ServiceId> evicted;
};

// Hit updates recency/frequency/reference metadata
bool lookup(CacheStore& store, ServiceId id, Tick now);

struct AdmitResult {
  bool admitted = false;
  std::vector<ServiceId> evicted;
};

// always admit on miss, evicting per policy until the candidate fits; refuses
// only when the image exceeds capacity or everything evictable is pinned
AdmitResult admit(const CachePolicy& policy, CacheStore& store, ServiceId id,
                  std::int64_t size_bytes, Tick now, Rng& rng);

struct PeerCandidate {
  RsuId id = -1;
  double est_fetch_s = 0.0;
  std::vector<Hop> path;
};

// peers holding the image within relay reach, fastest estimated fetch first
// (store-and-forward estimate at unit fading), ties by id
std::vector<PeerCandidate> collaboration_peers(const RsuState& target, ServiceId id,
                                               std::int64_t size_bytes,
                                               const std::vector<RsuState>& rsus,
                                               const ChannelParams& ch, int max_hops);

struct ResolveResult {
  CacheOutcome outcome = CacheOutcome::Hit;
  RsuId peer = -1;
  std::vector<Hop> peer_path;
  double fetch_s = 0.0;  // decision-rtt + transfer + deploy estimate
  CacheEvent event;
};

// full request flow at a target RSU: local hit, else nearest peer copy, else
// datacenter pull; fetch_s follows the three request-time branches with the
// image admitted per policy on a miss
ResolveResult resolve(RsuState& target, ServiceId id, World& world, const ChannelParams& ch,
                      const CachePolicy& policy, Tick now, Rng& rng, double deploy_rate_Bps,
                      int collab_max_hops);

}  // namespace vecsim

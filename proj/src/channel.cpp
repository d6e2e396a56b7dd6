#include "vecsim/channel.hpp"

#include <algorithm>
#include <cmath>

namespace vecsim {

double link_rate_bps(double dist_m, double power_a_w, double power_b_w,
                     const ChannelParams& p, double fading_gain) {
  const double d = std::max(dist_m, p.min_distance_m);
  const double power = std::min(power_a_w, power_b_w);
  const double snr = power * std::pow(d, -p.pathloss_exp) * fading_gain / p.noise_w;
  return p.bandwidth_hz * std::log2(1.0 + snr);
}

double link_rate_bps(const SdvState& v, const RsuState& r, const ChannelParams& p, double fading_gain) {
  return link_rate_bps(distance(v.position, r.position), v.tx_power_w, r.tx_power_w, p, fading_gain);
}

double link_rate_bps(const RsuState& a, const RsuState& b, const ChannelParams& p, double fading_gain) {
  return link_rate_bps(distance(a.position, b.position), a.tx_power_w, b.tx_power_w, p, fading_gain);
}

double propagation_delay_s(double dist_m, const ChannelParams& p) {
  return dist_m / (p.prop_speed_mps * p.attenuation);
}

double rtt_backhaul_s(const RsuState& r, const CdcState& cdc, const ChannelParams& p) {
  return 2.0 * distance(r.position, cdc.position) / (p.prop_speed_mps * p.attenuation);
}

double mesh_path_time_s(const std::vector<Hop>& path, std::int64_t payload_bytes,
                        const std::vector<RsuState>& rsus, const ChannelParams& p,
                        double fading_gain) {
  double total = 0.0;
  for (const auto& h : path) {
    const auto& a = rsus[static_cast<std::size_t>(h.from)];
    const auto& b = rsus[static_cast<std::size_t>(h.to)];
    const double rate = link_rate_bps(a, b, p, fading_gain);
    total += static_cast<double>(payload_bytes) * 8.0 / rate + propagation_delay_s(h.dist_m, p);
  }
  return total;
}

std::optional<std::vector<Hop>> find_relay_path(const RsuState& src, const RsuState& dst,
                                                const std::vector<RsuState>& rsus) {
  if (src.id == dst.id) return std::vector<Hop>{};
  if (!src.alive || !dst.alive) return std::nullopt;
  struct Best {
    int level = -1;
    double dist = 0.0;
    std::vector<RsuId> path;  // node sequence from src
  };
  std::vector<Best> best(rsus.size());
  best[static_cast<std::size_t>(src.id)] = {0, 0.0, {src.id}};
  std::vector<RsuId> frontier{src.id};

  // level-synchronized expansion: keys of level h are final before level h+1
  // is built, so (total distance, id sequence) tie-breaks settle correctly
  for (int level = 0; !frontier.empty(); ++level) {
    std::vector<RsuId> next;
    for (RsuId u : frontier) {
      const Best& cur = best[static_cast<std::size_t>(u)];
      const auto& ru = rsus[static_cast<std::size_t>(u)];
      for (const auto& rv : rsus) {
        if (rv.id == u || !rv.alive || !rsus_linked(ru, rv)) continue;
        Best& slot = best[static_cast<std::size_t>(rv.id)];
        if (slot.level >= 0 && slot.level <= level) continue;  // settled earlier
        const double d = cur.dist + distance(ru.position, rv.position);
        std::vector<RsuId> path = cur.path;
        path.push_back(rv.id);
        if (slot.level < 0) {
          slot = {level + 1, d, std::move(path)};
          next.push_back(rv.id);
        } else if (d < slot.dist || (d == slot.dist && path < slot.path)) {
          slot.dist = d;
          slot.path = std::move(path);
        }
      }
    }
    if (best[static_cast<std::size_t>(dst.id)].level >= 0) break;
    frontier = std::move(next);
  }

  const Best& fin = best[static_cast<std::size_t>(dst.id)];
  if (fin.level < 0) return std::nullopt;
  std::vector<Hop> hops;
  for (std::size_t i = 0; i + 1 < fin.path.size(); ++i) {
    const auto& a = rsus[static_cast<std::size_t>(fin.path[i])];
    const auto& b = rsus[static_cast<std::size_t>(fin.path[i + 1])];
    hops.push_back({a.id, b.id, distance(a.position, b.position)});
  }
  return hops;
}

}  // namespace vecsim

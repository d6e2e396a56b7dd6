#pragma once

#include <optional>
#include <vector>

#include "vecsim/world.hpp"

namespace vecsim {

struct ChannelParams {
  double bandwidth_hz = 500e6;   // rate prefactor: SNR=1 gives bandwidth_hz bit/s
  double pathloss_exp = 2.0;
  double noise_w = 2e-6;
  double prop_speed_mps = 3e8;
  double attenuation = 0.67;     // medium factor, in (0,1]
  int resample_fading_every = 1; // ticks between fading redraws
  double min_distance_m = 1.0;   // floor for coincident endpoints
  double backhaul_rate_bps = 0;  // image pulls from the datacenter; <=0 = unlimited
};

// Shannon-style rate with path loss and a fading gain; power is the weaker
// end of the pair
double link_rate_bps(double dist_m, double power_a_w, double power_b_w,
                     const ChannelParams& p, double fading_gain);

double link_rate_bps(const SdvState& v, const RsuState& r, const ChannelParams& p, double fading_gain);
double link_rate_bps(const RsuState& a, const RsuState& b, const ChannelParams& p, double fading_gain);

// one-way propagation delay through the medium
double propagation_delay_s(double dist_m, const ChannelParams& p);

// round trip to the datacenter
double rtt_backhaul_s(const RsuState& r, const CdcState& cdc, const ChannelParams& p);

struct Hop {
  RsuId from = -1;
  RsuId to = -1;
  double dist_m = 0.0;
};

// store-and-forward total: per hop, payload over the hop rate plus propagation
double mesh_path_time_s(const std::vector<Hop>& path, std::int64_t payload_bytes,
                        const std::vector<RsuState>& rsus, const ChannelParams& p,
                        double fading_gain = 1.0);

// minimum-hop route over mutual-coverage edges; ties by total distance, then
// by lexicographically smaller id sequence; nullopt when disconnected
std::optional<std::vector<Hop>> find_relay_path(const RsuState& src, const RsuState& dst,
                                                const std::vector<RsuState>& rsus);

// equal split among transmissions sharing the busiest endpoint radio
inline double effective_rate_bps(double raw_rate_bps, int sharing) {
  return sharing > 1 ? raw_rate_bps / static_cast<double>(sharing) : raw_rate_bps;
}

}  // namespace vecsim

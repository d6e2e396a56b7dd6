#pragma once

#include <deque>
#include <vector>

#include "vecsim/rng.hpp"
#include "vecsim/synthgen.hpp"
#include "vecsim/world.hpp"
#include "vecsim/zipf.hpp"

namespace vecsim {

struct DemandParams {
  int window_num = 50;          // random candidates per selection
  double discount = 0.8;        // score multiplier for already-accessed services
  int hot_list_len = 10;
  Tick hot_window_ticks = 500;
  double sleep_k = 1.0;         // seconds scale
  double sleep_sigma = 0.5;
  double drift_std = 0.005;     // per-coordinate Gaussian step
  Tick drift_every = 1;
  double upload_rate = 0.0;     // new services per tick (Poisson mean)
  double sleep_trigger_prob = 1.0;
  int sleep_after_requests = 0; // optional extra trigger; 0 disables
  std::int64_t payload_min_bytes = 1LL << 20;   // task input size range
  std::int64_t payload_max_bytes = 8LL << 20;
};

// charm-weighted preference/feature alignment
double interest_score(const SdvState& v, const ServiceSpec& s);

// candidate sampling + scoring; repeat accesses are discounted; highest score
// wins, ties to the lower id
ServiceId select_service(const SdvState& v, const std::vector<ServiceSpec>& catalog,
                         const std::vector<ServiceId>& hot, const DemandParams& params, Rng& rng);

double sleep_duration_s(double theta_a, double theta_v, const DemandParams& params, Rng& rng);
Tick sleep_duration_ticks(double theta_a, double theta_v, const DemandParams& params, double dt,
                          Rng& rng);

// accumulative Gaussian noise on the preference vector, clamped to the
// generation range [0,10]; multiplier scales bursts ("trends")
void drift_preferences(SdvState& v, const DemandParams& params, Rng& rng, double multiplier = 1.0);

std::int64_t draw_payload_bytes(const DemandParams& params, Rng& rng);

// new arrivals this tick; attributes follow the generator rules, vectors sit
// around a uniformly chosen existing center
std::vector<ServiceSpec> upload_services(const std::vector<std::vector<float>>& centers,
                                         const GenConfig& gen, const ZipfTable& ranks,
                                         const DemandParams& params, Rng& rng, Tick now,
                                         ServiceId next_id);

class RequestLog {
public:
  void record(Tick t, ServiceId s) { log_.push_back({t, s}); }
  void prune(Tick oldest_kept);
  std::size_t size() const { return log_.size(); }
  const std::deque<std::pair<Tick, ServiceId>>& entries() const { return log_; }

  // most-requested within (now - window, now], ties to the lower id
  std::vector<ServiceId> hot_ranking(const DemandParams& params, Tick now) const;

private:
  std::deque<std::pair<Tick, ServiceId>> log_;
};

}  // namespace vecsim

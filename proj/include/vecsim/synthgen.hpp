#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vecsim/rng.hpp"
#include "vecsim/world.hpp"
#include "vecsim/zipf.hpp"

namespace vecsim {

struct GenConfig {
  Vec2 canvas{4000.0, 4000.0};
  int sdv_count = 100;
  int rsu_count = 5;
  std::vector<double> density;  // per-RSU cluster weights; empty = equal
  std::int64_t service_count = 10000;
  int cluster_count = 5;
  double dispersion = 0.25;
  int vector_len = 64;
  double zipf_alpha = 1.0;
  std::int64_t size_min_bytes = 1LL << 20;
  std::int64_t size_max_bytes = 128LL << 20;
  double cpu_min_flop = 1e8;
  double cpu_max_flop = 2e10;
  double charm_min = 1.0;
  double charm_max = 100.0;
  double timeout_s = 120.0;

  // hardware
  double sdv_flops = 10e9;
  double rsu_flops = 100e9;
  double cdc_flops = 400e9;
  double sdv_tx_w = 1.0;
  double rsu_tx_w = 3.0;
  double coverage_mean_m = 1200.0;
  double coverage_std_m = 300.0;
  double coverage_min_m = 300.0;
  double coverage_max_m = 2400.0;
  int rsu_concurrency = 2;
  std::int64_t rsu_cache_bytes = 2LL << 30;
  std::vector<std::int64_t> sdv_cache_choices{4LL << 30, 8LL << 30, 16LL << 30};
  Vec2 cdc_position{300e3, 0.0};
};

// floor quotas, then +1 to the largest fractional remainders until the total
// matches (ties to the lower index)
std::vector<int> apportion_largest_remainder(int total, const std::vector<double>& weights);

struct FeatureSet {
  std::vector<std::vector<float>> centers;
  std::vector<std::vector<float>> vectors;
  std::vector<int> labels;
};

// band half-width for one feature draw; p is pre-drawn in the valid band
double feature_band_halfwidth(double dispersion, double p);
// the (lo, hi) interval p is drawn from, shrunk so the log argument stays < 1
std::pair<double, double> feature_p_bounds(double dispersion);

std::vector<float> vector_around(const std::vector<float>& center, double dispersion, Rng& rng);

FeatureSet generate_feature_vectors(const GenConfig& cfg, Rng& rng);

struct Catalog {
  std::vector<ServiceSpec> services;
  std::vector<std::vector<float>> centers;
};

Catalog generate_catalog(const GenConfig& cfg, Rng& rng);
std::vector<ServiceSpec> generate_services(const GenConfig& cfg, Rng& rng);

struct Topology {
  std::vector<RsuState> rsus;
  std::vector<SdvState> sdvs;
  std::vector<Vec2> sdv_unclamped;  // pre-clamp positions, for placement audits
  std::vector<int> cluster_counts;
};

Topology generate_topology(const GenConfig& cfg, Rng& rng);

struct BuildOutput {
  World world;
  std::vector<std::vector<float>> centers;  // retained for later service uploads
};

// full initial world: services + topology + hardware + preference vectors
BuildOutput make_world(const GenConfig& cfg, RngStreams& streams);

}  // namespace vecsim

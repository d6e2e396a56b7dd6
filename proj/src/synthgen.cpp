#include "vecsim/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vecsim {

namespace {
constexpr double kTwoPi = 6.283185307179586476925;
}

std::vector<int> apportion_largest_remainder(int total, const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  std::vector<int> counts(n, 0);
  if (n == 0 || total <= 0) return counts;
  double wsum = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw std::invalid_argument("apportion: weights must be positive");
    wsum += w;
  }
  std::vector<double> frac(n, 0.0);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = static_cast<double>(total) * weights[i] / wsum;
    counts[i] = static_cast<int>(std::floor(q));
    frac[i] = q - std::floor(q);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (int i = 0; assigned < total; ++i) {
    counts[order[static_cast<std::size_t>(i) % n]] += 1;
    ++assigned;
  }
  return counts;
}

std::pair<double, double> feature_p_bounds(double dispersion) {
  const double root = std::sqrt(kTwoPi * dispersion * dispersion);
  // keep the log argument strictly below 1; wide dispersions shrink the band
  const double hi = std::min(1.0, 0.999 / root);
  const double lo = std::min(0.8, 0.8 * hi);
  return {lo, hi};
}

double feature_band_halfwidth(double dispersion, double p) {
  const double m2 = dispersion * dispersion;
  const double arg = std::sqrt(kTwoPi * m2) * p;
  return std::sqrt(-2.0 * m2 * std::log(arg));
}

std::vector<float> vector_around(const std::vector<float>& center, double dispersion, Rng& rng) {
  const auto [plo, phi] = feature_p_bounds(dispersion);
  std::vector<float> out(center.size());
  for (std::size_t j = 0; j < center.size(); ++j) {
    const double p = rng.uniform(plo, phi);
    const double t = feature_band_halfwidth(dispersion, p);
    const double c = static_cast<double>(center[j]);
    out[j] = static_cast<float>(rng.uniform(c - t, c + t));
  }
  return out;
}

FeatureSet generate_feature_vectors(const GenConfig& cfg, Rng& rng) {
  if (cfg.cluster_count < 1) throw std::invalid_argument("gen: cluster_count must be >= 1");
  if (cfg.vector_len < 1) throw std::invalid_argument("gen: vector_len must be >= 1");
  FeatureSet fs;
  const int f = cfg.cluster_count;
  fs.centers.resize(static_cast<std::size_t>(f));
  for (auto& c : fs.centers) {
    c.resize(static_cast<std::size_t>(cfg.vector_len));
    for (auto& x : c) x = static_cast<float>(rng.uniform(0.0, 10.0));
  }
  const std::int64_t g = cfg.service_count;
  const std::int64_t base = g / f;
  fs.vectors.reserve(static_cast<std::size_t>(g));
  fs.labels.reserve(static_cast<std::size_t>(g));
  for (int i = 0; i < f; ++i) {
    // last cluster absorbs the division remainder
    const std::int64_t a = (i == f - 1) ? g - base * (f - 1) : base;
    for (std::int64_t k = 0; k < a; ++k) {
      fs.vectors.push_back(vector_around(fs.centers[static_cast<std::size_t>(i)], cfg.dispersion, rng));
      fs.labels.push_back(i);
    }
  }
  return fs;
}

Catalog generate_catalog(const GenConfig& cfg, Rng& rng) {
  if (cfg.size_min_bytes <= 0 || cfg.size_min_bytes > cfg.size_max_bytes)
    throw std::invalid_argument("gen: empty size range");
  if (cfg.cpu_min_flop <= 0 || cfg.cpu_min_flop > cfg.cpu_max_flop)
    throw std::invalid_argument("gen: empty cpu range");
  if (cfg.charm_min <= 0 || cfg.charm_min > cfg.charm_max)
    throw std::invalid_argument("gen: empty charm range");

  FeatureSet fs = generate_feature_vectors(cfg, rng);
  const ZipfTable zipf(cfg.service_count, cfg.zipf_alpha);
  Catalog cat;
  cat.centers = std::move(fs.centers);
  cat.services.resize(static_cast<std::size_t>(cfg.service_count));
  for (std::int64_t i = 0; i < cfg.service_count; ++i) {
    auto& s = cat.services[static_cast<std::size_t>(i)];
    s.id = i;
    const std::int64_t size_rank = zipf.sample(rng);
    const std::int64_t cpu_rank = zipf.sample(rng);
    const std::int64_t charm_rank = zipf.sample(rng);
    s.size_bytes = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(
               rank_to_value(size_rank, cfg.service_count, static_cast<double>(cfg.size_min_bytes),
                             static_cast<double>(cfg.size_max_bytes)))));
    s.cpu_demand_flop = rank_to_value(cpu_rank, cfg.service_count, cfg.cpu_min_flop, cfg.cpu_max_flop);
    s.charm = rank_to_value(charm_rank, cfg.service_count, cfg.charm_min, cfg.charm_max);
    s.feature = std::move(fs.vectors[static_cast<std::size_t>(i)]);
    s.cluster_id = fs.labels[static_cast<std::size_t>(i)];
    s.timeout_s = cfg.timeout_s;
    s.uploaded_tick = 0;
  }
  return cat;
}

std::vector<ServiceSpec> generate_services(const GenConfig& cfg, Rng& rng) {
  return generate_catalog(cfg, rng).services;
}

Topology generate_topology(const GenConfig& cfg, Rng& rng) {
  if (cfg.rsu_count < 1 || cfg.sdv_count < 0) throw std::invalid_argument("gen: bad counts");
  Topology topo;
  topo.rsus.resize(static_cast<std::size_t>(cfg.rsu_count));
  for (int i = 0; i < cfg.rsu_count; ++i) {
    auto& r = topo.rsus[static_cast<std::size_t>(i)];
    r.id = i;
    r.position = {rng.uniform(0.0, cfg.canvas.x), rng.uniform(0.0, cfg.canvas.y)};
    double g = rng.normal(cfg.coverage_mean_m, cfg.coverage_std_m);
    r.coverage_m = std::clamp(g, cfg.coverage_min_m, cfg.coverage_max_m);
  }

  std::vector<double> weights = cfg.density;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(cfg.rsu_count), 1.0);
  if (static_cast<int>(weights.size()) != cfg.rsu_count)
    throw std::invalid_argument("gen: density size != rsu_count");
  topo.cluster_counts = apportion_largest_remainder(cfg.sdv_count, weights);

  SdvId next = 0;
  for (int c = 0; c < cfg.rsu_count; ++c) {
    const auto& r = topo.rsus[static_cast<std::size_t>(c)];
    for (int k = 0; k < topo.cluster_counts[static_cast<std::size_t>(c)]; ++k) {
      SdvState v;
      v.id = next++;
      v.cluster_id = c;
      const double rad = rng.uniform(0.0, r.coverage_m);
      const double ang = rng.uniform(0.0, kTwoPi);
      Vec2 raw{r.position.x + rad * std::cos(ang), r.position.y + rad * std::sin(ang)};
      topo.sdv_unclamped.push_back(raw);
      v.position = {std::clamp(raw.x, 0.0, cfg.canvas.x), std::clamp(raw.y, 0.0, cfg.canvas.y)};
      v.heading_rad = rng.uniform(0.0, kTwoPi);
      topo.sdvs.push_back(std::move(v));
    }
  }
  return topo;
}

BuildOutput make_world(const GenConfig& cfg, RngStreams& streams) {
  BuildOutput out;
  World& w = out.world;
  w.canvas = cfg.canvas;
  Catalog cat = generate_catalog(cfg, streams.services);
  w.services = std::move(cat.services);
  out.centers = std::move(cat.centers);

  Topology topo = generate_topology(cfg, streams.topology);
  w.rsus = std::move(topo.rsus);
  w.sdvs = std::move(topo.sdvs);
  for (auto& r : w.rsus) {
    r.compute_flops = cfg.rsu_flops;
    r.tx_power_w = cfg.rsu_tx_w;
    r.concurrency = cfg.rsu_concurrency;
    r.cache = CacheStore(cfg.rsu_cache_bytes);
  }
  for (auto& v : w.sdvs) {
    v.compute_flops = cfg.sdv_flops;
    v.tx_power_w = cfg.sdv_tx_w;
    const auto pick = streams.topology.uniform_index(cfg.sdv_cache_choices.size());
    v.cache = CacheStore(cfg.sdv_cache_choices[static_cast<std::size_t>(pick)]);
    // interest vector: clustered like service features, around a random center
    const auto c = streams.topology.uniform_index(out.centers.size());
    v.preference = vector_around(out.centers[static_cast<std::size_t>(c)], cfg.dispersion, streams.topology);
  }
  w.cdc.position = cfg.cdc_position;
  w.cdc.compute_flops = cfg.cdc_flops;
  return out;
}

}  // namespace vecsim

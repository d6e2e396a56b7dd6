#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vecsim/synthgen.hpp"

using namespace vecsim;

namespace {

// independent largest-remainder apportionment for cross-checking
std::vector<int> apportion_oracle(int total, const std::vector<double>& weights) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> out(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> rema;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double q = total * weights[i] / wsum;
    out[i] = static_cast<int>(std::floor(q));
    assigned += out[i];
    rema.push_back({q - std::floor(q), i});
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int k = 0; k < total - assigned; ++k) out[rema[static_cast<std::size_t>(k)].second] += 1;
  return out;
}

}  // namespace

TEST_CASE("largest remainder quota: 3:1 split of 100") {
  const auto q = apportion_largest_remainder(100, {3.0, 1.0});
  REQUIRE(q.size() == 2);
  CHECK(q[0] == 75);
  CHECK(q[1] == 25);
}

TEST_CASE("quota totals always match and agree with an independent oracle") {
  Rng r(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int parts = 1 + static_cast<int>(r.uniform_index(8));
    const int total = static_cast<int>(r.uniform_index(500));
    std::vector<double> w(static_cast<std::size_t>(parts));
    for (auto& x : w) x = r.uniform(0.05, 10.0);
    const auto got = apportion_largest_remainder(total, w);
    const auto want = apportion_oracle(total, w);
    CHECK(std::accumulate(got.begin(), got.end(), 0) == total);
    CHECK(got == want);
  }
}

TEST_CASE("remainder ties go to the lower index") {
  // quotas 1.5 / 1.5 / 1.0 -> one spare unit, equal remainders
  const auto q = apportion_largest_remainder(4, {1.5, 1.5, 1.0});
  CHECK(q == std::vector<int>{2, 1, 1});
}

TEST_CASE("feature vectors stay inside the band around their cluster center") {
  GenConfig cfg;
  cfg.service_count = 300;
  cfg.cluster_count = 4;
  cfg.vector_len = 16;
  cfg.dispersion = 0.3;
  Rng r(4);
  const auto fs = generate_feature_vectors(cfg, r);
  REQUIRE(fs.centers.size() == 4);
  REQUIRE(fs.vectors.size() == 300);
  REQUIRE(fs.labels.size() == 300);
  // the widest band occurs at the low end of the p interval
  const auto [plo, phi] = feature_p_bounds(cfg.dispersion);
  REQUIRE(plo < phi);
  const double tmax = feature_band_halfwidth(cfg.dispersion, plo) + 1e-9;
  for (std::size_t i = 0; i < fs.vectors.size(); ++i) {
    const auto& v = fs.vectors[i];
    REQUIRE(v.size() == 16);
    const int l = fs.labels[i];
    REQUIRE(l >= 0);
    REQUIRE(l < 4);
    const auto& c = fs.centers[static_cast<std::size_t>(l)];
    for (std::size_t j = 0; j < v.size(); ++j)
      CHECK(std::abs(static_cast<double>(v[j]) - static_cast<double>(c[j])) <= tmax);
  }
}

TEST_CASE("wide dispersion shrinks the p interval so the band stays finite") {
  const auto [lo, hi] = feature_p_bounds(2.0);
  CHECK(hi < 1.0);
  CHECK(lo < hi);
  const double t = feature_band_halfwidth(2.0, lo);
  CHECK(std::isfinite(t));
  CHECK(t > 0.0);
}

TEST_CASE("catalog attributes respect the configured ranges") {
  GenConfig cfg;
  cfg.service_count = 500;
  cfg.cluster_count = 3;
  cfg.vector_len = 8;
  Rng r(6);
  const auto services = generate_services(cfg, r);
  REQUIRE(services.size() == 500);
  for (const auto& s : services) {
    CHECK(s.size_bytes >= cfg.size_min_bytes);
    CHECK(s.size_bytes <= cfg.size_max_bytes);
    CHECK(s.cpu_demand_flop >= cfg.cpu_min_flop);
    CHECK(s.cpu_demand_flop <= cfg.cpu_max_flop);
    CHECK(s.charm >= cfg.charm_min);
    CHECK(s.charm <= cfg.charm_max);
    CHECK(s.timeout_s == cfg.timeout_s);
  }
  // ids are dense and ordered
  for (std::size_t i = 0; i < services.size(); ++i)
    CHECK(services[i].id == static_cast<ServiceId>(i));
}

TEST_CASE("topology spawns every vehicle inside some coverage disk before clamping") {
  GenConfig cfg;
  cfg.sdv_count = 200;
  cfg.rsu_count = 6;
  Rng r(12);
  const auto topo = generate_topology(cfg, r);
  REQUIRE(topo.rsus.size() == 6);
  REQUIRE(topo.sdvs.size() == 200);
  REQUIRE(topo.sdv_unclamped.size() == 200);
  for (const auto& p : topo.sdv_unclamped) {
    bool covered = false;
    for (const auto& rsu : topo.rsus)
      covered = covered || distance(p, rsu.position) <= rsu.coverage_m + 1e-6;
    CHECK(covered);
  }
  for (const auto& v : topo.sdvs) {
    CHECK(v.position.x >= 0.0);
    CHECK(v.position.x <= cfg.canvas.x);
    CHECK(v.position.y >= 0.0);
    CHECK(v.position.y <= cfg.canvas.y);
  }
  // density apportionment drives cluster sizes
  CHECK(std::accumulate(topo.cluster_counts.begin(), topo.cluster_counts.end(), 0) == 200);
}

TEST_CASE("coverage radii are clamped into the configured band") {
  GenConfig cfg;
  cfg.rsu_count = 40;
  cfg.coverage_mean_m = 1000;
  cfg.coverage_std_m = 2000;  // wide spread forces clamping
  cfg.coverage_min_m = 400;
  cfg.coverage_max_m = 1600;
  Rng r(8);
  const auto topo = generate_topology(cfg, r);
  for (const auto& rsu : topo.rsus) {
    CHECK(rsu.coverage_m >= 400.0);
    CHECK(rsu.coverage_m <= 1600.0);
  }
}

TEST_CASE("make_world is reproducible for a fixed master seed") {
  GenConfig cfg;
  cfg.sdv_count = 30;
  cfg.rsu_count = 3;
  cfg.service_count = 100;
  RngStreams s1(77), s2(77);
  const auto w1 = make_world(cfg, s1);
  const auto w2 = make_world(cfg, s2);
  REQUIRE(w1.world.sdvs.size() == w2.world.sdvs.size());
  for (std::size_t i = 0; i < w1.world.sdvs.size(); ++i) {
    CHECK(w1.world.sdvs[i].position.x == w2.world.sdvs[i].position.x);
    CHECK(w1.world.sdvs[i].position.y == w2.world.sdvs[i].position.y);
  }
  REQUIRE(w1.world.services.size() == 100);
  CHECK(w1.world.services[13].size_bytes == w2.world.services[13].size_bytes);
}

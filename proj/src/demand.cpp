#include "vecsim/demand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "vecsim/kernels.hpp"

namespace vecsim {

double interest_score(const SdvState& v, const ServiceSpec& s) {
  return s.charm * kernels::cosine(v.preference, s.feature);
}

ServiceId select_service(const SdvState& v, const std::vector<ServiceSpec>& catalog,
                         const std::vector<ServiceId>& hot, const DemandParams& params, Rng& rng) {
  const auto n = static_cast<std::int64_t>(catalog.size());
  std::unordered_set<ServiceId> picked;
  const auto want = static_cast<std::int64_t>(params.window_num);
  if (n <= want) {
    for (const auto& s : catalog) picked.insert(s.id);
  } else {
    // rejection sampling keeps the candidates distinct
    while (static_cast<std::int64_t>(picked.size()) < want)
      picked.insert(static_cast<ServiceId>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  }
  for (ServiceId h : hot)
    if (h >= 0 && h < n) picked.insert(h);

  std::vector<ServiceId> candidates(picked.begin(), picked.end());
  std::sort(candidates.begin(), candidates.end());

  std::vector<std::span<const float>> rows;
  rows.reserve(candidates.size());
  std::vector<double> weights;
  weights.reserve(candidates.size());
  for (ServiceId id : candidates) {
    const ServiceSpec& s = catalog[static_cast<std::size_t>(id)];
    rows.emplace_back(s.feature);
    weights.push_back(s.charm);
  }
  std::vector<double> scores(candidates.size());
  kernels::weighted_cosine_scores(v.preference, rows, weights, scores);

  ServiceId best = -1;
  double best_score = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double score = scores[i];
    if (v.accessed.count(candidates[i])) score *= params.discount;
    if (best < 0 || score > best_score) {
      best = candidates[i];
      best_score = score;
    }
  }
  return best;
}

double sleep_duration_s(double theta_a, double theta_v, const DemandParams& params, Rng& rng) {
  const double lo = std::exp(std::fabs(theta_a));
  double width = 0.0;
  // log base (1+sigma); non-positive values collapse to the degenerate draw
  if (theta_v > 1.0 && params.sleep_sigma > 0.0)
    width = std::log(theta_v) / std::log1p(params.sleep_sigma);
  if (width < 0.0) width = 0.0;
  return params.sleep_k * rng.uniform(lo, lo + width);
}

Tick sleep_duration_ticks(double theta_a, double theta_v, const DemandParams& params, double dt,
                          Rng& rng) {
  const double s = sleep_duration_s(theta_a, theta_v, params, rng);
  return static_cast<Tick>(std::ceil(s / dt));
}

void drift_preferences(SdvState& v, const DemandParams& params, Rng& rng, double multiplier) {
  const double std = params.drift_std * multiplier;
  if (std <= 0.0) return;
  for (auto& x : v.preference) {
    const double nx = static_cast<double>(x) + rng.normal(0.0, std);
    x = static_cast<float>(std::clamp(nx, 0.0, 10.0));
  }
}

std::int64_t draw_payload_bytes(const DemandParams& params, Rng& rng) {
  const double lo = static_cast<double>(params.payload_min_bytes);
  const double hi = static_cast<double>(params.payload_max_bytes);
  if (hi <= lo) return params.payload_min_bytes;
  const double x = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(x)));
}

std::vector<ServiceSpec> upload_services(const std::vector<std::vector<float>>& centers,
                                         const GenConfig& gen, const ZipfTable& ranks,
                                         const DemandParams& params, Rng& rng, Tick now,
                                         ServiceId next_id) {
  std::vector<ServiceSpec> out;
  const std::uint64_t count = rng.poisson(params.upload_rate);
  if (count == 0 || centers.empty()) return out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ServiceSpec s;
    s.id = next_id++;
    const auto c = rng.uniform_index(centers.size());
    s.cluster_id = static_cast<int>(c);
    s.feature = vector_around(centers[static_cast<std::size_t>(c)], gen.dispersion, rng);
    const std::int64_t size_rank = ranks.sample(rng);
    const std::int64_t cpu_rank = ranks.sample(rng);
    const std::int64_t charm_rank = ranks.sample(rng);
    const std::int64_t n = ranks.size();
    s.size_bytes = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(rank_to_value(
               size_rank, n, static_cast<double>(gen.size_min_bytes), static_cast<double>(gen.size_max_bytes)))));
    s.cpu_demand_flop = rank_to_value(cpu_rank, n, gen.cpu_min_flop, gen.cpu_max_flop);
    s.charm = rank_to_value(charm_rank, n, gen.charm_min, gen.charm_max);
    s.timeout_s = gen.timeout_s;
    s.uploaded_tick = now;
    out.push_back(std::move(s));
  }
  return out;
}

void RequestLog::prune(Tick oldest_kept) {
  while (!log_.empty() && log_.front().first < oldest_kept) log_.pop_front();
}

std::vector<ServiceId> RequestLog::hot_ranking(const DemandParams& params, Tick now) const {
  std::map<ServiceId, std::int64_t> counts;
  const Tick cutoff = now - params.hot_window_ticks;
  for (const auto& [t, s] : log_) {
    if (t > cutoff && t <= now) counts[s] += 1;
  }
  std::vector<std::pair<ServiceId, std::int64_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<ServiceId> out;
  const auto len = static_cast<std::size_t>(params.hot_list_len);
  for (const auto& [id, cnt] : items) {
    if (out.size() >= len) break;
    out.push_back(id);
  }
  return out;
}

}  // namespace vecsim

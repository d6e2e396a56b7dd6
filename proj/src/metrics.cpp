#include "vecsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vecsim {

namespace {
constexpr double kLbGuard = 1e-9;
}

double hit_rate_of(std::int64_t hits, std::int64_t requests) {
  if (requests <= 0) return 0.0;
  return static_cast<double>(hits) / static_cast<double>(requests);
}

double qos_of(double sum_bytes, double sum_time_s, double power_w) {
  if (sum_time_s <= 0.0 || power_w <= 0.0) return 0.0;
  return std::log(1.0 + sum_bytes / sum_time_s) / (power_w * power_w);
}

LoadBalance load_balancing_of(const std::vector<double>& loads) {
  LoadBalance lb;
  if (loads.empty()) {
    lb.l_value = 1.0 / kLbGuard;
    lb.capped = true;
    return lb;
  }
  double mean = 0.0;
  for (double w : loads) mean += w;
  mean /= static_cast<double>(loads.size());
  double var = 0.0;
  for (double w : loads) var += (w - mean) * (w - mean);
  var /= static_cast<double>(loads.size());
  lb.stddev = std::sqrt(var);
  lb.l_value = 1.0 / (lb.stddev + kLbGuard);
  lb.capped = lb.stddev == 0.0;
  return lb;
}

double space_utilization_pct_of(const std::vector<std::pair<std::int64_t, std::int64_t>>& occ_cap) {
  std::int64_t occ = 0, cap = 0;
  for (const auto& [o, c] : occ_cap) {
    occ += o;
    cap += c;
  }
  if (cap <= 0) return 0.0;
  return 100.0 * static_cast<double>(occ) / static_cast<double>(cap);
}

nlohmann::json MetricsFrame::to_json() const {
  nlohmann::json j;
  j["tick"] = tick;
  j["issued"] = issued;
  j["completed"] = completed;
  j["failed"] = failed;
  j["in_flight"] = in_flight;
  j["global_hit_rate"] = global_hit_rate;
  j["global_hit_rate_defined"] = global_hit_rate_defined;
  j["space_utilization_pct"] = space_utilization_pct;
  j["catalog_size"] = catalog_size;
  j["load_stddev"] = load_stddev;
  j["load_balancing"] = load_balancing;
  j["load_balancing_capped"] = load_balancing_capped;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : per_rsu) {
    nlohmann::json e;
    e["rsu"] = r.id;
    e["requests"] = r.requests;
    e["hits"] = r.hits;
    e["peer_hits"] = r.peer_hits;
    e["miss_cdc"] = r.miss_cdc;
    e["hit_rate"] = r.hit_rate;
    e["hit_rate_defined"] = r.hit_rate_defined;
    e["peer_hit_rate"] = r.peer_hit_rate;
    e["responses"] = r.responses;
    e["avg_response_s"] = r.avg_response_s;
    e["response_defined"] = r.response_defined;
    e["qos"] = r.qos;
    e["qos_defined"] = r.qos_defined;
    e["avg_load"] = r.avg_load;
    e["power_stat"] = r.power_stat;
    e["bytes_moved"] = r.bytes_moved;
    arr.push_back(std::move(e));
  }
  j["per_rsu"] = std::move(arr);
  return j;
}

MetricsFrame MetricsFrame::from_json(const nlohmann::json& j) {
  MetricsFrame f;
  f.tick = j.at("tick").get<Tick>();
  f.issued = j.at("issued").get<std::int64_t>();
  f.completed = j.at("completed").get<std::int64_t>();
  f.failed = j.at("failed").get<std::int64_t>();
  f.in_flight = j.at("in_flight").get<std::int64_t>();
  f.global_hit_rate = j.at("global_hit_rate").get<double>();
  f.global_hit_rate_defined = j.at("global_hit_rate_defined").get<bool>();
  f.space_utilization_pct = j.at("space_utilization_pct").get<double>();
  f.catalog_size = j.at("catalog_size").get<std::int64_t>();
  f.load_stddev = j.at("load_stddev").get<double>();
  f.load_balancing = j.at("load_balancing").get<double>();
  f.load_balancing_capped = j.at("load_balancing_capped").get<bool>();
  for (const auto& e : j.at("per_rsu")) {
    RsuMetrics r;
    r.id = e.at("rsu").get<RsuId>();
    r.requests = e.at("requests").get<std::int64_t>();
    r.hits = e.at("hits").get<std::int64_t>();
    r.peer_hits = e.at("peer_hits").get<std::int64_t>();
    r.miss_cdc = e.at("miss_cdc").get<std::int64_t>();
    r.hit_rate = e.at("hit_rate").get<double>();
    r.hit_rate_defined = e.at("hit_rate_defined").get<bool>();
    r.peer_hit_rate = e.at("peer_hit_rate").get<double>();
    r.responses = e.at("responses").get<std::int64_t>();
    r.avg_response_s = e.at("avg_response_s").get<double>();
    r.response_defined = e.at("response_defined").get<bool>();
    r.qos = e.at("qos").get<double>();
    r.qos_defined = e.at("qos_defined").get<bool>();
    r.avg_load = e.at("avg_load").get<double>();
    r.power_stat = e.at("power_stat").get<double>();
    r.bytes_moved = e.at("bytes_moved").get<std::int64_t>();
    f.per_rsu.push_back(std::move(r));
  }
  return f;
}

MetricsAccumulator::MetricsAccumulator(MetricsConfig cfg) : cfg_(cfg) {}

void MetricsAccumulator::apply_(const LogRecord& rec) {
  switch (rec.type) {
    case RecType::RunHeader: {
      header_ = rec.body;
      catalog_ = rec.body.at("catalog").get<std::int64_t>();
      rsus_.clear();
      for (const auto& r : rec.body.at("rsus")) {
        RsuAcc acc;
        acc.id = r.at("id").get<RsuId>();
        acc.tx_power_w = r.at("tx_power_w").get<double>();
        acc.cache_capacity = r.at("cache_bytes").get<std::int64_t>();
        rsus_.push_back(acc);
      }
      break;
    }
    case RecType::Request:
      issued_ += 1;
      break;
    case RecType::Cache: {
      const RsuId id = rec.body.at("rsu").get<RsuId>();
      if (id < 0) break;  // vehicle-side store
      auto& acc = rsus_.at(static_cast<std::size_t>(id));
      const auto outcome = rec.body.at("outcome").get<std::string>();
      if (outcome == "hit")
        acc.hits += 1;
      else if (outcome == "peer")
        acc.peer_hits += 1;
      else
        acc.miss_cdc += 1;
      acc.bytes_moved += rec.body.value("bytes", std::int64_t{0});
      break;
    }
    case RecType::TaskDone: {
      completed_ += 1;
      const RsuId id = rec.body.at("rsu").get<RsuId>();
      if (id >= 0) {
        auto& acc = rsus_.at(static_cast<std::size_t>(id));
        acc.resp_sum_s += rec.body.at("latency_s").get<double>();
        acc.resp_count += 1;
        acc.qos_bytes += rec.body.at("eta_bytes").get<double>();
        acc.qos_time_s += rec.body.at("latency_s").get<double>();
      }
      break;
    }
    case RecType::TaskFailed:
      failed_ += 1;
      break;
    case RecType::ServiceUpload:
      catalog_ += rec.body.value("count", std::int64_t{1});
      break;
    case RecType::RsuWindow: {
      const RsuId id = rec.body.at("rsu").get<RsuId>();
      auto& acc = rsus_.at(static_cast<std::size_t>(id));
      acc.busy_s += rec.body.at("busy_s").get<double>();
      acc.tx_s += rec.body.at("tx_s").get<double>();
      acc.tx_bytes += rec.body.at("tx_bytes").get<std::int64_t>();
      acc.occupied = rec.body.at("occupied_bytes").get<std::int64_t>();
      break;
    }
    case RecType::Decision:
    case RecType::Scripted:
    case RecType::Control:
      break;
  }
}

void MetricsAccumulator::consume(const LogRecord& rec) {
  apply_(rec);
  if (cfg_.window == MetricsConfig::Window::Sliding) {
    recent_.push_back(rec);
  }
}

MetricsFrame MetricsAccumulator::snapshot_(Tick tick, double dt, Tick window_start) const {
  MetricsFrame f;
  f.tick = tick;
  f.issued = issued_;
  f.completed = completed_;
  f.failed = failed_;
  f.in_flight = issued_ - completed_ - failed_;
  f.catalog_size = catalog_;

  const double span_s = static_cast<double>(std::max<Tick>(1, tick - window_start)) * dt;
  std::int64_t tot_hits = 0, tot_req = 0;
  std::vector<double> loads;
  std::vector<std::pair<std::int64_t, std::int64_t>> occ_cap;
  for (const auto& acc : rsus_) {
    RsuMetrics m;
    m.id = acc.id;
    m.hits = acc.hits;
    m.peer_hits = acc.peer_hits;
    m.miss_cdc = acc.miss_cdc;
    m.requests = acc.hits + acc.peer_hits + acc.miss_cdc;
    m.hit_rate_defined = m.requests > 0;
    m.hit_rate = hit_rate_of(acc.hits, m.requests);
    m.peer_hit_rate = hit_rate_of(acc.peer_hits, m.requests);
    m.responses = acc.resp_count;
    m.response_defined = acc.resp_count > 0;
    m.avg_response_s = acc.resp_count > 0 ? acc.resp_sum_s / static_cast<double>(acc.resp_count) : 0.0;
    m.qos_defined = acc.qos_time_s > 0.0;
    m.qos = qos_of(acc.qos_bytes, acc.qos_time_s, acc.tx_power_w);
    m.avg_load = acc.busy_s / span_s;
    if (cfg_.power_stat == MetricsConfig::PowerStat::MeanTxPower) {
      m.power_stat = acc.tx_power_w;
    } else {
      m.power_stat = acc.tx_bytes > 0 ? acc.tx_power_w * acc.tx_s / static_cast<double>(acc.tx_bytes) : 0.0;
    }
    m.bytes_moved = acc.bytes_moved;
    tot_hits += acc.hits;
    tot_req += m.requests;
    loads.push_back(m.avg_load);
    occ_cap.emplace_back(acc.occupied, acc.cache_capacity);
    f.per_rsu.push_back(std::move(m));
  }
  f.global_hit_rate_defined = tot_req > 0;
  f.global_hit_rate = hit_rate_of(tot_hits, tot_req);
  const LoadBalance lb = load_balancing_of(loads);
  f.load_stddev = lb.stddev;
  f.load_balancing = lb.l_value;
  f.load_balancing_capped = lb.capped;
  f.space_utilization_pct = space_utilization_pct_of(occ_cap);
  return f;
}

MetricsFrame MetricsAccumulator::frame_at(Tick tick, double dt) const {
  if (cfg_.window == MetricsConfig::Window::Cumulative) return snapshot_(tick, dt, 0);
  // sliding: replay the trailing window through a cumulative pass
  const Tick start = std::max<Tick>(0, tick - cfg_.sliding_ticks);
  MetricsConfig sub = cfg_;
  sub.window = MetricsConfig::Window::Cumulative;
  MetricsAccumulator acc(sub);
  if (!header_.is_null()) {
    LogRecord h;
    h.tick = 0;
    h.type = RecType::RunHeader;
    h.body = header_;
    acc.apply_(h);
  }
  for (const auto& rec : recent_) {
    if (rec.tick > start && rec.tick <= tick && rec.type != RecType::RunHeader) acc.apply_(rec);
  }
  MetricsFrame f = acc.snapshot_(tick, dt, start);
  // totals stay run-cumulative so conservation remains checkable
  f.issued = issued_;
  f.completed = completed_;
  f.failed = failed_;
  f.in_flight = issued_ - completed_ - failed_;
  f.catalog_size = catalog_;
  return f;
}

std::vector<MetricsFrame> frames_from_log(const EventLog& log, const MetricsConfig& cfg, double dt) {
  // frames are derived purely from the journal: replay, snapshotting at the
  // cadence the run used
  std::vector<MetricsFrame> frames;
  MetricsAccumulator acc(cfg);
  Tick horizon = 0;
  for (const auto& rec : log.records()) horizon = std::max(horizon, rec.tick);
  std::size_t i = 0;
  const auto& recs = log.records();
  const Tick every = std::max<Tick>(1, cfg.anchor_every_ticks);
  for (Tick anchor = every; anchor <= horizon + every; anchor += every) {
    const Tick at = std::min(anchor, horizon);
    // records stamped at the anchor tick belong to the *next* window; only the
    // anchor's own busy/tx window block (and the header) carry that stamp
    while (i < recs.size() &&
           (recs[i].tick < at ||
            (recs[i].tick == at &&
             (recs[i].type == RecType::RsuWindow || recs[i].type == RecType::RunHeader))))
      acc.consume(recs[i++]);
    frames.push_back(acc.frame_at(at, dt));
    if (at == horizon) break;
  }
  return frames;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "policy,cache_bytes,seed,hit_rate_pct,avg_response_time_s,qos,space_utilization_pct\n";
  out << std::fixed;
  out.precision(6);
  for (const auto& r : rows) {
    out << r.policy << ',' << r.cache_bytes << ',' << r.seed << ',' << r.hit_rate_pct << ','
        << r.avg_response_s << ',' << r.qos << ',' << r.space_utilization_pct << '\n';
  }
  return out.str();
}

}  // namespace vecsim

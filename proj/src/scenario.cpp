#include "vecsim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vecsim/cache.hpp"
#include "vecsim/events.hpp"
#include "vecsim/offload.hpp"

namespace vecsim {

std::string_view to_string(ScriptedEvent::Kind k) {
  switch (k) {
    case ScriptedEvent::Kind::InjectServices: return "inject_services";
    case ScriptedEvent::Kind::TrendBurst: return "trend_burst";
    case ScriptedEvent::Kind::Pause: return "pause";
    case ScriptedEvent::Kind::Resume: return "resume";
    case ScriptedEvent::Kind::KillRsu: return "kill_rsu";
    case ScriptedEvent::Kind::ReviveRsu: return "revive_rsu";
  }
  return "?";
}

Scenario desk_scenario() {
  Scenario s;
  s.seed = 1;
  s.gen.canvas = {4000.0, 4000.0};
  s.gen.sdv_count = 150;
  s.gen.rsu_count = 5;
  s.gen.service_count = 10000;
  s.gen.cluster_count = 1;
  s.gen.dispersion = 0.25;
  s.gen.vector_len = 64;
  s.gen.zipf_alpha = 1.2;
  s.gen.size_min_bytes = 2LL << 20;
  s.gen.size_max_bytes = 64LL << 20;
  s.gen.cpu_min_flop = 1e8;
  s.gen.cpu_max_flop = 2e10;
  s.gen.charm_min = 1.0;
  s.gen.charm_max = 100.0;
  s.gen.timeout_s = 120.0;
  s.gen.sdv_flops = 10e9;
  s.gen.rsu_flops = 100e9;
  s.gen.cdc_flops = 120e9;
  s.gen.sdv_tx_w = 1.0;
  s.gen.rsu_tx_w = 3.0;
  s.gen.coverage_mean_m = 1200.0;
  s.gen.coverage_std_m = 300.0;
  s.gen.coverage_min_m = 300.0;
  s.gen.coverage_max_m = 2400.0;
  s.gen.rsu_concurrency = 2;
  s.gen.rsu_cache_bytes = 4LL << 30;
  s.gen.sdv_cache_choices = {4LL << 30, 8LL << 30, 16LL << 30};
  s.gen.cdc_position = {300e3, 0.0};

  s.channel.bandwidth_hz = 500e6;
  s.channel.pathloss_exp = 2.0;
  s.channel.noise_w = 2e-6;
  s.channel.prop_speed_mps = 3e8;
  s.channel.attenuation = 0.67;
  s.channel.resample_fading_every = 1;
  s.channel.min_distance_m = 1.0;
  s.channel.backhaul_rate_bps = 100e6;

  s.demand.window_num = 500;
  s.demand.discount = 1.0;
  s.demand.hot_list_len = 16;
  s.demand.hot_window_ticks = 5000;
  s.demand.sleep_k = 1.0;
  s.demand.sleep_sigma = 0.5;
  s.demand.drift_std = 0.001;
  s.demand.drift_every = 1;
  s.demand.upload_rate = 0.0;
  s.demand.sleep_trigger_prob = 1.0;
  s.demand.payload_min_bytes = 1LL << 20;
  s.demand.payload_max_bytes = 8LL << 20;

  s.mobility.target_speed_mps = 1.5;
  s.mobility.speed_noise_std = 0.4;
  s.mobility.maneuver_per_min = 6.0;

  s.clock.dt_s = 0.1;
  s.clock.horizon_ticks = 5000;
  s.clock.stepping = 1;

  s.cache.rsu_policy = "lfu";
  s.cache.sdv_policy = "lru";
  s.cache.collab_max_hops = 1;

  s.offload.policy = "nearest";
  s.offload.deploy_rate_Bps = 1e9;

  s.metrics.anchor_every_ticks = 100;
  return s;
}

Scenario table2_scenario() {
  Scenario s = desk_scenario();
  s.gen.canvas = {10000.0, 10000.0};
  s.gen.sdv_count = 1000;
  s.gen.rsu_count = 20;
  s.gen.service_count = 10000000;  // 10e6
  s.gen.cluster_count = 5;
  s.gen.vector_len = 16;
  s.gen.size_min_bytes = 1LL << 20;          // 1MB - 1GB
  s.gen.size_max_bytes = 1LL << 30;
  s.gen.cpu_min_flop = 1e9;                  // 1 GFLOP - 10 TFLOP
  s.gen.cpu_max_flop = 1e13;
  s.gen.sdv_flops = 10e9;                    // 10 GFLOPS
  s.gen.rsu_flops = 100e9;                   // 100 GFLOPS
  s.gen.cdc_flops = 1e12;
  s.gen.coverage_mean_m = 1750.0;            // 500m - 3km
  s.gen.coverage_std_m = 500.0;
  s.gen.coverage_min_m = 500.0;
  s.gen.coverage_max_m = 3000.0;
  s.gen.rsu_cache_bytes = 16LL << 30;
  s.gen.sdv_cache_choices = {4LL << 30, 8LL << 30, 16LL << 30};
  s.channel.bandwidth_hz = 500e6;            // 500 Mbps at unit SNR
  s.mobility.target_speed_mps = 40.0 / 3.6;  // 40 km/h
  s.clock.horizon_ticks = 10000;
  s.clock.stepping = 10;
  s.demand.upload_rate = 0.01;
  return s;
}

namespace {

nlohmann::json events_to_json(const std::vector<ScriptedEvent>& evs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : evs) {
    nlohmann::json j;
    j["tick"] = e.tick;
    j["command"] = std::string(to_string(e.kind));
    switch (e.kind) {
      case ScriptedEvent::Kind::InjectServices:
        j["count"] = e.count;
        j["cluster"] = e.cluster;
        break;
      case ScriptedEvent::Kind::TrendBurst:
        j["multiplier"] = e.multiplier;
        j["duration_ticks"] = e.duration_ticks;
        break;
      case ScriptedEvent::Kind::KillRsu:
      case ScriptedEvent::Kind::ReviveRsu:
        j["rsu"] = e.rsu;
        break;
      default:
        break;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["seed"] = s.seed;

  nlohmann::json gen;
  gen["canvas_m"] = {s.gen.canvas.x, s.gen.canvas.y};
  gen["sdv_count"] = s.gen.sdv_count;
  gen["rsu_count"] = s.gen.rsu_count;
  if (!s.gen.density.empty()) gen["density"] = s.gen.density;
  gen["service_count"] = s.gen.service_count;
  gen["cluster_count"] = s.gen.cluster_count;
  gen["dispersion"] = s.gen.dispersion;
  gen["vector_len"] = s.gen.vector_len;
  gen["zipf_alpha"] = s.gen.zipf_alpha;
  gen["size_range_bytes"] = {s.gen.size_min_bytes, s.gen.size_max_bytes};
  gen["cpu_range_flop"] = {s.gen.cpu_min_flop, s.gen.cpu_max_flop};
  gen["charm_range"] = {s.gen.charm_min, s.gen.charm_max};
  gen["timeout_s"] = s.gen.timeout_s;
  nlohmann::json hw;
  hw["sdv_flops"] = s.gen.sdv_flops;
  hw["rsu_flops"] = s.gen.rsu_flops;
  hw["cdc_flops"] = s.gen.cdc_flops;
  hw["sdv_tx_w"] = s.gen.sdv_tx_w;
  hw["rsu_tx_w"] = s.gen.rsu_tx_w;
  hw["coverage_mean_m"] = s.gen.coverage_mean_m;
  hw["coverage_std_m"] = s.gen.coverage_std_m;
  hw["coverage_min_m"] = s.gen.coverage_min_m;
  hw["coverage_max_m"] = s.gen.coverage_max_m;
  hw["rsu_concurrency"] = s.gen.rsu_concurrency;
  hw["rsu_cache_bytes"] = s.gen.rsu_cache_bytes;
  hw["sdv_cache_choices_bytes"] = s.gen.sdv_cache_choices;
  hw["cdc_position_m"] = {s.gen.cdc_position.x, s.gen.cdc_position.y};
  gen["hardware"] = std::move(hw);
  j["gen"] = std::move(gen);

  nlohmann::json ch;
  ch["bandwidth_hz"] = s.channel.bandwidth_hz;
  ch["pathloss_exp"] = s.channel.pathloss_exp;
  ch["noise_w"] = s.channel.noise_w;
  ch["prop_speed_mps"] = s.channel.prop_speed_mps;
  ch["attenuation"] = s.channel.attenuation;
  ch["resample_fading_every"] = s.channel.resample_fading_every;
  ch["min_distance_m"] = s.channel.min_distance_m;
  ch["backhaul_rate_bps"] = s.channel.backhaul_rate_bps;
  j["channel"] = std::move(ch);

  nlohmann::json dm;
  dm["window_num"] = s.demand.window_num;
  dm["discount"] = s.demand.discount;
  dm["hot_list_len"] = s.demand.hot_list_len;
  dm["hot_window_ticks"] = s.demand.hot_window_ticks;
  dm["sleep_k"] = s.demand.sleep_k;
  dm["sleep_sigma"] = s.demand.sleep_sigma;
  dm["drift_std"] = s.demand.drift_std;
  dm["drift_every"] = s.demand.drift_every;
  dm["upload_rate"] = s.demand.upload_rate;
  dm["sleep_trigger_prob"] = s.demand.sleep_trigger_prob;
  dm["sleep_after_requests"] = s.demand.sleep_after_requests;
  dm["payload_range_bytes"] = {s.demand.payload_min_bytes, s.demand.payload_max_bytes};
  j["demand"] = std::move(dm);

  nlohmann::json mb;
  mb["target_speed_mps"] = s.mobility.target_speed_mps;
  mb["speed_noise_std"] = s.mobility.speed_noise_std;
  mb["accel_gain"] = s.mobility.accel_gain;
  mb["accel_max"] = s.mobility.accel_max;
  mb["turn_rate_max"] = s.mobility.turn_rate_max;
  mb["maneuver_per_min"] = s.mobility.maneuver_per_min;
  mb["boundary"] = s.mobility.boundary == MobilityParams::Boundary::Reflect ? "reflect" : "wrap";
  j["mobility"] = std::move(mb);

  nlohmann::json ck;
  ck["dt_s"] = s.clock.dt_s;
  ck["horizon_ticks"] = s.clock.horizon_ticks;
  ck["stepping"] = s.clock.stepping;
  j["clock"] = std::move(ck);

  nlohmann::json ca;
  ca["rsu_policy"] = s.cache.rsu_policy;
  ca["sdv_policy"] = s.cache.sdv_policy;
  ca["collab_max_hops"] = s.cache.collab_max_hops;
  j["cache"] = std::move(ca);

  nlohmann::json of;
  of["policy"] = s.offload.policy;
  of["deploy_rate_Bps"] = s.offload.deploy_rate_Bps;
  j["offload"] = std::move(of);

  nlohmann::json mt;
  mt["anchor_every_ticks"] = s.metrics.anchor_every_ticks;
  mt["window"] = s.metrics.window == MetricsConfig::Window::Cumulative ? "cumulative" : "sliding";
  mt["sliding_ticks"] = s.metrics.sliding_ticks;
  mt["power_stat"] =
      s.metrics.power_stat == MetricsConfig::PowerStat::MeanTxPower ? "mean_tx_power" : "energy_per_byte";
  j["metrics"] = std::move(mt);

  j["events"] = events_to_json(s.events);
  return j;
}

// ---------------------------------------------------------------------------
// parsing with exhaustive diagnostics

namespace {

class Checker {
public:
  explicit Checker(std::vector<ValidationIssue>& issues) : issues_(issues) {}

  void fail(const std::string& path, const std::string& msg) { issues_.push_back({path, msg}); }

  void reject_unknown(const nlohmann::json& obj, const std::string& path,
                      const std::set<std::string>& known) {
    if (!obj.is_object()) return;
    for (const auto& [k, v] : obj.items()) {
      if (!known.count(k)) fail(path.empty() ? k : path + "." + k, "unknown key");
    }
  }

  bool expect_object(const nlohmann::json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  template <typename T>
  void opt_num(const nlohmann::json& obj, const std::string& path, const char* key, T& out,
               double lo, double hi, bool integer = false) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    const std::string p = path + "." + key;
    if (!v.is_number()) {
      fail(p, "expected a number");
      return;
    }
    if (integer && !v.is_number_integer()) {
      fail(p, "expected an integer");
      return;
    }
    const double d = v.get<double>();
    if (d < lo || d > hi) {
      std::ostringstream msg;
      msg << "out of range [" << lo << ", " << hi << "]";
      fail(p, msg.str());
      return;
    }
    out = v.get<T>();
  }

  void opt_bool_like_string(const nlohmann::json& obj, const std::string& path, const char* key,
                            std::string& out, const std::set<std::string>& allowed) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    const std::string p = path + "." + key;
    if (!v.is_string()) {
      fail(p, "expected a string");
      return;
    }
    const auto s = v.get<std::string>();
    if (!allowed.count(s)) {
      fail(p, "must be one of: " + [&] {
        std::string all;
        for (const auto& a : allowed) all += (all.empty() ? "" : ", ") + a;
        return all;
      }());
      return;
    }
    out = s;
  }

  bool pair_num(const nlohmann::json& obj, const std::string& path, const char* key, double& lo,
                double& hi, bool ordered = true) {
    if (!obj.contains(key)) return false;
    const auto& v = obj.at(key);
    const std::string p = path + "." + key;
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(p, ordered ? "expected [low, high]" : "expected [x, y]");
      return false;
    }
    lo = v[0].get<double>();
    hi = v[1].get<double>();
    if (ordered && lo > hi) {
      fail(p, "empty range (low > high)");
      return false;
    }
    return true;
  }

private:
  std::vector<ValidationIssue>& issues_;
};

constexpr double kBig = 1e18;

}  // namespace

ScenarioLoad scenario_from_json(const nlohmann::json& j) {
  ScenarioLoad out;
  std::vector<ValidationIssue>& issues = out.issues;
  Checker c(issues);
  Scenario s = desk_scenario();
  s.events.clear();

  if (!j.is_object()) {
    c.fail("", "scenario root must be an object");
    return out;
  }
  c.reject_unknown(j, "", {"seed", "gen", "channel", "demand", "mobility", "clock", "cache",
                           "offload", "metrics", "events"});

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      c.fail("seed", "expected a non-negative integer");
    else {
      const auto v = j.at("seed").get<std::int64_t>();
      if (v < 0)
        c.fail("seed", "expected a non-negative integer");
      else
        s.seed = static_cast<std::uint64_t>(v);
    }
  }

  if (j.contains("gen") && c.expect_object(j.at("gen"), "gen")) {
    const auto& g = j.at("gen");
    c.reject_unknown(g, "gen",
                     {"canvas_m", "sdv_count", "rsu_count", "density", "service_count",
                      "cluster_count", "dispersion", "vector_len", "zipf_alpha", "size_range_bytes",
                      "cpu_range_flop", "charm_range", "timeout_s", "hardware"});
    double lo = 0, hi = 0;
    if (c.pair_num(g, "gen", "canvas_m", lo, hi, false)) {
      if (lo <= 0 || hi <= 0)
        c.fail("gen.canvas_m", "canvas sides must be positive");
      else
        s.gen.canvas = {lo, hi};
    }
    c.opt_num(g, "gen", "sdv_count", s.gen.sdv_count, 0, 1e7, true);
    c.opt_num(g, "gen", "rsu_count", s.gen.rsu_count, 1, 1e5, true);
    if (g.contains("density")) {
      const auto& d = g.at("density");
      if (!d.is_array()) {
        c.fail("gen.density", "expected an array of positive weights");
      } else {
        std::vector<double> w;
        bool ok = true;
        for (const auto& x : d) {
          if (!x.is_number() || x.get<double>() <= 0) {
            ok = false;
            break;
          }
          w.push_back(x.get<double>());
        }
        if (!ok)
          c.fail("gen.density", "weights must be positive numbers");
        else
          s.gen.density = std::move(w);
      }
    }
    c.opt_num(g, "gen", "service_count", s.gen.service_count, 1, 1e9, true);
    c.opt_num(g, "gen", "cluster_count", s.gen.cluster_count, 1, 1e6, true);
    c.opt_num(g, "gen", "dispersion", s.gen.dispersion, 1e-9, 10.0);
    c.opt_num(g, "gen", "vector_len", s.gen.vector_len, 1, 65536, true);
    c.opt_num(g, "gen", "zipf_alpha", s.gen.zipf_alpha, 0.0, 64.0);
    if (c.pair_num(g, "gen", "size_range_bytes", lo, hi)) {
      if (lo < 1)
        c.fail("gen.size_range_bytes", "sizes must be >= 1 byte");
      else {
        s.gen.size_min_bytes = static_cast<std::int64_t>(lo);
        s.gen.size_max_bytes = static_cast<std::int64_t>(hi);
      }
    }
    if (c.pair_num(g, "gen", "cpu_range_flop", lo, hi)) {
      if (lo <= 0)
        c.fail("gen.cpu_range_flop", "compute demand must be positive");
      else {
        s.gen.cpu_min_flop = lo;
        s.gen.cpu_max_flop = hi;
      }
    }
    if (c.pair_num(g, "gen", "charm_range", lo, hi)) {
      if (lo <= 0)
        c.fail("gen.charm_range", "charm must be positive");
      else {
        s.gen.charm_min = lo;
        s.gen.charm_max = hi;
      }
    }
    c.opt_num(g, "gen", "timeout_s", s.gen.timeout_s, 1e-3, kBig);
    if (g.contains("hardware") && c.expect_object(g.at("hardware"), "gen.hardware")) {
      const auto& h = g.at("hardware");
      c.reject_unknown(h, "gen.hardware",
                       {"sdv_flops", "rsu_flops", "cdc_flops", "sdv_tx_w", "rsu_tx_w",
                        "coverage_mean_m", "coverage_std_m", "coverage_min_m", "coverage_max_m",
                        "rsu_concurrency", "rsu_cache_bytes", "sdv_cache_choices_bytes",
                        "cdc_position_m"});
      c.opt_num(h, "gen.hardware", "sdv_flops", s.gen.sdv_flops, 1.0, kBig);
      c.opt_num(h, "gen.hardware", "rsu_flops", s.gen.rsu_flops, 1.0, kBig);
      c.opt_num(h, "gen.hardware", "cdc_flops", s.gen.cdc_flops, 1.0, kBig);
      c.opt_num(h, "gen.hardware", "sdv_tx_w", s.gen.sdv_tx_w, 1e-6, 1e6);
      c.opt_num(h, "gen.hardware", "rsu_tx_w", s.gen.rsu_tx_w, 1e-6, 1e6);
      c.opt_num(h, "gen.hardware", "coverage_mean_m", s.gen.coverage_mean_m, 1.0, 1e7);
      c.opt_num(h, "gen.hardware", "coverage_std_m", s.gen.coverage_std_m, 0.0, 1e7);
      c.opt_num(h, "gen.hardware", "coverage_min_m", s.gen.coverage_min_m, 1.0, 1e7);
      c.opt_num(h, "gen.hardware", "coverage_max_m", s.gen.coverage_max_m, 1.0, 1e7);
      c.opt_num(h, "gen.hardware", "rsu_concurrency", s.gen.rsu_concurrency, 1, 1e6, true);
      c.opt_num(h, "gen.hardware", "rsu_cache_bytes", s.gen.rsu_cache_bytes, 0, 9e18, true);
      if (h.contains("sdv_cache_choices_bytes")) {
        const auto& a = h.at("sdv_cache_choices_bytes");
        bool ok = a.is_array() && !a.empty();
        std::vector<std::int64_t> v;
        if (ok)
          for (const auto& x : a) {
            if (!x.is_number_integer() || x.get<std::int64_t>() < 0) {
              ok = false;
              break;
            }
            v.push_back(x.get<std::int64_t>());
          }
        if (!ok)
          c.fail("gen.hardware.sdv_cache_choices_bytes", "expected a non-empty array of byte counts");
        else
          s.gen.sdv_cache_choices = std::move(v);
      }
      if (c.pair_num(h, "gen.hardware", "cdc_position_m", lo, hi, false)) s.gen.cdc_position = {lo, hi};
    }
    if (s.gen.coverage_min_m > s.gen.coverage_max_m)
      c.fail("gen.hardware.coverage_min_m", "coverage_min_m > coverage_max_m");
    if (!s.gen.density.empty() && static_cast<int>(s.gen.density.size()) != s.gen.rsu_count)
      c.fail("gen.density", "length must equal rsu_count");
  }

  if (j.contains("channel") && c.expect_object(j.at("channel"), "channel")) {
    const auto& ch = j.at("channel");
    c.reject_unknown(ch, "channel",
                     {"bandwidth_hz", "pathloss_exp", "noise_w", "prop_speed_mps", "attenuation",
                      "resample_fading_every", "min_distance_m", "backhaul_rate_bps"});
    c.opt_num(ch, "channel", "bandwidth_hz", s.channel.bandwidth_hz, 1e-9, kBig);
    c.opt_num(ch, "channel", "pathloss_exp", s.channel.pathloss_exp, 0.0, 16.0);
    c.opt_num(ch, "channel", "noise_w", s.channel.noise_w, 1e-300, kBig);
    c.opt_num(ch, "channel", "prop_speed_mps", s.channel.prop_speed_mps, 1.0, kBig);
    c.opt_num(ch, "channel", "attenuation", s.channel.attenuation, 1e-9, 1.0);
    c.opt_num(ch, "channel", "resample_fading_every", s.channel.resample_fading_every, 1, 1e9, true);
    c.opt_num(ch, "channel", "min_distance_m", s.channel.min_distance_m, 1e-9, 1e7);
    c.opt_num(ch, "channel", "backhaul_rate_bps", s.channel.backhaul_rate_bps, 0.0, kBig);
  }

  if (j.contains("demand") && c.expect_object(j.at("demand"), "demand")) {
    const auto& d = j.at("demand");
    c.reject_unknown(d, "demand",
                     {"window_num", "discount", "hot_list_len", "hot_window_ticks", "sleep_k",
                      "sleep_sigma", "drift_std", "drift_every", "upload_rate",
                      "sleep_trigger_prob", "sleep_after_requests", "payload_range_bytes"});
    c.opt_num(d, "demand", "window_num", s.demand.window_num, 1, 1e9, true);
    c.opt_num(d, "demand", "discount", s.demand.discount, 0.0, 1.0);
    c.opt_num(d, "demand", "hot_list_len", s.demand.hot_list_len, 0, 1e6, true);
    c.opt_num(d, "demand", "hot_window_ticks", s.demand.hot_window_ticks, 1, 1e12, true);
    c.opt_num(d, "demand", "sleep_k", s.demand.sleep_k, 0.0, kBig);
    c.opt_num(d, "demand", "sleep_sigma", s.demand.sleep_sigma, 1e-9, 1e6);
    c.opt_num(d, "demand", "drift_std", s.demand.drift_std, 0.0, 100.0);
    c.opt_num(d, "demand", "drift_every", s.demand.drift_every, 1, 1e12, true);
    c.opt_num(d, "demand", "upload_rate", s.demand.upload_rate, 0.0, 1e6);
    c.opt_num(d, "demand", "sleep_trigger_prob", s.demand.sleep_trigger_prob, 0.0, 1.0);
    c.opt_num(d, "demand", "sleep_after_requests", s.demand.sleep_after_requests, 0, 1e9, true);
    double lo = 0, hi = 0;
    if (c.pair_num(d, "demand", "payload_range_bytes", lo, hi)) {
      if (lo < 1)
        c.fail("demand.payload_range_bytes", "payload must be >= 1 byte");
      else {
        s.demand.payload_min_bytes = static_cast<std::int64_t>(lo);
        s.demand.payload_max_bytes = static_cast<std::int64_t>(hi);
      }
    }
  }

  if (j.contains("mobility") && c.expect_object(j.at("mobility"), "mobility")) {
    const auto& m = j.at("mobility");
    c.reject_unknown(m, "mobility",
                     {"target_speed_mps", "speed_noise_std", "accel_gain", "accel_max",
                      "turn_rate_max", "maneuver_per_min", "boundary"});
    c.opt_num(m, "mobility", "target_speed_mps", s.mobility.target_speed_mps, 0.0, 1e5);
    c.opt_num(m, "mobility", "speed_noise_std", s.mobility.speed_noise_std, 0.0, 1e5);
    c.opt_num(m, "mobility", "accel_gain", s.mobility.accel_gain, 0.0, 1e5);
    c.opt_num(m, "mobility", "accel_max", s.mobility.accel_max, 0.0, 1e5);
    c.opt_num(m, "mobility", "turn_rate_max", s.mobility.turn_rate_max, 0.0, 1e3);
    c.opt_num(m, "mobility", "maneuver_per_min", s.mobility.maneuver_per_min, 0.0, 1e6);
    std::string b;
    c.opt_bool_like_string(m, "mobility", "boundary", b, {"reflect", "wrap"});
    if (b == "wrap") s.mobility.boundary = MobilityParams::Boundary::Wrap;
    if (b == "reflect") s.mobility.boundary = MobilityParams::Boundary::Reflect;
  }

  if (j.contains("clock") && c.expect_object(j.at("clock"), "clock")) {
    const auto& ck = j.at("clock");
    c.reject_unknown(ck, "clock", {"dt_s", "horizon_ticks", "stepping"});
    c.opt_num(ck, "clock", "dt_s", s.clock.dt_s, 1e-9, 3600.0);
    c.opt_num(ck, "clock", "horizon_ticks", s.clock.horizon_ticks, 0, 1e12, true);
    c.opt_num(ck, "clock", "stepping", s.clock.stepping, 1, 1e9, true);
  }

  if (j.contains("cache") && c.expect_object(j.at("cache"), "cache")) {
    const auto& ca = j.at("cache");
    c.reject_unknown(ca, "cache", {"rsu_policy", "sdv_policy", "collab_max_hops"});
    if (ca.contains("rsu_policy")) {
      if (!ca.at("rsu_policy").is_string())
        c.fail("cache.rsu_policy", "expected a string");
      else {
        const auto name = ca.at("rsu_policy").get<std::string>();
        if (!parse_cache_policy(name))
          c.fail("cache.rsu_policy", "unknown cache policy: " + name);
        else
          s.cache.rsu_policy = name;
      }
    }
    if (ca.contains("sdv_policy")) {
      if (!ca.at("sdv_policy").is_string())
        c.fail("cache.sdv_policy", "expected a string");
      else {
        const auto name = ca.at("sdv_policy").get<std::string>();
        if (!parse_cache_policy(name))
          c.fail("cache.sdv_policy", "unknown cache policy: " + name);
        else
          s.cache.sdv_policy = name;
      }
    }
    c.opt_num(ca, "cache", "collab_max_hops", s.cache.collab_max_hops, 0, 64, true);
  }

  if (j.contains("offload") && c.expect_object(j.at("offload"), "offload")) {
    const auto& of = j.at("offload");
    c.reject_unknown(of, "offload", {"policy", "deploy_rate_Bps"});
    if (of.contains("policy")) {
      if (!of.at("policy").is_string())
        c.fail("offload.policy", "expected a string");
      else {
        const auto name = of.at("policy").get<std::string>();
        if (!make_offload_policy(name))
          c.fail("offload.policy", "unknown offload policy: " + name);
        else
          s.offload.policy = name;
      }
    }
    c.opt_num(of, "offload", "deploy_rate_Bps", s.offload.deploy_rate_Bps, 1.0, kBig);
  }

  if (j.contains("metrics") && c.expect_object(j.at("metrics"), "metrics")) {
    const auto& mt = j.at("metrics");
    c.reject_unknown(mt, "metrics", {"anchor_every_ticks", "window", "sliding_ticks", "power_stat"});
    c.opt_num(mt, "metrics", "anchor_every_ticks", s.metrics.anchor_every_ticks, 1, 1e12, true);
    std::string w;
    c.opt_bool_like_string(mt, "metrics", "window", w, {"cumulative", "sliding"});
    if (w == "sliding") s.metrics.window = MetricsConfig::Window::Sliding;
    if (w == "cumulative") s.metrics.window = MetricsConfig::Window::Cumulative;
    c.opt_num(mt, "metrics", "sliding_ticks", s.metrics.sliding_ticks, 1, 1e12, true);
    std::string p;
    c.opt_bool_like_string(mt, "metrics", "power_stat", p, {"mean_tx_power", "energy_per_byte"});
    if (p == "energy_per_byte") s.metrics.power_stat = MetricsConfig::PowerStat::EnergyPerByte;
    if (p == "mean_tx_power") s.metrics.power_stat = MetricsConfig::PowerStat::MeanTxPower;
  }

  if (j.contains("events")) {
    const auto& evs = j.at("events");
    if (!evs.is_array()) {
      c.fail("events", "expected an array");
    } else {
      int idx = 0;
      for (const auto& e : evs) {
        std::ostringstream pfx;
        pfx << "events[" << idx << "]";
        const std::string p = pfx.str();
        ++idx;
        if (!e.is_object()) {
          c.fail(p, "expected an object");
          continue;
        }
        c.reject_unknown(e, p, {"tick", "command", "count", "cluster", "multiplier",
                                "duration_ticks", "rsu"});
        ScriptedEvent ev;
        if (!e.contains("tick") || !e.at("tick").is_number_integer()) {
          c.fail(p + ".tick", "required integer");
          continue;
        }
        ev.tick = e.at("tick").get<Tick>();
        if (ev.tick < 0 || ev.tick > s.clock.horizon_ticks) {
          c.fail(p + ".tick", "outside [0, horizon_ticks]");
          continue;
        }
        if (!e.contains("command") || !e.at("command").is_string()) {
          c.fail(p + ".command", "required string");
          continue;
        }
        const auto cmd = e.at("command").get<std::string>();
        if (cmd == "inject_services") {
          ev.kind = ScriptedEvent::Kind::InjectServices;
          ev.count = e.value("count", std::int64_t{1});
          ev.cluster = e.value("cluster", -1);
          if (ev.count < 1) c.fail(p + ".count", "must be >= 1");
          if (ev.cluster >= s.gen.cluster_count) c.fail(p + ".cluster", "no such cluster");
        } else if (cmd == "trend_burst") {
          ev.kind = ScriptedEvent::Kind::TrendBurst;
          ev.multiplier = e.value("multiplier", 1.0);
          ev.duration_ticks = e.value("duration_ticks", Tick{1});
          if (ev.multiplier < 0) c.fail(p + ".multiplier", "must be >= 0");
          if (ev.duration_ticks < 1) c.fail(p + ".duration_ticks", "must be >= 1");
        } else if (cmd == "pause") {
          ev.kind = ScriptedEvent::Kind::Pause;
        } else if (cmd == "resume") {
          ev.kind = ScriptedEvent::Kind::Resume;
        } else if (cmd == "kill_rsu" || cmd == "revive_rsu") {
          ev.kind = cmd == "kill_rsu" ? ScriptedEvent::Kind::KillRsu : ScriptedEvent::Kind::ReviveRsu;
          ev.rsu = e.value("rsu", -1);
          if (ev.rsu < 0 || ev.rsu >= s.gen.rsu_count) c.fail(p + ".rsu", "no such node id");
        } else {
          c.fail(p + ".command", "unknown command: " + cmd);
          continue;
        }
        s.events.push_back(ev);
      }
    }
  }

  if (s.demand.payload_min_bytes > s.demand.payload_max_bytes)
    c.fail("demand.payload_range_bytes", "empty range");

  if (issues.empty()) out.scenario = std::move(s);
  return out;
}

ScenarioLoad load_scenario_file(const std::string& path) {
  ScenarioLoad out;
  std::ifstream in(path);
  if (!in) {
    out.issues.push_back({path, "cannot open file"});
    return out;
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    out.issues.push_back({path, "malformed json"});
    return out;
  }
  return scenario_from_json(j);
}

std::string scenario_hash_hex(const Scenario& s) {
  const std::string canon = scenario_to_json(s).dump();
  const std::uint64_t h = fnv1a64_bytes(canon);
  std::ostringstream hex;
  hex << std::hex;
  hex.width(16);
  hex.fill('0');
  hex << h;
  return hex.str();
}

}  // namespace vecsim

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "vecsim/http_api.hpp"
#include "vecsim/report_io.hpp"

namespace fs = std::filesystem;
using namespace vecsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void print_issues(const std::vector<ValidationIssue>& issues) {
  for (const auto& i : issues)
    std::cerr << "  " << (i.path.empty() ? "<root>" : i.path) << ": " << i.message << "\n";
}

int load_or_fail(const std::string& path, Scenario& out) {
  auto loaded = load_scenario_file(path);
  if (!loaded.scenario) {
    std::cerr << "invalid scenario " << path << ":\n";
    print_issues(loaded.issues);
    return kExitValidation;
  }
  out = std::move(*loaded.scenario);
  return kExitOk;
}

bool write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << content;
  return out.good();
}

int cmd_generate(const std::string& preset, std::uint64_t seed, bool seed_set,
                 const std::string& out_path, bool overwrite) {
  Scenario s;
  if (preset == "desk") {
    s = desk_scenario();
  } else if (preset == "table2") {
    s = table2_scenario();
  } else {
    std::cerr << "unknown preset '" << preset << "' (expected desk or table2)\n";
    return kExitValidation;
  }
  if (seed_set) s.seed = seed;
  if (fs::exists(out_path) && !overwrite) {
    std::cerr << out_path << " already exists; pass --overwrite to replace it\n";
    return kExitValidation;
  }
  if (!write_text(out_path, scenario_to_json(s).dump(2) + "\n")) {
    std::cerr << "cannot write " << out_path << "\n";
    return kExitRuntime;
  }
  std::cout << "wrote " << out_path << " (" << preset << ", seed " << s.seed << ")\n";
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  Scenario s;
  const int rc = load_or_fail(path, s);
  if (rc != kExitOk) return rc;
  std::cout << path << " ok: " << s.gen.sdv_count << " vehicles, " << s.gen.rsu_count
            << " edge nodes, " << s.gen.service_count << " services, horizon "
            << s.clock.horizon_ticks << " ticks, hash " << scenario_hash_hex(s) << "\n";
  return kExitOk;
}

void print_run_tail(const RunResult& r) {
  const SummaryRow row = summarize(r);
  std::cout << "issued " << r.issued << ", completed " << r.completed << ", failed " << r.failed
            << "; hit rate " << row.hit_rate_pct << "%, avg response " << row.avg_response_s
            << " s, space " << row.space_utilization_pct << "% (" << r.wall_ms << " ms)\n";
}

int cmd_run(const std::string& path, std::uint64_t seed, bool seed_set, int stepping,
            bool stepping_set, const std::string& out_dir, const std::string& http_addr,
            bool overwrite) {
  Scenario s;
  const int rc = load_or_fail(path, s);
  if (rc != kExitOk) return rc;
  if (seed_set) s.seed = seed;
  if (stepping_set) {
    if (stepping < 1) {
      std::cerr << "--stepping must be >= 1\n";
      return kExitValidation;
    }
    s.clock.stepping = stepping;
  }
  // fail fast on a doomed output directory, before simulating anything
  if (!out_dir.empty() && fs::exists(out_dir) && !fs::is_empty(out_dir) && !overwrite) {
    std::cerr << out_dir << " already exists; pass --overwrite to replace it\n";
    return kExitValidation;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    Engine eng(s);
    std::unique_ptr<HttpEndpoint> http;
    if (!http_addr.empty()) {
      http = std::make_unique<HttpEndpoint>(eng);
      if (!http->start(http_addr)) {
        std::cerr << "cannot bind " << http_addr << "\n";
        return kExitRuntime;
      }
      std::cout << "serving http://" << http->host() << ":" << http->port()
                << " (/status /metrics /control)\n";
    }
    eng.run();
    const auto t1 = std::chrono::steady_clock::now();

    RunResult r;
    r.scenario = s;
    r.scenario_hash = scenario_hash_hex(s);
    r.log = eng.log();
    r.frames = eng.frames();
    r.issued = eng.issued();
    r.completed = eng.completed();
    r.failed = eng.failed();
    r.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (http) http->stop();

    if (!out_dir.empty()) {
      const auto w = write_run_outputs(out_dir, r, overwrite);
      if (!w.ok) {
        std::cerr << w.error << "\n";
        return kExitRuntime;
      }
      std::cout << "report in " << out_dir << "\n";
    }
    print_run_tail(r);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_sweep(const std::string& path, const std::string& policies_csv, const std::string& sizes_csv,
              int seeds, std::uint64_t seed, bool seed_set, const std::string& out_dir,
              bool overwrite, bool keep_logs) {
  Scenario base;
  const int rc = load_or_fail(path, base);
  if (rc != kExitOk) return rc;
  if (seed_set) base.seed = seed;
  if (seeds < 1) {
    std::cerr << "--seeds must be >= 1\n";
    return kExitValidation;
  }

  const auto policies = split_csv(policies_csv);
  std::vector<std::int64_t> sizes;
  for (const auto& tok : split_csv(sizes_csv)) {
    try {
      const double gib = std::stod(tok);
      if (gib <= 0) throw std::invalid_argument(tok);
      sizes.push_back(static_cast<std::int64_t>(gib * static_cast<double>(1LL << 30)));
    } catch (...) {
      std::cerr << "bad cache size '" << tok << "' (GiB expected)\n";
      return kExitValidation;
    }
  }
  if (policies.empty() || sizes.empty()) {
    std::cerr << "nothing to sweep\n";
    return kExitValidation;
  }
  for (const auto& p : policies) {
    if (!parse_cache_policy(p)) {
      std::cerr << "unknown cache policy '" << p << "'\n";
      return kExitValidation;
    }
  }
  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !overwrite) {
    std::cerr << out_dir << " already exists; pass --overwrite to replace it\n";
    return kExitValidation;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "cannot create " << out_dir << ": " << ec.message() << "\n";
    return kExitRuntime;
  }

  struct Job {
    Scenario sc;
    std::string tag;
  };
  std::vector<Job> jobs;
  for (const auto& p : policies)
    for (const auto bytes : sizes)
      for (int k = 0; k < seeds; ++k) {
        Scenario s = base;
        s.cache.rsu_policy = p;
        s.gen.rsu_cache_bytes = bytes;
        s.seed = base.seed + static_cast<std::uint64_t>(k);
        std::ostringstream tag;
        tag << p << "_" << (bytes >> 20) << "MiB_s" << s.seed;
        jobs.push_back({std::move(s), tag.str()});
      }

  std::vector<SummaryRow> rows(jobs.size());
  std::vector<std::string> errors(jobs.size());
  const int n = static_cast<int>(jobs.size());
  // runs are independent simulations; parallelism lives across them, never inside
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const RunResult r = run_scenario(jobs[static_cast<std::size_t>(i)].sc);
      rows[static_cast<std::size_t>(i)] = summarize(r);
      if (keep_logs) {
        const auto w = write_run_outputs(
            (fs::path(out_dir) / jobs[static_cast<std::size_t>(i)].tag).string(), r, true);
        if (!w.ok) errors[static_cast<std::size_t>(i)] = w.error;
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!errors[static_cast<std::size_t>(i)].empty()) {
      std::cerr << jobs[static_cast<std::size_t>(i)].tag << ": "
                << errors[static_cast<std::size_t>(i)] << "\n";
      return kExitRuntime;
    }
  }
  const std::string csv = summary_csv(rows);
  if (!write_text((fs::path(out_dir) / "summary.csv").string(), csv)) {
    std::cerr << "cannot write summary.csv\n";
    return kExitRuntime;
  }
  std::cout << csv;
  std::cout << "swept " << n << " runs into " << out_dir << "\n";
  return kExitOk;
}

int cmd_report(const std::string& run_dir, const std::string& out_dir) {
  const fs::path root(run_dir);
  Scenario s;
  const int rc = load_or_fail((root / "scenario.json").string(), s);
  if (rc != kExitOk) return rc;

  const auto run_text = read_text_file((root / "run.json").string());
  if (!run_text) {
    std::cerr << "missing " << (root / "run.json").string() << "\n";
    return kExitValidation;
  }
  nlohmann::json run = nlohmann::json::parse(*run_text, nullptr, false);
  if (run.is_discarded() || !run.contains("scenario_hash")) {
    std::cerr << "malformed run.json\n";
    return kExitValidation;
  }
  if (run.at("scenario_hash").get<std::string>() != scenario_hash_hex(s)) {
    std::cerr << "scenario.json does not match the hash recorded in run.json\n";
    return kExitValidation;
  }

  std::ifstream events((root / "events.ndjson").string(), std::ios::binary);
  if (!events) {
    std::cerr << "missing " << (root / "events.ndjson").string() << "\n";
    return kExitValidation;
  }

  try {
    const EventLog log = EventLog::from_ndjson_stream(events);
    const auto frames = frames_from_log(log, s.metrics, s.clock.dt_s);

    RunResult r;
    r.scenario = s;
    r.scenario_hash = scenario_hash_hex(s);
    r.log = log;
    r.frames = frames;
    r.issued = run.value("issued", std::int64_t{0});
    r.completed = run.value("completed", std::int64_t{0});
    r.failed = run.value("failed", std::int64_t{0});

    const fs::path out = out_dir.empty() ? root : fs::path(out_dir);
    fs::create_directories(out);
    if (!write_text((out / "frames.ndjson").string(), frames_to_ndjson(frames)) ||
        !write_text((out / "summary.csv").string(), summary_csv({summarize(r)}))) {
      std::cerr << "cannot write derived report\n";
      return kExitRuntime;
    }
    std::cout << "re-derived " << frames.size() << " frames from " << log.size() << " events into "
              << out.string() << "\n";
    print_run_tail(r);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vecsim: deterministic vehicular edge caching/offloading simulator"};
  app.require_subcommand(1);

  std::string preset = "desk";
  std::uint64_t seed = 0;
  int stepping = 1;
  std::string scenario_path;
  std::string out_path;
  std::string http_addr;
  std::string policies = "random,fifo,lru,lfu,clock";
  std::string sizes = "4,8,16";
  int seeds = 5;
  bool overwrite = false;
  bool keep_logs = false;

  auto* gen = app.add_subcommand("generate", "emit a scenario file from a built-in preset");
  gen->add_option("--preset", preset, "desk or table2")->capture_default_str();
  auto* gen_seed = gen->add_option("--seed", seed, "scenario seed");
  gen->add_option("--out", out_path, "output path")->required();
  gen->add_flag("--overwrite", overwrite, "replace an existing file");

  auto* val = app.add_subcommand("validate", "check a scenario file and print its identity");
  val->add_option("scenario", scenario_path, "scenario file")->required();

  auto* run = app.add_subcommand("run", "execute one simulation");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  auto* run_seed = run->add_option("--seed", seed, "override the scenario seed");
  auto* run_step = run->add_option("--stepping", stepping, "override the refresh cadence");
  run->add_option("--out", out_path, "report directory");
  run->add_option("--http", http_addr, "serve status/control on host:port");
  run->add_flag("--overwrite", overwrite, "replace an existing report directory");

  auto* swp = app.add_subcommand("sweep", "grid of (policy, cache size, seed) runs");
  swp->add_option("scenario", scenario_path, "base scenario file")->required();
  swp->add_option("--policies", policies, "comma-separated eviction policies")->capture_default_str();
  swp->add_option("--cache-gib", sizes, "comma-separated cache sizes in GiB")->capture_default_str();
  swp->add_option("--seeds", seeds, "seeds per cell")->capture_default_str();
  auto* swp_seed = swp->add_option("--seed", seed, "base seed (default: scenario seed)");
  swp->add_option("--out", out_path, "sweep output directory")->required();
  swp->add_flag("--overwrite", overwrite, "replace an existing directory");
  swp->add_flag("--keep-logs", keep_logs, "also write full per-run reports");

  auto* rep = app.add_subcommand("report", "re-derive frames and summary from a run's event log");
  rep->add_option("rundir", scenario_path, "run directory")->required();
  rep->add_option("--out", out_path, "where to write derived files (default: rundir)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed())
    return cmd_generate(preset, seed, gen_seed->count() > 0, out_path, overwrite);
  if (val->parsed()) return cmd_validate(scenario_path);
  if (run->parsed())
    return cmd_run(scenario_path, seed, run_seed->count() > 0, stepping, run_step->count() > 0,
                   out_path, http_addr, overwrite);
  if (swp->parsed())
    return cmd_sweep(scenario_path, policies, sizes, seeds, seed, swp_seed->count() > 0, out_path,
                     overwrite, keep_logs);
  if (rep->parsed()) return cmd_report(scenario_path, out_path);
  return kExitValidation;
}

#include "vecsim/report_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace vecsim {

namespace fs = std::filesystem;

std::string frames_to_ndjson(const std::vector<MetricsFrame>& frames) {
  std::ostringstream out;
  for (const auto& f : frames) out << f.to_json().dump() << '\n';
  return out.str();
}

std::vector<MetricsFrame> frames_from_ndjson(std::istream& in) {
  std::vector<MetricsFrame> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    frames.push_back(MetricsFrame::from_json(nlohmann::json::parse(line)));
  }
  return frames;
}

std::optional<std::string> read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

bool write_file(const fs::path& p, const std::string& content, std::string& err) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) {
    err = "cannot write " + p.string();
    return false;
  }
  out << content;
  return out.good();
}

}  // namespace

WriteReport write_run_outputs(const std::string& dir, const RunResult& r, bool overwrite) {
  WriteReport w;
  std::error_code ec;
  const fs::path root(dir);
  if (fs::exists(root, ec)) {
    if (!overwrite && !fs::is_empty(root, ec)) {
      w.error = dir + " already exists; pass --overwrite to replace it";
      return w;
    }
  } else {
    fs::create_directories(root, ec);
    if (ec) {
      w.error = "cannot create " + dir + ": " + ec.message();
      return w;
    }
  }

  nlohmann::json run;
  run["seed"] = r.scenario.seed;
  run["scenario_hash"] = r.scenario_hash;
  run["horizon_ticks"] = r.scenario.clock.horizon_ticks;
  run["issued"] = r.issued;
  run["completed"] = r.completed;
  run["failed"] = r.failed;
  run["events"] = r.log.size();
  run["frames"] = r.frames.size();
  {
    std::ostringstream hex;
    hex << std::hex;
    hex.width(16);
    hex.fill('0');
    hex << fnv1a64_bytes(r.log.to_ndjson());
    run["log_fnv64"] = hex.str();
  }

  std::string err;
  if (!write_file(root / "scenario.json", scenario_to_json(r.scenario).dump(2) + "\n", err) ||
      !write_file(root / "run.json", run.dump(2) + "\n", err) ||
      !write_file(root / "events.ndjson", r.log.to_ndjson(), err) ||
      !write_file(root / "frames.ndjson", frames_to_ndjson(r.frames), err) ||
      !write_file(root / "summary.csv", summary_csv({summarize(r)}), err)) {
    w.error = err;
    return w;
  }
  w.ok = true;
  return w;
}

}  // namespace vecsim

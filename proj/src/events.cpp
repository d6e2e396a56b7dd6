#include "vecsim/events.hpp"

#include <istream>
#include <sstream>
#include <stdexcept>

namespace vecsim {

std::string_view to_string(RecType t) {
  switch (t) {
    case RecType::RunHeader: return "run_header";
    case RecType::Request: return "request";
    case RecType::Decision: return "decision";
    case RecType::Cache: return "cache";
    case RecType::TaskDone: return "task_done";
    case RecType::TaskFailed: return "task_failed";
    case RecType::ServiceUpload: return "service_upload";
    case RecType::RsuWindow: return "rsu_window";
    case RecType::Scripted: return "scripted";
    case RecType::Control: return "control";
  }
  return "?";
}

namespace {

RecType rec_type_from(const std::string& s) {
  if (s == "run_header") return RecType::RunHeader;
  if (s == "request") return RecType::Request;
  if (s == "decision") return RecType::Decision;
  if (s == "cache") return RecType::Cache;
  if (s == "task_done") return RecType::TaskDone;
  if (s == "task_failed") return RecType::TaskFailed;
  if (s == "service_upload") return RecType::ServiceUpload;
  if (s == "rsu_window") return RecType::RsuWindow;
  if (s == "scripted") return RecType::Scripted;
  if (s == "control") return RecType::Control;
  throw std::runtime_error("unknown event type: " + s);
}

}  // namespace

std::string EventLog::to_ndjson() const {
  std::string out;
  for (const auto& r : records_) {
    nlohmann::json line = r.body;
    line["t"] = r.tick;
    line["ev"] = std::string(to_string(r.type));
    out += line.dump();
    out += '\n';
  }
  return out;
}

EventLog EventLog::from_ndjson_stream(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      std::ostringstream err;
      err << "event log line " << lineno << ": malformed json";
      throw std::runtime_error(err.str());
    }
    LogRecord rec;
    rec.tick = j.at("t").get<Tick>();
    rec.type = rec_type_from(j.at("ev").get<std::string>());
    j.erase("t");
    j.erase("ev");
    rec.body = std::move(j);
    log.records_.push_back(std::move(rec));
  }
  return log;
}

std::uint64_t fnv1a64_bytes(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace vecsim

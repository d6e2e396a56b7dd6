#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "vecsim/world.hpp"

namespace vecsim {

// append-only run journal; every metric is derivable from these records
enum class RecType {
  RunHeader,
  Request,
  Decision,
  Cache,
  TaskDone,
  TaskFailed,
  ServiceUpload,
  RsuWindow,
  Scripted,
  Control,
};

std::string_view to_string(RecType t);

struct LogRecord {
  Tick tick = 0;
  RecType type = RecType::Request;
  nlohmann::json body;  // type-specific fields, flat keys
};

class EventLog {
public:
  void append(Tick tick, RecType type, nlohmann::json body) {
    records_.push_back({tick, type, std::move(body)});
  }
  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::string to_ndjson() const;
  static EventLog from_ndjson_stream(std::istream& in);  // throws on malformed lines

private:
  std::vector<LogRecord> records_;
};

std::uint64_t fnv1a64_bytes(std::string_view bytes);

}  // namespace vecsim

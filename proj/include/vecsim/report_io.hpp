#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vecsim/engine.hpp"

namespace vecsim {

std::string frames_to_ndjson(const std::vector<MetricsFrame>& frames);
std::vector<MetricsFrame> frames_from_ndjson(std::istream& in);

// scenario echo + run facts + event journal + frames + summary table, laid
// out under one directory; refuses to touch an existing one unless told to
struct WriteReport {
  bool ok = false;
  std::string error;
};
WriteReport write_run_outputs(const std::string& dir, const RunResult& r, bool overwrite);

std::optional<std::string> read_text_file(const std::string& path);

}  // namespace vecsim

#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "fastquartic/fast_quartic.hpp"

namespace fq::harness {

nlohmann::json to_json(const TraceRecord& r);
/// Summary object without the per-iteration trace; x is included when asked.
nlohmann::json summary_json(const SolveReport& r, double f_offset = 0.0, bool with_x = false);

/// One JSON object per line.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path);
  void write(const nlohmann::json& record);

 private:
  std::ofstream out_;
};

}  // namespace fq::harness

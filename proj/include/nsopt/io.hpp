#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsopt/algorithms.hpp"
#include "nsopt/arena.hpp"
#include "nsopt/certificate.hpp"
#include "nsopt/certifier.hpp"
#include "nsopt/instances.hpp"

namespace nsopt {

using json = nlohmann::json;

/// "%.17g"; enough digits to reproduce the double exactly.
std::string format_double(double v);

json to_json(const Vector& v);
Vector vector_from_json(const json& j);

json to_json(const Certificate& c);
Certificate certificate_from_json(const json& j);

/// One JSONL line per oracle call: {"t", "x", "f", "g", "event"}; t is 1-based.
json trace_record_to_json(const QueryRecord& r, std::size_t t);
QueryRecord trace_record_from_json(const json& j);
void write_trace_jsonl(std::ostream& out, const std::vector<QueryRecord>& records);
std::vector<QueryRecord> read_trace_jsonl(std::istream& in);

struct ExperimentConfig {
  Descriptor instance;
  std::string algo = "ingd-det";
  double delta = 0.1;
  double eps = 0.1;
  std::uint64_t seed = 0;
  std::size_t budget = 100000;
  std::size_t repetitions = 1;
  std::optional<double> H;
  std::optional<Vector> start;
  std::optional<std::string> trace_path;
  std::optional<std::string> certificate_path;

  bool operator==(const ExperimentConfig&) const;
  void validate() const;
};

json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const json& j);

json to_json(const RunResult& r, const ExperimentConfig& c);

json to_json(const ArenaReport& r);
ArenaReport arena_report_from_json(const json& j);

json to_json(const Claim1Report& r);

struct ScalingRow {
  std::string instance;
  std::string algo;
  double delta = 0.0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::size_t oracle_calls = 0;
  bool success = false;
  double final_norm = 0.0;
  double wall_time_ms = 0.0;

  bool operator==(const ScalingRow&) const = default;
};

extern const char* const kScalingHeader;
std::string csv_line(const ScalingRow& r);
ScalingRow parse_csv_line(const std::string& line);
/// Fields containing commas, quotes or newlines are quoted.
std::string csv_field(const std::string& s);
std::vector<std::string> split_csv(const std::string& line);

}  // namespace nsopt

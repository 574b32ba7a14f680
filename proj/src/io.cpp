#include "nsopt/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace nsopt {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json to_json(const Certificate& c) {
  json probes = json::array();
  for (const auto& p : c.probes)
    probes.push_back({{"point", to_json(p.point)}, {"weight", p.weight}, {"subgrad", to_json(p.subgrad)}});
  return {{"center", to_json(c.center)},
          {"delta", c.delta},
          {"probes", probes},
          {"aggregate", to_json(c.aggregate)},
          {"norm", c.norm}};
}

Certificate certificate_from_json(const json& j) {
  Certificate c;
  c.center = vector_from_json(j.at("center"));
  c.delta = j.at("delta").get<double>();
  for (const auto& p : j.at("probes"))
    c.probes.push_back({vector_from_json(p.at("point")), p.at("weight").get<double>(), vector_from_json(p.at("subgrad"))});
  c.aggregate = vector_from_json(j.at("aggregate"));
  c.norm = j.at("norm").get<double>();
  return c;
}

json trace_record_to_json(const QueryRecord& r, std::size_t t) {
  return {{"t", t}, {"x", to_json(r.x)}, {"f", r.reply.value}, {"g", to_json(r.reply.subgrad)}, {"event", r.event}};
}

QueryRecord trace_record_from_json(const json& j) {
  QueryRecord r;
  r.x = vector_from_json(j.at("x"));
  r.reply.value = j.at("f").get<double>();
  r.reply.subgrad = vector_from_json(j.at("g"));
  r.event = j.at("event").get<std::string>();
  return r;
}

void write_trace_jsonl(std::ostream& out, const std::vector<QueryRecord>& records) {
  for (std::size_t i = 0; i < records.size(); ++i) out << trace_record_to_json(records[i], i + 1).dump() << '\n';
}

std::vector<QueryRecord> read_trace_jsonl(std::istream& in) {
  std::vector<QueryRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.at("t").get<std::size_t>() != out.size() + 1) throw std::invalid_argument("trace records out of order");
    out.push_back(trace_record_from_json(j));
  }
  return out;
}

// ---------------------------------------------------------------------------

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  auto same_vec = [](const std::optional<Vector>& a, const std::optional<Vector>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || (a->size() == b->size() && *a == *b);
  };
  return instance == o.instance && algo == o.algo && delta == o.delta && eps == o.eps && seed == o.seed &&
         budget == o.budget && repetitions == o.repetitions && H == o.H && same_vec(start, o.start) &&
         trace_path == o.trace_path && certificate_path == o.certificate_path;
}

void ExperimentConfig::validate() const {
  if (!(delta > 0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  if (!(eps > 0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  if (budget == 0) throw std::invalid_argument("budget must be positive");
  if (repetitions == 0) throw std::invalid_argument("repetitions must be at least 1");
  if (H && !(*H > 0)) throw std::invalid_argument("H must be positive");
}

json to_json(const ExperimentConfig& c) {
  json j = {{"instance", to_string(c.instance)}, {"algo", c.algo},     {"delta", c.delta},
            {"eps", c.eps},                      {"seed", c.seed},     {"budget", c.budget},
            {"repetitions", c.repetitions}};
  if (c.H) j["H"] = *c.H;
  if (c.start) j["start"] = to_json(*c.start);
  if (c.trace_path) j["trace"] = *c.trace_path;
  if (c.certificate_path) j["certificate"] = *c.certificate_path;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  static const char* const known[] = {"instance", "algo", "delta", "eps", "seed", "budget", "repetitions",
                                      "H", "start", "trace", "certificate"};
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw std::invalid_argument("unknown config key '" + k + "'");
  }
  ExperimentConfig c;
  c.instance = parse_descriptor(j.at("instance").get<std::string>());
  if (j.contains("algo")) c.algo = j["algo"].get<std::string>();
  if (j.contains("delta")) c.delta = j["delta"].get<double>();
  if (j.contains("eps")) c.eps = j["eps"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("budget")) c.budget = j["budget"].get<std::size_t>();
  if (j.contains("repetitions")) c.repetitions = j["repetitions"].get<std::size_t>();
  if (j.contains("H")) c.H = j["H"].get<double>();
  if (j.contains("start")) c.start = vector_from_json(j["start"]);
  if (j.contains("trace")) c.trace_path = j["trace"].get<std::string>();
  if (j.contains("certificate")) c.certificate_path = j["certificate"].get<std::string>();
  return c;
}

json to_json(const RunResult& r, const ExperimentConfig& c) {
  json outer = json::array();
  for (const auto& s : r.trace.outer) outer.push_back({{"f_before", s.f_before}, {"f_after", s.f_after}, {"g_norm", s.g_norm}});
  std::size_t violations = 0;
  for (const auto& s : r.trace.inner) violations += s.step.postcondition_ok ? 0 : 1;
  return {{"config", to_json(c)},
          {"status", to_string(r.status)},
          {"point", to_json(r.point)},
          {"g_final", to_json(r.g_final)},
          {"final_norm", r.g_final.norm()},
          {"oracle_calls", r.oracle_calls},
          {"gd_calls", r.trace.gd_calls},
          {"inner_steps", r.trace.inner.size()},
          {"postcondition_violations", violations},
          {"outer_steps", outer},
          {"certificate", to_json(r.certificate)}};
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_or_inf(const json& j) { return j.is_null() ? HUGE_VAL : j.get<double>(); }

}  // namespace

json to_json(const ArenaReport& r) {
  json queries = json::array();
  for (const auto& q : r.queries) queries.push_back(to_json(q));
  json distinct = json::array();
  for (const auto& q : r.distinct) distinct.push_back(to_json(q));
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"x", to_json(c.x)},
                      {"value_error", c.value_error},
                      {"gradient_error", c.gradient_error},
                      {"h_gradient_error", c.h_gradient_error},
                      {"best_norm", c.best_norm},
                      {"random_combo_min", finite_or_null(c.random_combo_min)}});
  return {{"T", r.T},
          {"d", r.d},
          {"r", r.r},
          {"v", to_json(r.v)},
          {"queries", queries},
          {"distinct", distinct},
          {"checks", checks},
          {"start_gap", r.start_gap},
          {"sampled_min", r.sampled_min},
          {"verdict", r.verdict}};
}

ArenaReport arena_report_from_json(const json& j) {
  ArenaReport r;
  r.T = j.at("T").get<std::size_t>();
  r.d = j.at("d").get<Eigen::Index>();
  r.r = j.at("r").get<double>();
  r.v = vector_from_json(j.at("v"));
  for (const auto& q : j.at("queries")) r.queries.push_back(vector_from_json(q));
  for (const auto& q : j.at("distinct")) r.distinct.push_back(vector_from_json(q));
  for (const auto& c : j.at("checks")) {
    ArenaQueryCheck k;
    k.x = vector_from_json(c.at("x"));
    k.value_error = c.at("value_error").get<double>();
    k.gradient_error = c.at("gradient_error").get<double>();
    k.h_gradient_error = c.at("h_gradient_error").get<double>();
    k.best_norm = c.at("best_norm").get<double>();
    k.random_combo_min = number_or_inf(c.at("random_combo_min"));
    r.checks.push_back(std::move(k));
  }
  r.start_gap = j.at("start_gap").get<double>();
  r.sampled_min = j.at("sampled_min").get<double>();
  r.verdict = j.at("verdict").get<bool>();
  return r;
}

json to_json(const Claim1Report& r) {
  json dis = json::array();
  for (const auto& d : r.disagreements)
    dis.push_back({{"x", d.x},
                   {"certified", d.certified},
                   {"close", d.close},
                   {"certificate_norm", d.certificate_norm},
                   {"distance", finite_or_null(d.distance)}});
  return {{"points", r.points}, {"disagreements", dis}};
}

// ---------------------------------------------------------------------------

const char* const kScalingHeader = "instance,algo,delta,eps,seed,oracle_calls,success,final_norm,wall_time_ms";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  out.push_back(std::move(cur));
  return out;
}

std::string csv_line(const ScalingRow& r) {
  std::ostringstream os;
  os << csv_field(r.instance) << ',' << csv_field(r.algo) << ',' << format_double(r.delta) << ','
     << format_double(r.eps) << ',' << r.seed << ',' << r.oracle_calls << ',' << (r.success ? 1 : 0) << ','
     << format_double(r.final_norm) << ',' << format_double(r.wall_time_ms);
  return os.str();
}

ScalingRow parse_csv_line(const std::string& line) {
  const auto f = split_csv(line);
  if (f.size() != 9) throw std::invalid_argument("scaling row must have 9 fields");
  ScalingRow r;
  r.instance = f[0];
  r.algo = f[1];
  r.delta = std::stod(f[2]);
  r.eps = std::stod(f[3]);
  r.seed = std::stoull(f[4]);
  r.oracle_calls = std::stoull(f[5]);
  r.success = f[6] == "1";
  r.final_norm = std::stod(f[7]);
  r.wall_time_ms = std::stod(f[8]);
  return r;
}

}  // namespace nsopt

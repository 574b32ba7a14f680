#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nsopt/experiment.hpp"
#include "nsopt/io.hpp"

using namespace nsopt;

TEST_CASE("format_double round-trips") {
  RngStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("certificate JSON round-trip") {
  QuadraticInstance f(3, 1.0);
  RngStream rng(2);
  const CertifyResult c = certify(f, Vector::Ones(3), 0.2, 0.1, 10, rng);
  const json j = to_json(c.cert);
  const Certificate back = certificate_from_json(json::parse(j.dump()));
  CHECK(back.center == c.cert.center);
  CHECK(back.delta == c.cert.delta);
  CHECK(back.norm == c.cert.norm);
  CHECK(back.aggregate == c.cert.aggregate);
  REQUIRE(back.probes.size() == c.cert.probes.size());
  for (std::size_t i = 0; i < back.probes.size(); ++i) {
    CHECK(back.probes[i].point == c.cert.probes[i].point);
    CHECK(back.probes[i].weight == c.cert.probes[i].weight);
    CHECK(back.probes[i].subgrad == c.cert.probes[i].subgrad);
  }
  CHECK(verify_certificate(f, back).ok);
  CHECK_THROWS(certificate_from_json(json{{"center", {1}}}));
}

TEST_CASE("trace JSONL round-trip") {
  NemirovskiInstance f(4, 1.0 / 36.0);
  const RunResult r = ingd(f, Vector::Zero(4), 0.3, 0.3, ProbeStrategy::randomized(RngStream(3)), 200);
  std::stringstream ss;
  write_trace_jsonl(ss, r.trace.calls);
  const auto back = read_trace_jsonl(ss);
  REQUIRE(back.size() == r.trace.calls.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].x == r.trace.calls[i].x);
    CHECK(back[i].reply.value == r.trace.calls[i].reply.value);
    CHECK(back[i].reply.subgrad == r.trace.calls[i].reply.subgrad);
    CHECK(back[i].event == r.trace.calls[i].event);
  }
  std::stringstream again;
  write_trace_jsonl(again, back);
  std::stringstream first;
  write_trace_jsonl(first, r.trace.calls);
  CHECK(again.str() == first.str());

  std::stringstream bad("{\"t\":2,\"x\":[0],\"f\":0,\"g\":[0],\"event\":\"q\"}\n");
  CHECK_THROWS(read_trace_jsonl(bad));
}

TEST_CASE("experiment config round-trip and validation") {
  ExperimentConfig c;
  c.instance = parse_descriptor("tree1d:N=4,sigma=0110");
  c.algo = "gd-ingd-rand";
  c.delta = 0.05;
  c.eps = 0.2;
  c.seed = 123456789012345ULL;
  c.budget = 77;
  c.repetitions = 3;
  c.H = 2.5;
  c.start = Vector::Constant(1, 0.3);
  c.trace_path = "t.jsonl";
  CHECK(config_from_json(json::parse(to_json(c).dump())) == c);

  json j = to_json(c);
  j["bogus"] = 1;
  CHECK_THROWS(config_from_json(j));
  c.delta = 0;
  CHECK_THROWS(c.validate());
  c.delta = 0.1;
  c.repetitions = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("arena report round-trip") {
  ArenaOptions opts;
  opts.random_combos = 20;
  const ArenaReport rep = run_resisting(arena_e2_walker(), 3, opts);
  const ArenaReport back = arena_report_from_json(json::parse(to_json(rep).dump()));
  CHECK(back.T == rep.T);
  CHECK(back.d == rep.d);
  CHECK(back.r == rep.r);
  CHECK(back.v == rep.v);
  CHECK(back.verdict == rep.verdict);
  CHECK(back.queries == rep.queries);
  REQUIRE(back.checks.size() == rep.checks.size());
  for (std::size_t i = 0; i < back.checks.size(); ++i) {
    CHECK(back.checks[i].best_norm == rep.checks[i].best_norm);
    CHECK(back.checks[i].random_combo_min == rep.checks[i].random_combo_min);
  }
  CHECK(to_json(back).dump() == to_json(rep).dump());
}

TEST_CASE("scaling CSV rows") {
  CHECK(std::string(kScalingHeader) ==
        "instance,algo,delta,eps,seed,oracle_calls,success,final_norm,wall_time_ms");
  const ScalingRow r{"tree1d:N=6,rescaled=1", "ingd-det", 0.1, 0.05, 9, 1234, true, 0.049999999999, 12.5};
  const std::string line = csv_line(r);
  CHECK(line.rfind("\"tree1d:N=6,rescaled=1\",ingd-det,", 0) == 0);
  CHECK(parse_csv_line(line) == r);
  CHECK(split_csv("a,\"b,\"\"c\"\"\",d") == std::vector<std::string>{"a", "b,\"c\"", "d"});
  CHECK_THROWS(parse_csv_line("a,b,c"));
}

TEST_CASE("log-log slope and median") {
  const std::vector<double> x{1, 2, 4, 8};
  std::vector<double> y;
  for (double v : x) y.push_back(5 * v * v * v);
  CHECK(*loglog_slope(x, y) == doctest::Approx(3.0));
  CHECK_FALSE(loglog_slope({1}, {1}));
  CHECK_FALSE(loglog_slope({1, 1}, {1, 2}));
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("run_experiment dispatch") {
  ExperimentConfig c;
  c.instance = parse_descriptor("quadratic");
  c.algo = "ingd-det";
  const auto inst = instance_for(c);
  CHECK(run_experiment(c, *inst).status == RunStatus::certified_stationary);
  c.algo = "nope";
  CHECK_THROWS(run_experiment(c, *inst));
  c.algo = "ingd-rand";
  c.start = Vector::Zero(5);
  CHECK_THROWS_AS(run_experiment(c, *inst), DimensionMismatch);
}

// Command-line front end: run, certify, arena, scaling, claim1.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <chrono>

#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "nsopt/arena.hpp"
#include "nsopt/certifier.hpp"
#include "nsopt/experiment.hpp"
#include "nsopt/io.hpp"

using namespace nsopt;

namespace {

enum Exit { kOk = 0, kError = 1, kBudget = 2, kNotFound = 3 };

std::uint64_t env_seed() {
  const char* s = std::getenv("NSOPT_SEED");
  if (!s || !*s) return 0;
  return std::stoull(s);
}

Vector parse_point(const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    xs.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad coordinate '" + item + "'");
  }
  if (xs.empty()) throw std::invalid_argument("empty point");
  return Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string config;
  std::string instance;
  std::string algo;
  double delta = 0;
  double eps = 0;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  double H = 0;
  std::string start;
  std::string trace;
  std::string certificate;
};

ExperimentConfig build_config(const RunArgs& a, const CLI::App& app) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = config_from_json(read_json_file(a.config));
  else cfg.seed = env_seed();
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--instance")) cfg.instance = parse_descriptor(a.instance);
  if (cfg.instance.name.empty()) throw std::invalid_argument("an instance is required (--instance or config)");
  if (given("--algo")) cfg.algo = a.algo;
  if (given("--delta")) cfg.delta = a.delta;
  if (given("--eps")) cfg.eps = a.eps;
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--budget")) cfg.budget = a.budget;
  if (given("--H")) cfg.H = a.H;
  if (given("--start")) cfg.start = parse_point(a.start);
  if (given("--trace")) cfg.trace_path = a.trace;
  if (given("--certificate")) cfg.certificate_path = a.certificate;
  cfg.validate();
  return cfg;
}

int cmd_run(const RunArgs& a, const CLI::App& app) {
  ExperimentConfig cfg = build_config(a, app);
  const InstancePtr inst = instance_for(cfg);
  cfg.instance = inst->descriptor();
  const RunResult r = run_experiment(cfg, *inst);

  if (cfg.trace_path) {
    std::ostringstream os;
    write_trace_jsonl(os, r.trace.calls);
    write_text(*cfg.trace_path, os.str());
  }
  json doc = to_json(r, cfg);
  bool verified = false;
  InstanceOracle oracle(*inst);
  if (!r.certificate.probes.empty()) verified = verify_certificate(oracle, r.certificate).ok;
  doc["verified"] = verified;
  if (cfg.certificate_path) write_text(*cfg.certificate_path, doc.dump(2) + "\n");

  std::cout << "status " << to_string(r.status) << " oracle_calls " << r.oracle_calls << " final_norm "
            << format_double(r.g_final.norm()) << " verified " << (verified ? "yes" : "no") << "\n";
  if (r.status == RunStatus::certified_stationary) {
    if (!verified) {
      std::cerr << "error: certified run produced a certificate that does not verify\n";
      return kError;
    }
    return kOk;
  }
  if (r.status == RunStatus::inner_loop_cap) std::cerr << "inner loop reached its iteration cap\n";
  return kBudget;
}

// ---------------------------------------------------------------------------
// certify

struct CertifyArgs {
  RunArgs base;
  std::string point;
  std::string hints = "structural";
  long k = -1;
  std::string out;
};

int cmd_certify(const CertifyArgs& a, const CLI::App& app) {
  ExperimentConfig cfg;
  if (!a.base.config.empty()) cfg = config_from_json(read_json_file(a.base.config));
  else cfg.seed = env_seed();
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--instance")) cfg.instance = parse_descriptor(a.base.instance);
  if (cfg.instance.name.empty()) throw std::invalid_argument("an instance is required (--instance or config)");
  if (given("--delta")) cfg.delta = a.base.delta;
  if (given("--eps")) cfg.eps = a.base.eps;
  if (given("--seed")) cfg.seed = a.base.seed;
  if (cfg.delta < 0 || !(cfg.eps > 0)) throw std::invalid_argument("need delta >= 0 and eps > 0");

  const InstancePtr inst = instance_for(cfg);
  InstanceOracle oracle(*inst);
  std::vector<Vector> hints;
  Vector x = inst->default_start();
  if (a.hints == "witness") {
    const auto* m = dynamic_cast<const MahalanobisInstance*>(inst.get());
    if (!m) throw std::invalid_argument("witness hints exist only for the mahalanobis instance");
    const Certificate w = mahalanobis_witness(cfg.delta, m->eps(), m->dim());
    x = w.center;
    for (const auto& p : w.probes) hints.push_back(p.point);
  }
  if (given("--point")) x = parse_point(a.point);
  if (x.size() != inst->dim()) throw DimensionMismatch("point has the wrong dimension");
  if (a.hints == "structural") hints = inst->structural_hints(x, cfg.delta);
  else if (a.hints != "none" && a.hints != "witness") throw std::invalid_argument("unknown hints mode '" + a.hints + "'");

  // The witness already names its probes; random samples default off there.
  const std::size_t k = a.k >= 0                ? static_cast<std::size_t>(a.k)
                        : a.hints == "witness" ? 0
                                               : default_sample_count(inst->dim());
  RngStream rng(cfg.seed, 2);
  const CertifyResult c = certify(oracle, x, cfg.delta, cfg.eps, k, rng, hints);
  json doc = {{"instance", to_string(inst->descriptor())},
              {"delta", cfg.delta},
              {"eps", cfg.eps},
              {"found", c.found},
              {"norm", c.cert.norm},
              {"certificate", to_json(c.cert)}};
  if (!a.out.empty()) write_text(a.out, doc.dump(2) + "\n");
  std::cout << (c.found ? "certificate" : "not-found (no certificate at this sampling effort); best") << " norm "
            << format_double(c.cert.norm) << "\n";
  return c.found ? kOk : kNotFound;
}

// ---------------------------------------------------------------------------
// arena

class SubprocessAlgorithm {
 public:
  explicit SubprocessAlgorithm(std::string cmd) : cmd_(std::move(cmd)) {}

  void operator()(Oracle& oracle) const {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw std::runtime_error("pipe failed");
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[1]);
      close(from_child[0]);
      setenv("NSOPT_DIM", std::to_string(oracle.dim()).c_str(), 1);
      execl("/bin/sh", "sh", "-c", cmd_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    FILE* in = fdopen(from_child[0], "r");
    FILE* out = fdopen(to_child[1], "w");
    auto cleanup = [&] {
      std::fclose(out);
      std::fclose(in);
      kill(pid, SIGTERM);
      waitpid(pid, nullptr, 0);
    };
    try {
      char* line = nullptr;
      std::size_t cap = 0;
      while (getline(&line, &cap, in) > 0) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag.empty()) continue;
        if (tag != "QUERY") {
          std::free(line);
          throw ArenaProtocolError("expected 'QUERY x1 .. xd', got '" + tag + "'");
        }
        std::vector<double> xs;
        std::string tok;
        while (ls >> tok) {
          std::size_t used = 0;
          double v = 0;
          try {
            v = std::stod(tok, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != tok.size()) {
            std::free(line);
            throw ArenaProtocolError("unparsable coordinate '" + tok + "'");
          }
          xs.push_back(v);
        }
        OracleReply r;
        try {
          r = oracle.query(Eigen::Map<Vector>(xs.data(), static_cast<Eigen::Index>(xs.size())));
        } catch (...) {
          std::free(line);
          throw;
        }
        std::string reply = "VALUE " + format_double(r.value) + " GRAD";
        for (Eigen::Index i = 0; i < r.subgrad.size(); ++i) reply += " " + format_double(r.subgrad(i));
        std::fputs((reply + "\n").c_str(), out);
        std::fflush(out);
      }
      std::free(line);
    } catch (...) {
      cleanup();
      throw;
    }
    cleanup();
  }

 private:
  std::string cmd_;
};

struct ArenaArgs {
  std::string algo = "ingd-det";
  std::size_t T = 50;
  long d = 0;
  std::string cmd;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t combos = 1000;
  double step = 0.1;
};

int cmd_arena(const ArenaArgs& a, const CLI::App& app) {
  ArenaAlgorithm alg;
  if (a.algo == "ingd-det") alg = arena_ingd(kArenaDelta, kArenaEps, 1.0);
  else if (a.algo == "e2-walker") alg = arena_e2_walker();
  else if (a.algo == "repeat") alg = arena_repeat_point();
  else if (a.algo == "fixed-step") alg = arena_fixed_step(a.step);
  else if (a.algo == "subprocess") {
    if (a.cmd.empty()) throw std::invalid_argument("--cmd is required for the subprocess algorithm");
    setenv("NSOPT_T", std::to_string(a.T).c_str(), 1);
    alg = SubprocessAlgorithm(a.cmd);
  } else {
    throw std::invalid_argument("unknown arena algorithm '" + a.algo + "'");
  }
  ArenaOptions opts;
  if (a.d > 0) opts.dim = a.d;
  opts.seed = app.count("--seed") ? a.seed : env_seed();
  opts.random_combos = a.combos;
  const ArenaReport rep = run_resisting(alg, a.T, opts);
  if (!a.out.empty()) write_text(a.out, to_json(rep).dump(2) + "\n");
  double worst = HUGE_VAL;
  for (const auto& c : rep.checks) worst = std::min(worst, c.best_norm);
  std::cout << "verdict " << (rep.verdict ? "true" : "false") << " queries " << rep.queries.size() << " distinct "
            << rep.distinct.size() << " d " << rep.d << " r " << format_double(rep.r) << " min_best_norm "
            << format_double(worst) << "\n";
  return rep.verdict ? kOk : kError;
}

// ---------------------------------------------------------------------------
// scaling

struct ScalingArgs {
  std::vector<std::string> instances;
  std::vector<std::string> algos;
  std::string deltas = "0.1";
  std::string epss = "0.1";
  std::string seeds;
  std::size_t budget = 1000000;
  double H = 0;
  std::string csv;
  std::string summary;
  bool omit_timing = false;
};

int cmd_scaling(const ScalingArgs& a, const CLI::App& app) {
  if (a.instances.empty() || a.algos.empty()) throw std::invalid_argument("need at least one --instance and --algo");
  const std::vector<double> deltas = parse_list(a.deltas);
  const std::vector<double> epss = parse_list(a.epss);
  std::vector<std::uint64_t> seeds;
  if (a.seeds.empty()) seeds.push_back(env_seed());
  else
    for (double s : parse_list(a.seeds)) seeds.push_back(static_cast<std::uint64_t>(s));

  std::vector<ScalingRow> rows;
  for (const auto& inst_text : a.instances)
    for (const auto& algo : a.algos)
      for (double delta : deltas)
        for (double eps : epss)
          for (std::uint64_t seed : seeds) {
            ExperimentConfig cfg;
            cfg.instance = parse_descriptor(inst_text);
            cfg.algo = algo;
            cfg.delta = delta;
            cfg.eps = eps;
            cfg.seed = seed;
            cfg.budget = a.budget;
            if (app.count("--H")) cfg.H = a.H;
            const InstancePtr inst = instance_for(cfg);
            const auto t0 = std::chrono::steady_clock::now();
            const RunResult r = run_experiment(cfg, *inst);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back({inst_text, algo, delta, eps, seed, r.oracle_calls,
                            r.status == RunStatus::certified_stationary, r.g_final.norm(), a.omit_timing ? 0.0 : ms});
          }

  std::ostringstream csv;
  csv << kScalingHeader << "\n";
  for (const auto& r : rows) csv << csv_line(r) << "\n";
  if (!a.csv.empty()) write_text(a.csv, csv.str());
  else std::cout << csv.str();

  // Median oracle calls per cell, then slopes along each axis.
  std::map<std::tuple<std::string, std::string, double, double>, std::vector<double>> cells;
  for (const auto& r : rows) cells[{r.instance, r.algo, r.delta, r.eps}].push_back(static_cast<double>(r.oracle_calls));
  json groups = json::array();
  for (const auto& inst_text : a.instances)
    for (const auto& algo : a.algos) {
      json eps_slopes = json::array(), delta_slopes = json::array();
      for (double delta : deltas) {
        std::vector<double> x, y;
        for (double eps : epss) {
          x.push_back(1.0 / eps);
          y.push_back(median(cells[{inst_text, algo, delta, eps}]));
        }
        if (auto s = loglog_slope(x, y)) eps_slopes.push_back({{"delta", delta}, {"slope", *s}, {"points", x.size()}});
      }
      for (double eps : epss) {
        std::vector<double> x, y;
        for (double delta : deltas) {
          x.push_back(1.0 / delta);
          y.push_back(median(cells[{inst_text, algo, delta, eps}]));
        }
        if (auto s = loglog_slope(x, y)) delta_slopes.push_back({{"eps", eps}, {"slope", *s}, {"points", x.size()}});
      }
      groups.push_back({{"instance", inst_text}, {"algo", algo}, {"slope_vs_inv_eps", eps_slopes},
                        {"slope_vs_inv_delta", delta_slopes}});
    }
  std::size_t ok = 0;
  for (const auto& r : rows) ok += r.success ? 1 : 0;
  json summary = {{"rows", rows.size()}, {"successes", ok}, {"groups", groups}};
  if (!a.summary.empty()) write_text(a.summary, summary.dump(2) + "\n");
  std::cerr << "rows " << rows.size() << " successes " << ok << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// claim1

struct Claim1Args {
  std::string instance;
  double delta = 0.05;
  double eps = 0.3;
  std::size_t grid = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_claim1(const Claim1Args& a, const CLI::App& app) {
  const std::uint64_t seed = app.count("--seed") ? a.seed : env_seed();
  const InstancePtr inst = make_instance(parse_descriptor(a.instance), seed, a.eps);
  if (inst->dim() != 1 || !inst->exact_1d())
    throw std::invalid_argument("claim1 needs a one-dimensional piecewise-linear instance");
  const Claim1Report rep = check_claim1_equiv(*inst, a.delta, a.eps, a.grid);
  if (!a.out.empty()) {
    json doc = to_json(rep);
    doc["instance"] = to_string(inst->descriptor());
    write_text(a.out, doc.dump(2) + "\n");
  }
  std::cout << "instance " << to_string(inst->descriptor()) << " points " << rep.points << " disagreements "
            << rep.disagreements.size() << "\n";
  return rep.disagreements.empty() ? kOk : kError;
}

void add_run_options(CLI::App* sub, RunArgs& a) {
  sub->add_option("--config", a.config, "JSON config file");
  sub->add_option("--instance", a.instance, "instance descriptor, e.g. nemirovski:T=16,alpha=0.0069");
  sub->add_option("--delta", a.delta, "Goldstein radius");
  sub->add_option("--eps", a.eps, "target norm");
  sub->add_option("--seed", a.seed, "seed (default NSOPT_SEED or 0)");
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"Nonsmooth (delta, eps)-stationarity toolkit"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run one algorithm and write its trace and certificate");
  add_run_options(run_cmd, run);
  run_cmd->add_option("--algo", run.algo, "ingd-det | ingd-rand | gd-ingd-det | gd-ingd-rand");
  run_cmd->add_option("--budget", run.budget, "oracle-call budget");
  run_cmd->add_option("--H", run.H, "smoothness used by the bisection probe");
  run_cmd->add_option("--start", run.start, "start point, comma separated");
  run_cmd->add_option("--trace", run.trace, "JSONL trace output");
  run_cmd->add_option("--certificate", run.certificate, "certificate/result document output");

  CertifyArgs cert;
  auto* cert_cmd = app.add_subcommand("certify", "search for a (delta, eps) certificate at a point");
  add_run_options(cert_cmd, cert.base);
  cert_cmd->add_option("--point", cert.point, "point, comma separated (default: instance start)");
  cert_cmd->add_option("--hints", cert.hints, "none | structural | witness");
  cert_cmd->add_option("--k", cert.k, "number of uniform ball samples (default 16 * dim, 0 with witness hints)");
  cert_cmd->add_option("--out", cert.out, "certificate document output");

  ArenaArgs arena;
  auto* arena_cmd = app.add_subcommand("arena", "play the resisting oracle against a deterministic method");
  arena_cmd->add_option("--algo", arena.algo, "ingd-det | e2-walker | repeat | fixed-step | subprocess");
  arena_cmd->add_option("--T", arena.T, "number of queries");
  arena_cmd->add_option("--d", arena.d, "dimension (default T + 2)");
  arena_cmd->add_option("--cmd", arena.cmd, "shell command speaking the QUERY/VALUE line protocol");
  arena_cmd->add_option("--out", arena.out, "report output");
  arena_cmd->add_option("--seed", arena.seed, "sampling seed");
  arena_cmd->add_option("--combos", arena.combos, "random convex combinations per query");
  arena_cmd->add_option("--step", arena.step, "step of the fixed-step method");

  ScalingArgs scaling;
  auto* scaling_cmd = app.add_subcommand("scaling", "grid of runs with a CSV table and log-log slopes");
  scaling_cmd->add_option("--instance", scaling.instances, "instance descriptor (repeatable)")->take_all();
  scaling_cmd->add_option("--algo", scaling.algos, "algorithm (repeatable)")->take_all();
  scaling_cmd->add_option("--deltas", scaling.deltas, "comma separated");
  scaling_cmd->add_option("--epss", scaling.epss, "comma separated");
  scaling_cmd->add_option("--seeds", scaling.seeds, "comma separated (default NSOPT_SEED or 0)");
  scaling_cmd->add_option("--budget", scaling.budget, "oracle-call budget per run");
  scaling_cmd->add_option("--H", scaling.H, "smoothness used by the bisection probe");
  scaling_cmd->add_option("--csv", scaling.csv, "CSV output (default stdout)");
  scaling_cmd->add_option("--summary", scaling.summary, "summary JSON output");
  scaling_cmd->add_flag("--omit-timing", scaling.omit_timing, "write wall_time_ms as 0 for byte-stable tables");

  Claim1Args claim1;
  auto* claim1_cmd = app.add_subcommand("claim1", "compare Goldstein certificates with distance to eps-stationary points");
  claim1_cmd->add_option("--instance", claim1.instance, "1D instance descriptor")->required();
  claim1_cmd->add_option("--delta", claim1.delta, "radius");
  claim1_cmd->add_option("--eps", claim1.eps, "target norm");
  claim1_cmd->add_option("--grid", claim1.grid, "grid size");
  claim1_cmd->add_option("--seed", claim1.seed, "seed for random sigma");
  claim1_cmd->add_option("--out", claim1.out, "report output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*run_cmd) return cmd_run(run, *run_cmd);
    if (*cert_cmd) return cmd_certify(cert, *cert_cmd);
    if (*arena_cmd) return cmd_arena(arena, *arena_cmd);
    if (*scaling_cmd) return cmd_scaling(scaling, *scaling_cmd);
    if (*claim1_cmd) return cmd_claim1(claim1, *claim1_cmd);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

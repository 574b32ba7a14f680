#include "nsopt/experiment.hpp"

#include <algorithm>
#include <cmath>

namespace nsopt {

bool is_known_algorithm(const std::string& algo) {
  return algo == "ingd-det" || algo == "ingd-rand" || algo == "gd-ingd-det" || algo == "gd-ingd-rand";
}

ProbeStrategy strategy_for(const ExperimentConfig& cfg, const Instance& inst) {
  const bool det = cfg.algo == "ingd-det" || cfg.algo == "gd-ingd-det";
  if (det) {
    if (cfg.H) return ProbeStrategy::deterministic(*cfg.H);
    // Affine instances report H = 0; any positive H is valid for them.
    const double h = inst.meta().smoothness.value_or(1.0);
    return ProbeStrategy::deterministic(h > 0 ? h : 1.0);
  }
  return ProbeStrategy::randomized(RngStream(cfg.seed, 1));
}

InstancePtr instance_for(const ExperimentConfig& cfg) { return make_instance(cfg.instance, cfg.seed, cfg.eps); }

RunResult run_experiment(const ExperimentConfig& cfg, const Instance& inst) {
  cfg.validate();
  if (!is_known_algorithm(cfg.algo)) throw std::invalid_argument("unknown algorithm '" + cfg.algo + "'");
  const Vector x1 = cfg.start ? *cfg.start : inst.default_start();
  if (x1.size() != inst.dim()) throw DimensionMismatch("start point has the wrong dimension");
  InstanceOracle oracle(inst);
  IngdOptions opts;
  opts.lipschitz = inst.meta().lipschitz;
  if (cfg.algo.rfind("gd-", 0) == 0) {
    const double R = inst.meta().domain_bound.value_or(1.0);
    return gd_then_ingd(oracle, x1, R, inst.meta().lipschitz, cfg.delta, cfg.eps, strategy_for(cfg, inst), cfg.budget,
                        opts);
  }
  return ingd(oracle, x1, cfg.delta, cfg.eps, strategy_for(cfg, inst), cfg.budget, opts);
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) return std::nullopt;
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (!(sxx > 0)) return std::nullopt;
  return sxy / sxx;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace nsopt

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsopt/algorithms.hpp"
#include "nsopt/instances.hpp"
#include "nsopt/io.hpp"

namespace nsopt {

/// Known algorithm names: ingd-det, ingd-rand, gd-ingd-det, gd-ingd-rand.
bool is_known_algorithm(const std::string& algo);

/// Deterministic strategies use H from the config, else the instance's
/// smoothness, else 1.  Randomized ones draw from stream 1 of the seed.
ProbeStrategy strategy_for(const ExperimentConfig& cfg, const Instance& inst);

InstancePtr instance_for(const ExperimentConfig& cfg);

RunResult run_experiment(const ExperimentConfig& cfg, const Instance& inst);

/// Least-squares slope of log(y) against log(x); nullopt with fewer than two
/// distinct x values or nonpositive data.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

}  // namespace nsopt

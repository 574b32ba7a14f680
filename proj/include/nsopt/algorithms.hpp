#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsopt/certificate.hpp"
#include "nsopt/core.hpp"

namespace nsopt {

enum class ProbeKind { deterministic_binary_search, randomized_segment };

struct ProbeStrategy {
  ProbeKind kind = ProbeKind::randomized_segment;
  std::optional<double> H;
  std::optional<RngStream> rng;

  static ProbeStrategy deterministic(double H);
  static ProbeStrategy randomized(RngStream rng);
  /// Throws std::invalid_argument if the kind lacks its required field.
  void validate() const;
};

/// Outcome of one segment probe.  `calls` counts only queries made by the
/// probe itself; `postcondition_ok` is <grad(y), g> <= ||g||^2 / 2.
struct ProbeResult {
  Vector point;
  OracleReply reply;
  std::size_t calls = 0;
  bool postcondition_ok = false;
};

/// Bisection on the segment [x, x - delta g/||g||].  Replies already known at
/// the two endpoints may be passed in to avoid re-querying them.
ProbeResult binary_search_probe(Oracle& oracle, const Vector& x, const Vector& g, double delta, double H,
                                const OracleReply* at_x = nullptr, const OracleReply* at_end = nullptr);
Vector binary_search(Oracle& oracle, const Vector& x, const Vector& g, double delta, double H);

/// y = x - (t/||g||) g with t uniform on (0, delta]; one oracle call.
ProbeResult random_segment_probe_detail(Oracle& oracle, const Vector& x, const Vector& g, double delta,
                                        RngStream& rng);
Vector random_segment_probe(Oracle& oracle, const Vector& x, const Vector& g, double delta, RngStream& rng);

// ---------------------------------------------------------------------------

struct InnerStep {
  double norm_before = 0.0;
  double norm_after = 0.0;
  double lambda = 1.0;
  bool postcondition_ok = true;
  std::size_t probe_calls = 0;
};

enum class MinNormExit { small_norm, descent };

struct MinNormOutcome {
  Vector g;
  /// g as a convex combination of subgradients at points of the delta-ball.
  Certificate provenance;
  std::vector<InnerStep> steps;
  MinNormExit exit = MinNormExit::small_norm;
  OracleReply at_x;
  /// x - delta g/||g|| and its reply, when the exit is a descent.
  std::optional<Vector> next_point;
  std::optional<OracleReply> next_reply;
};

class InnerLoopCap : public std::runtime_error {
 public:
  explicit InnerLoopCap(MinNormOutcome best);
  const MinNormOutcome& best() const { return best_; }

 private:
  MinNormOutcome best_;
};

std::size_t default_inner_cap(double L, double eps);

MinNormOutcome min_norm_loop(Oracle& oracle, const Vector& x, double delta, double eps, ProbeStrategy& strategy,
                             std::size_t k_max, const OracleReply* at_x = nullptr);

// ---------------------------------------------------------------------------

enum class RunStatus { certified_stationary, budget_exhausted, inner_loop_cap };
std::string to_string(RunStatus s);

struct OuterStep {
  double f_before = 0.0;
  double f_after = 0.0;
  double g_norm = 0.0;
};

struct InnerStepRecord {
  std::size_t outer = 0;
  InnerStep step;
};

struct RunTrace {
  std::vector<QueryRecord> calls;
  std::vector<OuterStep> outer;
  std::vector<InnerStepRecord> inner;
  std::size_t gd_calls = 0;
};

struct RunResult {
  Vector point;
  RunStatus status = RunStatus::budget_exhausted;
  Vector g_final;
  /// Provenance of g_final at `point` (empty probes if none was formed).
  Certificate certificate;
  RunTrace trace;
  std::size_t oracle_calls = 0;
};

struct IngdOptions {
  double lipschitz = 1.0;
  /// Zero means default_inner_cap(lipschitz, eps).
  std::size_t k_max = 0;
  bool keep_records = true;
};

RunResult ingd(Oracle& oracle, const Vector& x1, double delta, double eps, ProbeStrategy strategy,
               std::size_t budget, const IngdOptions& opts = {});

/// Projected subgradient descent on the ball B_R(x1) with step R/(L sqrt(T1));
/// returns the average of the T1 iterates.
Vector subgradient_descent_avg(Oracle& oracle, const Vector& x1, double R, double L, std::size_t T1);

std::size_t pipeline_gd_iterations(double R, double L, double delta, double eps);

RunResult gd_then_ingd(Oracle& oracle, const Vector& x1, double R, double L, double delta, double eps,
                       ProbeStrategy strategy, std::size_t budget, const IngdOptions& opts = {});

}  // namespace nsopt

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsopt/core.hpp"

namespace nsopt {

class ArenaProtocolError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Serves the uninformative reply (0, e1/7) to every query, up to a budget.
class ResistingOracle : public Oracle {
 public:
  ResistingOracle(Eigen::Index dim, std::size_t budget);
  OracleReply query(const Vector& x) override;
  Eigen::Index dim() const override { return dim_; }

  const std::vector<Vector>& queries() const { return queries_; }
  static OracleReply served_reply(Eigen::Index dim);

 private:
  Eigen::Index dim_;
  std::size_t budget_;
  std::vector<Vector> queries_;
};

/// A deterministic first-order method: it keeps querying until the oracle
/// throws BudgetExhausted.
using ArenaAlgorithm = std::function<void(Oracle&)>;

ArenaAlgorithm arena_e2_walker();
ArenaAlgorithm arena_repeat_point();
ArenaAlgorithm arena_fixed_step(double step);
ArenaAlgorithm arena_ingd(double delta, double eps, double H);

struct ArenaQueryCheck {
  Vector x;
  double value_error = 0.0;
  double gradient_error = 0.0;
  double h_gradient_error = 0.0;
  double best_norm = 0.0;
  double random_combo_min = 0.0;
};

struct ArenaOptions {
  std::optional<Eigen::Index> dim;   // default T + 2
  std::optional<std::size_t> samples;  // default 16 * dim per query
  std::size_t random_combos = 1000;
  std::uint64_t seed = 0;
};

struct ArenaReport {
  std::size_t T = 0;
  std::vector<Vector> queries;   // as served, in order
  std::vector<Vector> distinct;
  Eigen::Index d = 0;
  double r = 0.0;
  Vector v;
  std::vector<ArenaQueryCheck> checks;
  double start_gap = 0.0;        // f(x_1) - inf f, inf f = -1/7
  double sampled_min = 0.0;      // lowest sampled value of f
  bool verdict = false;
};

inline constexpr double kArenaDelta = 1.0 / 7.0;
inline constexpr double kArenaEps = 1.0 / 252.0;

ArenaReport run_resisting(const ArenaAlgorithm& algorithm, std::size_t T, const ArenaOptions& opts = {});

}  // namespace nsopt

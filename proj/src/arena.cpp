#include "nsopt/arena.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsopt/algorithms.hpp"
#include "nsopt/certifier.hpp"
#include "nsopt/instances.hpp"

namespace nsopt {

ResistingOracle::ResistingOracle(Eigen::Index dim, std::size_t budget) : dim_(dim), budget_(budget) {
  if (dim < 3) throw std::invalid_argument("arena: dimension must be at least 3");
}

OracleReply ResistingOracle::served_reply(Eigen::Index dim) {
  return {0.0, unit_vector(dim, 0) / 7.0, std::nullopt};
}

OracleReply ResistingOracle::query(const Vector& x) {
  if (x.size() != dim_)
    throw ArenaProtocolError("query of dimension " + std::to_string(x.size()) + ", expected " + std::to_string(dim_));
  if (!all_finite(x)) throw ArenaProtocolError("non-finite query");
  if (queries_.size() >= budget_) throw BudgetExhausted(budget_);
  queries_.push_back(x);
  return served_reply(dim_);
}

ArenaAlgorithm arena_e2_walker() {
  return [](Oracle& oracle) {
    for (long t = 1;; ++t) oracle.query(static_cast<double>(t) * unit_vector(oracle.dim(), 1));
  };
}

ArenaAlgorithm arena_repeat_point() {
  return [](Oracle& oracle) {
    const Vector x = unit_vector(oracle.dim(), 1);
    for (;;) oracle.query(x);
  };
}

ArenaAlgorithm arena_fixed_step(double step) {
  return [step](Oracle& oracle) {
    Vector x = Vector::Zero(oracle.dim());
    for (;;) x -= step * oracle.query(x).subgrad;
  };
}

ArenaAlgorithm arena_ingd(double delta, double eps, double H) {
  return [=](Oracle& oracle) {
    ingd(oracle, Vector::Zero(oracle.dim()), delta, eps, ProbeStrategy::deterministic(H),
         std::numeric_limits<std::size_t>::max());
  };
}

ArenaReport run_resisting(const ArenaAlgorithm& algorithm, std::size_t T, const ArenaOptions& opts) {
  if (T == 0) throw std::invalid_argument("arena: T must be positive");
  ArenaReport rep;
  rep.T = T;
  rep.d = opts.dim ? *opts.dim : static_cast<Eigen::Index>(T) + 2;
  ResistingOracle oracle(rep.d, T);
  try {
    algorithm(oracle);
  } catch (const BudgetExhausted&) {
  }
  rep.queries = oracle.queries();
  if (rep.queries.empty()) throw std::invalid_argument("arena: the algorithm made no queries");

  ResistingInstance f(rep.queries, rep.d);
  rep.distinct = f.queries();
  rep.r = f.radius();
  rep.v = f.direction();

  const OracleReply served = ResistingOracle::served_reply(rep.d);
  const Vector e1 = unit_vector(rep.d, 0);
  const std::size_t k = opts.samples ? *opts.samples : default_sample_count(rep.d);
  RngStream rng(opts.seed, 0xA7E4A);

  bool ok = true;
  rep.sampled_min = HUGE_VAL;
  for (const auto& x : rep.distinct) {
    ArenaQueryCheck c;
    c.x = x;
    const OracleReply at = f.eval(x);
    c.value_error = std::abs(at.value - served.value);
    c.gradient_error = (at.subgrad - served.subgrad).norm();
    c.h_gradient_error = (f.eval_h(x).subgrad - e1).norm();

    RngStream local = rng.split(static_cast<std::uint64_t>(&x - rep.distinct.data()));
    const GoldsteinSample sample = sample_goldstein(f, x, kArenaDelta, k, local, f.structural_hints(x, kArenaDelta));
    const Certificate best = certificate_from_sample(x, kArenaDelta, sample);
    c.best_norm = best.norm;
    for (const auto& p : sample.points) rep.sampled_min = std::min(rep.sampled_min, f.eval(p).value);

    c.random_combo_min = HUGE_VAL;
    if (opts.random_combos > 0) {
      const Eigen::Index n = static_cast<Eigen::Index>(sample.subgrads.size());
      Matrix G(rep.d, n);
      for (Eigen::Index i = 0; i < n; ++i) G.col(i) = sample.subgrads[static_cast<std::size_t>(i)];
      Matrix W(n, static_cast<Eigen::Index>(opts.random_combos));
      for (Eigen::Index j = 0; j < W.cols(); ++j) {
        const std::vector<double> w = local.simplex_weights(static_cast<std::size_t>(n));
        W.col(j) = Eigen::Map<const Vector>(w.data(), n);
      }
      c.random_combo_min = (G * W).colwise().norm().minCoeff();
    }
    ok = ok && c.value_error < 1e-9 && c.gradient_error < 1e-9 && c.h_gradient_error < 1e-9 &&
         c.best_norm > kArenaEps && (opts.random_combos == 0 || c.random_combo_min > kArenaEps);
    rep.checks.push_back(std::move(c));
  }
  for (double t : {0.5, 1.0, 7.0, 100.0}) rep.sampled_min = std::min(rep.sampled_min, f.eval(-t * rep.v).value);
  rep.start_gap = f.eval(rep.queries.front()).value + 1.0 / 7.0;
  ok = ok && rep.start_gap <= 1.0 && rep.sampled_min >= -1.0 / 7.0 - 1e-12;
  rep.verdict = ok;
  return rep;
}

}  // namespace nsopt

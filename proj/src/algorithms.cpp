#include "nsopt/algorithms.hpp"

#include <cmath>

namespace nsopt {

ProbeStrategy ProbeStrategy::deterministic(double H) {
  ProbeStrategy s;
  s.kind = ProbeKind::deterministic_binary_search;
  s.H = H;
  return s;
}

ProbeStrategy ProbeStrategy::randomized(RngStream rng) {
  ProbeStrategy s;
  s.kind = ProbeKind::randomized_segment;
  s.rng = std::move(rng);
  return s;
}

void ProbeStrategy::validate() const {
  if (kind == ProbeKind::deterministic_binary_search && !(H && *H > 0))
    throw std::invalid_argument("deterministic probe strategy needs a positive H");
  if (kind == ProbeKind::randomized_segment && !rng)
    throw std::invalid_argument("randomized probe strategy needs an rng stream");
}

namespace {

void require_direction(const Vector& x, const Vector& g, const char* where) {
  require_same_dim(x, g, where);
  if (!(g.norm() > 0)) throw std::invalid_argument(std::string(where) + ": zero direction");
}

QueryLedger* as_ledger(Oracle& oracle) { return dynamic_cast<QueryLedger*>(&oracle); }

void label(Oracle& oracle, const char* event) {
  if (auto* l = as_ledger(oracle)) l->set_event(event);
}

bool postcondition(const OracleReply& r, const Vector& g) { return r.subgrad.dot(g) <= 0.5 * g.squaredNorm(); }

}  // namespace

ProbeResult binary_search_probe(Oracle& oracle, const Vector& x, const Vector& g, double delta, double H,
                                const OracleReply* at_x, const OracleReply* at_end) {
  require_direction(x, g, "binary_search");
  if (!(delta > 0) || !(H > 0)) throw std::invalid_argument("binary_search: delta and H must be positive");
  const double gn = g.norm();
  const Vector gbar = (delta / gn) * g;
  const double width = gn / (8.0 * delta * H);

  ProbeResult out;
  auto ask = [&](double t) {
    ++out.calls;
    return oracle.query(x - t * gbar);
  };
  double a = 0.0;
  double b = 1.0;
  OracleReply fa = at_x ? *at_x : ask(a);
  OracleReply fb = at_end ? *at_end : ask(b);
  while (b - a > width) {
    const double mid = 0.5 * (a + b);
    OracleReply fm = ask(mid);
    if (fm.value >= 0.5 * (fa.value + fb.value)) {
      b = mid;
      fb = std::move(fm);
    } else {
      a = mid;
      fa = std::move(fm);
    }
  }
  out.point = x - a * gbar;
  out.reply = std::move(fa);
  out.postcondition_ok = postcondition(out.reply, g);
  return out;
}

Vector binary_search(Oracle& oracle, const Vector& x, const Vector& g, double delta, double H) {
  return binary_search_probe(oracle, x, g, delta, H).point;
}

ProbeResult random_segment_probe_detail(Oracle& oracle, const Vector& x, const Vector& g, double delta,
                                        RngStream& rng) {
  require_direction(x, g, "random_segment_probe");
  const double t = delta * (1.0 - rng.uniform());
  ProbeResult out;
  out.point = x - (t / g.norm()) * g;
  out.reply = oracle.query(out.point);
  out.calls = 1;
  out.postcondition_ok = postcondition(out.reply, g);
  return out;
}

Vector random_segment_probe(Oracle& oracle, const Vector& x, const Vector& g, double delta, RngStream& rng) {
  return random_segment_probe_detail(oracle, x, g, delta, rng).point;
}

// ---------------------------------------------------------------------------

InnerLoopCap::InnerLoopCap(MinNormOutcome best)
    : std::runtime_error("min-norm loop reached its iteration cap"), best_(std::move(best)) {}

std::size_t default_inner_cap(double L, double eps) {
  return static_cast<std::size_t>(std::ceil(64.0 * L * L / (eps * eps)));
}

MinNormOutcome min_norm_loop(Oracle& oracle, const Vector& x, double delta, double eps, ProbeStrategy& strategy,
                             std::size_t k_max, const OracleReply* at_x) {
  if (!(delta > 0) || !(eps > 0)) throw std::invalid_argument("min_norm_loop: delta and eps must be positive");
  strategy.validate();
  QueryLedger* ledger = as_ledger(oracle);

  MinNormOutcome out;
  if (at_x) {
    out.at_x = *at_x;
  } else {
    label(oracle, "minnorm:x");
    out.at_x = oracle.query(x);
  }
  require_same_dim(x, out.at_x.subgrad, "min_norm_loop");
  out.g = out.at_x.subgrad;
  out.provenance.center = x;
  out.provenance.delta = delta;
  out.provenance.probes.push_back({x, 1.0, out.at_x.subgrad});

  auto finish = [&] {
    refresh_aggregate(out.provenance);
    return out;
  };

  for (std::size_t k = 0;; ++k) {
    const double gn = out.g.norm();
    if (gn <= eps) {
      out.exit = MinNormExit::small_norm;
      return finish();
    }
    const Vector z = x - (delta / gn) * out.g;
    label(oracle, "minnorm:guard");
    OracleReply rz = oracle.query(z);
    if (out.at_x.value - rz.value > 0.25 * delta * gn) {
      out.exit = MinNormExit::descent;
      out.next_point = z;
      out.next_reply = std::move(rz);
      return finish();
    }
    if (k >= k_max) throw InnerLoopCap(finish());

    ProbeResult probe;
    if (strategy.kind == ProbeKind::deterministic_binary_search) {
      label(oracle, "probe:bisect");
      probe = binary_search_probe(oracle, x, out.g, delta, *strategy.H, &out.at_x, &rz);
    } else {
      label(oracle, "probe:random");
      probe = random_segment_probe_detail(oracle, x, out.g, delta, *strategy.rng);
    }
    if (!probe.postcondition_ok && ledger && probe.calls > 0 && !ledger->records().empty())
      ledger->records().back().event += ":postcondition-violated";

    const Combination c = min_norm_combination(out.g, probe.reply.subgrad);
    InnerStep step;
    step.norm_before = gn;
    step.lambda = c.lambda;
    step.postcondition_ok = probe.postcondition_ok;
    step.probe_calls = probe.calls;
    if (c.lambda == 0.0) {
      out.provenance.probes.clear();
    } else {
      for (auto& p : out.provenance.probes) p.weight *= c.lambda;
    }
    if (c.lambda < 1.0) out.provenance.probes.push_back({probe.point, 1.0 - c.lambda, probe.reply.subgrad});
    out.g = c.v;
    step.norm_after = out.g.norm();
    out.steps.push_back(step);
  }
}

// ---------------------------------------------------------------------------

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::certified_stationary:
      return "certified-stationary";
    case RunStatus::budget_exhausted:
      return "budget-exhausted";
    case RunStatus::inner_loop_cap:
      return "inner-loop-cap";
  }
  return "unknown";
}

namespace {

void run_ingd(QueryLedger& ledger, const Vector& x1, double delta, double eps, ProbeStrategy& strategy,
              const IngdOptions& opts, RunResult& result) {
  const std::size_t k_max = opts.k_max ? opts.k_max : default_inner_cap(opts.lipschitz, eps);
  Vector x = x1;
  std::optional<OracleReply> reply_x;
  result.point = x;
  result.g_final = Vector::Zero(x.size());
  result.certificate.center = x;
  result.certificate.delta = delta;
  refresh_aggregate(result.certificate);

  auto absorb = [&](const MinNormOutcome& m, std::size_t outer) {
    for (const auto& s : m.steps) result.trace.inner.push_back({outer, s});
    result.point = x;
    result.g_final = m.g;
    result.certificate = m.provenance;
  };

  for (std::size_t outer = 0;; ++outer) {
    MinNormOutcome m;
    try {
      m = min_norm_loop(ledger, x, delta, eps, strategy, k_max, reply_x ? &*reply_x : nullptr);
    } catch (const BudgetExhausted&) {
      result.status = RunStatus::budget_exhausted;
      result.point = x;
      result.certificate = Certificate{};
      result.certificate.center = x;
      result.certificate.delta = delta;
      if (reply_x) {
        result.g_final = reply_x->subgrad;
        result.certificate.probes.push_back({x, 1.0, reply_x->subgrad});
      }
      refresh_aggregate(result.certificate);
      return;
    } catch (const InnerLoopCap& cap) {
      absorb(cap.best(), outer);
      result.status = RunStatus::inner_loop_cap;
      return;
    }
    absorb(m, outer);
    if (m.exit == MinNormExit::small_norm) {
      result.status = RunStatus::certified_stationary;
      return;
    }
    result.trace.outer.push_back({m.at_x.value, m.next_reply->value, m.g.norm()});
    x = *m.next_point;
    reply_x = std::move(m.next_reply);
  }
}

void finalize(QueryLedger& ledger, RunResult& result) {
  result.oracle_calls = ledger.count();
  result.trace.calls = std::move(ledger.records());
}

}  // namespace

RunResult ingd(Oracle& oracle, const Vector& x1, double delta, double eps, ProbeStrategy strategy,
               std::size_t budget, const IngdOptions& opts) {
  if (budget == 0) throw std::invalid_argument("ingd: budget must be positive");
  if (!(delta > 0) || !(eps > 0)) throw std::invalid_argument("ingd: delta and eps must be positive");
  strategy.validate();
  QueryLedger ledger(oracle, budget, opts.keep_records);
  RunResult result;
  run_ingd(ledger, x1, delta, eps, strategy, opts, result);
  finalize(ledger, result);
  return result;
}

Vector subgradient_descent_avg(Oracle& oracle, const Vector& x1, double R, double L, std::size_t T1) {
  if (T1 == 0) return x1;
  if (!(L > 0) || R < 0) throw std::invalid_argument("subgradient_descent_avg: need L > 0 and R >= 0");
  const double eta = R / (L * std::sqrt(static_cast<double>(T1)));
  label(oracle, "gd");
  Vector x = x1;
  Vector sum = Vector::Zero(x1.size());
  for (std::size_t t = 0; t < T1; ++t) {
    sum += x;
    if (t + 1 == T1) break;
    const OracleReply r = oracle.query(x);
    require_same_dim(x, r.subgrad, "subgradient_descent_avg");
    x -= eta * r.subgrad;
    const Vector off = x - x1;
    const double dist = off.norm();
    if (dist > R) x = x1 + (R / dist) * off;
  }
  return sum / static_cast<double>(T1);
}

std::size_t pipeline_gd_iterations(double R, double L, double delta, double eps) {
  const double t = L * L * std::cbrt(R * R) / (eps * eps * std::cbrt(delta * delta));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t)));
}

RunResult gd_then_ingd(Oracle& oracle, const Vector& x1, double R, double L, double delta, double eps,
                       ProbeStrategy strategy, std::size_t budget, const IngdOptions& opts) {
  if (budget == 0) throw std::invalid_argument("gd_then_ingd: budget must be positive");
  if (!(delta > 0) || !(eps > 0)) throw std::invalid_argument("gd_then_ingd: delta and eps must be positive");
  strategy.validate();
  QueryLedger ledger(oracle, budget, opts.keep_records);
  RunResult result;
  result.point = x1;
  result.g_final = Vector::Zero(x1.size());
  result.certificate.center = x1;
  result.certificate.delta = delta;
  refresh_aggregate(result.certificate);

  Vector start;
  try {
    start = subgradient_descent_avg(ledger, x1, R, L, pipeline_gd_iterations(R, L, delta, eps));
  } catch (const BudgetExhausted&) {
    result.status = RunStatus::budget_exhausted;
    finalize(ledger, result);
    result.trace.gd_calls = result.oracle_calls;
    return result;
  }
  result.trace.gd_calls = ledger.count();
  IngdOptions inner = opts;
  inner.lipschitz = L;
  run_ingd(ledger, start, delta, eps, strategy, inner, result);
  finalize(ledger, result);
  return result;
}

}  // namespace nsopt

#include <doctest.h>

#include <cmath>

#include "nsopt/algorithms.hpp"
#include "nsopt/certifier.hpp"
#include "nsopt/instances.hpp"

using namespace nsopt;
using doctest::Approx;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST_CASE("binary_search on a linear function meets the postcondition") {
  LinearInstance f(1, 0.1);
  for (double x : {-3.0, 0.0, 2.5}) {
    const ProbeResult p = binary_search_probe(f, scalar(x), scalar(1), 1.0, 1.0);
    CHECK(p.reply.subgrad(0) == Approx(0.1));
    CHECK(p.postcondition_ok);
  }
}

TEST_CASE("binary_search hand trace on x^2/2") {
  QuadraticInstance f(1, 1.0);
  const ProbeResult p = binary_search_probe(f, scalar(0.2), scalar(1), 1.0, 1.0);
  CHECK(p.point(0) == Approx(-0.675));
  CHECK(p.reply.subgrad(0) == Approx(-0.675));
  CHECK(p.postcondition_ok);
  CHECK(p.calls == 5);  // two endpoints plus three bisections
  CHECK(binary_search(f, scalar(0.2), scalar(1), 1.0, 1.0)(0) == Approx(-0.675));
}

TEST_CASE("binary_search call count bound") {
  QuadraticInstance f(2, 1.0);
  RngStream rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vector x = rng.gaussian_vector(2);
    const Vector g = rng.gaussian_vector(2) * rng.uniform(0.01, 2.0);
    const double delta = rng.uniform(0.05, 1.0);
    const double H = rng.uniform(0.5, 4.0);
    const ProbeResult p = binary_search_probe(f, x, g, delta, H);
    const double bound = std::ceil(std::log2(std::max(1.0, 8 * delta * H / g.norm()))) + 2;
    CHECK(static_cast<double>(p.calls) <= bound);
    CHECK((p.point - x).norm() <= delta * (1 + 1e-12));
  }
  CHECK_THROWS(binary_search(f, Vector::Zero(2), Vector::Zero(2), 1.0, 1.0));
}

TEST_CASE("random_segment_probe") {
  QuadraticInstance f(2, 1.0);
  const Vector x = Vector::Ones(2);
  const Vector g = Vector::Constant(2, 3.0);
  RngStream a(5), b(5);
  for (int i = 0; i < 200; ++i) {
    const Vector y = random_segment_probe(f, x, g, 0.3, a);
    CHECK(y == random_segment_probe(f, x, g, 0.3, b));
    CHECK((y - x).norm() <= 0.3 * (1 + 1e-15));
    CHECK((y - x).norm() > 0);
  }
  RngStream c(5);
  CHECK((random_segment_probe(f, x, g, 1e-12, c) - x).norm() <= 1e-12);
}

TEST_CASE("min_norm_loop on |x| at the kink") {
  auto f = make_abs_instance();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ProbeStrategy s = ProbeStrategy::randomized(RngStream(seed));
    const MinNormOutcome m = min_norm_loop(*f, scalar(0), 0.5, 0.1, s, 100);
    CHECK(m.exit == MinNormExit::small_norm);
    CHECK(m.g.norm() == 0.0);
    REQUIRE(m.steps.size() == 1);
    CHECK(m.steps[0].lambda == Approx(0.5));
    CHECK(verify_certificate(*f, m.provenance).ok);
    // The probe landed on the negative side, slope -1.
    bool negative = false;
    for (const auto& p : m.provenance.probes) negative = negative || (p.point(0) < 0 && p.subgrad(0) == -1.0);
    CHECK(negative);
  }
}

TEST_CASE("bisection at the kink of |x| stays at x and flags the postcondition") {
  // The midpoint test never moves a off 0 on a kink, so the probe returns x
  // itself and the inner loop cannot make progress.
  auto f = make_abs_instance();
  const ProbeResult p = binary_search_probe(*f, scalar(0), scalar(1), 0.5, 1.0);
  CHECK(p.point(0) == 0.0);
  CHECK_FALSE(p.postcondition_ok);

  QueryLedger ledger(*f);
  ProbeStrategy s = ProbeStrategy::deterministic(1.0);
  CHECK_THROWS_AS(min_norm_loop(ledger, scalar(0), 0.5, 0.1, s, 3), InnerLoopCap);
  bool flagged = false;
  for (const auto& r : ledger.records()) flagged = flagged || r.event == "probe:bisect:postcondition-violated";
  CHECK(flagged);
}

TEST_CASE("min_norm_loop exits on descent for x^2/2 at 2") {
  QuadraticInstance f(1, 2.0);
  QueryLedger ledger(f);
  ProbeStrategy s = ProbeStrategy::deterministic(1.0);
  const MinNormOutcome m = min_norm_loop(ledger, scalar(2), 0.1, 0.1, s, 100);
  CHECK(m.exit == MinNormExit::descent);
  CHECK(m.g(0) == 2.0);
  CHECK(m.steps.empty());
  // One call at x, one guard call at x - delta.
  CHECK(ledger.count() == 2);
  CHECK(m.at_x.value - m.next_reply->value == Approx(0.195));
}

TEST_CASE("min_norm_loop norms never increase and provenance verifies") {
  NemirovskiInstance f(6, 1.0 / 54.0);
  RngStream rng(19);
  for (int t = 0; t < 20; ++t) {
    ProbeStrategy s = ProbeStrategy::randomized(rng.split(t));
    const Vector x = 0.3 * rng.gaussian_vector(6);
    try {
      const MinNormOutcome m = min_norm_loop(f, x, 0.3, 0.05, s, 500);
      for (const auto& st : m.steps) CHECK(st.norm_after <= st.norm_before + 1e-15);
      CHECK((m.provenance.aggregate - m.g).norm() < 1e-10);
      CHECK(verify_certificate(f, m.provenance).ok);
    } catch (const InnerLoopCap& cap) {
      CHECK(verify_certificate(f, cap.best().provenance).ok);
    }
  }
}

TEST_CASE("ingd on x^2/2 from 2") {
  QuadraticInstance f(1, 2.0);
  const RunResult r = ingd(f, scalar(2), 0.1, 0.1, ProbeStrategy::deterministic(1.0), 10000);
  CHECK(r.status == RunStatus::certified_stationary);
  CHECK(r.g_final.norm() <= 0.1);
  CHECK(std::abs(r.point(0)) <= 0.1 + 1e-12);
  CHECK(r.trace.outer.size() == 19);
  CHECK(r.trace.outer.size() <= std::ceil(4 * f.meta().subopt_bound / (0.1 * 0.1)));
  for (const auto& o : r.trace.outer) CHECK(o.f_before - o.f_after > 0.1 / 4 * o.g_norm);
  CHECK(verify_certificate(f, r.certificate).ok);
  CHECK(r.oracle_calls == r.trace.calls.size());
}

TEST_CASE("ingd on a constant stops at once") {
  ConstantInstance f(3, 1.0);
  const RunResult r = ingd(f, Vector::Ones(3), 0.1, 0.1, ProbeStrategy::deterministic(1.0), 10);
  CHECK(r.status == RunStatus::certified_stationary);
  CHECK(r.oracle_calls == 1);
  CHECK(r.g_final.norm() == 0.0);
}

TEST_CASE("ingd budget exhaustion") {
  QuadraticInstance f(2, 2.0);
  const RunResult r = ingd(f, f.default_start(), 0.1, 0.1, ProbeStrategy::deterministic(1.0), 1);
  CHECK(r.status == RunStatus::budget_exhausted);
  CHECK(r.oracle_calls == 1);
  CHECK(r.trace.calls.size() == 1);
  CHECK_THROWS(ingd(f, f.default_start(), 0.1, 0.1, ProbeStrategy::deterministic(1.0), 0));
}

TEST_CASE("min_norm_loop raises the inner cap with its best iterate") {
  auto f = make_abs_instance();
  ProbeStrategy s = ProbeStrategy::randomized(RngStream(0));
  try {
    min_norm_loop(*f, scalar(0), 0.5, 0.1, s, 0);
    FAIL("expected InnerLoopCap");
  } catch (const InnerLoopCap& cap) {
    CHECK(cap.best().g(0) == 1.0);
    CHECK(cap.best().steps.empty());
  }
}

TEST_CASE("ingd is deterministic for a fixed strategy") {
  NemirovskiInstance f(8, 1.0 / 72.0);
  const RunResult a = ingd(f, Vector::Zero(8), 0.2, 0.2, ProbeStrategy::randomized(RngStream(7, 1)), 5000);
  const RunResult b = ingd(f, Vector::Zero(8), 0.2, 0.2, ProbeStrategy::randomized(RngStream(7, 1)), 5000);
  REQUIRE(a.trace.calls.size() == b.trace.calls.size());
  for (std::size_t i = 0; i < a.trace.calls.size(); ++i) {
    CHECK(a.trace.calls[i].x == b.trace.calls[i].x);
    CHECK(a.trace.calls[i].event == b.trace.calls[i].event);
  }
  CHECK(a.point == b.point);
}

TEST_CASE("subgradient_descent_avg hand trace on |x|") {
  // Iterates 1, 0.5, 0, then -0.5 projected back onto B_1(1) at 0.
  auto f = make_abs_instance();
  QueryLedger ledger(*f);
  const Vector avg = subgradient_descent_avg(ledger, scalar(1), 1.0, 1.0, 4);
  CHECK(avg(0) == Approx(0.375));
  CHECK(f->eval(avg).value <= 1.0 * 1.0 / std::sqrt(4.0));
  CHECK(ledger.count() == 3);
  REQUIRE(ledger.records().size() == 3);
  CHECK(ledger.records()[0].x(0) == 1.0);
  CHECK(ledger.records()[1].x(0) == 0.5);
  CHECK(ledger.records()[2].x(0) == 0.0);
}

TEST_CASE("subgradient_descent_avg stays in the projection ball") {
  ConstantInstance c(2, 3.0);
  CHECK(subgradient_descent_avg(c, Vector::Ones(2), 1.0, 1.0, 10) == Vector::Ones(2));
  LinearInstance l(3, 1.0);
  QueryLedger ledger(l);
  const Vector x1 = Vector::Zero(3);
  subgradient_descent_avg(ledger, x1, 0.5, 1.0, 50);
  for (const auto& rec : ledger.records()) CHECK((rec.x - x1).norm() <= 0.5 * (1 + 1e-12));
}

TEST_CASE("gd_then_ingd on convex instances") {
  QuadraticInstance q(2, 1.0);
  const RunResult r = gd_then_ingd(q, q.default_start(), 1.0, 2.0, 0.1, 0.1, ProbeStrategy::deterministic(1.0), 100000);
  CHECK(r.status == RunStatus::certified_stationary);
  CHECK(r.trace.gd_calls == pipeline_gd_iterations(1.0, 2.0, 0.1, 0.1) - 1);
  CHECK(verify_certificate(q, r.certificate).ok);

  Tree1dInstance t(SigmaWord::parse("011010"), true);
  const RunResult s = gd_then_ingd(t, scalar(0), 1.0, 1.0, 0.05, 0.1, ProbeStrategy::randomized(RngStream(2)), 100000);
  CHECK(s.status == RunStatus::certified_stationary);
  CHECK(s.g_final.norm() <= 0.1);
  CHECK(verify_certificate(t, s.certificate).ok);

  CHECK(pipeline_gd_iterations(1e-12, 1.0, 0.1, 0.1) == 1);
  const RunResult z = gd_then_ingd(q, q.default_start(), 1e-12, 2.0, 0.1, 0.1, ProbeStrategy::deterministic(1.0), 1000);
  CHECK(z.trace.gd_calls == 0);
  REQUIRE(!z.trace.calls.empty());
  CHECK(z.trace.calls.front().x == q.default_start());
}

TEST_CASE("probe strategy validation") {
  ProbeStrategy s;
  s.kind = ProbeKind::deterministic_binary_search;
  CHECK_THROWS(s.validate());
  s.kind = ProbeKind::randomized_segment;
  CHECK_THROWS(s.validate());
  CHECK_NOTHROW(ProbeStrategy::deterministic(2.0).validate());
}

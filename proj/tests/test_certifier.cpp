#include <doctest.h>

#include <cmath>

#include "nsopt/certifier.hpp"
#include "nsopt/instances.hpp"

using namespace nsopt;
using doctest::Approx;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace

TEST_CASE("sample_goldstein") {
  auto f = make_abs_instance();
  RngStream rng(1);
  GoldsteinSample s = sample_goldstein(*f, scalar(0.7), 0.1, 0, rng);
  CHECK(s.subgrads.size() == 1);
  CHECK(s.subgrads[0](0) == 1.0);

  LinearInstance lin(3, 2.0);
  s = sample_goldstein(lin, Vector::Ones(3), 0.5, 40, rng);
  for (const auto& g : s.subgrads) CHECK(g == 2.0 * unit_vector(3, 0));
  for (const auto& p : s.points) CHECK((p - Vector::Ones(3)).norm() <= 0.5 * (1 + 1e-12));

  // Hints outside the ball are pulled onto its boundary.
  s = sample_goldstein(*f, scalar(0), 0.2, 0, rng, {scalar(5)});
  CHECK(s.points.back()(0) == Approx(0.2));

  const double eps = 0.25, delta = 0.5;
  MahalanobisInstance m(eps, 48);
  const Certificate w = mahalanobis_witness(delta, eps, 48);
  std::vector<Vector> hints;
  for (const auto& p : w.probes) hints.push_back(p.point);
  s = sample_goldstein(m, w.center, delta, 0, rng, hints);
  for (const auto& p : w.probes) {
    bool found = false;
    for (const auto& g : s.subgrads) found = found || (g - p.subgrad).norm() < 1e-15;
    CHECK(found);
  }
}

TEST_CASE("certify examples") {
  auto f = make_abs_instance();
  RngStream rng(2);
  for (double delta : {0.01, 0.3, 2.0}) {
    const CertifyResult c = certify(*f, scalar(0), delta, 0.1, 0, rng, f->structural_hints(scalar(0), delta));
    CHECK(c.found);
    CHECK(c.cert.norm < 1e-12);
  }

  LinearInstance lin(2, 3.0);
  CertifyResult c = certify(lin, Vector::Zero(2), 0.5, 1.0, 30, rng);
  CHECK_FALSE(c.found);
  CHECK(c.cert.norm == Approx(3.0));

  const double eps = 0.25, delta = 0.5;
  MahalanobisInstance m(eps, 48);
  const Certificate w = mahalanobis_witness(delta, eps, 48);
  std::vector<Vector> hints;
  for (const auto& p : w.probes) hints.push_back(p.point);
  c = certify(m, w.center, delta, eps, 0, rng, hints);
  CHECK(c.found);
  CHECK(std::abs(c.cert.norm - std::sqrt(2 * eps * eps / 9 + 8.0 / (9 * 47))) < 1e-9);
  CHECK(verify_certificate(m, c.cert).ok);

  // Zero radius: only the subdifferential at x itself.
  c = certify(*f, scalar(0.4), 0.0, 0.5, 10, rng);
  CHECK_FALSE(c.found);
  CHECK(c.cert.norm == 1.0);
  for (const auto& p : c.cert.probes) CHECK(p.point(0) == 0.4);

  // Zero radius at a breakpoint: hints collapse to x.
  const auto h = f->structural_hints(scalar(0), 0.0);
  REQUIRE(h.size() == 1);
  CHECK(h[0](0) == 0.0);
  c = certify(*f, scalar(0), 0.0, 0.5, 4, rng, h);
  for (const auto& p : c.cert.probes) CHECK(p.point(0) == 0.0);
}

TEST_CASE("certify is monotone in the sample") {
  NemirovskiInstance f(5, 1.0 / 45.0);
  const Vector x = 0.2 * Vector::Ones(5);
  double last = HUGE_VAL;
  for (std::size_t k : {5u, 20u, 80u}) {
    RngStream rng(3);  // nested: each prefix repeats the smaller sample
    const CertifyResult c = certify(f, x, 0.4, 1e-6, k, rng);
    CHECK(c.cert.norm <= last + 1e-12);
    last = c.cert.norm;
  }
}

TEST_CASE("verify_certificate diagnostics") {
  QuadraticInstance f(2, 1.0);
  RngStream rng(4);
  const CertifyResult c = certify(f, Vector::Zero(2), 0.3, 0.1, 32, rng);
  REQUIRE(verify_certificate(f, c.cert).ok);

  Certificate bad = c.cert;
  for (auto& p : bad.probes) p.weight *= 0.9;
  auto v = verify_certificate(f, bad);
  CHECK_FALSE(v.ok);
  CHECK(v.diagnostic == "weights");

  bad = c.cert;
  bad.probes[0].point = bad.center + Vector::Constant(2, 1.0);
  v = verify_certificate(f, bad);
  CHECK_FALSE(v.ok);
  CHECK(v.diagnostic == "radius");

  bad = c.cert;
  bad.probes[0].subgrad += Vector::Constant(2, 0.01);
  refresh_aggregate(bad);
  v = verify_certificate(f, bad);
  CHECK_FALSE(v.ok);
  CHECK(v.diagnostic == "subgradient");

  bad = c.cert;
  bad.aggregate(0) += 1e-6;
  v = verify_certificate(f, bad);
  CHECK_FALSE(v.ok);
  CHECK(v.diagnostic == "aggregate");

  bad = c.cert;
  bad.norm += 1e-6;
  CHECK(verify_certificate(f, bad).diagnostic == "norm");

  bad = c.cert;
  bad.probes.clear();
  CHECK(verify_certificate(f, bad).diagnostic == "shape");
}

TEST_CASE("verify accepts active-set subgradients at kinks") {
  auto f = make_abs_instance();
  Certificate c;
  c.center = scalar(0);
  c.delta = 0.1;
  c.probes = {{scalar(0), 0.5, scalar(-1)}, {scalar(0), 0.5, scalar(0.3)}};
  refresh_aggregate(c);
  CHECK(verify_certificate(*f, c).ok);
  c.probes[1].subgrad = scalar(1.5);
  refresh_aggregate(c);
  CHECK(verify_certificate(*f, c).diagnostic == "subgradient");
}

TEST_CASE("eps_stationary_set_1d") {
  auto f = make_abs_instance();
  auto s = eps_stationary_set_1d(*f, 0.5);
  REQUIRE(s.intervals.size() == 1);
  CHECK(*s.intervals[0].lo == 0);
  CHECK(*s.intervals[0].hi == 0);
  CHECK(*s.distance(mpq_class(-3, 4)) == mpq_class(3, 4));

  LinearInstance lin(1, 1.0);
  CHECK(eps_stationary_set_1d(lin, 0.9).empty());
  CHECK_FALSE(eps_stationary_set_1d(lin, 0.9).distance(mpq_class(0)));
  QuadraticInstance q(1, 1.0);
  CHECK_THROWS(eps_stationary_set_1d(q, 0.1));

  RngStream rng(5);
  for (int t = 0; t < 10; ++t) {
    const Tree1dInstance tr(SigmaWord::random(2 + rng.index(8), rng));
    s = eps_stationary_set_1d(tr, 0.4);
    REQUIRE(s.intervals.size() == 1);
    const auto [lo, hi] = tr.interval(tr.depth());
    CHECK(*s.intervals[0].lo == lo);
    CHECK(*s.intervals[0].hi == hi);
  }

  // Flat pieces on both sides of a kink merge into one interval.
  PiecewiseLinear1D p;
  p.breakpoints = {mpq_class(0), mpq_class(1), mpq_class(2)};
  p.slopes = {mpq_class(-1), mpq_class(0), mpq_class(1, 10), mpq_class(2)};
  p.values = {mpq_class(0), mpq_class(0), mpq_class(1, 10)};
  s = eps_stationary_set_1d(p, 0.2);
  REQUIRE(s.intervals.size() == 1);
  CHECK(*s.intervals[0].lo == 0);
  CHECK(*s.intervals[0].hi == 2);
}

TEST_CASE("claim 1 equivalence on small grids") {
  auto f = make_abs_instance();
  CHECK(check_claim1_equiv(*f, 0.1, 0.3, 500).disagreements.empty());
  RngStream rng(6);
  for (int t = 0; t < 3; ++t) {
    const Tree1dInstance tr(SigmaWord::random(6, rng));
    const Claim1Report r = check_claim1_equiv(tr, 0.05, 0.3, 1000);
    CHECK(r.disagreements.empty());
    CHECK(r.points >= 1000);
  }
  // Tiny radius at a non-stationary point: neither side holds.
  LinearInstance lin(1, 1.0);
  CHECK(check_claim1_equiv(lin, 1e-9, 0.5, 50).disagreements.empty());
  QuadraticInstance q(2, 1.0);
  CHECK_THROWS(check_claim1_equiv(q, 0.1, 0.1, 10));
}

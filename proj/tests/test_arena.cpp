#include <doctest.h>

#include <cmath>

#include "nsopt/arena.hpp"

using namespace nsopt;
using doctest::Approx;

TEST_CASE("resisting oracle serves the same reply and guards its input") {
  ResistingOracle o(5, 2);
  const auto r = o.query(Vector::Ones(5));
  CHECK(r.value == 0.0);
  CHECK(r.subgrad == unit_vector(5, 0) / 7.0);
  CHECK_THROWS_AS(o.query(Vector::Ones(4)), ArenaProtocolError);
  Vector bad = Vector::Zero(5);
  bad(2) = NAN;
  CHECK_THROWS_AS(o.query(bad), ArenaProtocolError);
  o.query(Vector::Zero(5));
  CHECK_THROWS_AS(o.query(Vector::Zero(5)), BudgetExhausted);
  CHECK(o.queries().size() == 2);
  CHECK_THROWS(ResistingOracle(2, 1));
}

TEST_CASE("arena: e2 walker with three queries") {
  ArenaOptions opts;
  opts.random_combos = 200;
  const ArenaReport rep = run_resisting(arena_e2_walker(), 3, opts);
  CHECK(rep.d == 5);
  CHECK(rep.queries.size() == 3);
  CHECK(rep.r == Approx(0.25));
  CHECK(rep.v == unit_vector(5, 2));
  for (const auto& c : rep.checks) {
    CHECK(c.value_error == 0.0);
    CHECK(c.gradient_error == 0.0);
    CHECK(c.h_gradient_error == 0.0);
    CHECK(c.best_norm > kArenaEps);
    CHECK(c.random_combo_min > kArenaEps);
  }
  CHECK(rep.start_gap <= 1.0);
  CHECK(rep.verdict);
}

TEST_CASE("arena: a repeated point collapses to one query") {
  ArenaOptions opts;
  opts.random_combos = 100;
  const ArenaReport rep = run_resisting(arena_repeat_point(), 10, opts);
  CHECK(rep.queries.size() == 10);
  CHECK(rep.distinct.size() == 1);
  CHECK(rep.r == 1.0);
  CHECK(rep.verdict);
}

TEST_CASE("arena: fixed-step descent and a dimension override") {
  ArenaOptions opts;
  opts.random_combos = 50;
  opts.dim = 8;
  const ArenaReport rep = run_resisting(arena_fixed_step(0.1), 6, opts);
  CHECK(rep.d == 8);
  CHECK(rep.distinct.size() == 6);
  CHECK(rep.verdict);
}

TEST_CASE("arena: deterministic INGD, short game") {
  ArenaOptions opts;
  opts.random_combos = 100;
  const ArenaReport rep = run_resisting(arena_ingd(kArenaDelta, kArenaEps, 1.0), 12, opts);
  CHECK(rep.queries.size() == 12);
  CHECK(rep.verdict);
}

TEST_CASE("arena rejects misbehaving algorithms") {
  const ArenaAlgorithm wrong_dim = [](Oracle& o) { o.query(Vector::Zero(o.dim() + 1)); };
  CHECK_THROWS_AS(run_resisting(wrong_dim, 3), ArenaProtocolError);
  const ArenaAlgorithm idle = [](Oracle&) {};
  CHECK_THROWS(run_resisting(idle, 3));
  CHECK_THROWS(run_resisting(arena_e2_walker(), 0));
}

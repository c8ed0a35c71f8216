#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "eprsim/repeater.hpp"
#include "eprsim/rng.hpp"

using namespace eprsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("simple fiber cost", "[repeater]") {
  CHECK_THAT(simple_cost(0.0, 10.0), WithinAbs(1.0, 0.0));
  CHECK_THAT(simple_cost(10.0, 10.0), WithinRel(std::exp(1.0), 1e-15));
  CHECK_THAT(simple_cost(1000.0, 10.0), WithinRel(2.6881171418161356e43, 1e-12));
  CHECK_THROWS_AS(simple_cost(10.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(simple_cost(10.0, -1.0), PreconditionError);
}

TEST_CASE("compound fiber cost", "[repeater]") {
  CHECK_THAT(compound_cost(37.0, 5.0, 1), WithinRel(simple_cost(37.0, 5.0), 1e-15));
  CHECK_THAT(compound_cost(1000.0, 10.0, 100), WithinRel(271.8281828459045, 1e-13));
  CHECK_THAT(compound_cost(100.0, 10.0, 5), WithinRel(36.945280494653254, 1e-13));
  CHECK_THROWS_AS(compound_cost(10.0, 1.0, 0), PreconditionError);
}

TEST_CASE("optimal segmentation", "[repeater]") {
  CHECK(optimal_segments(1000.0, 10.0) == 100);
  CHECK(optimal_segments(10.0, 10.0) == 1);
  CHECK(optimal_segments(25.0, 10.0) == 3); // argmin of N e^{2.5/N}, by scan

  SECTION("agrees with a brute-force scan on random instances") {
    SplitMix64 rng(515);
    for (int i = 0; i < 1000; ++i) {
      const double ratio = 0.1 + 499.9 * rng.next_double();
      const double l0 = 0.5 + 10.0 * rng.next_double();
      const double l = ratio * l0;
      const long long opt = optimal_segments(l, l0);
      const long long hi = static_cast<long long>(std::ceil(2.0 * ratio)) + 2;
      long long best = 1;
      double best_cost = compound_cost(l, l0, 1);
      for (long long n = 2; n <= hi; ++n) {
        const double c = compound_cost(l, l0, n);
        if (c < best_cost) {
          best_cost = c;
          best = n;
        }
      }
      REQUIRE(opt == best);
      CHECK(compound_cost(l, l0, opt) <= simple_cost(l, l0));
      // continuum optimum strictly beats the simple fiber beyond one half length
      if (l > l0) CHECK(min_cost(l, l0) < simple_cost(l, l0));
    }
  }
}

TEST_CASE("minimum transmission count", "[repeater]") {
  CHECK_THAT(min_cost(1000.0, 10.0), WithinRel(271.8281828459045, 1e-15));
  CHECK_THAT(min_cost(10.0, 10.0), WithinRel(std::exp(1.0), 1e-15));
  // integer-constrained optimum stays within 5% of the continuum value here
  const double integer_best = compound_cost(25.0, 10.0, optimal_segments(25.0, 10.0));
  CHECK((integer_best - min_cost(25.0, 10.0)) / min_cost(25.0, 10.0) < 0.05);

  const CostReport r = cost_report(1000.0, 10.0);
  CHECK_THAT(r.simple_cost, WithinRel(2.6881171418161356e43, 1e-12));
  CHECK(r.n_segments == 100);
  CHECK_THAT(r.compound_cost, WithinRel(271.8281828459045, 1e-13));
  CHECK(r.n_min == 272);
  CHECK(r.min_cost <= r.compound_cost);
}

TEST_CASE("pair connection fidelity", "[repeater]") {
  CHECK_THAT(connect(1.0, 1.0), WithinAbs(1.0, 0.0));
  for (double f : {0.6, 0.8, 1.0}) CHECK_THAT(connect(f, 0.5), WithinAbs(0.5, 1e-15));
  CHECK_THAT(connect(0.95, 0.9), WithinAbs(0.86, 1e-15));
  CHECK_THROWS_AS(connect(1.2, 0.9), PreconditionError);
  CHECK_THROWS_AS(connect(0.9, -0.1), PreconditionError);

  SECTION("algebraic properties") {
    SplitMix64 rng(99);
    for (int i = 0; i < 200; ++i) {
      const double a = rng.next_double(), b = rng.next_double();
      CHECK(connect(a, b) == connect(b, a));
      CHECK_THAT(2.0 * connect(a, b) - 1.0, WithinAbs((2.0 * a - 1.0) * (2.0 * b - 1.0), 1e-15));
      const double fa = 0.5 + 0.5 * a, fb = 0.5 + 0.5 * b;
      CHECK(connect(fa, fb) <= std::min(fa, fb) + 1e-15);
    }
  }
}

TEST_CASE("chain connection equals folded connection", "[repeater]") {
  CHECK_THAT(connect_chain(0.77, 1), WithinAbs(0.77, 0.0));
  CHECK_THAT(connect_chain(1.0, 64), WithinAbs(1.0, 0.0));
  CHECK_THROWS_AS(connect_chain(0.9, 0), PreconditionError);

  // frozen via the fold oracle: 15 connects of 16 pairs at 0.99
  double fold = 0.99;
  for (int i = 1; i < 16; ++i) fold = connect(fold, 0.99);
  CHECK_THAT(fold, WithinAbs(0.8618988602962478, 1e-14));
  CHECK_THAT(connect_chain(0.99, 16), WithinAbs(fold, 1e-12));

  SECTION("random cases, any association order") {
    SplitMix64 rng(31337);
    for (int i = 0; i < 300; ++i) {
      const double f0 = 0.5 + 0.5 * rng.next_double();
      const long long n = 1 + static_cast<long long>(rng.next_double() * 64);
      double left = f0;
      for (long long k = 1; k < n; ++k) left = connect(left, f0);
      CHECK_THAT(connect_chain(f0, n), WithinAbs(left, 1e-12));
      // balanced association for even powers
      if (n % 2 == 0) {
        double half = connect_chain(f0, n / 2);
        CHECK_THAT(connect_chain(f0, n), WithinAbs(connect(half, half), 1e-12));
      }
    }
  }

  SECTION("the polarization decays geometrically with the segment count") {
    const double f0 = 0.93;
    for (long long n = 1; n < 40; ++n) {
      const double r = (2.0 * connect_chain(f0, n + 1) - 1.0) / (2.0 * connect_chain(f0, n) - 1.0);
      CHECK_THAT(r, WithinAbs(2.0 * f0 - 1.0, 1e-12));
    }
  }
}

TEST_CASE("doubling schedule", "[repeater]") {
  SECTION("single pair") {
    const auto rows = doubling_schedule(0.9, 1);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].round == 0);
    CHECK(rows[0].pairs_remaining == 1);
    CHECK_THAT(rows[0].fidelity, WithinAbs(0.9, 0.0));
  }

  SECTION("four segments at 0.99") {
    const auto rows = doubling_schedule(0.99, 4);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].pairs_remaining == 2);
    CHECK_THAT(rows[1].fidelity, WithinAbs(0.5 * (1.0 + 0.98 * 0.98), 1e-15));
    CHECK(rows[2].pairs_remaining == 1);
    CHECK_THAT(rows[2].fidelity, WithinAbs(0.5 * (1.0 + std::pow(0.98, 4.0)), 1e-14));
  }

  SECTION("final round matches the chain formula") {
    for (long long n : {1LL, 2LL, 8LL, 16LL, 64LL}) {
      const auto rows = doubling_schedule(0.97, n);
      CHECK_THAT(rows.back().fidelity, WithinAbs(connect_chain(0.97, n), 1e-12));
      CHECK(rows.back().pairs_remaining == 1);
    }
  }

  CHECK_THROWS_AS(doubling_schedule(0.9, 12), PreconditionError);
  CHECK_THROWS_AS(doubling_schedule(0.9, 0), PreconditionError);
}

TEST_CASE("required initial fidelity inverts the chain formula", "[repeater]") {
  CHECK_THAT(required_initial_fidelity(0.87, 1), WithinAbs(0.87, 1e-15));
  CHECK_THAT(required_initial_fidelity(0.9, 100), WithinAbs(0.9988855261441412, 1e-13));
  CHECK_THROWS_AS(required_initial_fidelity(0.5, 10), PreconditionError);
  CHECK_THROWS_AS(required_initial_fidelity(1.0, 10), PreconditionError);

  SECTION("round trip and monotonicity") {
    SplitMix64 rng(2718);
    for (int i = 0; i < 100; ++i) {
      const double ft = 0.6 + 0.39 * rng.next_double();
      const long long n = 1 + static_cast<long long>(rng.next_double() * 512);
      const double f0 = required_initial_fidelity(ft, n);
      CHECK_THAT(connect_chain(f0, n), WithinAbs(ft, 1e-10));
    }
    double prev = 0.0;
    for (long long n = 1; n <= 1024; n *= 2) {
      const double f0 = required_initial_fidelity(0.9, n);
      CHECK(f0 >= prev);
      prev = f0;
    }
  }
}

TEST_CASE("record-level connection", "[repeater]") {
  SECTION("two perfect pairs stay perfect") {
    const EprPairState a = EprPairState::from_amplitudes(1.0, 0.0);
    const EprPairState joined = connect_pairs(a, a);
    CHECK_THAT(joined.fidelity(), WithinAbs(1.0, 0.0));
    CHECK_THAT(joined.minus_norm2(), WithinAbs(0.0, 0.0));
  }

  SECTION("dephased records compose by the connection law") {
    const EprPairState p1 = EprPairState::dephased(0.95);
    const EprPairState p2 = EprPairState::dephased(0.9);
    CHECK_THAT(connect_pairs(p1, p2).fidelity(), WithinAbs(0.86, 1e-12));
  }

  SECTION("fidelity law and associativity on random pairs") {
    SplitMix64 rng(808);
    auto random_pair = [&rng]() {
      EprPairState p;
      const int sectors = 1 + static_cast<int>(rng.next_double() * 3);
      for (int i = 0; i < sectors; ++i)
        p.sectors.push_back({static_cast<std::uint64_t>(i),
                             Complex(rng.next_double(), rng.next_double() - 0.5),
                             Complex(0.5 * rng.next_double(), 0.2 * rng.next_double())});
      return p;
    };
    for (int i = 0; i < 100; ++i) {
      const EprPairState a = random_pair(), b = random_pair(), c = random_pair();
      CHECK_THAT(connect_pairs(a, b).fidelity(),
                 WithinAbs(connect(a.fidelity(), b.fidelity()), 1e-12));
      const double left = connect_pairs(connect_pairs(a, b), c).fidelity();
      const double right = connect_pairs(a, connect_pairs(b, c)).fidelity();
      CHECK_THAT(left, WithinAbs(right, 1e-12));
      // compression preserves the readout
      CHECK_THAT(connect_pairs(a.compressed(), b.compressed()).fidelity(),
                 WithinAbs(connect(a.fidelity(), b.fidelity()), 1e-12));
    }
  }

  CHECK_THROWS_AS(connect_pairs(EprPairState{}, EprPairState::dephased(0.9)),
                  DegenerateStateError);
}

TEST_CASE("imperfect connection multiplier", "[repeater]") {
  CHECK_THAT(connect(0.95, 0.9, 0.9), WithinAbs(0.5 * (1.0 + 0.9 * 0.9 * 0.8), 1e-15));
  CHECK_THAT(connect(1.0, 1.0, 0.9), WithinAbs(0.95, 1e-15));

  // chain and fold stay consistent with a per-connection factor
  const double eta = 0.97;
  SplitMix64 rng(606);
  for (int i = 0; i < 50; ++i) {
    const double f0 = 0.6 + 0.4 * rng.next_double();
    const long long n = 1 + static_cast<long long>(rng.next_double() * 32);
    double fold = f0;
    for (long long k = 1; k < n; ++k) fold = connect(fold, f0, eta);
    CHECK_THAT(connect_chain(f0, n, eta), WithinAbs(fold, 1e-12));
  }
  const auto rows = doubling_schedule(0.99, 8, eta);
  CHECK_THAT(rows.back().fidelity, WithinAbs(connect_chain(0.99, 8, eta), 1e-12));
}

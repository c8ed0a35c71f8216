#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "eprsim/afc.hpp"
#include "eprsim/channel.hpp"
#include "eprsim/rng.hpp"

#include "support/oracles.hpp"
#include "support/scripted_rng.hpp"
#include "support/stats.hpp"

using namespace eprsim;
using eprsim::testing::ConstantRng;
using eprsim::testing::ScriptedRng;
using Catch::Matchers::WithinAbs;

namespace {

// |b - z| for checking one complex amplitude
double dist(Complex a, Complex b) { return std::abs(a - b); }

// collinearity of two 2-component complex vectors (ratio equality)
double cross_norm(Complex a0, Complex a1, Complex b0, Complex b1) {
  return std::abs(a0 * b1 - a1 * b0);
}

} // namespace

TEST_CASE("encode produces the displayed three-particle state", "[afc]") {
  SECTION("basis inputs") {
    const BranchState zero = encode(1.0, 0.0);
    CHECK(zero.branches().size() == 2);
    CHECK(zero.amplitude("000") == Complex(1.0, 0.0));
    CHECK(zero.amplitude("111") == Complex(1.0, 0.0));

    const BranchState one = encode(0.0, 1.0);
    CHECK(one.branches().size() == 2);
    CHECK(one.amplitude("001") == Complex(1.0, 0.0));
    CHECK(one.amplitude("110") == Complex(1.0, 0.0));
  }

  SECTION("superposition input checked against the dense circuit oracle") {
    const Complex c0(1.0, 0.0), c1(1.0, 0.0);
    const BranchState enc = encode(c0, c1);
    CHECK(enc.branches().size() == 4);

    // oracle: prepare (c0|0> + c1|1>) |00>, then H(A3), CNOT(A3->A), CNOT(A->A2)
    eprsim::testing::Vec8 v;
    v.a[0] = c0;
    v.a[1] = c1;
    eprsim::testing::sv_apply_h(v, 2);
    eprsim::testing::sv_apply_cnot(v, 2, 0);
    eprsim::testing::sv_apply_cnot(v, 0, 1);
    constexpr double sqrt2 = 1.4142135623730950488;
    for (std::size_t i = 0; i < 8; ++i) {
      std::string bits = {char('0' + (i & 1)), char('0' + ((i >> 1) & 1)),
                          char('0' + ((i >> 2) & 1))};
      // the displayed form omits the circuit's 1/sqrt(2)
      CHECK_THAT(dist(enc.amplitude(bits), v.a[i] * sqrt2), WithinAbs(0.0, 1e-12));
    }
  }

  CHECK_THROWS_AS(encode(0.0, 0.0), PreconditionError);
}

TEST_CASE("afc attempt in the lossless limit", "[afc]") {
  const ChannelModel ch = ChannelModel::from_rate_product(0.0);
  ConstantRng rng{0.5};
  const AfcOutcome out = afc_attempt(BranchState::single_qubit("A", 0.6, 0.8), ch, 0.0, rng);
  REQUIRE(out.verdict == AfcVerdict::Ok);
  CHECK(out.s0_applied == Complex(1.0, 0.0));
  CHECK(out.s1_applied == Complex(1.0, 0.0));
  CHECK_THAT(dist(out.state.amplitude("00"), Complex(0.6, 0.0)), WithinAbs(0.0, 1e-15));
  CHECK_THAT(dist(out.state.amplitude("11"), Complex(0.8, 0.0)), WithinAbs(0.0, 1e-15));
}

TEST_CASE("stationary attempt applies equal success factors", "[afc]") {
  const double kt = GENERATE(0.1, 0.5, 1.3);
  const ChannelModel ch = ChannelModel::from_rate_product(kt);
  ConstantRng force_ok{0.0};
  const AfcOutcome out =
      afc_attempt(BranchState::single_qubit("A", 1.0, 1.0), ch, 0.0, force_ok);
  REQUIRE(out.verdict == AfcVerdict::Ok);
  const Complex s(std::exp(-kt), 0.0);
  CHECK_THAT(dist(out.s0_applied, s), WithinAbs(0.0, 1e-15));
  CHECK_THAT(dist(out.s1_applied, s), WithinAbs(0.0, 1e-15));
}

TEST_CASE("forced error restores the input qubit exactly", "[afc]") {
  const ChannelModel ch = ChannelModel::from_rate_product(0.5);
  const Complex c0(0.3, -0.4), c1(0.7, 0.2);
  ConstantRng force_err{0.999999};
  const AfcOutcome out = afc_attempt(BranchState::single_qubit("A", c0, c1), ch, 0.0, force_err);
  REQUIRE(out.verdict == AfcVerdict::ErrorDetected);
  REQUIRE(out.state.branches().size() == 2);
  const Branch& b0 = out.state.branches()[0];
  const Branch& b1 = out.state.branches()[1];
  CHECK(b0.sector == b1.sector);      // common environment record
  CHECK(b0.sector != 0);              // orthogonal to the vacuum
  CHECK_THAT(cross_norm(b0.amp, b1.amp, c0, c1), WithinAbs(0.0, 1e-15));
  const double p_err = 1.0 - std::exp(-1.0);
  CHECK_THAT(out.state.norm2(), WithinAbs(p_err * (std::norm(c0) + std::norm(c1)), 1e-12));
}

TEST_CASE("attempt contract against the microscopic protocol", "[afc][oracle]") {
  const double kt = GENERATE(0.1, 0.5, 1.0);
  const bool jittered = GENERATE(false, true);
  const ChannelModel ch = ChannelModel::from_rate_product(
      kt, jittered ? JitterSpec::linear(0.8) : JitterSpec::none());
  const double t = 0.37;
  const Complex c0(0.5, 0.1), c1(-0.3, 0.8);

  const auto micro = eprsim::testing::micro_afc_attempt(c0, c1, ch, t);
  const auto enumerated = eprsim::testing::enumerate_attempt(ch, t);

  SECTION("outcome probabilities") {
    CHECK_THAT(micro.p_ok, WithinAbs(ch.success_probability(), 1e-12));
    CHECK_THAT(micro.p_ok, WithinAbs(enumerated.p_ok, 1e-12));
    CHECK_THAT(micro.p_ok + enumerated.p_err, WithinAbs(1.0, 1e-12));
    // the two operator assignments are equally likely
    CHECK_THAT(micro.p_r1_given_ok, WithinAbs(0.5, 1e-12));
  }

  SECTION("both declared operator orderings appear as decode outcomes") {
    ConstantRng force_ok{0.0};
    const AfcOutcome std_order = afc_attempt(BranchState::single_qubit("A", c0, c1), ch, t,
                                             force_ok, AfcOrdering::ZeroTakesFirstSlot);
    const AfcOutcome alt_order = afc_attempt(BranchState::single_qubit("A", c0, c1), ch, t,
                                             force_ok, AfcOrdering::ZeroTakesSecondSlot);
    REQUIRE(std_order.verdict == AfcVerdict::Ok);
    // r = 1 decode carries (a1(t1), a1(t2)) = the first-slot-on-zero assignment
    CHECK_THAT(cross_norm(micro.ok_r1_amp00, micro.ok_r1_amp11,
                          std_order.state.amplitude("00"), std_order.state.amplitude("11")),
               WithinAbs(0.0, 1e-12));
    CHECK_THAT(cross_norm(micro.ok_r0_amp00, micro.ok_r0_amp11,
                          alt_order.state.amplitude("00"), alt_order.state.amplitude("11")),
               WithinAbs(0.0, 1e-12));
    CHECK_THAT(dist(std_order.s0_applied, ch.success_amplitude(t)), WithinAbs(0.0, 1e-15));
    CHECK_THAT(dist(std_order.s1_applied, ch.success_amplitude(t + ch.tau())),
               WithinAbs(0.0, 1e-15));
  }

  SECTION("error decode restores coherence in a single sector") {
    CHECK(micro.err_m1_single_sector);
    CHECK(micro.err_m0_single_sector);
    CHECK_THAT(cross_norm(micro.err_m1_amp0, micro.err_m1_amp1, c0, c1), WithinAbs(0.0, 1e-12));
    CHECK_THAT(cross_norm(micro.err_m0_amp0, micro.err_m0_amp1, c0, c1), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("afc input validation", "[afc]") {
  const ChannelModel ch = ChannelModel::from_rate_product(0.5);
  ConstantRng rng{0.0};
  BranchState no_a(std::vector<std::string>{"Q"});
  no_a.set_branch("1", 0, 1.0);
  CHECK_THROWS_AS(afc_attempt(no_a, ch, 0.0, rng), ConfigError);

  BranchState with_b(std::vector<std::string>{"A", "B"});
  with_b.set_branch("10", 0, 1.0);
  CHECK_THROWS_AS(afc_attempt(with_b, ch, 0.0, rng), ConfigError);

  BranchState empty(std::vector<std::string>{"A"});
  CHECK_THROWS_AS(afc_attempt(empty, ch, 0.0, rng), DegenerateStateError);
}

TEST_CASE("transmit retries until success", "[afc]") {
  SECTION("lossless channel needs one attempt") {
    const ChannelModel ch = ChannelModel::from_rate_product(0.0);
    ConstantRng rng{0.5};
    const AfcTransmitResult r =
        afc_transmit(BranchState::single_qubit("A", 1.0, 1.0), ch, {}, 0.0, rng);
    CHECK(r.attempts == 1);
  }

  SECTION("forced error streak then success") {
    const ChannelModel ch = ChannelModel::from_rate_product(0.5);
    ScriptedRng rng{{0.9, 0.9, 0.9, 0.0}};
    RetryPolicy policy;
    policy.attempt_overhead = 0.25;
    const AfcTransmitResult r =
        afc_transmit(BranchState::single_qubit("A", 1.0, 1.0), ch, policy, 0.0, rng);
    CHECK(r.attempts == 4);
    CHECK_THAT(r.elapsed, WithinAbs(4 * (2.0 * ch.tau() + 0.25), 1e-12));
    // three failures shed (1-p)^3 of the norm before the success factors
    const double p = std::exp(-1.0);
    const double expect = 2.0 * std::pow(1.0 - p, 3.0) * p; // |chi|^2 = 2 for (1,1)
    CHECK_THAT(r.state.norm2(), WithinAbs(expect, 1e-12));
  }

  SECTION("exhausted retries throw with the last state attached") {
    const ChannelModel ch = ChannelModel::from_rate_product(0.5);
    ConstantRng rng{0.999999};
    RetryPolicy policy;
    policy.max_attempts = 3;
    try {
      afc_transmit(BranchState::single_qubit("A", 0.6, 0.8), ch, {policy}, 0.0, rng);
      FAIL("expected RetryExhaustedError");
    } catch (const RetryExhaustedError& e) {
      CHECK(e.attempts == 3);
      const double p = std::exp(-1.0);
      CHECK_THAT(e.last_state.norm2(), WithinAbs(std::pow(1.0 - p, 3.0), 1e-12));
    }
    CHECK_THROWS_AS(
        afc_transmit(BranchState::single_qubit("A", 1.0, 1.0), ch,
                     RetryPolicy{.max_attempts = 0, .attempt_overhead = 0.0}, 0.0, rng),
        ConfigError);
  }
}

TEST_CASE("attempt counts are geometric", "[afc][statistics]") {
  const double kt = 0.5;
  const ChannelModel ch = ChannelModel::from_rate_product(kt);
  const auto moments = eprsim::testing::geometric_moments(std::exp(-2.0 * kt));

  const int n = 100000;
  std::vector<double> attempts;
  attempts.reserve(n);
  const BranchState input = BranchState::single_qubit("A", 1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    SplitMix64 rng = trial_stream(20240601, static_cast<std::uint64_t>(i));
    attempts.push_back(
        static_cast<double>(afc_transmit(input, ch, {}, 0.0, rng).attempts));
  }
  const double mean = eprsim::testing::mean_of(attempts);
  const double var = eprsim::testing::sample_variance(attempts);

  const double sigma_mean = std::sqrt(moments.variance / n);
  CHECK_THAT(mean, WithinAbs(moments.mean, 3.0 * sigma_mean));
  const double sigma_var =
      std::sqrt((moments.fourth_central - moments.variance * moments.variance) / n);
  CHECK_THAT(var, WithinAbs(moments.variance, 3.0 * sigma_var));
}

TEST_CASE("coherence survives arbitrary retry sequences", "[afc][property]") {
  const double kt = 0.5;
  const bool jittered = GENERATE(false, true);
  const ChannelModel ch = ChannelModel::from_rate_product(
      kt, jittered ? JitterSpec::linear(0.6) : JitterSpec::none());
  SplitMix64 gen(4242);

  for (int rep = 0; rep < 100; ++rep) {
    const Complex c0(2.0 * gen.next_double() - 1.0, 2.0 * gen.next_double() - 1.0);
    Complex c1(2.0 * gen.next_double() - 1.0, 2.0 * gen.next_double() - 1.0);
    if (std::abs(c0) < 0.05 || std::abs(c1) < 0.05) continue;

    const int errors = rep % 21; // forced streak lengths 0..20
    std::vector<double> script(static_cast<std::size_t>(errors), 0.999);
    script.push_back(0.0);
    ScriptedRng rng{script};

    const AfcTransmitResult r =
        afc_transmit(BranchState::single_qubit("A", c0, c1), ch, RetryPolicy::unlimited(), 0.0,
                     rng);
    const Complex amp00 = r.state.amplitude("00", r.state.branches().front().sector);
    const Complex amp11 = r.state.amplitude("11", r.state.branches().front().sector);
    // relative amplitude check: (amp11 / amp00) * (s0 / s1) == c1 / c0
    const Complex lhs = (amp11 / amp00) * (r.s0 / r.s1);
    const Complex rhs = c1 / c0;
    CHECK_THAT(std::abs(lhs - rhs), WithinAbs(0.0, 1e-10 * std::abs(rhs)));
  }
}

TEST_CASE("EPR creation through the absorption-free channel", "[afc]") {
  SECTION("stationary environment yields a perfect pair") {
    for (double kt : {0.1, 0.5, 1.0, 2.0}) {
      const ChannelModel ch = ChannelModel::from_rate_product(kt);
      SplitMix64 rng(11 + static_cast<std::uint64_t>(kt * 10));
      const EprBuildResult r = build_epr_via_afc(ch, {}, 0.0, rng);
      CHECK_THAT(r.pair.fidelity(), WithinAbs(1.0, 1e-12));
    }
  }

  SECTION("lossless stationary channel: pure pair on the first attempt") {
    const ChannelModel ch = ChannelModel::from_rate_product(0.0);
    ConstantRng rng{0.5};
    const EprBuildResult r = build_epr_via_afc(ch, {}, 0.0, rng);
    CHECK(r.attempts == 1);
    CHECK_THAT(r.pair.fidelity(), WithinAbs(1.0, 0.0));
    CHECK_THAT(r.pair.minus_norm2(), WithinAbs(0.0, 0.0));
  }

  SECTION("phase jitter: F = cos^2(dphi / 2)") {
    const double omega = GENERATE(0.3, 0.9, 2.1);
    const ChannelModel ch = ChannelModel::from_rate_product(0.4, JitterSpec::linear(omega));
    ConstantRng rng{0.0};
    const EprBuildResult r = build_epr_via_afc(ch, {}, 0.0, rng);
    const double dphi = omega * ch.tau(); // phase difference between the two slots
    CHECK_THAT(r.pair.fidelity(), WithinAbs(std::cos(dphi / 2.0) * std::cos(dphi / 2.0), 1e-12));
    // cross-check through explicit Bell algebra on the applied factors
    const double direct = std::norm(r.s0 + r.s1) / (std::norm(r.s0 + r.s1) + std::norm(r.s0 - r.s1));
    CHECK_THAT(r.pair.fidelity(), WithinAbs(direct, 1e-15));
  }
}

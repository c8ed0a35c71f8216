#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "eprsim/channel.hpp"
#include "eprsim/epr_pair.hpp"
#include "eprsim/errors.hpp"

namespace eprsim {

// ---------------------------------------------------------------------------
// Absorption-free channel: encode, transmit twice, measure.
//
// Each attempt sends exactly one photon, split coherently across two
// transmission slots (the data bit in the first, its complement in the
// second), so a lost photon is heralded by the receiver backup atom and the
// sender's qubit survives undisturbed. Success attaches one first-slot and
// one second-slot environment factor to the two logical branches.
// ---------------------------------------------------------------------------

enum class AfcVerdict { Ok, ErrorDetected };

// Which logical branch ends up carrying the first transmission slot's success
// factor. Both assignments occur physically, selected by a backup-atom
// measurement; simulations fix one.
enum class AfcOrdering {
  ZeroTakesFirstSlot,  // S0 = T0(t2) T1(t1), S1 = T1(t2) T0(t1)
  ZeroTakesSecondSlot, // S0 = T1(t2) T0(t1), S1 = T0(t2) T1(t1)
};

struct AfcOutcome {
  AfcVerdict verdict = AfcVerdict::ErrorDetected;
  BranchState state;             // post-measurement, renormalization deferred
  long long attempt_index = 1;   // 1-based within a retry loop
  Complex s0_applied{};          // success factor on the 0-branch (Ok only)
  Complex s1_applied{};          // success factor on the 1-branch (Ok only)
};

struct RetryPolicy {
  long long max_attempts = 1'000'000;
  double attempt_overhead = 0.0; // extra wait between attempts, on top of 2*tau

  static RetryPolicy unlimited() {
    RetryPolicy p;
    p.max_attempts = std::numeric_limits<long long>::max();
    return p;
  }
};

class RetryExhaustedError : public Error {
public:
  RetryExhaustedError(BranchState last, long long attempts)
      : Error("retry budget exhausted after " + std::to_string(attempts) + " attempts"),
        last_state(std::move(last)), attempts(attempts) {}

  BranchState last_state;
  long long attempts;
};

// Encoding of a qubit into the three-particle entangled state over atoms
// (A, A2, A3):
//
//   chi0 [|000> + |111>] + chi1 [|001> + |110>]
//
// returned in this unnormalized form. Physically this is a Hadamard on A3
// followed by CNOTs A3->A and A->A2, which carries an extra global 1/sqrt(2);
// probability readouts divide by the total norm, so the convention is
// harmless.
inline BranchState encode(Complex chi0, Complex chi1) {
  if (chi0 == Complex{} && chi1 == Complex{})
    throw PreconditionError("encode: input amplitudes are both zero");
  BranchState s(std::vector<std::string>{"A", "A2", "A3"});
  if (chi0 != Complex{}) {
    s.set_branch("000", 0, chi0);
    s.set_branch("111", 0, chi0);
  }
  if (chi1 != Complex{}) {
    s.set_branch("001", 0, chi1);
    s.set_branch("110", 0, chi1);
  }
  return s;
}

namespace detail {

inline void check_afc_input(const BranchState& input, std::string_view data_atom) {
  if (!input.has_atom(data_atom))
    throw ConfigError("afc input has no atom '" + std::string(data_atom) + "'");
  if (input.has_atom("B")) throw ConfigError("afc input already contains an atom named 'B'");
  if (input.norm2() <= 0.0) throw DegenerateStateError("afc input has zero norm");
}

// (S0, S1) for an attempt whose two slots start at t1 and t2.
inline std::pair<Complex, Complex> slot_factors(const ChannelModel& channel, double t1, double t2,
                                                AfcOrdering ordering) {
  const Complex first = channel.success_amplitude(t1);
  const Complex second = channel.success_amplitude(t2);
  if (ordering == AfcOrdering::ZeroTakesFirstSlot) return {first, second};
  return {second, first};
}

} // namespace detail

// One use of the absorption-free channel on the qubit held by `data_atom`,
// starting at time t (second slot at t + tau). The heralded verdict is
// sampled with probability equal to the squared norm of the corresponding
// projected branch set:
//
//   Ok             chi0 |0 0>   S0  +  chi1 |1 1>   S1      (atoms data, B)
//   ErrorDetected  [chi0 |0> + chi1 |1>]  Sa                (input restored)
//
// with P(Ok) = e^{-2 kappa tau} regardless of jitter, since exactly one
// photon is in flight per attempt.
template <typename Rng>
AfcOutcome afc_attempt(const BranchState& input, const ChannelModel& channel, double t, Rng& rng,
                       AfcOrdering ordering = AfcOrdering::ZeroTakesFirstSlot,
                       std::string_view data_atom = "A") {
  detail::check_afc_input(input, data_atom);

  const double p_ok = channel.success_probability();
  const auto [s0, s1] = detail::slot_factors(channel, t, t + channel.tau(), ordering);

  AfcOutcome out;
  if (rng.next_double() < p_ok) {
    out.verdict = AfcVerdict::Ok;
    out.s0_applied = s0;
    out.s1_applied = s1;
    BranchState state = input;
    state.add_atom("B");
    const std::uint64_t data_mask = std::uint64_t{1} << state.atom_index(data_atom);
    const std::uint64_t b_mask = std::uint64_t{1} << state.atom_index("B");
    out.state = transform_branches(std::move(state), [&](Branch& br) {
      if (br.bits & data_mask) {
        br.bits |= b_mask;
        br.amp *= s1;
      } else {
        br.amp *= s0;
      }
    });
  } else {
    out.verdict = AfcVerdict::ErrorDetected;
    // The restored qubit keeps its relative amplitudes exactly; the lost
    // photon's record is a common scalar in a fresh orthogonal sector.
    out.state = scaled_into_fresh_sectors(input, std::sqrt(1.0 - p_ok));
  }
  return out;
}

struct AfcTransmitResult {
  BranchState state;   // final Ok state over (data atom, B)
  long long attempts = 0;
  double elapsed = 0.0;
  Complex s0{}, s1{};  // factors applied by the successful attempt
};

// Repeats afc_attempt until no error is detected; attempt k (0-based) starts
// at t0 + k * (2 tau + overhead).
template <typename Rng>
AfcTransmitResult afc_transmit(const BranchState& input, const ChannelModel& channel,
                               const RetryPolicy& policy, double t0, Rng& rng,
                               AfcOrdering ordering = AfcOrdering::ZeroTakesFirstSlot,
                               std::string_view data_atom = "A") {
  if (policy.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  const double attempt_span = 2.0 * channel.tau() + policy.attempt_overhead;

  BranchState state = input;
  for (long long k = 0; k < policy.max_attempts; ++k) {
    AfcOutcome outcome =
        afc_attempt(state, channel, t0 + static_cast<double>(k) * attempt_span, rng, ordering,
                    data_atom);
    outcome.attempt_index = k + 1;
    if (outcome.verdict == AfcVerdict::Ok) {
      return {std::move(outcome.state), k + 1, static_cast<double>(k + 1) * attempt_span,
              outcome.s0_applied, outcome.s1_applied};
    }
    state = std::move(outcome.state);
  }
  throw RetryExhaustedError(std::move(state), policy.max_attempts);
}

struct EprBuildResult {
  EprPairState pair;
  long long attempts = 0;
  double elapsed = 0.0;
  Complex s0{}, s1{};
};

// EPR creation through the absorption-free channel: transmit chi0 = chi1 = 1
// and read the Ok state in the Bell basis,
//
//   e_plus = (S0 + S1)/2,   e_minus = (S0 - S1)/2.
//
// A stationary environment gives S0 = S1 and hence fidelity 1 after a single
// successful use.
template <typename Rng>
EprBuildResult build_epr_via_afc(const ChannelModel& channel, const RetryPolicy& policy, double t0,
                                 Rng& rng,
                                 AfcOrdering ordering = AfcOrdering::ZeroTakesFirstSlot) {
  const BranchState input = BranchState::single_qubit("A", 1.0, 1.0);
  AfcTransmitResult r = afc_transmit(input, channel, policy, t0, rng, ordering);
  EprBuildResult out;
  out.pair = EprPairState::from_amplitudes(0.5 * (r.s0 + r.s1), 0.5 * (r.s0 - r.s1)).normalized();
  out.attempts = r.attempts;
  out.elapsed = r.elapsed;
  out.s0 = r.s0;
  out.s1 = r.s1;
  return out;
}

} // namespace eprsim

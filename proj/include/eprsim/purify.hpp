#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "eprsim/afc.hpp"
#include "eprsim/epr_pair.hpp"
#include "eprsim/errors.hpp"

namespace eprsim {

// ---------------------------------------------------------------------------
// Iterative self-purification of one pair.
//
// Each step builds an auxiliary pair through the absorption-free channel,
// entangles it with the held pair via local CNOTs, and measures the
// auxiliaries. The measurement outcome applies one of two recursions to the
// pair's environment records,
//
//   up:    e_plus *= (S0 + S1)/2,   e_minus *= (S0 - S1)/2
//   down:  e_plus *= (S0 - S1)/2,   e_minus *= (S0 + S1)/2
//
// sampled with probability equal to the squared norm of the corresponding
// projected records. The fidelity performs a one-sided random walk; a
// reflecting barrier rebuilds the pair by a single channel use whenever the
// walk drops below the initial fidelity.
// ---------------------------------------------------------------------------

enum class PurifyOutcome { Up, Down };

// Which measurement branch is reported as Up. The physics fixes only that the
// two branches apply the two recursions; the labeling is conventional.
enum class UpMapping { SumIsUp, DiffIsUp };

struct PurifyStepResult {
  PurifyOutcome outcome = PurifyOutcome::Up;
  EprPairState new_pair;
  double prob = 0.0; // probability of the outcome that occurred
  long long aux_attempts = 0;
  double elapsed = 0.0;
};

struct Trajectory {
  std::vector<double> fidelities;  // F0, F1, ..., FN (post-barrier values)
  std::vector<long long> resets;   // step indices where the barrier fired
  long long attempts_total = 0;    // channel attempts consumed, builds included
  double elapsed = 0.0;
  bool reached_target = false;

  long long steps() const { return static_cast<long long>(fidelities.size()) - 1; }
};

class ConvergenceError : public Error {
public:
  ConvergenceError(std::string what, Trajectory t)
      : Error(std::move(what)), trajectory(std::move(t)) {}

  Trajectory trajectory;
};

namespace detail {

inline EprPairState scaled_records(const EprPairState& pair, Complex on_plus, Complex on_minus) {
  EprPairState out = pair;
  for (EprPairState::Sector& s : out.sectors) {
    s.plus *= on_plus;
    s.minus *= on_minus;
  }
  return out;
}

} // namespace detail

// One purification step at channel time t. The auxiliary pair is created by
// one absorption-free transmission (with its own retry loop) whose factors
// (S0, S1) drive the recursion above.
template <typename Rng>
PurifyStepResult purify_step(const EprPairState& pair, const ChannelModel& channel, double t,
                             Rng& rng, const RetryPolicy& policy = {},
                             UpMapping mapping = UpMapping::SumIsUp,
                             AfcOrdering ordering = AfcOrdering::ZeroTakesFirstSlot) {
  if (pair.norm2() <= 0.0) throw DegenerateStateError("purify_step: degenerate pair");

  const BranchState input = BranchState::single_qubit("A", 1.0, 1.0);
  const AfcTransmitResult aux = afc_transmit(input, channel, policy, t, rng, ordering);

  const Complex sum = 0.5 * (aux.s0 + aux.s1);
  const Complex diff = 0.5 * (aux.s0 - aux.s1);

  EprPairState sum_on_plus = detail::scaled_records(pair, sum, diff);
  EprPairState diff_on_plus = detail::scaled_records(pair, diff, sum);
  if (mapping == UpMapping::DiffIsUp) std::swap(sum_on_plus, diff_on_plus);

  const double n_up = sum_on_plus.norm2();
  const double n_down = diff_on_plus.norm2();
  const double total = n_up + n_down;
  if (total <= 0.0) throw DegenerateStateError("purify_step: both outcomes have zero norm");

  PurifyStepResult result;
  result.aux_attempts = aux.attempts;
  result.elapsed = aux.elapsed;
  const double p_up = n_up / total;
  if (rng.next_double() < p_up) {
    result.outcome = PurifyOutcome::Up;
    result.prob = p_up;
    result.new_pair = sum_on_plus.normalized();
  } else {
    result.outcome = PurifyOutcome::Down;
    result.prob = 1.0 - p_up;
    result.new_pair = diff_on_plus.normalized();
  }
  result.new_pair.history = pair.history + 1;
  return result;
}

namespace detail {

// Comparisons against the barrier allow for round-off: an up-down excursion
// returns to the barrier only to within a few ulp.
inline constexpr double kBarrierSlack = 1e-12;

struct WalkState {
  EprPairState pair;
  double f0 = 0.0; // barrier value, fidelity of the initial build
  double clock = 0.0;
};

template <typename Rng>
WalkState start_walk(const ChannelModel& channel, const RetryPolicy& policy, Rng& rng,
                     Trajectory& traj) {
  EprBuildResult build = build_epr_via_afc(channel, policy, 0.0, rng);
  traj.attempts_total += build.attempts;
  traj.elapsed += build.elapsed;
  const double f0 = build.pair.fidelity();
  traj.fidelities.push_back(f0);
  return {std::move(build.pair), f0, build.elapsed};
}

// Advances the walk by one step, applying the barrier. Returns the recorded
// (post-barrier) fidelity.
template <typename Rng>
double advance_walk(WalkState& w, const ChannelModel& channel, const RetryPolicy& policy,
                    Rng& rng, bool barrier, Trajectory& traj) {
  const long long step_index = static_cast<long long>(traj.fidelities.size());
  PurifyStepResult step = purify_step(w.pair, channel, w.clock, rng, policy);
  w.pair = std::move(step.new_pair);
  w.clock += step.elapsed;
  traj.attempts_total += step.aux_attempts;
  traj.elapsed += step.elapsed;

  double f = w.pair.fidelity();
  if (barrier && f < w.f0 - kBarrierSlack) {
    EprBuildResult rebuild = build_epr_via_afc(channel, policy, w.clock, rng);
    w.pair = std::move(rebuild.pair);
    w.clock += rebuild.elapsed;
    traj.attempts_total += rebuild.attempts;
    traj.elapsed += rebuild.elapsed;
    traj.resets.push_back(step_index);
    f = w.pair.fidelity();
  }
  traj.fidelities.push_back(f);
  return f;
}

} // namespace detail

// Builds a pair and purifies it until its fidelity reaches f_target,
// rebuilding at the barrier whenever the walk drops below the initial
// fidelity. Throws ConvergenceError (carrying the trajectory so far) if the
// step cap is hit first.
template <typename Rng>
Trajectory purify_with_barrier(const ChannelModel& channel, double f_target,
                               const RetryPolicy& policy, Rng& rng, long long step_cap = 10'000,
                               bool barrier = true) {
  if (!(f_target > 0.5 && f_target < 1.0))
    throw PreconditionError("f_target must lie in (0.5, 1)");

  Trajectory traj;
  detail::WalkState w = detail::start_walk(channel, policy, rng, traj);
  if (w.f0 >= f_target) {
    traj.reached_target = true;
    return traj;
  }
  if (w.f0 <= 0.5)
    throw PreconditionError("single-use fidelity must exceed 0.5 for purification to converge");

  for (long long step = 1; step <= step_cap; ++step) {
    const double f = detail::advance_walk(w, channel, policy, rng, barrier, traj);
    if (f >= f_target) {
      traj.reached_target = true;
      return traj;
    }
  }
  throw ConvergenceError("purification did not reach the target fidelity within the step cap",
                         std::move(traj));
}

// Fixed-length walk (no stopping target); used for ensemble statistics.
template <typename Rng>
Trajectory purify_walk(const ChannelModel& channel, long long n_steps, const RetryPolicy& policy,
                       Rng& rng, bool barrier = true) {
  if (n_steps < 0) throw ConfigError("n_steps must be nonnegative");
  Trajectory traj;
  detail::WalkState w = detail::start_walk(channel, policy, rng, traj);
  for (long long step = 1; step <= n_steps; ++step)
    detail::advance_walk(w, channel, policy, rng, barrier, traj);
  return traj;
}

// Purifies an existing pair (barrier at f_barrier) up to f_target, accounting
// into `traj`. Used when raising segment pairs to a working fidelity.
template <typename Rng>
EprPairState purify_pair_to(EprPairState pair, double f_barrier, double f_target,
                            const ChannelModel& channel, const RetryPolicy& policy, Rng& rng,
                            long long step_cap, Trajectory& traj) {
  detail::WalkState w{std::move(pair), f_barrier, traj.elapsed};
  double f = w.pair.fidelity();
  traj.fidelities.push_back(f);
  long long taken = 0;
  while (f < f_target) {
    if (++taken > step_cap)
      throw ConvergenceError("purification did not reach the working fidelity within the step cap",
                             std::move(traj));
    f = detail::advance_walk(w, channel, policy, rng, true, traj);
  }
  return std::move(w.pair);
}

} // namespace eprsim

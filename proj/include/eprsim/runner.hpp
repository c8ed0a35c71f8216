#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "eprsim/afc.hpp"
#include "eprsim/channel.hpp"
#include "eprsim/config.hpp"
#include "eprsim/epr_pair.hpp"
#include "eprsim/errors.hpp"
#include "eprsim/purify.hpp"
#include "eprsim/repeater.hpp"
#include "eprsim/report.hpp"
#include "eprsim/rng.hpp"

namespace eprsim {

namespace detail {

struct TrialOutput {
  TrialRecord record;
  std::optional<Trajectory> trajectory;
};

// Direct (uncorrected) transmission: repeat until the photon survives, each
// attempt succeeding with p = e^{-2 kappa tau}. Reports the repetition count
// and the |Phi+> overlap of the direct pair created by the final attempt.
template <typename Rng>
TrialOutput run_channel_trial(const SimConfig& cfg, const ChannelModel& channel, Rng& rng) {
  const double p = channel.success_probability();
  long long attempts = 1;
  while (rng.next_double() >= p) {
    if (++attempts > cfg.max_attempts)
      throw RetryExhaustedError(BranchState{}, cfg.max_attempts);
  }
  const double span = channel.tau() + cfg.attempt_overhead;
  const double t_success = static_cast<double>(attempts - 1) * span;
  TrialOutput out;
  out.record.attempts = attempts;
  out.record.final_fidelity = phi_plus_overlap(direct_epr(channel, t_success), "A", "B");
  out.record.elapsed = static_cast<double>(attempts) * span;
  return out;
}

template <typename Rng>
TrialOutput run_afc_trial(const SimConfig& cfg, const ChannelModel& channel, Rng& rng) {
  const EprBuildResult build =
      build_epr_via_afc(channel, cfg.retry_policy(), 0.0, rng, cfg.ordering);
  TrialOutput out;
  out.record.attempts = build.attempts;
  out.record.final_fidelity = build.pair.fidelity();
  out.record.elapsed = build.elapsed;
  return out;
}

template <typename Rng>
TrialOutput run_purify_trial(const SimConfig& cfg, const ChannelModel& channel, Rng& rng) {
  Trajectory traj;
  if (cfg.steps)
    traj = purify_walk(channel, *cfg.steps, cfg.retry_policy(), rng, cfg.barrier);
  else
    traj = purify_with_barrier(channel, *cfg.f_target, cfg.retry_policy(), rng, cfg.step_cap,
                               cfg.barrier);
  TrialOutput out;
  out.record.attempts = traj.attempts_total;
  out.record.steps = traj.steps();
  out.record.final_fidelity = traj.fidelities.back();
  out.record.resets = static_cast<long long>(traj.resets.size());
  out.record.elapsed = traj.elapsed;
  if (!cfg.trajectory_output.empty()) out.trajectory = std::move(traj);
  return out;
}

template <typename Rng>
TrialOutput run_chain_trial(const SimConfig& cfg, Rng& rng) {
  const ChannelModel segment = cfg.segment_channel();
  const RetryPolicy policy = cfg.retry_policy();
  const double eta = cfg.connection_eta;

  Trajectory acct; // accounting only: attempts, elapsed, resets
  long long purify_steps = 0;

  auto raise_to = [&](EprPairState pair, double target) {
    const std::size_t before = acct.fidelities.size();
    const double barrier = pair.fidelity();
    pair = purify_pair_to(std::move(pair), barrier, target, segment, policy, rng, cfg.step_cap,
                          acct);
    purify_steps += static_cast<long long>(acct.fidelities.size() - before) - 1;
    return pair;
  };

  std::vector<EprPairState> pairs;
  pairs.reserve(static_cast<std::size_t>(*cfg.n_segments));
  for (long long s = 0; s < *cfg.n_segments; ++s) {
    EprBuildResult build = build_epr_via_afc(segment, policy, acct.elapsed, rng, cfg.ordering);
    acct.attempts_total += build.attempts;
    acct.elapsed += build.elapsed;
    EprPairState pair = std::move(build.pair);
    if (cfg.f_working && pair.fidelity() < *cfg.f_working) pair = raise_to(std::move(pair), *cfg.f_working);
    pairs.push_back(std::move(pair));
  }

  auto join = [&](const EprPairState& a, const EprPairState& b) {
    EprPairState joined = connect_pairs(a, b);
    if (eta < 1.0) {
      const double f = 0.5 * (1.0 + eta * (2.0 * joined.fidelity() - 1.0));
      EprPairState damped = EprPairState::dephased(f);
      damped.history = joined.history;
      return damped;
    }
    return joined.compressed();
  };

  // repurify raises pairs back to the working fidelity between connection
  // rounds only; the final pair reports its true end-to-end fidelity
  if (cfg.schedule == Schedule::Doubling) {
    while (pairs.size() > 1) {
      std::vector<EprPairState> next;
      next.reserve(pairs.size() / 2);
      for (std::size_t i = 0; i + 1 < pairs.size(); i += 2)
        next.push_back(join(pairs[i], pairs[i + 1]));
      if (cfg.repurify && next.size() > 1)
        for (EprPairState& p : next)
          if (p.fidelity() < *cfg.f_working) p = raise_to(std::move(p), *cfg.f_working);
      pairs = std::move(next);
    }
  } else {
    EprPairState acc = std::move(pairs.front());
    for (std::size_t i = 1; i < pairs.size(); ++i) {
      acc = join(acc, pairs[i]);
      if (cfg.repurify && i + 1 < pairs.size() && acc.fidelity() < *cfg.f_working)
        acc = raise_to(std::move(acc), *cfg.f_working);
    }
    pairs.assign(1, std::move(acc));
  }

  TrialOutput out;
  out.record.attempts = acct.attempts_total;
  out.record.steps = purify_steps;
  out.record.final_fidelity = pairs.front().fidelity();
  out.record.resets = static_cast<long long>(acct.resets.size());
  out.record.elapsed = acct.elapsed;
  return out;
}

inline TrialOutput run_trial(const SimConfig& cfg, long long trial) {
  SplitMix64 rng = trial_stream(cfg.seed, static_cast<std::uint64_t>(trial));
  TrialOutput out;
  switch (cfg.scenario) {
  case Scenario::Channel:
    out = run_channel_trial(cfg, cfg.channel(), rng);
    break;
  case Scenario::Afc:
    out = run_afc_trial(cfg, cfg.channel(), rng);
    break;
  case Scenario::Purify:
    out = run_purify_trial(cfg, cfg.channel(), rng);
    break;
  case Scenario::Chain:
    out = run_chain_trial(cfg, rng);
    break;
  case Scenario::Plan:
    throw ConfigError("plan scenario has no trials");
  }
  out.record.trial = trial;
  return out;
}

inline SimReport run_plan(const SimConfig& cfg) {
  SimReport report;
  report.config = cfg;
  report.cost = cost_report(*cfg.l, *cfg.l0);

  const long long scan_hi =
      std::max<long long>(static_cast<long long>(std::ceil(2.0 * *cfg.l / *cfg.l0)) + 1,
                          cfg.n_segments.value_or(1));
  for (long long n = 1; n <= scan_hi; ++n) {
    PlanRow row;
    row.n_segments = n;
    row.compound_cost = compound_cost(*cfg.l, *cfg.l0, n);
    if (cfg.f0) row.chain_fidelity = connect_chain(*cfg.f0, n, cfg.connection_eta);
    report.scan_rows.push_back(row);
  }
  if (cfg.f0 && cfg.schedule == Schedule::Doubling) {
    const long long n = cfg.n_segments.value_or(report.cost->n_segments);
    if (n >= 1 && (n & (n - 1)) == 0)
      report.schedule_rows = doubling_schedule(*cfg.f0, n, cfg.connection_eta);
  }
  if (cfg.f_target) {
    const long long n = cfg.n_segments.value_or(report.cost->n_segments);
    report.required_f0 = required_initial_fidelity(*cfg.f_target, n);
  }
  return report;
}

} // namespace detail

// Runs every trial of the configured scenario. Trial i draws from a random
// substream derived from (seed, i) alone, and results are assembled in trial
// order, so the report is identical for any thread count. A failing trial is
// recorded and does not abort the run.
inline SimReport run(const SimConfig& cfg, int threads = 1) {
  if (cfg.scenario == Scenario::Plan) return detail::run_plan(cfg);

  const long long n = cfg.trials;
  std::vector<std::optional<detail::TrialOutput>> outputs(static_cast<std::size_t>(n));
  std::vector<std::optional<std::string>> errors(static_cast<std::size_t>(n));

  auto work = [&](long long lo, long long hi) {
    for (long long i = lo; i < hi; ++i) {
      try {
        outputs[static_cast<std::size_t>(i)] = detail::run_trial(cfg, i);
      } catch (const Error& e) {
        errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::min<long long>(
                                                             n, std::numeric_limits<int>::max()))));
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long long chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long long lo = w * chunk;
      const long long hi = std::min<long long>(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (std::thread& t : pool) t.join();
  }

  SimReport report;
  report.config = cfg;
  for (long long i = 0; i < n; ++i) {
    if (outputs[static_cast<std::size_t>(i)]) {
      detail::TrialOutput& out = *outputs[static_cast<std::size_t>(i)];
      report.records.push_back(out.record);
      if (out.trajectory) report.trajectories.emplace_back(i, std::move(*out.trajectory));
    } else {
      report.failures.push_back({i, errors[static_cast<std::size_t>(i)].value_or("unknown error")});
    }
  }
  return report;
}

} // namespace eprsim

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eprsim/epr_pair.hpp"
#include "eprsim/errors.hpp"

namespace eprsim {

// ---------------------------------------------------------------------------
// Cost calculus for a compound fiber and the pair-connection fidelity algebra.
// ---------------------------------------------------------------------------

// Average number of repetitions to send one photon across a simple fiber of
// length l: n(l) = 1/p(l) = e^{l/l0}.
inline double simple_cost(double l, double l0) {
  if (l0 <= 0.0) throw PreconditionError("l0 must be positive");
  if (l < 0.0) throw PreconditionError("l must be nonnegative");
  return std::exp(l / l0);
}

// Total transmissions across a fiber split into n segments with a checkpoint
// after each: n_com = n * e^{l/(n*l0)}.
inline double compound_cost(double l, double l0, long long n) {
  if (n < 1) throw PreconditionError("segment count must be at least 1");
  if (l0 <= 0.0) throw PreconditionError("l0 must be positive");
  if (l < 0.0) throw PreconditionError("l must be nonnegative");
  return static_cast<double>(n) * std::exp(l / (static_cast<double>(n) * l0));
}

// Integer segment count minimizing compound_cost; ties go to fewer segments.
// The continuum optimum is at l/l0, so scanning up to ~2*l/l0 is exhaustive.
inline long long optimal_segments(double l, double l0) {
  if (l <= 0.0) throw PreconditionError("l must be positive");
  if (l0 <= 0.0) throw PreconditionError("l0 must be positive");
  const long long hi = static_cast<long long>(std::ceil(2.0 * l / l0)) + 1;
  long long best = 1;
  double best_cost = compound_cost(l, l0, 1);
  for (long long n = 2; n <= hi; ++n) {
    const double c = compound_cost(l, l0, n);
    if (c < best_cost) {
      best_cost = c;
      best = n;
    }
  }
  return best;
}

// Transmission count at the continuum optimum N = l/l0: n_min = (l/l0) e.
inline double min_cost(double l, double l0) {
  if (l <= 0.0) throw PreconditionError("l must be positive");
  if (l0 <= 0.0) throw PreconditionError("l0 must be positive");
  return (l / l0) * std::exp(1.0);
}

struct CostReport {
  double simple_cost = 0.0;
  double compound_cost = 0.0; // at the integer-optimal segment count
  double min_cost = 0.0;      // continuum optimum (l/l0) e
  long long n_segments = 1;   // integer-optimal segment count
  long long n_min = 1;        // min_cost rounded to whole transmissions
};

inline CostReport cost_report(double l, double l0) {
  CostReport r;
  r.simple_cost = simple_cost(l, l0);
  r.n_segments = optimal_segments(l, l0);
  r.compound_cost = compound_cost(l, l0, r.n_segments);
  r.min_cost = min_cost(l, l0);
  r.n_min = std::llround(r.min_cost);
  return r;
}

// Fidelity after connecting two pairs at a checkpoint:
// 2F - 1 = eta (2F1 - 1)(2F2 - 1), with eta an optional depolarizing factor
// for an imperfect connection operation (1 = perfect). F = 1 is a fixed
// point and F = 1/2 is absorbing; F <= min(F1, F2) for inputs >= 1/2.
inline double connect(double f1, double f2, double eta = 1.0) {
  if (f1 < 0.0 || f1 > 1.0 || f2 < 0.0 || f2 > 1.0)
    throw PreconditionError("fidelities must lie in [0, 1]");
  if (eta < 0.0 || eta > 1.0) throw PreconditionError("eta must lie in [0, 1]");
  return 0.5 * (1.0 + eta * (2.0 * f1 - 1.0) * (2.0 * f2 - 1.0));
}

// Connecting n pairs of fidelity f0: F = (1 + eta^{n-1} (2 f0 - 1)^n) / 2.
// Equals any fold of `connect` over the n pairs.
inline double connect_chain(double f0, long long n, double eta = 1.0) {
  if (n < 1) throw PreconditionError("pair count must be at least 1");
  if (f0 < 0.0 || f0 > 1.0) throw PreconditionError("f0 must lie in [0, 1]");
  if (eta < 0.0 || eta > 1.0) throw PreconditionError("eta must lie in [0, 1]");
  return 0.5 * (1.0 + std::pow(eta, static_cast<double>(n - 1)) *
                          std::pow(2.0 * f0 - 1.0, static_cast<double>(n)));
}

struct DoublingRow {
  int round = 0;
  long long pairs_remaining = 1;
  double fidelity = 0.0;
};

// Connection at every second checkpoint per round: after round k there are
// N/2^k pairs of fidelity (1 + (2 f0 - 1)^{2^k}) / 2, finishing in log2(N)
// rounds. Requires N to be a power of two.
inline std::vector<DoublingRow> doubling_schedule(double f0, long long n, double eta = 1.0) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw PreconditionError("doubling schedule requires a power-of-two segment count");
  std::vector<DoublingRow> rows;
  rows.push_back({0, n, f0});
  long long pairs = n;
  int round = 0;
  double f = f0;
  while (pairs > 1) {
    pairs /= 2;
    ++round;
    f = connect(f, f, eta);
    rows.push_back({round, pairs, f});
  }
  return rows;
}

// Per-segment fidelity needed so that connecting n segments meets f_target:
// f0 = (1 + (2 f_target - 1)^{1/n}) / 2.
inline double required_initial_fidelity(double f_target, long long n) {
  if (n < 1) throw PreconditionError("segment count must be at least 1");
  if (!(f_target > 0.5 && f_target < 1.0))
    throw PreconditionError("f_target must lie in (0.5, 1)");
  return 0.5 * (1.0 + std::pow(2.0 * f_target - 1.0, 1.0 / static_cast<double>(n)));
}

// Record-level connection of two pairs (Bell measurement at the middle node).
// The pairs carry independent environments, so the result's records live on
// pairwise-composed sectors:
//
//   plus':  plus1 x plus2  and  minus1 x minus2
//   minus': plus1 x minus2 and  minus1 x plus2
//
// each product on its own fresh sector (dephased convention), which makes
// fidelity(result) = connect(fidelity(p1), fidelity(p2)) hold exactly.
inline EprPairState connect_pairs(const EprPairState& p1, const EprPairState& p2) {
  if (p1.norm2() <= 0.0 || p2.norm2() <= 0.0)
    throw DegenerateStateError("connect_pairs: degenerate input pair");
  EprPairState out;
  const std::uint64_t n2 = p2.sectors.size();
  for (std::uint64_t i = 0; i < p1.sectors.size(); ++i) {
    for (std::uint64_t j = 0; j < n2; ++j) {
      const auto& a = p1.sectors[i];
      const auto& b = p2.sectors[j];
      const std::uint64_t base = 4 * (i * n2 + j);
      if (const Complex pp = a.plus * b.plus; pp != Complex{})
        out.sectors.push_back({base + 0, pp, 0.0});
      if (const Complex mm = a.minus * b.minus; mm != Complex{})
        out.sectors.push_back({base + 1, mm, 0.0});
      if (const Complex pm = a.plus * b.minus; pm != Complex{})
        out.sectors.push_back({base + 2, 0.0, pm});
      if (const Complex mp = a.minus * b.plus; mp != Complex{})
        out.sectors.push_back({base + 3, 0.0, mp});
    }
  }
  if (out.sectors.empty()) throw DegenerateStateError("connect_pairs: result has zero norm");
  out.history = p1.history + p2.history;
  return out;
}

} // namespace eprsim

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "eprsim/config.hpp"
#include "eprsim/purify.hpp"
#include "eprsim/repeater.hpp"

namespace eprsim {

inline constexpr const char* kCodeVersion = "eprsim 0.1.0";

struct TrialRecord {
  long long trial = 0;
  long long attempts = 0;
  long long steps = 0;
  double final_fidelity = 0.0;
  long long resets = 0;
  double elapsed = 0.0; // channel time, not wall clock
};

struct TrialFailure {
  long long trial = 0;
  std::string message;
};

struct PlanRow {
  long long n_segments = 1;
  double compound_cost = 0.0;
  std::optional<double> chain_fidelity; // present when f0 was configured
};

// Simple stats over the per-trial records. Computed by a single left-to-right
// pass in trial order so they can be reproduced exactly from the emitted rows.
struct Aggregate {
  long long count = 0;
  double mean = 0.0;
  double variance = 0.0; // sample variance
  double ci95 = 0.0;     // half-width, normal approximation
};

template <typename Accessor>
Aggregate aggregate_over(const std::vector<TrialRecord>& records, Accessor&& value) {
  Aggregate a;
  a.count = static_cast<long long>(records.size());
  if (a.count == 0) return a;
  double sum = 0.0;
  for (const TrialRecord& r : records) sum += value(r);
  a.mean = sum / static_cast<double>(a.count);
  if (a.count > 1) {
    double ss = 0.0;
    for (const TrialRecord& r : records) {
      const double d = value(r) - a.mean;
      ss += d * d;
    }
    a.variance = ss / static_cast<double>(a.count - 1);
    a.ci95 = 1.959963984540054 * std::sqrt(a.variance / static_cast<double>(a.count));
  }
  return a;
}

struct SimReport {
  SimConfig config;
  std::string code_version = kCodeVersion;

  std::vector<TrialRecord> records; // ordered by trial index
  std::vector<TrialFailure> failures;

  // plan scenario payload
  std::optional<CostReport> cost;
  std::vector<PlanRow> scan_rows;
  std::vector<DoublingRow> schedule_rows;
  std::optional<double> required_f0;

  // purify trajectories with their trial index, kept only when trajectory
  // output was requested
  std::vector<std::pair<long long, Trajectory>> trajectories;

  Aggregate attempts_stats() const {
    return aggregate_over(records, [](const TrialRecord& r) { return double(r.attempts); });
  }
  Aggregate fidelity_stats() const {
    return aggregate_over(records, [](const TrialRecord& r) { return r.final_fidelity; });
  }
  Aggregate steps_stats() const {
    return aggregate_over(records, [](const TrialRecord& r) { return double(r.steps); });
  }
  Aggregate resets_stats() const {
    return aggregate_over(records, [](const TrialRecord& r) { return double(r.resets); });
  }
  Aggregate elapsed_stats() const {
    return aggregate_over(records, [](const TrialRecord& r) { return r.elapsed; });
  }
};

} // namespace eprsim

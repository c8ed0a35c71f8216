#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <string_view>

#include "eprsim/errors.hpp"
#include "eprsim/format.hpp"
#include "eprsim/report.hpp"

namespace eprsim {

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary); // binary: LF line endings everywhere
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline std::string csv_quote(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

// Sibling path "<stem>_summary.csv" next to the main output.
inline std::string summary_path(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return path.substr(0, dot) + "_summary" + path.substr(dot);
  return path + "_summary.csv";
}

inline std::string schedule_path(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  const std::size_t dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return path.substr(0, dot) + "_schedule" + path.substr(dot);
  return path + "_schedule.csv";
}

inline void emit_summary(const SimReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "key,value\n";
  out << "code_version," << csv_quote(report.code_version) << "\n";
  for (const auto& [k, v] : report.config.echo_pairs())
    out << "config." << k << "," << csv_quote(v) << "\n";

  if (report.config.scenario == Scenario::Plan) {
    const CostReport& c = *report.cost;
    out << "simple_cost," << format_double(c.simple_cost) << "\n";
    out << "n_segments_opt," << format_int(c.n_segments) << "\n";
    out << "compound_cost," << format_double(c.compound_cost) << "\n";
    out << "min_cost," << format_double(c.min_cost) << "\n";
    out << "n_min," << format_int(c.n_min) << "\n";
    if (report.required_f0) out << "required_f0," << format_double(*report.required_f0) << "\n";
  } else {
    out << "trials_ok," << format_int(static_cast<long long>(report.records.size())) << "\n";
    out << "trials_failed," << format_int(static_cast<long long>(report.failures.size())) << "\n";
    auto put = [&](const char* name, const Aggregate& a) {
      out << "mean_" << name << "," << format_double(a.mean) << "\n";
      out << "var_" << name << "," << format_double(a.variance) << "\n";
      out << "ci95_" << name << "," << format_double(a.ci95) << "\n";
    };
    put("attempts", report.attempts_stats());
    put("final_fidelity", report.fidelity_stats());
    put("steps", report.steps_stats());
    put("resets", report.resets_stats());
    put("elapsed_channel_time", report.elapsed_stats());
    for (const TrialFailure& f : report.failures)
      out << "failure_" << f.trial << "," << csv_quote(f.message) << "\n";
  }
  if (!out) throw IoError("write failed on '" + path + "'");
}

} // namespace detail

// Writes the main CSV (header row, one row per trial for stochastic
// scenarios; one row per scanned segment count for plan), a companion
// "<stem>_summary.csv" with the config echo and aggregates, and, when
// configured, trajectory and doubling-schedule files. Numbers carry 17
// significant digits so parsing them back reproduces the exact doubles.
inline void emit_csv(const SimReport& report, const std::string& path) {
  {
    std::ofstream out = detail::open_out(path);
    if (report.config.scenario == Scenario::Plan) {
      out << "n_segments,compound_cost,chain_fidelity\n";
      for (const PlanRow& row : report.scan_rows) {
        out << format_int(row.n_segments) << "," << format_double(row.compound_cost) << ",";
        if (row.chain_fidelity) out << format_double(*row.chain_fidelity);
        out << "\n";
      }
    } else {
      out << "trial,attempts,steps,final_fidelity,resets,elapsed_channel_time\n";
      for (const TrialRecord& r : report.records) {
        out << format_int(r.trial) << "," << format_int(r.attempts) << "," << format_int(r.steps)
            << "," << format_double(r.final_fidelity) << "," << format_int(r.resets) << ","
            << format_double(r.elapsed) << "\n";
      }
    }
    if (!out) throw IoError("write failed on '" + path + "'");
  }

  detail::emit_summary(report, detail::summary_path(path));

  if (!report.schedule_rows.empty()) {
    std::ofstream out = detail::open_out(detail::schedule_path(path));
    out << "round,pairs_remaining,fidelity\n";
    for (const DoublingRow& row : report.schedule_rows)
      out << row.round << "," << format_int(row.pairs_remaining) << ","
          << format_double(row.fidelity) << "\n";
    if (!out) throw IoError("write failed on schedule file for '" + path + "'");
  }

  if (!report.config.trajectory_output.empty() && report.config.scenario == Scenario::Purify) {
    std::ofstream out = detail::open_out(report.config.trajectory_output);
    out << "trial,step,fidelity,reset\n";
    for (const auto& [trial, traj] : report.trajectories) {
      for (std::size_t i = 0; i < traj.fidelities.size(); ++i) {
        const bool reset =
            std::find(traj.resets.begin(), traj.resets.end(), static_cast<long long>(i)) !=
            traj.resets.end();
        out << format_int(trial) << "," << format_int(static_cast<long long>(i)) << ","
            << format_double(traj.fidelities[i]) << "," << (reset ? 1 : 0) << "\n";
      }
    }
    if (!out) throw IoError("write failed on '" + report.config.trajectory_output + "'");
  }
}

} // namespace eprsim

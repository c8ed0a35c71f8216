#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "eprsim/afc.hpp"
#include "eprsim/channel.hpp"
#include "eprsim/errors.hpp"
#include "eprsim/format.hpp"

namespace eprsim {

enum class Scenario { Channel, Afc, Purify, Plan, Chain };
enum class Schedule { Doubling, Sequential };

inline std::string to_string(Scenario s) {
  switch (s) {
  case Scenario::Channel: return "channel";
  case Scenario::Afc: return "afc";
  case Scenario::Purify: return "purify";
  case Scenario::Plan: return "plan";
  case Scenario::Chain: return "chain";
  }
  return "?";
}

inline std::string to_string(Schedule s) {
  return s == Schedule::Doubling ? "doubling" : "sequential";
}

// Resolved, validated simulation configuration. Built from a flat key-value
// config file (and/or CLI flag overrides); unknown keys are rejected rather
// than silently ignored.
struct SimConfig {
  Scenario scenario = Scenario::Channel;

  // channel parameterization (as given; resolution happens in channel())
  std::optional<double> kappa, tau, kappa_tau, l, l0;
  JitterSpec jitter;
  double attempt_overhead = 0.0;
  AfcOrdering ordering = AfcOrdering::ZeroTakesFirstSlot;
  long long max_attempts = 1'000'000;

  long long trials = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;

  // purify
  std::optional<double> f_target;
  std::optional<long long> steps;
  long long step_cap = 10'000;
  bool barrier = true;

  // plan / chain
  std::optional<double> f0;
  std::optional<long long> n_segments;
  Schedule schedule = Schedule::Doubling;
  std::optional<double> f_working;
  bool repurify = false;
  double connection_eta = 1.0;

  std::string output;
  std::string trajectory_output;

  bool stochastic() const { return scenario != Scenario::Plan; }

  ChannelModel channel() const {
    return ChannelModel::resolve(kappa, tau, kappa_tau, l, l0, jitter);
  }

  // Channel of one segment of the compound fiber (chain scenario).
  ChannelModel segment_channel() const {
    return ChannelModel::from_lengths(*l / static_cast<double>(*n_segments), *l0, jitter);
  }

  RetryPolicy retry_policy() const {
    RetryPolicy p;
    p.max_attempts = max_attempts;
    p.attempt_overhead = attempt_overhead;
    return p;
  }

  std::string default_output() const { return to_string(scenario) + "_report.csv"; }

  // Canonical (resolved) key-value echo; identical configurations echo
  // identically, so reports are reproducible from their own metadata.
  std::vector<std::pair<std::string, std::string>> echo_pairs() const;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0; // 0 for entries not from a file (CLI overrides)
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] inline void fail_at(const ConfigEntry& e, const std::string& why) {
  if (e.line > 0)
    throw ConfigError("config line " + std::to_string(e.line) + ": " + why);
  throw ConfigError("config: " + why);
}

inline double parse_double(const ConfigEntry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    fail_at(e, "field '" + e.key + "': expected a number, got '" + e.value + "'");
  return v;
}

inline long long parse_ll(const ConfigEntry& e) {
  long long v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    fail_at(e, "field '" + e.key + "': expected an integer, got '" + e.value + "'");
  return v;
}

inline std::uint64_t parse_u64(const ConfigEntry& e) {
  std::uint64_t v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    fail_at(e, "field '" + e.key + "': expected an unsigned integer, got '" + e.value + "'");
  return v;
}

inline bool parse_bool(const ConfigEntry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  fail_at(e, "field '" + e.key + "': expected true or false, got '" + e.value + "'");
}

} // namespace detail

// Splits flat `key = value` text (UTF-8, '#' comments) into entries. Throws
// ConfigError with the line and column of the first malformed line.
inline std::vector<ConfigEntry> tokenize_config(std::string_view text) {
  std::vector<ConfigEntry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    if (detail::trim(line).empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ", column " +
                        std::to_string(detail::trim(line).size()) + ": expected 'key = value'");
    const std::string key{detail::trim(line.substr(0, eq))};
    const std::string value{detail::trim(line.substr(eq + 1))};
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ", column 1: empty key");
    if (value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ", column " +
                        std::to_string(eq + 2) + ": empty value for '" + key + "'");
    entries.push_back({key, value, line_no});
  }
  return entries;
}

// Builds and validates a SimConfig from entries (later entries override
// earlier ones with the same key, which is how CLI flags override a file).
inline SimConfig build_config(const std::vector<ConfigEntry>& raw) {
  using detail::fail_at;

  // keep only the last occurrence of each key, in first-seen order
  std::vector<ConfigEntry> entries;
  for (const ConfigEntry& e : raw) {
    bool replaced = false;
    for (ConfigEntry& kept : entries)
      if (kept.key == e.key) {
        kept = e;
        replaced = true;
        break;
      }
    if (!replaced) entries.push_back(e);
  }

  static const std::unordered_set<std::string> known = {
      "scenario",     "kappa",      "tau",          "kappa_tau",
      "l",            "l0",         "jitter",       "attempt_overhead",
      "ordering",     "max_attempts", "trials",     "seed",
      "f_target",     "steps",      "step_cap",     "barrier",
      "f0",           "n_segments", "schedule",     "f_working",
      "repurify",     "connection_eta", "output",   "trajectory_output"};
  for (const ConfigEntry& e : entries)
    if (!known.count(e.key)) fail_at(e, "unknown key '" + e.key + "'");

  auto find = [&](std::string_view key) -> const ConfigEntry* {
    for (const ConfigEntry& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  };

  SimConfig cfg;

  const ConfigEntry* sc = find("scenario");
  if (!sc) throw ConfigError("config: missing required key 'scenario'");
  if (sc->value == "channel")
    cfg.scenario = Scenario::Channel;
  else if (sc->value == "afc")
    cfg.scenario = Scenario::Afc;
  else if (sc->value == "purify")
    cfg.scenario = Scenario::Purify;
  else if (sc->value == "plan")
    cfg.scenario = Scenario::Plan;
  else if (sc->value == "chain")
    cfg.scenario = Scenario::Chain;
  else
    fail_at(*sc, "unknown scenario '" + sc->value + "'");

  const bool needs_channel = cfg.scenario == Scenario::Channel || cfg.scenario == Scenario::Afc ||
                             cfg.scenario == Scenario::Purify;
  const bool needs_lengths = cfg.scenario == Scenario::Plan || cfg.scenario == Scenario::Chain;

  auto applicable = [&](std::string_view key) -> bool {
    if (key == "scenario" || key == "output") return true;
    if (key == "kappa" || key == "tau" || key == "kappa_tau") return needs_channel;
    if (key == "l" || key == "l0") return true;
    if (key == "jitter" || key == "attempt_overhead" || key == "ordering" ||
        key == "max_attempts")
      return cfg.scenario != Scenario::Plan;
    if (key == "trials" || key == "seed") return cfg.stochastic();
    if (key == "f_target") return cfg.scenario == Scenario::Purify || cfg.scenario == Scenario::Plan;
    if (key == "steps" || key == "barrier" || key == "trajectory_output")
      return cfg.scenario == Scenario::Purify;
    if (key == "step_cap")
      return cfg.scenario == Scenario::Purify || cfg.scenario == Scenario::Chain;
    if (key == "f0") return cfg.scenario == Scenario::Plan;
    if (key == "n_segments" || key == "schedule" || key == "connection_eta") return needs_lengths;
    if (key == "f_working" || key == "repurify") return cfg.scenario == Scenario::Chain;
    return false;
  };
  for (const ConfigEntry& e : entries)
    if (!applicable(e.key))
      fail_at(e, "field '" + e.key + "' does not apply to scenario '" + to_string(cfg.scenario) +
                     "'");

  auto positive = [&](const ConfigEntry& e, double v) {
    if (!(v > 0.0)) fail_at(e, "field '" + e.key + "' must be positive");
    return v;
  };

  for (const ConfigEntry& e : entries) {
    if (e.key == "scenario") continue;
    if (e.key == "kappa")
      cfg.kappa = positive(e, detail::parse_double(e));
    else if (e.key == "tau")
      cfg.tau = positive(e, detail::parse_double(e));
    else if (e.key == "kappa_tau")
      cfg.kappa_tau = positive(e, detail::parse_double(e));
    else if (e.key == "l")
      cfg.l = positive(e, detail::parse_double(e));
    else if (e.key == "l0")
      cfg.l0 = positive(e, detail::parse_double(e));
    else if (e.key == "jitter") {
      try {
        cfg.jitter = JitterSpec::parse(e.value);
      } catch (const ConfigError& err) {
        fail_at(e, err.what());
      }
    } else if (e.key == "attempt_overhead") {
      cfg.attempt_overhead = detail::parse_double(e);
      if (cfg.attempt_overhead < 0.0) fail_at(e, "field 'attempt_overhead' must be nonnegative");
    } else if (e.key == "ordering") {
      if (e.value == "first-slot")
        cfg.ordering = AfcOrdering::ZeroTakesFirstSlot;
      else if (e.value == "second-slot")
        cfg.ordering = AfcOrdering::ZeroTakesSecondSlot;
      else
        fail_at(e, "field 'ordering' must be first-slot or second-slot");
    } else if (e.key == "max_attempts") {
      cfg.max_attempts = detail::parse_ll(e);
      if (cfg.max_attempts < 1) fail_at(e, "field 'max_attempts' must be at least 1");
    } else if (e.key == "trials") {
      cfg.trials = detail::parse_ll(e);
      if (cfg.trials < 1) fail_at(e, "field 'trials' must be at least 1");
    } else if (e.key == "seed") {
      cfg.seed = detail::parse_u64(e);
      cfg.seed_set = true;
    } else if (e.key == "f_target") {
      cfg.f_target = detail::parse_double(e);
      if (!(*cfg.f_target > 0.5 && *cfg.f_target < 1.0))
        fail_at(e, "field 'f_target' must lie in (0.5, 1)");
    } else if (e.key == "steps") {
      cfg.steps = detail::parse_ll(e);
      if (*cfg.steps < 0) fail_at(e, "field 'steps' must be nonnegative");
    } else if (e.key == "step_cap") {
      cfg.step_cap = detail::parse_ll(e);
      if (cfg.step_cap < 1) fail_at(e, "field 'step_cap' must be at least 1");
    } else if (e.key == "barrier")
      cfg.barrier = detail::parse_bool(e);
    else if (e.key == "f0") {
      cfg.f0 = detail::parse_double(e);
      if (!(*cfg.f0 > 0.5 && *cfg.f0 <= 1.0)) fail_at(e, "field 'f0' must lie in (0.5, 1]");
    } else if (e.key == "n_segments") {
      cfg.n_segments = detail::parse_ll(e);
      if (*cfg.n_segments < 1) fail_at(e, "field 'n_segments' must be at least 1");
    } else if (e.key == "schedule") {
      if (e.value == "doubling")
        cfg.schedule = Schedule::Doubling;
      else if (e.value == "sequential")
        cfg.schedule = Schedule::Sequential;
      else
        fail_at(e, "field 'schedule' must be doubling or sequential");
    } else if (e.key == "f_working") {
      cfg.f_working = detail::parse_double(e);
      if (!(*cfg.f_working > 0.5 && *cfg.f_working < 1.0))
        fail_at(e, "field 'f_working' must lie in (0.5, 1)");
    } else if (e.key == "repurify")
      cfg.repurify = detail::parse_bool(e);
    else if (e.key == "connection_eta") {
      cfg.connection_eta = detail::parse_double(e);
      if (cfg.connection_eta < 0.0 || cfg.connection_eta > 1.0)
        fail_at(e, "field 'connection_eta' must lie in [0, 1]");
    } else if (e.key == "output")
      cfg.output = e.value;
    else if (e.key == "trajectory_output")
      cfg.trajectory_output = e.value;
  }

  // cross-field and per-scenario requirements
  if (needs_channel) {
    cfg.channel(); // resolves and cross-checks; throws ConfigError on mismatch
  }
  if (needs_lengths) {
    if (!cfg.l) throw ConfigError("config: scenario '" + to_string(cfg.scenario) +
                                  "' requires field 'l'");
    if (!cfg.l0) throw ConfigError("config: scenario '" + to_string(cfg.scenario) +
                                   "' requires field 'l0'");
  }
  if (cfg.stochastic()) {
    if (cfg.trials < 1)
      throw ConfigError("config: scenario '" + to_string(cfg.scenario) +
                        "' requires field 'trials'");
    if (!cfg.seed_set)
      throw ConfigError("config: scenario '" + to_string(cfg.scenario) +
                        "' requires field 'seed' (no wall-clock seeding)");
  }
  if (cfg.scenario == Scenario::Purify) {
    if (cfg.f_target.has_value() == cfg.steps.has_value())
      throw ConfigError("config: purify requires exactly one of 'f_target' or 'steps'");
  }
  if (cfg.scenario == Scenario::Chain || (cfg.scenario == Scenario::Plan && cfg.n_segments)) {
    if (cfg.scenario == Scenario::Chain && !cfg.n_segments)
      throw ConfigError("config: chain requires field 'n_segments'");
    if (cfg.schedule == Schedule::Doubling && cfg.n_segments &&
        (*cfg.n_segments & (*cfg.n_segments - 1)) != 0)
      throw ConfigError("config: field 'n_segments' must be a power of two for the doubling "
                        "schedule");
  }
  if (cfg.scenario == Scenario::Chain && cfg.repurify && !cfg.f_working)
    throw ConfigError("config: 'repurify = true' requires field 'f_working'");
  if (cfg.output.empty()) cfg.output = cfg.default_output();
  return cfg;
}

inline SimConfig parse_config(std::string_view text) { return build_config(tokenize_config(text)); }

inline std::vector<std::pair<std::string, std::string>> SimConfig::echo_pairs() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("scenario", to_string(scenario));
  auto put_d = [&](const char* k, const std::optional<double>& v) {
    if (v) kv.emplace_back(k, format_double(*v));
  };
  put_d("kappa", kappa);
  put_d("tau", tau);
  put_d("kappa_tau", kappa_tau);
  put_d("l", l);
  put_d("l0", l0);
  if (scenario != Scenario::Plan) {
    kv.emplace_back("jitter", jitter.str());
    kv.emplace_back("attempt_overhead", format_double(attempt_overhead));
    kv.emplace_back("ordering", ordering == AfcOrdering::ZeroTakesFirstSlot ? "first-slot"
                                                                            : "second-slot");
    kv.emplace_back("max_attempts", format_int(max_attempts));
  }
  if (stochastic()) {
    kv.emplace_back("trials", format_int(trials));
    kv.emplace_back("seed", format_uint(seed));
  }
  if (scenario == Scenario::Purify) {
    if (f_target) kv.emplace_back("f_target", format_double(*f_target));
    if (steps) kv.emplace_back("steps", format_int(*steps));
    kv.emplace_back("step_cap", format_int(step_cap));
    kv.emplace_back("barrier", barrier ? "true" : "false");
    if (!trajectory_output.empty()) kv.emplace_back("trajectory_output", trajectory_output);
  }
  if (scenario == Scenario::Plan) {
    put_d("f0", f0);
    put_d("f_target", f_target);
    if (n_segments) kv.emplace_back("n_segments", format_int(*n_segments));
    kv.emplace_back("schedule", to_string(schedule));
    kv.emplace_back("connection_eta", format_double(connection_eta));
  }
  if (scenario == Scenario::Chain) {
    kv.emplace_back("n_segments", format_int(*n_segments));
    kv.emplace_back("schedule", to_string(schedule));
    if (f_working) kv.emplace_back("f_working", format_double(*f_working));
    kv.emplace_back("repurify", repurify ? "true" : "false");
    kv.emplace_back("connection_eta", format_double(connection_eta));
    kv.emplace_back("step_cap", format_int(step_cap));
  }
  kv.emplace_back("output", output);
  return kv;
}

} // namespace eprsim

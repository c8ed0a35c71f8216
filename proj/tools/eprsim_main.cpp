// Command-line front end: one subcommand per scenario, each taking
// --config <file> plus per-field flag overrides (flags win over the file).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "eprsim/eprsim.hpp"

namespace {

struct Cli {
  std::string config_path;
  int threads = 1;
  std::vector<eprsim::ConfigEntry> overrides;
};

void add_key_flags(CLI::App* cmd, Cli& cli, const std::vector<std::string>& keys) {
  for (const std::string& key : keys) {
    cmd->add_option_function<std::string>(
        "--" + key,
        [&cli, key](const std::string& value) { cli.overrides.push_back({key, value, 0}); },
        "config field '" + key + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw eprsim::IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

eprsim::SimConfig assemble_config(const Cli& cli, const std::string& scenario) {
  std::vector<eprsim::ConfigEntry> entries;
  if (!cli.config_path.empty()) {
    entries = eprsim::tokenize_config(read_file(cli.config_path));
    for (const eprsim::ConfigEntry& e : entries)
      if (e.key == "scenario" && e.value != scenario)
        throw eprsim::ConfigError("config file sets scenario '" + e.value +
                                  "' but the '" + scenario + "' subcommand was invoked");
  }
  entries.push_back({"scenario", scenario, 0});
  entries.insert(entries.end(), cli.overrides.begin(), cli.overrides.end());
  return eprsim::build_config(entries);
}

void print_summary(const eprsim::SimReport& report) {
  using eprsim::format_double;
  const eprsim::SimConfig& cfg = report.config;
  if (cfg.scenario == eprsim::Scenario::Plan) {
    const eprsim::CostReport& c = *report.cost;
    std::cout << "simple_cost      " << format_double(c.simple_cost) << "\n"
              << "n_segments_opt   " << c.n_segments << "\n"
              << "compound_cost    " << format_double(c.compound_cost) << "\n"
              << "min_cost         " << format_double(c.min_cost) << " (~" << c.n_min
              << " transmissions)\n";
    if (report.required_f0) std::cout << "required_f0      " << format_double(*report.required_f0) << "\n";
  } else {
    const eprsim::Aggregate attempts = report.attempts_stats();
    const eprsim::Aggregate fid = report.fidelity_stats();
    std::cout << "trials           " << report.records.size() << " ok, " << report.failures.size()
              << " failed\n"
              << "mean_attempts    " << format_double(attempts.mean) << " +/- "
              << format_double(attempts.ci95) << "\n"
              << "mean_fidelity    " << format_double(fid.mean) << " +/- "
              << format_double(fid.ci95) << "\n";
  }
  std::cout << "wrote            " << cfg.output << "\n";
}

const std::vector<std::string> kChannelKeys = {"kappa",     "tau",         "kappa_tau",
                                               "l",         "l0",          "jitter",
                                               "attempt_overhead", "ordering", "max_attempts"};
const std::vector<std::string> kTrialKeys = {"trials", "seed"};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"eprsim: entangled-pair creation over a lossy photonic channel"};
  app.set_version_flag("--version", eprsim::kCodeVersion);
  app.require_subcommand(1);

  Cli cli;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", cli.config_path, "config file (key = value lines)");
    cmd->add_option("--threads", cli.threads, "worker threads (does not affect results)")
        ->check(CLI::PositiveNumber);
    add_key_flags(cmd, cli, {"output"});
  };

  CLI::App* channel = app.add_subcommand("channel", "direct transmission statistics");
  add_common(channel);
  add_key_flags(channel, cli, kChannelKeys);
  add_key_flags(channel, cli, kTrialKeys);

  CLI::App* afc = app.add_subcommand("afc", "absorption-free channel EPR creation");
  add_common(afc);
  add_key_flags(afc, cli, kChannelKeys);
  add_key_flags(afc, cli, kTrialKeys);

  CLI::App* purify = app.add_subcommand("purify", "iterative self-purification random walk");
  add_common(purify);
  add_key_flags(purify, cli, kChannelKeys);
  add_key_flags(purify, cli, kTrialKeys);
  add_key_flags(purify, cli, {"f_target", "steps", "step_cap", "barrier", "trajectory_output"});

  CLI::App* plan = app.add_subcommand("plan", "compound-fiber cost and fidelity planning");
  add_common(plan);
  add_key_flags(plan, cli, {"l", "l0", "f0", "f_target", "n_segments", "schedule",
                            "connection_eta"});

  CLI::App* chain = app.add_subcommand("chain", "segment pairs, purify, and connect end to end");
  add_common(chain);
  add_key_flags(chain, cli, {"l", "l0", "n_segments", "schedule", "f_working", "repurify",
                             "connection_eta", "jitter", "attempt_overhead", "ordering",
                             "max_attempts", "step_cap"});
  add_key_flags(chain, cli, kTrialKeys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::string scenario;
  for (CLI::App* cmd : {channel, afc, purify, plan, chain})
    if (cmd->parsed()) scenario = cmd->get_name();

  try {
    const eprsim::SimConfig cfg = assemble_config(cli, scenario);
    const eprsim::SimReport report = eprsim::run(cfg, cli.threads);
    eprsim::emit_csv(report, cfg.output);
    print_summary(report);
    if (!report.failures.empty()) return 2;
    return 0;
  } catch (const eprsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const eprsim::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const eprsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

// Command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "antwsn/antwsn.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSimulation = 2;

int exit_code(antwsn_status s) {
  switch (s) {
    case ANTWSN_OK: return kExitOk;
    case ANTWSN_ERR_CONFIG:
    case ANTWSN_ERR_ARGUMENT: return kExitConfig;
    default: return kExitSimulation;
  }
}

struct Failure {
  antwsn_status status;
};

void check(antwsn_status s, const std::string& what) {
  if (s == ANTWSN_OK) return;
  std::cerr << "antwsn: " << what << ": " << antwsn_last_error() << "\n";
  throw Failure{s};
}

// Options shared by every subcommand; unset ones leave the config alone.
struct ScenarioOptions {
  std::string config_path;
  std::optional<std::string> protocol;
  std::optional<std::string> nodes;
  std::optional<std::string> scenario;
  std::optional<std::string> seed;
  std::optional<std::string> duration;
  std::vector<std::string> sets;
  std::string output_dir = "results";

  void attach(CLI::App* cmd, bool lists) {
    cmd->add_option("-c,--config", config_path, "Config file (flat key = value)");
    cmd->add_option("-p,--protocol", protocol,
                    lists ? "Protocols, comma separated (BABR,SC,FF,FP,EEABR,IEEABR or all)"
                          : "Protocol: BABR, SC, FF, FP, EEABR or IEEABR");
    cmd->add_option("-n,--nodes", nodes, lists ? "Node counts, comma separated" : "Number of sensor nodes");
    cmd->add_option("-s,--scenario", scenario, lists ? "Scenarios, comma separated (static,dynamic)"
                                                     : "Scenario: static or dynamic");
    cmd->add_option("--seed", seed, "Base random seed");
    cmd->add_option("-d,--duration", duration, "Simulated seconds");
    cmd->add_option("--set", sets, "Extra config override key=value (repeatable)");
    cmd->add_option("-o,--output-dir", output_dir, "Directory for result files");
  }

  template <typename Setter>
  void apply(Setter&& set) const {
    if (protocol) set("protocol", *protocol);
    if (nodes) set("nodes", *nodes);
    if (scenario) set("scenario", *scenario);
    if (seed) set("seed", *seed);
    if (duration) set("duration", *duration);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "antwsn: --set expects key=value, got '" << kv << "'\n";
        throw Failure{ANTWSN_ERR_CONFIG};
      }
      set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
};

struct ConfigHandle {
  antwsn_config* ptr = nullptr;
  ~ConfigHandle() { antwsn_config_destroy(ptr); }
};
struct RunHandle {
  antwsn_run* ptr = nullptr;
  ~RunHandle() { antwsn_run_destroy(ptr); }
};
struct PlanHandle {
  antwsn_plan* ptr = nullptr;
  ~PlanHandle() { antwsn_plan_destroy(ptr); }
};
struct ResultsHandle {
  antwsn_results* ptr = nullptr;
  ~ResultsHandle() { antwsn_results_destroy(ptr); }
};

void build_config(const ScenarioOptions& opts, ConfigHandle& cfg) {
  check(antwsn_config_create(&cfg.ptr), "config");
  if (!opts.config_path.empty()) check(antwsn_config_load_file(cfg.ptr, opts.config_path.c_str()), "config file");
  opts.apply([&](const std::string& k, const std::string& v) {
    check(antwsn_config_set(cfg.ptr, k.c_str(), v.c_str()), "option " + k);
  });
}

void write_results(const antwsn_results* results, const std::filesystem::path& dir, const std::string& format,
                   bool summary) {
  if (format == "csv" || format == "both")
    check(antwsn_results_export(results, "csv", (dir / "results.csv").c_str()), "export");
  if (format == "json" || format == "both")
    check(antwsn_results_export(results, "json", (dir / "results.json").c_str()), "export");
  if (summary) check(antwsn_results_write_summary(results, (dir / "summary.csv").c_str()), "summary");
  size_t files = 0;
  check(antwsn_results_emit_plotdata(results, (dir / "plots").c_str(), &files), "plot data");
  std::cout << "wrote results to " << dir.string() << " (" << files << " plot files)\n";
}

void print_metrics(const antwsn_metrics& m) {
  std::printf("generated %llu  delivered %llu  success %.2f %%\n", static_cast<unsigned long long>(m.generated),
              static_cast<unsigned long long>(m.delivered), m.success_rate_pct);
  if (m.has_latency) {
    std::printf("latency %.6f s\n", m.latency_s);
  } else {
    std::printf("latency n/a (nothing delivered)\n");
  }
  std::printf("energy %.6f J  efficiency %.4f kbit/J  alive %u\n", m.energy_J, m.efficiency_kbit_per_J,
              m.alive_nodes);
}

int cmd_run(const ScenarioOptions& opts, const std::string& format) {
  ConfigHandle cfg;
  build_config(opts, cfg);
  RunHandle run;
  check(antwsn_run_create(cfg.ptr, &run.ptr), "setup");
  check(antwsn_run_execute(run.ptr), "simulation");
  antwsn_metrics m{};
  check(antwsn_run_metrics(run.ptr, &m), "metrics");
  print_metrics(m);
  ResultsHandle results;
  check(antwsn_run_results(run.ptr, &results.ptr), "results");
  write_results(results.ptr, opts.output_dir, format, false);
  return kExitOk;
}

int cmd_sweep(const ScenarioOptions& opts, const std::string& plan_path, const std::optional<std::string>& replicates,
              const std::optional<std::string>& threads, const std::string& format) {
  PlanHandle plan;
  check(antwsn_plan_create(&plan.ptr), "plan");
  if (!plan_path.empty()) check(antwsn_plan_load_file(plan.ptr, plan_path.c_str()), "plan file");
  if (!opts.config_path.empty()) check(antwsn_plan_load_file(plan.ptr, opts.config_path.c_str()), "config file");
  auto set = [&](const std::string& k, const std::string& v) {
    check(antwsn_plan_set(plan.ptr, k.c_str(), v.c_str()), "option " + k);
  };
  opts.apply(set);
  if (replicates) set("replicates", *replicates);
  if (threads) set("threads", *threads);

  ResultsHandle results;
  const antwsn_status s = antwsn_plan_execute(plan.ptr, &results.ptr);
  if (s != ANTWSN_OK && results.ptr == nullptr) check(s, "sweep");
  std::cout << antwsn_results_row_count(results.ptr) << " result rows\n";
  write_results(results.ptr, opts.output_dir, format, true);
  const size_t failures = antwsn_results_failure_count(results.ptr);
  for (size_t i = 0; i < failures; ++i) {
    size_t needed = 0;
    antwsn_results_failure(results.ptr, i, nullptr, 0, &needed);
    std::string msg(needed, '\0');
    antwsn_results_failure(results.ptr, i, msg.data(), msg.size(), &needed);
    msg.resize(needed - 1);
    std::cerr << "antwsn: failed run " << msg << "\n";
  }
  return failures > 0 ? kExitSimulation : kExitOk;
}

int cmd_dump_table(const ScenarioOptions& opts, std::uint32_t node, std::optional<double> at, bool to_file) {
  ConfigHandle cfg;
  build_config(opts, cfg);
  RunHandle run;
  check(antwsn_run_create(cfg.ptr, &run.ptr), "setup");
  if (at) {
    check(antwsn_run_advance(run.ptr, *at), "simulation");
  } else {
    check(antwsn_run_execute(run.ptr), "simulation");
  }
  size_t needed = 0;
  check(antwsn_run_dump_table(run.ptr, node, nullptr, 0, &needed), "dump-table");
  std::string csv(needed, '\0');
  check(antwsn_run_dump_table(run.ptr, node, csv.data(), csv.size(), &needed), "dump-table");
  csv.resize(needed - 1);
  if (!to_file) {
    std::cout << csv;
    return kExitOk;
  }
  const std::filesystem::path dir(opts.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / ("table_node" + std::to_string(node) + ".csv");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f || std::fwrite(csv.data(), 1, csv.size(), f) != csv.size()) {
    if (f) std::fclose(f);
    std::cerr << "antwsn: cannot write '" << path.string() << "'\n";
    return kExitSimulation;
  }
  std::fclose(f);
  std::cout << "wrote " << path.string() << " (sink is node " << antwsn_run_sink(run.ptr) << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ant-colony routing simulator for wireless sensor networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(antwsn_version()));

  ScenarioOptions run_opts;
  std::string run_format = "both";
  auto* run = app.add_subcommand("run", "Simulate one scenario and write its metrics");
  run_opts.attach(run, false);
  run->add_option("-f,--format", run_format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));

  ScenarioOptions sweep_opts;
  std::string plan_path;
  std::optional<std::string> replicates;
  std::optional<std::string> threads;
  std::string sweep_format = "both";
  auto* sweep = app.add_subcommand("sweep", "Run an experiment plan (protocols x nodes x scenarios x replicates)");
  sweep->add_option("plan", plan_path, "Plan file (flat key = value)");
  sweep_opts.attach(sweep, true);
  sweep->add_option("-r,--replicates", replicates, "Replicates per cell");
  sweep->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
  sweep->add_option("-f,--format", sweep_format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));

  ScenarioOptions dump_opts;
  std::uint32_t node = 0;
  std::optional<double> at;
  bool to_file = false;
  auto* dump = app.add_subcommand("dump-table", "Print one node's routing table as CSV");
  dump_opts.attach(dump, false);
  dump->add_option("--node", node, "Node id")->required();
  dump->add_option("--at", at, "Stop the simulation at this time instead of the full duration");
  dump->add_flag("--to-file", to_file, "Write table_node<N>.csv into the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts, run_format);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, plan_path, replicates, threads, sweep_format);
    return cmd_dump_table(dump_opts, node, at, to_file);
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
}

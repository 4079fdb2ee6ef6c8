#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hosim/simrun.hpp"

namespace {

namespace fs = std::filesystem;
using hosim::sim::RunReport;
using hosim::sim::Scenario;

struct CommonFlags {
  std::string config;
  std::string out_dir = "out";
  std::string topology_file;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<unsigned> mns;
  std::optional<double> latency;
  std::optional<double> failure_prob;
  bool trajectories = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "scenario JSON file (defaults apply on top)");
  cmd->add_option("-o,--out", flags.out_dir, "output directory for CSV files");
  cmd->add_option("--topology", flags.topology_file, "edge-list topology file to load");
  cmd->add_option("--seed", flags.seed, "master seed");
  cmd->add_option("--duration", flags.duration, "simulated seconds");
  cmd->add_option("--mns", flags.mns, "number of mobile nodes");
  cmd->add_option("--latency", flags.latency, "handover latency in seconds");
  cmd->add_option("-p,--failure-prob", flags.failure_prob,
                  "handover failure probability (anchored scheme)");
  cmd->add_flag("--trajectories", flags.trajectories, "dump mobile trajectories to CSV");
}

Scenario make_scenario(const CommonFlags& flags, Scenario base) {
  if (!flags.config.empty()) {
    std::ifstream in(flags.config);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + flags.config);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    base = Scenario::from_json(text);
  }
  if (!flags.topology_file.empty()) base.topology_file = flags.topology_file;
  if (flags.seed) base.seed = *flags.seed;
  if (flags.duration) base.duration_s = *flags.duration;
  if (flags.mns) base.n_mns = *flags.mns;
  if (flags.latency) base.handover_latency_s = *flags.latency;
  if (flags.failure_prob) base.failure_prob = *flags.failure_prob;
  if (flags.trajectories) base.record_trajectories = true;
  return base;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_run_outputs(const RunReport& report, const fs::path& dir) {
  {
    auto out = open_out(dir, "ledger.csv");
    report.write_ledger_csv(out);
  }
  {
    auto out = open_out(dir, "emissions.csv");
    report.write_emissions_csv(out);
  }
  {
    auto out = open_out(dir, "handovers.csv");
    report.write_handovers_csv(out);
  }
  if (!report.trajectories.empty()) {
    auto out = open_out(dir, "trajectories.csv");
    report.write_trajectories_csv(out);
  }
}

void write_reconciliation(const RunReport& report, const hosim::sim::Scenario& scenario,
                          const fs::path& dir) {
  auto out = open_out(dir, "reconciliation.txt");
  for (auto scheme : scenario.schemes) {
    out << hosim::proto::to_string(scheme) << "\n"
        << report.reconcile(scheme, 0.05).to_string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event handover cost simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, mixed_flags, sequent_flags;
  std::string emit_config_path;

  CLI::App* cmd_run = app.add_subcommand("run", "run one scenario and dump its CSVs");
  add_common_flags(cmd_run, run_flags);
  cmd_run->add_option("--emit-default-config", emit_config_path,
                      "write the default scenario JSON to this path and exit");

  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep-failure", "forced handovers across failure-probability x latency grid");
  add_common_flags(cmd_sweep, sweep_flags);

  CLI::App* cmd_mixed = app.add_subcommand(
      "mixed-mode", "free mobility, both schemes, per-second cost series");
  add_common_flags(cmd_mixed, mixed_flags);

  CLI::App* cmd_sequent = app.add_subcommand(
      "sequent-ho", "back-to-back forced handovers, per-handover statistics");
  add_common_flags(cmd_sequent, sequent_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      if (!emit_config_path.empty()) {
        std::ofstream out(emit_config_path);
        out << hosim::sim::default_scenario().to_json();
        std::cout << "wrote " << emit_config_path << "\n";
        return 0;
      }
      const Scenario scenario = make_scenario(run_flags, hosim::sim::default_scenario());
      const RunReport report = hosim::sim::run(scenario);
      write_run_outputs(report, run_flags.out_dir);
      write_reconciliation(report, scenario, run_flags.out_dir);
      std::cout << report.summary();
    } else if (cmd_sweep->parsed()) {
      const Scenario base =
          make_scenario(sweep_flags, hosim::sim::failure_sweep_base());
      const auto table = hosim::sim::experiment_failure_sweep(base);
      auto out = open_out(sweep_flags.out_dir, "failure_sweep.csv");
      table.write_csv(out);
      std::cout << "failure sweep: " << table.rows.size() << " cells -> "
                << (fs::path(sweep_flags.out_dir) / "failure_sweep.csv").string() << "\n";
    } else if (cmd_mixed->parsed()) {
      const Scenario base = make_scenario(mixed_flags, hosim::sim::mixed_mode_base());
      const RunReport report = hosim::sim::experiment_mixed_mode(base);
      write_run_outputs(report, mixed_flags.out_dir);
      {
        auto out = open_out(mixed_flags.out_dir, "mixed_mode_totals.csv");
        out << "scheme,signalling_total_bh,delivery_total_bh,total_bh\n";
        char line[200];
        for (auto scheme : {hosim::proto::Scheme::pfmipv6, hosim::proto::Scheme::icn}) {
          std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f\n",
                        hosim::proto::to_string(scheme).c_str(),
                        report.ledger.signalling_total(scheme),
                        report.ledger.delivery_total(scheme), report.ledger.total(scheme));
          out << line;
        }
      }
      std::cout << report.summary();
    } else if (cmd_sequent->parsed()) {
      const Scenario base = make_scenario(sequent_flags, hosim::sim::sequent_base());
      const auto summary = hosim::sim::experiment_sequent_handovers(base);
      write_run_outputs(summary.report, sequent_flags.out_dir);
      {
        auto out = open_out(sequent_flags.out_dir, "sequent_handovers.csv");
        summary.write_csv(out);
      }
      std::cout << summary.report.summary();
      std::cout << "per-handover means: pfmipv6 pdc " << summary.pfmipv6.mean_pdc << " sc "
                << summary.pfmipv6.mean_sc << ", icn pdc " << summary.icn.mean_pdc << " sc "
                << summary.icn.mean_sc << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// SPDX-License-Identifier: Apache-2.0
//
// qilens: simulate, fit, denoise and correlation analysis for
// quantum-illumination thermal-lens time traces.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "qilens/commands.hpp"
#include "qilens/errors.hpp"
#include "qilens/run_config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum-illumination thermal-lens toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string trace_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool csv_only = false;

  auto add_common = [&](CLI::App* cmd, bool needs_trace) {
    cmd->add_option("--config", config_path, "run configuration file")->required();
    if (needs_trace) {
      cmd->add_option("--trace", trace_path, "input trace CSV")->required();
    }
    cmd->add_option("--out", out_dir, "output directory (default: [output] dir)");
    cmd->add_option("--seed", seed, "override the RNG seed");
    cmd->add_flag("--csv-only", csv_only, "suppress SVG plots");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate a counting trace");
  add_common(sim, false);
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit lens parameters to a trace");
  add_common(fit_cmd, true);
  CLI::App* gsi_cmd = app.add_subcommand("gsi", "windowed g_si correlation trace");
  add_common(gsi_cmd, true);
  CLI::App* den = app.add_subcommand("denoise", "coincidence-based background rejection");
  add_common(den, true);

  CLI11_PARSE(app, argc, argv);

  return qilens::guarded(
      [&]() {
        qilens::RunConfig config = qilens::load_config(config_path);
        if (seed) config.source.seed = *seed;

        qilens::CommandIo io;
        io.out_dir = out_dir.empty() ? config.out_dir : out_dir;
        io.csv_only = csv_only || config.csv_only;
        io.log = &std::cout;

        if (sim->parsed()) return qilens::cmd_simulate(config, io);
        if (fit_cmd->parsed()) return qilens::cmd_fit(config, trace_path, io);
        if (gsi_cmd->parsed()) return qilens::cmd_gsi(config, trace_path, io);
        return qilens::cmd_denoise(config, trace_path, io);
      },
      std::cerr);
}

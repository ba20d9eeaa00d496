// SPDX-License-Identifier: Apache-2.0
#include "qilens/commands.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <vector>

#include "qilens/errors.hpp"
#include "qilens/svg_plot.hpp"
#include "qilens/trace_io.hpp"

namespace qilens {

namespace {

using nlohmann::json;

std::ostream& log_of(const CommandIo& io) { return io.log ? *io.log : std::cout; }

void ensure_out_dir(const CommandIo& io) {
  std::error_code ec;
  std::filesystem::create_directories(io.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + io.out_dir.string());
}

void print_warnings(const RunConfig& config, const CommandIo& io) {
  for (const std::string& w : config.warnings()) {
    log_of(io) << "warning: " << w << '\n';
  }
}

std::vector<double> to_double(const std::vector<std::uint64_t>& v) {
  return {v.begin(), v.end()};
}

std::vector<double> poisson_bars(const std::vector<std::uint64_t>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::sqrt(static_cast<double>(v[i]));
  return out;
}

}  // namespace

int cmd_simulate(const RunConfig& config, const CommandIo& io) {
  config.validate();
  print_warnings(config, io);
  ensure_out_dir(io);

  const TimeTrace data = simulate(config.source, config.scenario, config.lens);
  const auto csv_path = io.out_dir / "trace.csv";
  save_trace(data, csv_path);
  log_of(io) << "wrote " << csv_path.string() << " (" << data.size() << " bins)\n";

  if (!io.csv_only) {
    SvgPlot plot("Simulated coincidence trace", "time [s]", "coincidences per bin");
    plot.add_points(data.t, to_double(data.c), poisson_bars(data.c), "#1f77b4",
                    "coincidences");
    const auto svg_path = io.out_dir / "trace.svg";
    plot.write(svg_path);
    log_of(io) << "wrote " << svg_path.string() << '\n';
  }
  return 0;
}

int cmd_fit(const RunConfig& config, const std::filesystem::path& trace_path,
            const CommandIo& io) {
  config.validate();
  print_warnings(config, io);
  ensure_out_dir(io);

  const TimeTrace data = load_trace(trace_path);

  FitSpec spec;
  spec.free = config.fit_free;
  spec.lens = config.lens;
  spec.scenario = config.scenario;
  spec.weights = config.fit_weights;
  spec.max_evals = config.fit_max_evals;

  const FitResult result = fit(data, spec);

  json report;
  report["converged"] = result.converged;
  report["termination"] = result.termination;
  report["chi2"] = result.chi2;
  report["dof"] = result.dof;
  report["chi2_per_dof"] = result.chi2 / static_cast<double>(result.dof);
  report["n_evals"] = result.n_evals;
  report["amplitude"] = result.amplitude;
  report["t_on"] = result.t_on;
  json params;
  for (std::size_t i = 0; i < result.free.size(); ++i) {
    params[to_string(result.free[i])] = {{"value", result.estimates[i]},
                                         {"sigma", result.sigma[i]}};
  }
  report["parameters"] = params;
  report["covariance_valid"] = result.covariance_valid;
  json lens;
  lens["theta_th"] = result.params.theta_th;
  lens["theta_s"] = result.params.theta_s;
  lens["t_th"] = result.params.t_th;
  lens["t_s"] = result.params.t_s;
  lens["k"] = result.params.k;
  lens["c_r"] = result.params.c_r;
  lens["m"] = result.params.m;
  lens["v_geom"] = result.params.v_geom;
  report["lens"] = lens;

  if (config.fit_profiles) {
    const auto profiles = profile_timescales(data, spec, result);
    json jp;
    for (const TimescaleProfile& profile : profiles) {
      json entry;
      entry["grid"] = profile.grid;
      entry["chi2"] = profile.chi2;
      entry["delta_chi2_removed"] = profile.delta_chi2_removed;
      jp[to_string(profile.param)] = entry;
    }
    report["profiles"] = jp;
  }

  const auto report_path = io.out_dir / "fit_report.json";
  std::ofstream out(report_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + report_path.string());
  out << report.dump(2) << '\n';
  log_of(io) << "wrote " << report_path.string() << '\n';

  if (!io.csv_only) {
    Scenario scen = spec.scenario;
    scen.t_on = result.t_on;
    const std::vector<double> T = trace(scen, result.params, data.t);
    std::vector<double> model_counts(T.size());
    for (std::size_t j = 0; j < T.size(); ++j) model_counts[j] = result.amplitude * T[j];
    SvgPlot plot("Fit overlay (chi2/dof = " +
                     std::to_string(result.chi2 / static_cast<double>(result.dof)) + ")",
                 "time [s]", "coincidences per bin");
    plot.add_points(data.t, to_double(data.c), poisson_bars(data.c), "#1f77b4", "data");
    plot.add_line(data.t, model_counts, "#d62728", "model");
    const auto svg_path = io.out_dir / "fit.svg";
    plot.write(svg_path);
    log_of(io) << "wrote " << svg_path.string() << '\n';
  }

  if (!result.converged) {
    log_of(io) << "fit did not converge: " << result.termination << '\n';
    return 3;
  }
  return 0;
}

int cmd_gsi(const RunConfig& config, const std::filesystem::path& trace_path,
            const CommandIo& io) {
  config.validate();
  print_warnings(config, io);
  ensure_out_dir(io);

  const TimeTrace data = load_trace(trace_path);
  const std::vector<GsiPoint> points = g_si(data, config.source, config.gsi_window);

  const auto csv_path = io.out_dir / "gsi.csv";
  {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + csv_path.string());
    out << "t_s,g,sigma,valid\n";
    for (const GsiPoint& pt : points) {
      out << format_seconds(pt.t_center) << ',' << pt.g << ',' << pt.sigma << ','
          << (pt.valid ? 1 : 0) << '\n';
    }
  }
  std::size_t gaps = 0;
  for (const GsiPoint& pt : points) gaps += pt.valid ? 0 : 1;
  log_of(io) << "wrote " << csv_path.string() << " (" << points.size() << " windows, "
             << gaps << " flagged)\n";

  if (!io.csv_only) {
    std::vector<double> x, y, e;
    for (const GsiPoint& pt : points) {
      if (!pt.valid) continue;
      x.push_back(pt.t_center);
      y.push_back(pt.g);
      e.push_back(pt.sigma);
    }
    SvgPlot plot("Cross-correlation g_si", "time [s]", "g_si");
    plot.add_points(x, y, e, "#2ca02c", "g_si");
    const auto svg_path = io.out_dir / "gsi.svg";
    plot.write(svg_path);
    log_of(io) << "wrote " << svg_path.string() << '\n';
  }
  return 0;
}

int cmd_denoise(const RunConfig& config, const std::filesystem::path& trace_path,
                const CommandIo& io) {
  config.validate();
  print_warnings(config, io);
  ensure_out_dir(io);

  const TimeTrace data = load_trace(trace_path);
  const DenoiseResult result = denoise(data, config.source, config.scenario.t_on);

  const auto csv_path = io.out_dir / "denoised.csv";
  {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + csv_path.string());
    out << "t_s,s_t_hat,s_t_sigma,s_s_rate,valid\n";
    for (std::size_t j = 0; j < result.t.size(); ++j) {
      out << format_seconds(result.t[j]) << ',' << result.s_t_hat[j] << ','
          << result.s_t_sigma[j] << ',' << result.s_s_rate[j] << ','
          << (result.valid[j] ? 1 : 0) << '\n';
    }
  }
  log_of(io) << "wrote " << csv_path.string() << '\n';

  json report;
  report["baseline_bins"] = result.baseline_bins;
  report["g_baseline"] = result.g_baseline;
  report["g_baseline_sigma"] = result.g_baseline_sigma;
  report["snr_enhancement"] = result.snr_enhancement;
  const auto report_path = io.out_dir / "denoise_report.json";
  {
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + report_path.string());
    out << report.dump(2) << '\n';
  }
  log_of(io) << "wrote " << report_path.string() << '\n';
  log_of(io) << "baseline g = " << result.g_baseline << " +- " << result.g_baseline_sigma
             << ", estimated SNR enhancement = " << result.snr_enhancement << '\n';

  if (!io.csv_only) {
    SvgPlot plot("Denoised signal estimate", "time [s]", "rate [counts/s]");
    std::vector<double> x, y, e;
    for (std::size_t j = 0; j < result.t.size(); ++j) {
      if (!result.valid[j]) continue;
      x.push_back(result.t[j]);
      y.push_back(result.s_t_hat[j]);
      e.push_back(result.s_t_sigma[j]);
    }
    plot.add_points(x, y, e, "#1f77b4", "estimated true rate");
    plot.add_line(result.t, result.s_s_rate, "#7f7f7f", "raw singles rate");
    const auto svg_path = io.out_dir / "denoised.svg";
    plot.write(svg_path);
    log_of(io) << "wrote " << svg_path.string() << '\n';
  }
  return 0;
}

}  // namespace qilens

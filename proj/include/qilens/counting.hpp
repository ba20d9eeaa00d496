// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qilens/lens_model.hpp"

namespace qilens {

// Pulsed pair source and detector chain. Defaults reproduce the reference
// operating point: 80 MHz repetition, 6% arm efficiencies, 0.1 s bins and a
// pair probability tuned so baseline coincidences average 1200 per bin
// (accidentals included).
struct CountingConfig {
  double rep_rate = 8.0e7;       // pulses / s
  double mu_pair = 0.0400617;    // mean pairs per pulse
  double eta_i = 0.06;
  double eta_s = 0.06;
  double noise_rate_s = 0.0;     // uncorrelated signal-arm counts / s
  double bin_width = 0.1;        // s
  std::uint64_t seed = 1;
  std::optional<double> m_singles;  // distinct mode parameter for the singles channel

  void validate() const;
  std::vector<std::string> warnings() const;
};

// Uniformly binned counting record.
struct TimeTrace {
  std::vector<double> t;               // bin-start timestamps, s
  std::vector<std::uint64_t> s_i;      // idler singles per bin
  std::vector<std::uint64_t> s_s;      // signal singles per bin
  std::vector<std::uint64_t> c;        // coincidences per bin
  double bin_width = 0.0;

  std::size_t size() const { return t.size(); }
  void validate() const;  // equal lengths, uniform timestamps to 1e-9 s
};

// Per-bin decomposition of the sampled counts, for tests and SNR studies.
struct SimChannels {
  std::vector<std::uint64_t> c_true;       // correlated pair coincidences
  std::vector<std::uint64_t> c_acc_pair;   // accidentals from pair singles
  std::vector<std::uint64_t> c_acc_noise;  // accidentals from injected noise
  std::vector<std::uint64_t> s_s_true;     // signal singles from pairs
  std::vector<std::uint64_t> s_s_noise;    // signal singles from noise
};

enum class SimMode {
  BinPoisson,  // Poisson-sampled per-bin counts (default)
  PerPulse,    // explicit Bernoulli pulse loop; oracle for the bin-level mode
};

// Simulates the counting chain over the scenario. Per bin of width D at
// time t the expected rates are
//   idler singles      R D mu eta_i
//   true coincidences  R D mu eta_i eta_s T_c(t)
//   signal singles     R D mu eta_s T_s(t) + noise_rate_s D
//   accidentals        S_i S_s D / R   (expected rates in the product)
// where T_c uses LensParams.m and T_s uses m_singles when set. Coincidences
// are true + accidentals. Deterministic for a fixed seed.
//
// PerPulse mode loops R D pulses per bin drawing Bernoulli pair/detection
// outcomes; it requires m_singles to be unset (a single signal click feeds
// both channels) and is practical only for small R D.
TimeTrace simulate(const CountingConfig& config, const Scenario& scenario,
                   const LensParams& p, SimMode mode = SimMode::BinPoisson,
                   SimChannels* channels = nullptr);

// Windowed cross-correlation estimate g = C R / (S_i S_s) with rates
// aggregated over `window_bins` bins. A window with zero counts in any
// channel is flagged invalid rather than dropped.
struct GsiPoint {
  double t_center = 0.0;
  double g = 0.0;
  double sigma = 0.0;
  bool valid = false;
};
std::vector<GsiPoint> g_si(const TimeTrace& trace, const CountingConfig& config,
                           std::size_t window_bins);

// Expected accidental counts per bin from the measured singles:
// C_acc = s_i s_s / (R bin_width).
std::vector<double> accidentals(const TimeTrace& trace, const CountingConfig& config);

// Output of the coincidence-based background rejection.
struct DenoiseResult {
  std::vector<double> t;
  std::vector<double> s_t_hat;     // estimated true signal rate, counts/s
  std::vector<double> s_t_sigma;   // one-sigma error, counts/s
  std::vector<double> s_s_rate;    // raw singles rate for comparison, counts/s
  std::vector<bool> valid;         // false where s_i == 0
  double g_baseline = 0.0;         // Eq.-style g over the baseline window
  double g_baseline_sigma = 0.0;
  double snr_enhancement = 0.0;    // estimated coincidence-vs-singles SNR factor
  std::size_t baseline_bins = 0;
};

// Estimates the true-signal rate per bin as
//   S_t = (c R / s_i - s_s / D) / (g_b - 1)
// where g_b is the Eq.-style g measured on the pre-shutter baseline
// (t < baseline_end_s). Subtracting the accidental-equivalent rate s_s/D
// removes both pair and noise accidentals, so the shape is background-free;
// the g_b - 1 scale makes the estimate exactly match the true singles rate
// in the noiseless limit.
DenoiseResult denoise(const TimeTrace& trace, const CountingConfig& config,
                      double baseline_end_s);

// Klyshko heralding efficiency over the baseline window, with the
// accidental floor subtracted: eta_s = sum(c - c_acc) / sum(s_i).
struct KlyshkoEstimate {
  double eta = 0.0;
  double sigma = 0.0;  // binomial error bar
  std::size_t baseline_bins = 0;
};
KlyshkoEstimate klyshko_efficiency(const TimeTrace& trace, const CountingConfig& config,
                                   double baseline_end_s);

}  // namespace qilens

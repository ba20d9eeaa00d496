// SPDX-License-Identifier: Apache-2.0
#include "qilens/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qilens/errors.hpp"
#include "qilens/rng.hpp"

namespace qilens {

void CountingConfig::validate() const {
  if (!(rep_rate > 0.0) || !std::isfinite(rep_rate)) {
    throw ValidationError("CountingConfig: rep_rate must be > 0");
  }
  if (!(mu_pair > 0.0) || !std::isfinite(mu_pair)) {
    throw ValidationError("CountingConfig: mu_pair must be > 0");
  }
  if (!(eta_i >= 0.0 && eta_i <= 1.0)) {
    throw ValidationError("CountingConfig: eta_i must be in [0,1]");
  }
  if (!(eta_s >= 0.0 && eta_s <= 1.0)) {
    throw ValidationError("CountingConfig: eta_s must be in [0,1]");
  }
  if (!(noise_rate_s >= 0.0) || !std::isfinite(noise_rate_s)) {
    throw ValidationError("CountingConfig: noise_rate_s must be >= 0");
  }
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw ValidationError("CountingConfig: bin_width must be > 0");
  }
  if (m_singles && !(*m_singles > 0.0)) {
    throw ValidationError("CountingConfig: m_singles must be > 0");
  }
}

std::vector<std::string> CountingConfig::warnings() const {
  std::vector<std::string> out;
  if (mu_pair > 0.05) {
    std::ostringstream os;
    os << "mu_pair = " << mu_pair
       << " exceeds 0.05; multipair emission is neglected in this model and "
          "g ~ 1/mu operation assumes mu << 1";
    out.push_back(os.str());
  }
  return out;
}

void TimeTrace::validate() const {
  const std::size_t n = t.size();
  if (s_i.size() != n || s_s.size() != n || c.size() != n) {
    throw ValidationError("TimeTrace: channel arrays must have equal length");
  }
  if (!(bin_width > 0.0)) throw ValidationError("TimeTrace: bin_width must be > 0");
  for (std::size_t j = 1; j < n; ++j) {
    if (std::abs((t[j] - t[j - 1]) - bin_width) > 1e-9) {
      std::ostringstream os;
      os << "TimeTrace: timestamps not uniform at row " << j << " (step "
         << t[j] - t[j - 1] << ", bin width " << bin_width << ")";
      throw ValidationError(os.str());
    }
  }
}

namespace {

std::size_t bin_count(const Scenario& scenario, double bin_width) {
  return static_cast<std::size_t>(
      std::max(1.0, std::floor(scenario.duration / bin_width + 1e-9)));
}

}  // namespace

TimeTrace simulate(const CountingConfig& config, const Scenario& scenario,
                   const LensParams& p, SimMode mode, SimChannels* channels) {
  config.validate();
  scenario.validate();
  p.validate();
  if (mode == SimMode::PerPulse && config.m_singles) {
    throw ValidationError(
        "simulate: per-pulse mode models a single signal channel; m_singles "
        "must be unset");
  }

  const std::size_t n = bin_count(scenario, config.bin_width);
  const double dt = config.bin_width;

  TimeTrace trace_out;
  trace_out.bin_width = dt;
  trace_out.t.resize(n);
  trace_out.s_i.resize(n);
  trace_out.s_s.resize(n);
  trace_out.c.resize(n);
  for (std::size_t j = 0; j < n; ++j) trace_out.t[j] = static_cast<double>(j) * dt;

  // lens transmission per bin; the coincidence channel follows m, the
  // singles channel its own mode parameter when configured
  const std::vector<double> T_c = trace(scenario, p, trace_out.t);
  std::vector<double> T_s = T_c;
  if (config.m_singles && *config.m_singles != p.m) {
    LensParams ps = p;
    ps.m = *config.m_singles;
    T_s = trace(scenario, ps, trace_out.t);
  }

  if (channels) {
    channels->c_true.assign(n, 0);
    channels->c_acc_pair.assign(n, 0);
    channels->c_acc_noise.assign(n, 0);
    channels->s_s_true.assign(n, 0);
    channels->s_s_noise.assign(n, 0);
  }

  Rng rng(config.seed);
  const double R = config.rep_rate;
  const double mu = config.mu_pair;

  if (mode == SimMode::BinPoisson) {
    for (std::size_t j = 0; j < n; ++j) {
      const double rate_i = R * mu * config.eta_i;
      const double rate_s_true = R * mu * config.eta_s * T_s[j];
      const double rate_c_true = R * mu * config.eta_i * config.eta_s * T_c[j];

      // draw order is part of the reproducibility contract
      const std::uint64_t si = rng.poisson(rate_i * dt);
      const std::uint64_t c_true = rng.poisson(rate_c_true * dt);
      const std::uint64_t ss_true = rng.poisson(rate_s_true * dt);
      const std::uint64_t ss_noise = rng.poisson(config.noise_rate_s * dt);
      const std::uint64_t acc_pair = rng.poisson(rate_i * rate_s_true * dt / R);
      const std::uint64_t acc_noise = rng.poisson(rate_i * config.noise_rate_s * dt / R);

      trace_out.s_i[j] = si;
      trace_out.s_s[j] = ss_true + ss_noise;
      trace_out.c[j] = c_true + acc_pair + acc_noise;
      if (channels) {
        channels->c_true[j] = c_true;
        channels->c_acc_pair[j] = acc_pair;
        channels->c_acc_noise[j] = acc_noise;
        channels->s_s_true[j] = ss_true;
        channels->s_s_noise[j] = ss_noise;
      }
    }
    return trace_out;
  }

  // Per-pulse oracle: Bernoulli pair emission, at most one pair per pulse,
  // detections tied to the same click so coincidences arise from the gate
  // logic rather than from a sampled accidental rate.
  const double pulses_d = R * dt;
  if (pulses_d > 5e7) {
    throw ValidationError("simulate: per-pulse mode is limited to R*bin_width <= 5e7");
  }
  const std::uint64_t pulses = static_cast<std::uint64_t>(std::llround(pulses_d));
  const double p_noise = config.noise_rate_s / R;
  for (std::size_t j = 0; j < n; ++j) {
    std::uint64_t si = 0, ss = 0, cc = 0;
    std::uint64_t ss_true_n = 0, ss_noise_n = 0, c_true_n = 0, c_noise_n = 0;
    const double p_det_s = config.eta_s * T_c[j];
    for (std::uint64_t pu = 0; pu < pulses; ++pu) {
      const bool pair = rng.bernoulli(mu);
      bool d_i = false, d_s = false;
      if (pair) {
        d_i = rng.bernoulli(config.eta_i);
        d_s = rng.bernoulli(p_det_s);
      }
      const std::uint64_t noise = rng.poisson(p_noise);
      si += d_i ? 1 : 0;
      ss += (d_s ? 1 : 0) + noise;
      if (d_i && (d_s || noise > 0)) {
        ++cc;
        if (d_s) {
          ++c_true_n;
        } else {
          ++c_noise_n;
        }
      }
      ss_true_n += d_s ? 1 : 0;
      ss_noise_n += noise;
    }
    trace_out.s_i[j] = si;
    trace_out.s_s[j] = ss;
    trace_out.c[j] = cc;
    if (channels) {
      channels->c_true[j] = c_true_n;
      channels->c_acc_pair[j] = 0;
      channels->c_acc_noise[j] = c_noise_n;
      channels->s_s_true[j] = ss_true_n;
      channels->s_s_noise[j] = ss_noise_n;
    }
  }
  return trace_out;
}

std::vector<GsiPoint> g_si(const TimeTrace& trace, const CountingConfig& config,
                           std::size_t window_bins) {
  trace.validate();
  config.validate();
  if (window_bins < 1) throw ValidationError("g_si: window must be >= 1 bins");

  const std::size_t n_windows = trace.size() / window_bins;
  std::vector<GsiPoint> out;
  out.reserve(n_windows);
  const double dt = trace.bin_width;

  for (std::size_t w = 0; w < n_windows; ++w) {
    const std::size_t lo = w * window_bins;
    const std::size_t hi = lo + window_bins;
    double sum_c = 0.0, sum_i = 0.0, sum_s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) {
      sum_c += static_cast<double>(trace.c[j]);
      sum_i += static_cast<double>(trace.s_i[j]);
      sum_s += static_cast<double>(trace.s_s[j]);
    }
    GsiPoint pt;
    pt.t_center = trace.t[lo] + 0.5 * static_cast<double>(window_bins) * dt;
    if (sum_i == 0.0 || sum_s == 0.0 || sum_c == 0.0) {
      pt.valid = false;
      pt.g = std::numeric_limits<double>::quiet_NaN();
      pt.sigma = std::numeric_limits<double>::quiet_NaN();
    } else {
      // rates over the window: g = (C/W) R / ((S_i/W)(S_s/W)), W = window seconds
      const double window_s = static_cast<double>(window_bins) * dt;
      pt.g = sum_c * config.rep_rate * window_s / (sum_i * sum_s);
      // Poisson propagation on the three counts
      pt.sigma = pt.g * std::sqrt(1.0 / sum_c + 1.0 / sum_i + 1.0 / sum_s);
      pt.valid = true;
    }
    out.push_back(pt);
  }
  return out;
}

std::vector<double> accidentals(const TimeTrace& trace, const CountingConfig& config) {
  trace.validate();
  config.validate();
  std::vector<double> out(trace.size());
  for (std::size_t j = 0; j < trace.size(); ++j) {
    out[j] = static_cast<double>(trace.s_i[j]) * static_cast<double>(trace.s_s[j]) /
             (config.rep_rate * trace.bin_width);
  }
  return out;
}

namespace {

std::size_t baseline_size(const TimeTrace& trace, double baseline_end_s) {
  std::size_t n = 0;
  while (n < trace.size() && trace.t[n] < baseline_end_s) ++n;
  return n;
}

}  // namespace

DenoiseResult denoise(const TimeTrace& trace, const CountingConfig& config,
                      double baseline_end_s) {
  trace.validate();
  config.validate();
  const std::size_t nb = baseline_size(trace, baseline_end_s);
  if (nb == 0) {
    throw ValidationError("denoise: no pre-shutter bins before baseline_end; a baseline is required");
  }

  // single-window g over the whole baseline
  TimeTrace base;
  base.bin_width = trace.bin_width;
  base.t.assign(trace.t.begin(), trace.t.begin() + nb);
  base.s_i.assign(trace.s_i.begin(), trace.s_i.begin() + nb);
  base.s_s.assign(trace.s_s.begin(), trace.s_s.begin() + nb);
  base.c.assign(trace.c.begin(), trace.c.begin() + nb);
  const std::vector<GsiPoint> gb = g_si(base, config, nb);
  if (gb.empty() || !gb.front().valid) {
    throw ValidationError("denoise: baseline window has empty counting channels");
  }

  DenoiseResult res;
  res.baseline_bins = nb;
  res.g_baseline = gb.front().g;
  res.g_baseline_sigma = gb.front().sigma;
  res.snr_enhancement = res.g_baseline - 1.0;
  const double g_excess = res.g_baseline - 1.0;
  if (!(g_excess > 0.0)) {
    throw NumericalError("denoise: baseline g does not exceed the accidental level");
  }

  const double R = config.rep_rate;
  const double dt = trace.bin_width;
  const std::size_t n = trace.size();
  res.t = trace.t;
  res.s_t_hat.assign(n, 0.0);
  res.s_t_sigma.assign(n, 0.0);
  res.s_s_rate.assign(n, 0.0);
  res.valid.assign(n, true);

  for (std::size_t j = 0; j < n; ++j) {
    const double si = static_cast<double>(trace.s_i[j]);
    const double ss = static_cast<double>(trace.s_s[j]);
    const double cc = static_cast<double>(trace.c[j]);
    res.s_s_rate[j] = ss / dt;
    if (si == 0.0) {
      res.valid[j] = false;
      res.s_t_hat[j] = std::numeric_limits<double>::quiet_NaN();
      res.s_t_sigma[j] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    res.s_t_hat[j] = (cc * R / si - ss / dt) / g_excess;
    // first-order Poisson propagation, channels treated as independent
    const double var = (R / si) * (R / si) * std::max(cc, 1.0) +
                       (cc * R / (si * si)) * (cc * R / (si * si)) * si +
                       std::max(ss, 1.0) / (dt * dt);
    res.s_t_sigma[j] = std::sqrt(var) / g_excess;
  }
  return res;
}

KlyshkoEstimate klyshko_efficiency(const TimeTrace& trace, const CountingConfig& config,
                                   double baseline_end_s) {
  trace.validate();
  config.validate();
  const std::size_t nb = baseline_size(trace, baseline_end_s);
  if (nb == 0) {
    throw ValidationError("klyshko_efficiency: empty baseline window");
  }
  double sum_c = 0.0, sum_i = 0.0, sum_acc = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    sum_c += static_cast<double>(trace.c[j]);
    sum_i += static_cast<double>(trace.s_i[j]);
    sum_acc += static_cast<double>(trace.s_i[j]) * static_cast<double>(trace.s_s[j]) /
               (config.rep_rate * trace.bin_width);
  }
  if (sum_i == 0.0) {
    throw ValidationError("klyshko_efficiency: no idler counts in baseline");
  }
  KlyshkoEstimate est;
  est.baseline_bins = nb;
  est.eta = std::max(0.0, (sum_c - sum_acc) / sum_i);
  est.sigma = std::sqrt(std::max(est.eta * (1.0 - est.eta), 0.0) / sum_i);
  return est;
}

}  // namespace qilens

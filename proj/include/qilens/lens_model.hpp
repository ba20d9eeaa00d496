// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qilens/quadrature.hpp"

namespace qilens {

// Physical parameters of the time-dependent lens phase. theta_th/t_th drive
// the thermal term, theta_s/t_s the thermodiffusive (Soret) term; both share
// the photochemical decay rate k, the residual fraction c_r and the squared
// beam-radius ratio m. v_geom is the geometry constant of the on-axis
// diffraction integral.
struct LensParams {
  double theta_th = 0.0;
  double theta_s = 0.0;
  double t_th = 1.0;    // s
  double t_s = 100.0;   // s
  double k = 0.0;       // 1/s
  double c_r = 1.0;
  double m = 1.0;
  double v_geom = 1.0;

  void validate() const;                  // throws ValidationError
  std::vector<std::string> warnings() const;
};

// Measured beam radii at the sample; m = (w_s / w_p)^2.
struct BeamGeometry {
  double w_s_mm = 0.0;
  double w_p_mm = 0.0;

  double mode_ratio() const { return (w_s_mm * w_s_mm) / (w_p_mm * w_p_mm); }
  void validate() const;
  // throws ValidationError when |mode_ratio - m| > 1e-12 (relative)
  void check_consistent(double m) const;
};

// Independent characteristic times for the relaxation branch. Relaxation
// tends to be slower than excitation, so they are not tied to LensParams.
struct RelaxParams {
  double t_th = 0.0;  // s
  double t_s = 0.0;   // s
};

// Pump shutter schedule. t_off may be +inf for pump-on-only runs.
struct Scenario {
  double t_on = 0.0;
  double t_off = std::numeric_limits<double>::infinity();
  double duration = 0.0;
  std::optional<RelaxParams> relax;

  void validate() const;
  bool has_relaxation() const { return t_off < duration; }
};

// One bracketed term of the lens phase with generic amplitude and time
// constant:
//
//   (amp/t_c) * [ c_r * I1(t) + exp(-k t) (1 - c_r) * I2(t) ],
//   I1 = int_0^t f,   I2 = int_0^t exp(k t') f,
//   f(t') = (1 - exp(-2 m g / (1 + 2 t'/t_c))) / (1 + 2 t'/t_c).
//
// I1 goes through the closed form (t_c/2)[ln S - E1(a/S) + E1(a)] with
// S = 1 + 2t/t_c and a = 2 m g; the k-weighted integral is evaluated as
// int_0^t exp(k(t'-t)) f dt' by adaptive quadrature (relative tolerance
// 1e-9) so large k t never overflows.
double phase_component(double g, double t, double amp, double t_c, double k,
                       double c_r, double m);

// Thermal plus Soret term at (g, t).
double phase_total(double g, double t, const LensParams& p);

struct IntensityOptions {
  int quad_order = 200;   // fixed Gauss-Legendre order of the outer integral
  double g_max = 30.0;    // truncation; integrand is bounded by exp(-g)
  bool validate = false;  // cross-check against adaptive refinement
  double validate_rtol = 1e-7;
};

// Normalized on-axis probe transmission
//   T(t) = (1 + V^2) | int_0^inf exp(-(1+iV) g - i phi(g,t)) dg |^2,
// so T(0) = 1. With validate set, the fixed rule is checked against an
// adaptive evaluation and NumericalError is thrown on disagreement.
double intensity(double t, const LensParams& p, const IntensityOptions& opt = {});

struct TraceOptions {
  IntensityOptions quad;
  unsigned n_threads = 0;  // 0 = hardware concurrency
};

// T over a sorted list of absolute sample times. Before t_on the trace is 1;
// during the pump window it is intensity(t - t_on); after t_off the phase
// relaxes as phi_off(g, tau) = max(phi_ss(g) - phi_rise(g, tau), 0) where
// phi_ss is the phase reached at shutter close and phi_rise reuses the same
// functional form with the Scenario relaxation constants.
std::vector<double> trace(const Scenario& scenario, const LensParams& p,
                          std::span<const double> sample_times,
                          const TraceOptions& opt = {});

namespace detail {

// Closed form of I1 (a = 2 m g); exact zero for a == 0 or t == 0.
double i1_closed(double a, double t, double t_c);

// int_0^t exp(k(t'-t)) f(t') dt' by adaptive quadrature.
double i2_shifted(double a, double t, double t_c, double k, double rtol = 1e-9);

}  // namespace detail

// Grid-backed evaluator for repeated trace evaluations over a fixed time
// axis. Per-term integral grids are cached and rebuilt only when the
// parameters they depend on change, so candidates that move amplitudes or
// c_r cost N outer quadratures and nothing else. Not thread-safe across
// concurrent evaluate() calls; internally parallel.
class LensTraceModel {
public:
  LensTraceModel(std::vector<double> sample_times, TraceOptions opt = {});

  // Returns T at the sample times for this scenario/parameter set.
  const std::vector<double>& evaluate(const Scenario& scenario, const LensParams& p);

  const std::vector<double>& sample_times() const { return times_; }

private:
  struct TermGrid {
    // key
    double t_c = -1.0, k = -1.0, m = -1.0;
    double first_time = -1.0;  // relative-time axis marker
    std::size_t n_times = 0;
    // values[j*ng + i]: time-major, g-minor
    std::vector<double> i1, i2;
    bool matches(double tc, double kk, double mm, std::span<const double> rel) const;
  };

  void build_term(TermGrid& grid, double t_c, double k, double m,
                  std::span<const double> rel_times);

  std::vector<double> times_;
  TraceOptions opt_;
  GaussRule rule_;
  std::vector<double> exp_neg_g_;  // exp(-g_i) * w_i, reused by the outer sum

  // pump-on branch grids (thermal / soret) and relaxation branch grids
  TermGrid on_th_, on_so_, rel_th_, rel_so_;
  std::vector<double> rel_times_on_, rel_times_off_;
  std::vector<double> result_;
};

}  // namespace qilens

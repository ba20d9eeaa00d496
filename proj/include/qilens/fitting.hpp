// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qilens/counting.hpp"
#include "qilens/lens_model.hpp"

namespace qilens {

// Parameters the optimizer may move. m and v_geom are always fixed.
enum class FitParam { theta_th, theta_s, t_th, t_s, k, c_r, amplitude, t_on };

const char* to_string(FitParam p);
std::optional<FitParam> fit_param_from_string(const std::string& name);

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

// Weighted nonlinear least-squares problem description. `lens`, `scenario`
// and `amplitude` provide the fixed values; entries of `free` are optimized
// starting from `init` (or from the data-driven heuristic when empty).
struct FitSpec {
  std::vector<FitParam> free;
  LensParams lens;
  Scenario scenario;
  double amplitude = 0.0;  // counts per bin at T = 1; 0 = estimate from baseline

  std::map<FitParam, Bounds> bounds;  // merged over the defaults
  std::vector<double> init;           // aligned with free; empty = heuristic

  enum class Weights { poisson, uniform };
  Weights weights = Weights::poisson;
  int max_evals = 20000;

  TraceOptions trace_options;

  void validate(std::size_t n_bins) const;
  Bounds bounds_for(FitParam p) const;  // explicit entry or default box
};

struct FitResult {
  LensParams params;
  double amplitude = 0.0;
  double t_on = 0.0;
  std::vector<FitParam> free;
  std::vector<double> estimates;     // aligned with free
  std::vector<double> sigma;         // sqrt of covariance diagonal
  std::vector<double> covariance;    // row-major n_free x n_free
  bool covariance_valid = false;
  double chi2 = 0.0;
  std::size_t dof = 0;
  int n_evals = 0;
  bool converged = false;
  std::string termination;
};

// Model evaluation context reused across candidates; exposed so residuals
// and the optimizer share one phase-grid cache.
class FitProblem {
public:
  FitProblem(const TimeTrace& trace, const FitSpec& spec);

  std::size_t n_free() const { return spec_.free.size(); }
  std::size_t n_bins() const { return counts_.size(); }
  const FitSpec& spec() const { return spec_; }

  // weighted residuals r_j = (c_j - A T(t_j)) / sigma_j
  void residuals(std::span<const double> candidate, std::vector<double>& out);
  double chi2(std::span<const double> candidate);

  std::vector<double> initial_guess() const;  // spec.init or heuristic
  std::vector<double> lower() const { return lo_; }
  std::vector<double> upper() const { return hi_; }

  // scatter a candidate onto (LensParams, amplitude, t_on)
  void apply(std::span<const double> candidate, LensParams& p, double& amplitude,
             Scenario& scenario) const;

  int evals_used() const { return n_evals_; }
  double amplitude_default() const { return amplitude0_; }

private:
  double heuristic_for(FitParam p) const;

  FitSpec spec_;
  std::vector<double> times_;
  std::vector<double> counts_;
  std::vector<double> weights_;  // 1/sigma_j
  std::vector<double> lo_, hi_;
  double amplitude0_ = 0.0;
  std::unique_ptr<LensTraceModel> model_;
  std::vector<double> model_buf_;
  int n_evals_ = 0;
};

// Weighted residual vector at a candidate (convenience wrapper).
std::vector<double> residuals(const TimeTrace& trace, const FitSpec& spec,
                              std::span<const double> candidate);

// Derivative-free simplex stage followed by a damped Gauss-Newton polish.
// Deterministic given the initial guess. Convergence: relative chi2 change
// < 1e-8 over 5 iterations or scaled step norm < 1e-9.
FitResult fit(const TimeTrace& trace, const FitSpec& spec);

struct ProfileOptions {
  int grid_points = 9;       // 0 = skip grids, compute removal deltas only
  double log_span = 0.75;    // grid covers value * 10^{+-log_span}
};

struct TimescaleProfile {
  FitParam param = FitParam::t_th;
  std::vector<double> grid;
  std::vector<double> chi2;
  double delta_chi2_removed = 0.0;  // refit with the timescale pinned degenerate
};

// 1-D profiles for each timescale among {t_th, t_s, k} present in the free
// set; the other free parameters are re-optimized at every grid point.
// "Removed" pins the degenerate value: theta_th = 0 for t_th, theta_s = 0
// for t_s, k = 0 for k.
std::vector<TimescaleProfile> profile_timescales(const TimeTrace& trace,
                                                 const FitSpec& spec,
                                                 const FitResult& fit_result,
                                                 const ProfileOptions& opt = {});

}  // namespace qilens

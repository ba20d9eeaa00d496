// SPDX-License-Identifier: Apache-2.0
#include "qilens/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qilens/errors.hpp"

namespace qilens {

namespace {

constexpr std::array<FitParam, 8> kAllParams = {
    FitParam::theta_th, FitParam::theta_s, FitParam::t_th, FitParam::t_s,
    FitParam::k,        FitParam::c_r,     FitParam::amplitude, FitParam::t_on};

Bounds default_bounds(FitParam p) {
  switch (p) {
    case FitParam::theta_th:
    case FitParam::theta_s: return {0.0, 10.0};
    case FitParam::t_th: return {0.01, 50.0};
    case FitParam::t_s: return {1.0, 1e4};
    case FitParam::k: return {0.0, 1.0};
    case FitParam::c_r: return {0.0, 1.0};
    case FitParam::amplitude: return {0.0, 1e12};
    case FitParam::t_on: return {0.0, 0.0};  // resolved against the scenario
  }
  return {0.0, 0.0};
}

double sum_sq(std::span<const double> r) {
  double acc = 0.0;
  for (double x : r) acc += x * x;
  return acc;
}

// model transmission at the trace times for a fully pinned spec
std::vector<double> trace_model_eval(const TimeTrace& tr, const FitSpec& spec) {
  return trace(spec.scenario, spec.lens, tr.t, spec.trace_options);
}

}  // namespace

const char* to_string(FitParam p) {
  switch (p) {
    case FitParam::theta_th: return "theta_th";
    case FitParam::theta_s: return "theta_s";
    case FitParam::t_th: return "t_th";
    case FitParam::t_s: return "t_s";
    case FitParam::k: return "k";
    case FitParam::c_r: return "c_r";
    case FitParam::amplitude: return "amplitude";
    case FitParam::t_on: return "t_on";
  }
  return "?";
}

std::optional<FitParam> fit_param_from_string(const std::string& name) {
  for (FitParam p : kAllParams) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

void FitSpec::validate(std::size_t n_bins) const {
  lens.validate();
  scenario.validate();
  if (free.empty()) throw ValidationError("FitSpec: free parameter set is empty");
  for (std::size_t i = 0; i < free.size(); ++i) {
    for (std::size_t j = i + 1; j < free.size(); ++j) {
      if (free[i] == free[j]) {
        throw ValidationError(std::string("FitSpec: duplicate free parameter ") +
                              to_string(free[i]));
      }
    }
  }
  if (!init.empty() && init.size() != free.size()) {
    throw ValidationError("FitSpec: init length must match the free set");
  }
  if (n_bins < 2 * free.size()) {
    throw ValidationError("FitSpec: need at least 2x more bins than free parameters");
  }
  if (max_evals < 10) throw ValidationError("FitSpec: max_evals too small");
  const bool t_on_free = std::find(free.begin(), free.end(), FitParam::t_on) != free.end();
  if (t_on_free && !(scenario.t_on > 0.0)) {
    throw ValidationError("FitSpec: fitting t_on requires a baseline region before the shutter");
  }
}

Bounds FitSpec::bounds_for(FitParam p) const {
  auto it = bounds.find(p);
  if (it != bounds.end()) return it->second;
  if (p == FitParam::t_on) {
    // the shutter time is only ever loosely known
    return {std::max(0.0, scenario.t_on - 2.0), scenario.t_on + 2.0};
  }
  return default_bounds(p);
}

FitProblem::FitProblem(const TimeTrace& trace, const FitSpec& spec) : spec_(spec) {
  trace.validate();
  spec_.validate(trace.size());

  times_ = trace.t;
  counts_.resize(trace.size());
  weights_.resize(trace.size());
  for (std::size_t j = 0; j < trace.size(); ++j) {
    counts_[j] = static_cast<double>(trace.c[j]);
    weights_[j] = spec_.weights == FitSpec::Weights::poisson
                      ? 1.0 / std::sqrt(std::max(counts_[j], 1.0))
                      : 1.0;
  }

  for (FitParam p : spec_.free) {
    const Bounds b = spec_.bounds_for(p);
    if (!(b.lo < b.hi)) {
      throw ValidationError(std::string("FitSpec: empty bounds for ") + to_string(p));
    }
    lo_.push_back(b.lo);
    hi_.push_back(b.hi);
  }

  // amplitude default: mean counts over the pre-shutter baseline
  double acc = 0.0;
  std::size_t nb = 0;
  for (std::size_t j = 0; j < times_.size() && times_[j] < spec_.scenario.t_on; ++j) {
    acc += counts_[j];
    ++nb;
  }
  amplitude0_ = spec_.amplitude > 0.0 ? spec_.amplitude
              : (nb > 0 ? acc / static_cast<double>(nb)
                        : *std::max_element(counts_.begin(), counts_.end()));

  model_ = std::make_unique<LensTraceModel>(times_, spec_.trace_options);

  if (!spec_.init.empty()) {
    for (std::size_t i = 0; i < spec_.free.size(); ++i) {
      if (spec_.init[i] < lo_[i] || spec_.init[i] > hi_[i]) {
        throw ValidationError(std::string("FitSpec: init outside bounds for ") +
                              to_string(spec_.free[i]));
      }
    }
  }
}

void FitProblem::apply(std::span<const double> candidate, LensParams& p,
                       double& amplitude, Scenario& scenario) const {
  p = spec_.lens;
  scenario = spec_.scenario;
  amplitude = amplitude0_;
  for (std::size_t i = 0; i < spec_.free.size(); ++i) {
    const double v = candidate[i];
    switch (spec_.free[i]) {
      case FitParam::theta_th: p.theta_th = v; break;
      case FitParam::theta_s: p.theta_s = v; break;
      case FitParam::t_th: p.t_th = v; break;
      case FitParam::t_s: p.t_s = v; break;
      case FitParam::k: p.k = v; break;
      case FitParam::c_r: p.c_r = v; break;
      case FitParam::amplitude: amplitude = v; break;
      case FitParam::t_on: scenario.t_on = v; break;
    }
  }
}

void FitProblem::residuals(std::span<const double> candidate, std::vector<double>& out) {
  if (candidate.size() != spec_.free.size()) {
    throw ValidationError("residuals: candidate length must match the free set");
  }
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (candidate[i] < lo_[i] - 1e-12 || candidate[i] > hi_[i] + 1e-12) {
      std::ostringstream os;
      os << "residuals: candidate outside bounds for " << to_string(spec_.free[i])
         << " (" << candidate[i] << ")";
      throw ValidationError(os.str());
    }
  }

  LensParams p;
  Scenario scenario;
  double amplitude = 0.0;
  apply(candidate, p, amplitude, scenario);

  const std::vector<double>& T = model_->evaluate(scenario, p);
  ++n_evals_;
  out.resize(counts_.size());
  for (std::size_t j = 0; j < counts_.size(); ++j) {
    out[j] = (counts_[j] - amplitude * T[j]) * weights_[j];
  }
}

double FitProblem::chi2(std::span<const double> candidate) {
  residuals(candidate, model_buf_);
  return sum_sq(model_buf_);
}

double FitProblem::heuristic_for(FitParam p) const {
  // two-timescale structure read off the normalized trace
  const double t_on = spec_.scenario.t_on;
  const double t_end = std::min(spec_.scenario.t_off, times_.empty() ? 0.0 : times_.back());
  const double span = std::max(t_end - t_on, 1e-6);

  // normalized, lightly smoothed pump-on section
  auto level_at = [&](double frac_lo, double frac_hi) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < times_.size(); ++j) {
      const double tau = times_[j] - t_on;
      if (tau >= frac_lo * span && tau <= frac_hi * span) {
        acc += counts_[j];
        ++n;
      }
    }
    return n ? acc / (static_cast<double>(n) * amplitude0_) : 1.0;
  };

  const double y_fast = level_at(0.08, 0.16);  // fast transient mostly settled
  const double y_end = level_at(0.9, 1.0);
  const double drop_fast = std::clamp(1.0 - y_fast, 0.0, 1.0);
  const double drop_slow = std::clamp(y_fast - y_end, 0.0, 1.0);

  switch (p) {
    case FitParam::theta_th:
      // linearized response at V ~ 1: dT/dtheta ~ -0.35
      return std::clamp(drop_fast / 0.35, 0.05, 8.0);
    case FitParam::theta_s:
      return std::clamp(drop_slow / 0.35, 0.05, 8.0);
    case FitParam::t_th: {
      // first time the trace reaches half the fast drop
      const double target = 1.0 - 0.5 * drop_fast;
      for (std::size_t j = 0; j < times_.size(); ++j) {
        const double tau = times_[j] - t_on;
        if (tau <= 0.0) continue;
        if (counts_[j] / amplitude0_ <= target) return std::clamp(tau, 0.02, 40.0);
      }
      return 1.0;
    }
    case FitParam::t_s:
      return std::clamp(span / 3.0, 2.0, 5e3);
    case FitParam::k:
      return 1.0 / std::max(spec_.scenario.duration, 1.0);
    case FitParam::c_r:
      return 0.9;
    case FitParam::amplitude:
      return amplitude0_;
    case FitParam::t_on:
      return spec_.scenario.t_on;
  }
  return 0.0;
}

std::vector<double> FitProblem::initial_guess() const {
  if (!spec_.init.empty()) return spec_.init;
  std::vector<double> x0(spec_.free.size());
  for (std::size_t i = 0; i < spec_.free.size(); ++i) {
    x0[i] = std::clamp(heuristic_for(spec_.free[i]), lo_[i], hi_[i]);
  }
  return x0;
}

std::vector<double> residuals(const TimeTrace& trace, const FitSpec& spec,
                              std::span<const double> candidate) {
  FitProblem problem(trace, spec);
  std::vector<double> out;
  problem.residuals(candidate, out);
  return out;
}

namespace {

// Nelder-Mead over the box; candidates are projected onto the bounds.
// Deterministic. Returns the best vertex found within the budget.
struct SimplexResult {
  std::vector<double> x;
  double chi2 = std::numeric_limits<double>::infinity();
};

SimplexResult nelder_mead(FitProblem& problem, std::vector<double> x0, int budget) {
  const std::size_t n = x0.size();
  const std::vector<double> lo = problem.lower();
  const std::vector<double> hi = problem.upper();

  auto clamp_vec = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  };

  std::vector<std::vector<double>> vx(n + 1, x0);
  std::vector<double> vf(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double step = 0.08 * (hi[i] - lo[i]);
    if (vx[i + 1][i] + step > hi[i]) step = -step;
    vx[i + 1][i] += step;
  }
  int evals = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    clamp_vec(vx[i]);
    vf[i] = problem.chi2(vx[i]);
    ++evals;
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vf[a] < vf[b]; });
  };

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (evals < budget) {
    sort_simplex();
    const std::size_t best = order[0], worst = order[n];
    // relative spread termination
    if (vf[order[0]] > 0.0 &&
        (vf[worst] - vf[best]) <= 1e-10 * (std::abs(vf[best]) + 1e-30)) {
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += vx[order[r]][i];
    }
    for (std::size_t i = 0; i < n; ++i) centroid[i] /= static_cast<double>(n);

    auto blend = [&](std::vector<double>& out, double coeff) {
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = centroid[i] + coeff * (centroid[i] - vx[worst][i]);
      }
      clamp_vec(out);
    };

    blend(xr, 1.0);
    const double fr = problem.chi2(xr);
    ++evals;
    if (fr < vf[best]) {
      blend(xe, 2.0);
      const double fe = problem.chi2(xe);
      ++evals;
      if (fe < fr) {
        vx[worst] = xe;
        vf[worst] = fe;
      } else {
        vx[worst] = xr;
        vf[worst] = fr;
      }
      continue;
    }
    if (fr < vf[order[n - 1]]) {
      vx[worst] = xr;
      vf[worst] = fr;
      continue;
    }
    blend(xc, fr < vf[worst] ? 0.5 : -0.5);
    const double fc = problem.chi2(xc);
    ++evals;
    if (fc < std::min(fr, vf[worst])) {
      vx[worst] = xc;
      vf[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t r = 1; r <= n; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        vx[order[r]][i] = vx[order[0]][i] + 0.5 * (vx[order[r]][i] - vx[order[0]][i]);
      }
      clamp_vec(vx[order[r]]);
      vf[order[r]] = problem.chi2(vx[order[r]]);
      ++evals;
      if (evals >= budget) break;
    }
  }
  sort_simplex();
  return {vx[order[0]], vf[order[0]]};
}

struct GaussNewtonResult {
  std::vector<double> x;
  double chi2 = 0.0;
  bool converged = false;
  std::string termination;
  Eigen::MatrixXd jtj;  // at the final point
  bool jtj_valid = false;
};

// Damped Gauss-Newton (Levenberg style) with forward-difference Jacobian and
// box projection.
GaussNewtonResult gauss_newton(FitProblem& problem, std::vector<double> x,
                               double f, int budget) {
  const std::size_t n = x.size();
  const std::size_t m = problem.n_bins();
  const std::vector<double> lo = problem.lower();
  const std::vector<double> hi = problem.upper();

  GaussNewtonResult res;
  res.x = x;
  res.chi2 = f;

  std::vector<double> r0, r1;
  Eigen::MatrixXd J(m, n);
  Eigen::VectorXd rv(m);

  double lambda = 1e-3;
  int slow_iters = 0;

  problem.residuals(res.x, r0);
  for (std::size_t j = 0; j < m; ++j) rv(j) = r0[j];
  res.chi2 = rv.squaredNorm();

  while (problem.evals_used() < budget) {
    // forward-difference Jacobian of the residual vector
    for (std::size_t i = 0; i < n; ++i) {
      const double scale = hi[i] - lo[i];
      double h = 1e-6 * scale;
      std::vector<double> xp = res.x;
      if (xp[i] + h > hi[i]) h = -h;
      xp[i] += h;
      problem.residuals(xp, r1);
      for (std::size_t j = 0; j < m; ++j) J(j, i) = (r1[j] - r0[j]) / h;
      if (problem.evals_used() >= budget) break;
    }
    res.jtj = J.transpose() * J;
    res.jtj_valid = true;
    const Eigen::VectorXd g = J.transpose() * rv;

    bool stepped = false;
    for (int attempt = 0; attempt < 12 && problem.evals_used() < budget; ++attempt) {
      Eigen::MatrixXd A = res.jtj;
      for (std::size_t i = 0; i < n; ++i) {
        A(i, i) += lambda * std::max(res.jtj(i, i), 1e-12);
      }
      const Eigen::VectorXd delta = A.ldlt().solve(-g);
      std::vector<double> xn(n);
      double step_norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        xn[i] = std::clamp(res.x[i] + delta(i), lo[i], hi[i]);
        const double scaled = (xn[i] - res.x[i]) / (hi[i] - lo[i]);
        step_norm += scaled * scaled;
      }
      step_norm = std::sqrt(step_norm);

      problem.residuals(xn, r1);
      double fn = sum_sq(r1);
      if (fn < res.chi2) {
        const double rel_drop = (res.chi2 - fn) / std::max(res.chi2, 1e-300);
        res.x = xn;
        res.chi2 = fn;
        r0 = r1;
        for (std::size_t j = 0; j < m; ++j) rv(j) = r0[j];
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        slow_iters = rel_drop < 1e-8 ? slow_iters + 1 : 0;
        if (step_norm < 1e-9) {
          res.converged = true;
          res.termination = "step norm below 1e-9";
          return res;
        }
        break;
      }
      lambda *= 4.0;
    }
    if (!stepped) {
      res.converged = true;
      res.termination = "no descent direction at damping limit";
      return res;
    }
    if (slow_iters >= 5) {
      res.converged = true;
      res.termination = "relative chi2 change below 1e-8 over 5 iterations";
      return res;
    }
  }
  res.termination = "evaluation budget exhausted";
  return res;
}

}  // namespace

FitResult fit(const TimeTrace& trace, const FitSpec& spec) {
  FitProblem problem(trace, spec);
  const std::size_t n = problem.n_free();

  std::vector<double> x0 = problem.initial_guess();

  // stage 1: simplex for basin finding (a slice of the budget)
  const int nm_budget = std::min(spec.max_evals / 2, 120 * static_cast<int>(n));
  SimplexResult sx = nelder_mead(problem, x0, nm_budget);

  // keep the better of heuristic start and simplex result
  if (!(sx.chi2 < std::numeric_limits<double>::infinity())) {
    sx.x = x0;
    sx.chi2 = problem.chi2(x0);
  }

  // stage 2: damped Gauss-Newton polish
  GaussNewtonResult gn = gauss_newton(problem, sx.x, sx.chi2, spec.max_evals);

  FitResult out;
  out.free = spec.free;
  out.estimates = gn.x;
  out.chi2 = gn.chi2;
  out.dof = problem.n_bins() - n;
  out.n_evals = problem.evals_used();
  out.converged = gn.converged;
  out.termination = gn.termination;

  Scenario scen;
  problem.apply(gn.x, out.params, out.amplitude, scen);
  out.t_on = scen.t_on;

  out.sigma.assign(n, 0.0);
  out.covariance.assign(n * n, 0.0);
  if (gn.jtj_valid) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gn.jtj);
    if (lu.isInvertible()) {
      cov = lu.inverse();
      cov = 0.5 * (cov + cov.transpose()).eval();  // enforce symmetry
      out.covariance_valid = true;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out.covariance[i * n + j] = cov(i, j);
        out.sigma[i] = cov(i, i) > 0.0 ? std::sqrt(cov(i, i)) : 0.0;
      }
    }
  }
  return out;
}

std::vector<TimescaleProfile> profile_timescales(const TimeTrace& trace,
                                                 const FitSpec& spec,
                                                 const FitResult& fit_result,
                                                 const ProfileOptions& opt) {
  if (fit_result.estimates.size() != spec.free.size()) {
    throw ValidationError("profile_timescales: fit result does not match the spec");
  }

  struct Target {
    FitParam timescale;
    FitParam removal_pin;  // parameter pinned to zero to remove the timescale
  };
  const std::vector<Target> targets = {
      {FitParam::t_th, FitParam::theta_th},
      {FitParam::t_s, FitParam::theta_s},
      {FitParam::k, FitParam::k},
  };

  std::vector<TimescaleProfile> out;
  for (const Target& target : targets) {
    auto it = std::find(spec.free.begin(), spec.free.end(), target.timescale);
    if (it == spec.free.end()) continue;
    const std::size_t idx = static_cast<std::size_t>(it - spec.free.begin());

    TimescaleProfile profile;
    profile.param = target.timescale;

    // reduced spec: the pinned parameter is fixed, listed drops leave the
    // free set, everything else refits warm-started from the optimum
    auto reduced_fit = [&](FitParam pinned, double value,
                           std::vector<FitParam> drops) {
      drops.push_back(pinned);
      FitSpec rspec = spec;
      rspec.free.clear();
      rspec.init.clear();
      Scenario scen_fit;
      LensParams p_fit;
      double amp_fit = 0.0;
      FitProblem(trace, spec).apply(fit_result.estimates, p_fit, amp_fit, scen_fit);
      rspec.lens = p_fit;
      rspec.scenario = scen_fit;
      rspec.amplitude = amp_fit;
      switch (pinned) {
        case FitParam::theta_th: rspec.lens.theta_th = value; break;
        case FitParam::theta_s: rspec.lens.theta_s = value; break;
        case FitParam::t_th: rspec.lens.t_th = value; break;
        case FitParam::t_s: rspec.lens.t_s = value; break;
        case FitParam::k: rspec.lens.k = value; break;
        default: break;
      }
      for (std::size_t i = 0; i < spec.free.size(); ++i) {
        if (std::find(drops.begin(), drops.end(), spec.free[i]) != drops.end()) continue;
        rspec.free.push_back(spec.free[i]);
        const Bounds b = rspec.bounds_for(spec.free[i]);
        rspec.init.push_back(std::clamp(fit_result.estimates[i], b.lo, b.hi));
      }
      if (rspec.free.empty()) {
        // nothing left to optimize: evaluate chi2 of the pinned model directly
        std::vector<double> T = trace_model_eval(trace, rspec);
        double acc = 0.0;
        for (std::size_t j = 0; j < trace.size(); ++j) {
          const double cj = static_cast<double>(trace.c[j]);
          const double w = rspec.weights == FitSpec::Weights::poisson
                               ? 1.0 / std::sqrt(std::max(cj, 1.0))
                               : 1.0;
          const double r = (cj - rspec.amplitude * T[j]) * w;
          acc += r * r;
        }
        return acc;
      }
      return fit(trace, rspec).chi2;
    };

    if (opt.grid_points > 0) {
      const double center = std::max(fit_result.estimates[idx], 1e-6);
      const Bounds b = spec.bounds_for(target.timescale);
      for (int s = 0; s < opt.grid_points; ++s) {
        const double frac = opt.grid_points == 1
                                ? 0.0
                                : -opt.log_span + 2.0 * opt.log_span * s /
                                      (opt.grid_points - 1);
        double value = center * std::pow(10.0, frac);
        value = std::clamp(value, b.lo <= 0.0 ? 1e-6 : b.lo, b.hi);
        profile.grid.push_back(value);
        profile.chi2.push_back(reduced_fit(target.timescale, value, {}));
      }
    }

    // a removed timescale takes its companion parameters with it:
    // no thermal term without t_th, no Soret term without t_s, no residual
    // fraction without k
    std::vector<FitParam> drops;
    if (target.timescale == FitParam::t_th) drops = {FitParam::t_th};
    if (target.timescale == FitParam::t_s) drops = {FitParam::t_s};
    if (target.timescale == FitParam::k) drops = {FitParam::c_r};
    profile.delta_chi2_removed =
        reduced_fit(target.removal_pin, 0.0, drops) - fit_result.chi2;
    out.push_back(std::move(profile));
  }
  return out;
}

}  // namespace qilens

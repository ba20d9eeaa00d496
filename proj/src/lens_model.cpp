// SPDX-License-Identifier: Apache-2.0
#include "qilens/lens_model.hpp"

#include <boost/math/special_functions/expint.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>

#include "qilens/errors.hpp"
#include "qilens/parallel.hpp"

namespace qilens {

namespace {

bool finite(double x) { return std::isfinite(x); }

// E1(x) for x > 0
double e1(double x) { return boost::math::expint(1, x); }

// f(t') of the lens integrals for a = 2 m g
double lens_integrand(double a, double u, double t_c) {
  const double S = 1.0 + 2.0 * u / t_c;
  return -std::expm1(-a / S) / S;
}

const GaussRule& shared_rule(int order, double g_max) {
  struct Key {
    int order;
    double g_max;
  };
  static std::mutex mu;
  static Key key{0, 0.0};
  static GaussRule rule;
  std::lock_guard<std::mutex> lock(mu);
  if (key.order != order || key.g_max != g_max) {
    rule = gauss_legendre(order, 0.0, g_max);
    key = {order, g_max};
  }
  return rule;
}

std::complex<double> diffraction_sum(std::span<const double> g,
                                     std::span<const double> w,
                                     std::span<const double> phi, double v) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double ph = v * g[i] + phi[i];
    acc += w[i] * std::exp(-g[i]) * std::complex<double>(std::cos(ph), -std::sin(ph));
  }
  return acc;
}

}  // namespace

void LensParams::validate() const {
  for (double x : {theta_th, theta_s, t_th, t_s, k, c_r, m, v_geom}) {
    if (!finite(x)) throw ValidationError("LensParams: non-finite field");
  }
  if (!(t_th > 0.0)) throw ValidationError("LensParams: t_th must be > 0");
  if (!(t_s > 0.0)) throw ValidationError("LensParams: t_s must be > 0");
  if (!(k >= 0.0)) throw ValidationError("LensParams: k must be >= 0");
  if (!(c_r >= 0.0 && c_r <= 1.0)) throw ValidationError("LensParams: c_r must be in [0,1]");
  if (!(m > 0.0)) throw ValidationError("LensParams: m must be > 0");
}

std::vector<std::string> LensParams::warnings() const {
  std::vector<std::string> out;
  if (t_s < t_th) {
    std::ostringstream os;
    os << "t_s (" << t_s << " s) is shorter than t_th (" << t_th
       << " s); the Soret time is expected to be the slow one";
    out.push_back(os.str());
  }
  return out;
}

void BeamGeometry::validate() const {
  if (!(w_s_mm > 0.0) || !finite(w_s_mm)) throw ValidationError("BeamGeometry: w_s must be > 0");
  if (!(w_p_mm > 0.0) || !finite(w_p_mm)) throw ValidationError("BeamGeometry: w_p must be > 0");
}

void BeamGeometry::check_consistent(double m) const {
  validate();
  const double derived = mode_ratio();
  if (std::abs(derived - m) > 1e-12 * std::max(std::abs(derived), std::abs(m))) {
    std::ostringstream os;
    os << "BeamGeometry: m derived from beam radii (" << derived
       << ") disagrees with configured m (" << m << ")";
    throw ValidationError(os.str());
  }
}

void Scenario::validate() const {
  if (!finite(t_on) || !finite(duration)) throw ValidationError("Scenario: non-finite field");
  if (std::isnan(t_off)) throw ValidationError("Scenario: t_off is NaN");
  if (!(duration > 0.0)) throw ValidationError("Scenario: duration must be > 0");
  if (!(t_on >= 0.0)) throw ValidationError("Scenario: t_on must be >= 0");
  if (!(t_on < t_off)) throw ValidationError("Scenario: need t_on < t_off");
  if (std::isfinite(t_off) && !(t_off <= duration)) {
    throw ValidationError("Scenario: finite t_off must not exceed duration");
  }
  if (relax) {
    if (!(relax->t_th > 0.0) || !(relax->t_s > 0.0)) {
      throw ValidationError("Scenario: relaxation times must be > 0");
    }
  }
}

namespace detail {

double i1_closed(double a, double t, double t_c) {
  if (a == 0.0 || t == 0.0) return 0.0;
  const double S = 1.0 + 2.0 * t / t_c;
  return 0.5 * t_c * (std::log(S) - e1(a / S) + e1(a));
}

double i2_shifted(double a, double t, double t_c, double k, double rtol) {
  if (a == 0.0 || t == 0.0) return 0.0;
  return integrate_adaptive(
      [a, t, t_c, k](double u) {
        return std::exp(k * (u - t)) * lens_integrand(a, u, t_c);
      },
      0.0, t, rtol);
}

}  // namespace detail

double phase_component(double g, double t, double amp, double t_c, double k,
                       double c_r, double m) {
  for (double x : {g, t, amp, t_c, k, c_r, m}) {
    if (!finite(x)) throw ValidationError("phase_component: non-finite input");
  }
  if (!(g >= 0.0)) throw ValidationError("phase_component: g must be >= 0");
  if (!(t >= 0.0)) throw ValidationError("phase_component: t must be >= 0");
  if (!(t_c > 0.0)) throw ValidationError("phase_component: t_c must be > 0");
  if (!(k >= 0.0)) throw ValidationError("phase_component: k must be >= 0");
  if (!(c_r >= 0.0 && c_r <= 1.0)) throw ValidationError("phase_component: c_r must be in [0,1]");
  if (!(m > 0.0)) throw ValidationError("phase_component: m must be > 0");

  if (t == 0.0 || g == 0.0 || amp == 0.0) return 0.0;

  const double a = 2.0 * m * g;
  const double i1 = detail::i1_closed(a, t, t_c);
  if (k == 0.0) {
    // e^{k t'} == 1 makes both integrals identical; c_r drops out
    return (amp / t_c) * i1;
  }
  const double i2 = detail::i2_shifted(a, t, t_c, k);
  // i2 already carries the e^{-k t} factor through the shifted exponent
  return (amp / t_c) * (c_r * i1 + (1.0 - c_r) * i2);
}

double phase_total(double g, double t, const LensParams& p) {
  p.validate();
  return phase_component(g, t, p.theta_th, p.t_th, p.k, p.c_r, p.m) +
         phase_component(g, t, p.theta_s, p.t_s, p.k, p.c_r, p.m);
}

double intensity(double t, const LensParams& p, const IntensityOptions& opt) {
  p.validate();
  if (!(t >= 0.0) || !finite(t)) throw ValidationError("intensity: t must be >= 0 and finite");
  if (opt.quad_order < 200) throw ValidationError("intensity: quad_order must be >= 200");

  const GaussRule rule = gauss_legendre(opt.quad_order, 0.0, opt.g_max);
  std::vector<double> phi(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    phi[i] = phase_total(rule.nodes[i], t, p);
  }
  const double v = p.v_geom;
  const std::complex<double> amp = diffraction_sum(rule.nodes, rule.weights, phi, v);
  const double T = (1.0 + v * v) * std::norm(amp);

  if (opt.validate) {
    // h-refined check: same order on two half panels
    const double mid = 0.5 * opt.g_max;
    const GaussRule lo = gauss_legendre(opt.quad_order, 0.0, mid);
    const GaussRule hi = gauss_legendre(opt.quad_order, mid, opt.g_max);
    std::complex<double> acc{0.0, 0.0};
    for (const GaussRule* r : {&lo, &hi}) {
      std::vector<double> ph(r->size());
      for (std::size_t i = 0; i < r->size(); ++i) ph[i] = phase_total(r->nodes[i], t, p);
      acc += diffraction_sum(r->nodes, r->weights, ph, v);
    }
    const double T_ref = (1.0 + v * v) * std::norm(acc);
    const double rel = std::abs(T - T_ref) / std::max(std::abs(T_ref), 1e-300);
    if (rel > opt.validate_rtol) {
      throw NumericalError("intensity: fixed-order quadrature disagrees with refined rule", rel);
    }
  }
  return T;
}

bool LensTraceModel::TermGrid::matches(double tc, double kk, double mm,
                                       std::span<const double> rel) const {
  if (t_c != tc || k != kk || m != mm || n_times != rel.size()) return false;
  if (rel.empty()) return true;
  return first_time == rel.front();
}

void LensTraceModel::build_term(TermGrid& grid, double t_c, double k, double m,
                                std::span<const double> rel_times) {
  const std::size_t ng = rule_.size();
  const std::size_t nt = rel_times.size();
  grid.t_c = t_c;
  grid.k = k;
  grid.m = m;
  grid.n_times = nt;
  grid.first_time = nt ? rel_times.front() : -1.0;
  grid.i1.assign(nt * ng, 0.0);
  grid.i2.assign(nt * ng, 0.0);
  if (nt == 0) return;

  // Panel rule for the k-weighted integral; panels are bin-sized and split
  // further when they are long on the t_c scale.
  static const GaussRule panel = gauss_legendre(12, 0.0, 1.0);

  parallel_for(
      ng,
      [&](std::size_t i) {
        const double a = 2.0 * m * rule_.nodes[i];
        double prev = 0.0;
        double t_prev = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
          const double t = rel_times[j];
          grid.i1[j * ng + i] = detail::i1_closed(a, t, t_c);
          if (t == t_prev) {
            grid.i2[j * ng + i] = prev;
            continue;
          }
          const double dt = t - t_prev;
          int nsub = static_cast<int>(std::ceil(dt / t_c));
          nsub = std::clamp(nsub, 1, 64);
          double acc = prev * std::exp(-k * dt);
          const double sub = dt / nsub;
          for (int s = 0; s < nsub; ++s) {
            const double lo = t_prev + s * sub;
            for (std::size_t q = 0; q < panel.size(); ++q) {
              const double u = lo + sub * panel.nodes[q];
              acc += sub * panel.weights[q] * std::exp(k * (u - t)) *
                     lens_integrand(a, u, t_c);
            }
          }
          grid.i2[j * ng + i] = acc;
          prev = acc;
          t_prev = t;
        }
      },
      opt_.n_threads);
}

LensTraceModel::LensTraceModel(std::vector<double> sample_times, TraceOptions opt)
    : times_(std::move(sample_times)), opt_(opt) {
  if (!std::is_sorted(times_.begin(), times_.end())) {
    throw ValidationError("trace: sample times must be sorted ascending");
  }
  if (opt_.quad.quad_order < 200) {
    throw ValidationError("trace: quad_order must be >= 200");
  }
  rule_ = gauss_legendre(opt_.quad.quad_order, 0.0, opt_.quad.g_max);
  exp_neg_g_.resize(rule_.size());
  for (std::size_t i = 0; i < rule_.size(); ++i) {
    exp_neg_g_[i] = rule_.weights[i] * std::exp(-rule_.nodes[i]);
  }
  result_.resize(times_.size());
}

const std::vector<double>& LensTraceModel::evaluate(const Scenario& scenario,
                                                    const LensParams& p) {
  scenario.validate();
  p.validate();
  if (!times_.empty()) {
    if (times_.front() < 0.0 || times_.back() > scenario.duration) {
      throw ValidationError("trace: sample times must lie within [0, duration]");
    }
  }

  const std::size_t ng = rule_.size();
  const double t_on = scenario.t_on;
  const double t_off = scenario.t_off;
  const bool has_relax = scenario.has_relaxation();

  // relative time axes per branch
  rel_times_on_.clear();
  rel_times_off_.clear();
  std::size_t first_on = times_.size(), first_off = times_.size();
  for (std::size_t j = 0; j < times_.size(); ++j) {
    const double t = times_[j];
    if (t < t_on) continue;
    if (t < t_off) {
      if (first_on == times_.size()) first_on = j;
      rel_times_on_.push_back(t - t_on);
    } else {
      if (first_off == times_.size()) first_off = j;
      rel_times_off_.push_back(t - t_off);
    }
  }
  const std::size_t n_on = rel_times_on_.size();
  if (has_relax) {
    // steady-state column at shutter close feeds the relaxation branch
    rel_times_on_.push_back(t_off - t_on);
  }

  if (!rel_times_on_.empty()) {
    if (!on_th_.matches(p.t_th, p.k, p.m, rel_times_on_)) {
      build_term(on_th_, p.t_th, p.k, p.m, rel_times_on_);
    }
    if (!on_so_.matches(p.t_s, p.k, p.m, rel_times_on_)) {
      build_term(on_so_, p.t_s, p.k, p.m, rel_times_on_);
    }
  }
  const RelaxParams relax = scenario.relax.value_or(RelaxParams{p.t_th, p.t_s});
  if (!rel_times_off_.empty()) {
    if (!rel_th_.matches(relax.t_th, p.k, p.m, rel_times_off_)) {
      build_term(rel_th_, relax.t_th, p.k, p.m, rel_times_off_);
    }
    if (!rel_so_.matches(relax.t_s, p.k, p.m, rel_times_off_)) {
      build_term(rel_so_, relax.t_s, p.k, p.m, rel_times_off_);
    }
  }

  const double v = p.v_geom;
  const double amp_th = p.theta_th / p.t_th;
  const double amp_so = p.theta_s / p.t_s;
  const double amp_th_rel = p.theta_th / relax.t_th;
  const double amp_so_rel = p.theta_s / relax.t_s;
  const double c_r = p.c_r;

  std::vector<double>& out = result_;
  const std::size_t stride = ng;

  parallel_for(
      times_.size(),
      [&](std::size_t j) {
        const double t = times_[j];
        if (t < t_on) {
          out[j] = 1.0;
          return;
        }
        std::complex<double> acc{0.0, 0.0};
        if (t < t_off) {
          const std::size_t jj = j - first_on;
          const double* i1t = &on_th_.i1[jj * stride];
          const double* i2t = &on_th_.i2[jj * stride];
          const double* i1s = &on_so_.i1[jj * stride];
          const double* i2s = &on_so_.i2[jj * stride];
          for (std::size_t i = 0; i < ng; ++i) {
            const double phi = amp_th * (c_r * i1t[i] + (1.0 - c_r) * i2t[i]) +
                               amp_so * (c_r * i1s[i] + (1.0 - c_r) * i2s[i]);
            const double ph = v * rule_.nodes[i] + phi;
            acc += exp_neg_g_[i] * std::complex<double>(std::cos(ph), -std::sin(ph));
          }
        } else {
          const std::size_t jj = j - first_off;
          const std::size_t ss = n_on;  // steady-state column index
          const double* i1t_ss = &on_th_.i1[ss * stride];
          const double* i2t_ss = &on_th_.i2[ss * stride];
          const double* i1s_ss = &on_so_.i1[ss * stride];
          const double* i2s_ss = &on_so_.i2[ss * stride];
          const double* i1t = &rel_th_.i1[jj * stride];
          const double* i2t = &rel_th_.i2[jj * stride];
          const double* i1s = &rel_so_.i1[jj * stride];
          const double* i2s = &rel_so_.i2[jj * stride];
          for (std::size_t i = 0; i < ng; ++i) {
            const double phi_ss =
                amp_th * (c_r * i1t_ss[i] + (1.0 - c_r) * i2t_ss[i]) +
                amp_so * (c_r * i1s_ss[i] + (1.0 - c_r) * i2s_ss[i]);
            const double phi_rise =
                amp_th_rel * (c_r * i1t[i] + (1.0 - c_r) * i2t[i]) +
                amp_so_rel * (c_r * i1s[i] + (1.0 - c_r) * i2s[i]);
            const double phi = std::max(phi_ss - phi_rise, 0.0);
            const double ph = v * rule_.nodes[i] + phi;
            acc += exp_neg_g_[i] * std::complex<double>(std::cos(ph), -std::sin(ph));
          }
        }
        out[j] = (1.0 + v * v) * std::norm(acc);
      },
      opt_.n_threads);

  return result_;
}

std::vector<double> trace(const Scenario& scenario, const LensParams& p,
                          std::span<const double> sample_times,
                          const TraceOptions& opt) {
  LensTraceModel model(std::vector<double>(sample_times.begin(), sample_times.end()), opt);
  return model.evaluate(scenario, p);
}

}  // namespace qilens

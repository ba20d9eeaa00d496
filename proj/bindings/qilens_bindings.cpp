// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qilens/commands.hpp"
#include "qilens/counting.hpp"
#include "qilens/errors.hpp"
#include "qilens/fitting.hpp"
#include "qilens/lens_model.hpp"
#include "qilens/trace_io.hpp"

namespace py = pybind11;
using namespace qilens;

PYBIND11_MODULE(_qilens, m) {
  m.doc() = "Quantum-illumination thermal-lens simulator and estimation toolkit";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  py::class_<LensParams>(m, "LensParams")
      .def(py::init<>())
      .def_readwrite("theta_th", &LensParams::theta_th)
      .def_readwrite("theta_s", &LensParams::theta_s)
      .def_readwrite("t_th", &LensParams::t_th)
      .def_readwrite("t_s", &LensParams::t_s)
      .def_readwrite("k", &LensParams::k)
      .def_readwrite("c_r", &LensParams::c_r)
      .def_readwrite("m", &LensParams::m)
      .def_readwrite("v_geom", &LensParams::v_geom)
      .def("validate", &LensParams::validate)
      .def("warnings", &LensParams::warnings);

  py::class_<BeamGeometry>(m, "BeamGeometry")
      .def(py::init<>())
      .def_readwrite("w_s_mm", &BeamGeometry::w_s_mm)
      .def_readwrite("w_p_mm", &BeamGeometry::w_p_mm)
      .def("mode_ratio", &BeamGeometry::mode_ratio)
      .def("check_consistent", &BeamGeometry::check_consistent);

  py::class_<RelaxParams>(m, "RelaxParams")
      .def(py::init<>())
      .def_readwrite("t_th", &RelaxParams::t_th)
      .def_readwrite("t_s", &RelaxParams::t_s);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("t_on", &Scenario::t_on)
      .def_readwrite("t_off", &Scenario::t_off)
      .def_readwrite("duration", &Scenario::duration)
      .def_readwrite("relax", &Scenario::relax)
      .def("validate", &Scenario::validate);

  py::class_<CountingConfig>(m, "CountingConfig")
      .def(py::init<>())
      .def_readwrite("rep_rate", &CountingConfig::rep_rate)
      .def_readwrite("mu_pair", &CountingConfig::mu_pair)
      .def_readwrite("eta_i", &CountingConfig::eta_i)
      .def_readwrite("eta_s", &CountingConfig::eta_s)
      .def_readwrite("noise_rate_s", &CountingConfig::noise_rate_s)
      .def_readwrite("bin_width", &CountingConfig::bin_width)
      .def_readwrite("seed", &CountingConfig::seed)
      .def_readwrite("m_singles", &CountingConfig::m_singles)
      .def("validate", &CountingConfig::validate)
      .def("warnings", &CountingConfig::warnings);

  py::class_<TimeTrace>(m, "TimeTrace")
      .def(py::init<>())
      .def_readwrite("t", &TimeTrace::t)
      .def_readwrite("s_i", &TimeTrace::s_i)
      .def_readwrite("s_s", &TimeTrace::s_s)
      .def_readwrite("c", &TimeTrace::c)
      .def_readwrite("bin_width", &TimeTrace::bin_width)
      .def("__len__", &TimeTrace::size)
      .def("validate", &TimeTrace::validate);

  py::class_<SimChannels>(m, "SimChannels")
      .def(py::init<>())
      .def_readonly("c_true", &SimChannels::c_true)
      .def_readonly("c_acc_pair", &SimChannels::c_acc_pair)
      .def_readonly("c_acc_noise", &SimChannels::c_acc_noise)
      .def_readonly("s_s_true", &SimChannels::s_s_true)
      .def_readonly("s_s_noise", &SimChannels::s_s_noise);

  py::enum_<SimMode>(m, "SimMode")
      .value("BinPoisson", SimMode::BinPoisson)
      .value("PerPulse", SimMode::PerPulse);

  py::class_<GsiPoint>(m, "GsiPoint")
      .def_readonly("t_center", &GsiPoint::t_center)
      .def_readonly("g", &GsiPoint::g)
      .def_readonly("sigma", &GsiPoint::sigma)
      .def_readonly("valid", &GsiPoint::valid);

  py::class_<DenoiseResult>(m, "DenoiseResult")
      .def_readonly("t", &DenoiseResult::t)
      .def_readonly("s_t_hat", &DenoiseResult::s_t_hat)
      .def_readonly("s_t_sigma", &DenoiseResult::s_t_sigma)
      .def_readonly("s_s_rate", &DenoiseResult::s_s_rate)
      .def_readonly("valid", &DenoiseResult::valid)
      .def_readonly("g_baseline", &DenoiseResult::g_baseline)
      .def_readonly("g_baseline_sigma", &DenoiseResult::g_baseline_sigma)
      .def_readonly("snr_enhancement", &DenoiseResult::snr_enhancement)
      .def_readonly("baseline_bins", &DenoiseResult::baseline_bins);

  py::class_<KlyshkoEstimate>(m, "KlyshkoEstimate")
      .def_readonly("eta", &KlyshkoEstimate::eta)
      .def_readonly("sigma", &KlyshkoEstimate::sigma)
      .def_readonly("baseline_bins", &KlyshkoEstimate::baseline_bins);

  py::enum_<FitParam>(m, "FitParam")
      .value("theta_th", FitParam::theta_th)
      .value("theta_s", FitParam::theta_s)
      .value("t_th", FitParam::t_th)
      .value("t_s", FitParam::t_s)
      .value("k", FitParam::k)
      .value("c_r", FitParam::c_r)
      .value("amplitude", FitParam::amplitude)
      .value("t_on", FitParam::t_on);

  py::class_<FitSpec> fit_spec(m, "FitSpec");
  fit_spec.def(py::init<>())
      .def_readwrite("free", &FitSpec::free)
      .def_readwrite("lens", &FitSpec::lens)
      .def_readwrite("scenario", &FitSpec::scenario)
      .def_readwrite("amplitude", &FitSpec::amplitude)
      .def_readwrite("init", &FitSpec::init)
      .def_readwrite("weights", &FitSpec::weights)
      .def_readwrite("max_evals", &FitSpec::max_evals);
  py::enum_<FitSpec::Weights>(fit_spec, "Weights")
      .value("poisson", FitSpec::Weights::poisson)
      .value("uniform", FitSpec::Weights::uniform);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("amplitude", &FitResult::amplitude)
      .def_readonly("t_on", &FitResult::t_on)
      .def_readonly("free", &FitResult::free)
      .def_readonly("estimates", &FitResult::estimates)
      .def_readonly("sigma", &FitResult::sigma)
      .def_readonly("covariance", &FitResult::covariance)
      .def_readonly("covariance_valid", &FitResult::covariance_valid)
      .def_readonly("chi2", &FitResult::chi2)
      .def_readonly("dof", &FitResult::dof)
      .def_readonly("n_evals", &FitResult::n_evals)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("termination", &FitResult::termination);

  m.def("phase_component", &phase_component, py::arg("g"), py::arg("t"), py::arg("amp"),
        py::arg("t_c"), py::arg("k"), py::arg("c_r"), py::arg("m"));
  m.def("phase_total", &phase_total, py::arg("g"), py::arg("t"), py::arg("p"));
  m.def(
      "intensity",
      [](double t, const LensParams& p) { return intensity(t, p); },
      py::arg("t"), py::arg("p"));
  m.def(
      "trace",
      [](const Scenario& scenario, const LensParams& p, const std::vector<double>& times) {
        return trace(scenario, p, times);
      },
      py::arg("scenario"), py::arg("p"), py::arg("sample_times"));
  m.def(
      "simulate",
      [](const CountingConfig& config, const Scenario& scenario, const LensParams& p,
         SimMode mode) { return simulate(config, scenario, p, mode); },
      py::arg("config"), py::arg("scenario"), py::arg("p"),
      py::arg("mode") = SimMode::BinPoisson);
  m.def("g_si", &g_si, py::arg("trace"), py::arg("config"), py::arg("window_bins"));
  m.def("accidentals", &accidentals, py::arg("trace"), py::arg("config"));
  m.def("denoise", &denoise, py::arg("trace"), py::arg("config"), py::arg("baseline_end_s"));
  m.def("klyshko_efficiency", &klyshko_efficiency, py::arg("trace"), py::arg("config"),
        py::arg("baseline_end_s"));
  m.def("fit", &fit, py::arg("trace"), py::arg("spec"),
        py::call_guard<py::gil_scoped_release>());
  m.def("load_trace", &load_trace, py::arg("path"));
  m.def("save_trace", &save_trace, py::arg("trace"), py::arg("path"));
}

# SPDX-License-Identifier: Apache-2.0
"""Quantum-illumination thermal-lens simulator and estimation toolkit."""

from _qilens import (  # noqa: F401
    BeamGeometry,
    CountingConfig,
    DenoiseResult,
    FitParam,
    FitResult,
    FitSpec,
    GsiPoint,
    IoError,
    KlyshkoEstimate,
    LensParams,
    NumericalError,
    RelaxParams,
    Scenario,
    SimChannels,
    SimMode,
    TimeTrace,
    ValidationError,
    accidentals,
    denoise,
    fit,
    g_si,
    intensity,
    klyshko_efficiency,
    load_trace,
    phase_component,
    phase_total,
    save_trace,
    simulate,
    trace,
)

__all__ = [
    "BeamGeometry",
    "CountingConfig",
    "DenoiseResult",
    "FitParam",
    "FitResult",
    "FitSpec",
    "GsiPoint",
    "IoError",
    "KlyshkoEstimate",
    "LensParams",
    "NumericalError",
    "RelaxParams",
    "Scenario",
    "SimChannels",
    "SimMode",
    "TimeTrace",
    "ValidationError",
    "accidentals",
    "denoise",
    "fit",
    "g_si",
    "intensity",
    "klyshko_efficiency",
    "load_trace",
    "phase_component",
    "phase_total",
    "save_trace",
    "simulate",
    "trace",
]

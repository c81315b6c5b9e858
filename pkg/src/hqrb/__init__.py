"""Randomized-benchmarking simulator for an exchange-controlled hybrid qubit.

The package compiles single-qubit gates to exchange-pulse schedules, perturbs
them with quasi-static Gaussian or 1/f control noise, runs Monte-Carlo RB and
interleaved-RB campaigns, fits the fidelity decay, and reports error-per-
Clifford and per-gate error bounds.
"""

from .errors import SynthesisError, TraceWindowError, ValidationError
from .su2 import (
    PLANCK_UEV_NS,
    SIX_STATES,
    StepGenerator,
    gate_fidelity,
    propagator,
    rotation,
    rx,
    ry,
    rz,
    state_fidelity,
)
from .pulses import DeviceParams, GateSchedule, PulseStep, schedule_duration, synth_rx, synth_rz, synth_u, synth_y
from .cliffords import CliffordElement, CliffordGroup
from .noise import NoiseRealization, OneOverFParams, QsgParams, calibrate_amplitude, generate_1f_trace, sample_1f, sample_qsg
from .device import HamiltonianCoefficients, ModelKind, calibrate, realize
from .rb import DecayCurve, RbConfig, build_sequence, run_campaign, simulate_sequence
from .analysis import FitResult, IrbResult, epc, error_bound, fit_decay, interleaved_error, irb_result, sweep

__all__ = [
    "PLANCK_UEV_NS",
    "SIX_STATES",
    "CliffordElement",
    "CliffordGroup",
    "DecayCurve",
    "DeviceParams",
    "FitResult",
    "GateSchedule",
    "HamiltonianCoefficients",
    "IrbResult",
    "ModelKind",
    "NoiseRealization",
    "OneOverFParams",
    "PulseStep",
    "QsgParams",
    "RbConfig",
    "StepGenerator",
    "SynthesisError",
    "TraceWindowError",
    "ValidationError",
    "build_sequence",
    "calibrate",
    "calibrate_amplitude",
    "epc",
    "error_bound",
    "fit_decay",
    "gate_fidelity",
    "generate_1f_trace",
    "interleaved_error",
    "irb_result",
    "propagator",
    "realize",
    "rotation",
    "run_campaign",
    "rx",
    "ry",
    "rz",
    "sample_1f",
    "sample_qsg",
    "schedule_duration",
    "simulate_sequence",
    "state_fidelity",
    "sweep",
    "synth_rx",
    "synth_rz",
    "synth_u",
    "synth_y",
]

"""Control-noise models: quasi-static Gaussian and power-matched 1/f.

Quasi-static Gaussian (QSG) noise perturbs each pulse step independently:
an additive timing error with standard deviation sigma_t and, on every
active exchange channel, an amplitude error J_active * g with
g ~ N(0, sigma_j / J_max).

The 1/f model synthesizes a colored trace per channel in the frequency
domain: deterministic magnitudes proportional to f^(-1/2) between the
cutoffs, independent uniform phases, inverse DFT to the time grid t0 =
1/f_max.  The trace is normalized so its time-domain variance equals the
QSG-equivalent power sigma_j^2 implied by the matched amplitude
(:func:`calibrate_amplitude`), which makes the two models directly
comparable.  Because the grid spacing is t0, the synthesized band is capped
at the Nyquist frequency 1/(2 t0) = f_max/2; the normalization is taken over
the realized band.  Each step reads the trace at its start time, so the
noise a gate sees depends on the duration of everything before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft

from .errors import TraceWindowError, ValidationError
from .pulses import GateSchedule

H_NEV_NS = 4135.667696  # Planck constant in neV*ns

_RESAMPLE_POLICIES = ("per-step", "per-gate", "per-sequence")


@dataclass(frozen=True)
class QsgParams:
    """Quasi-static Gaussian noise levels.

    sigma_t_ps is the timing-jitter standard deviation, sigma_j_nev the
    amplitude-error scale at full drive (J_active = J_max).  ``resample``
    controls how often fresh normalized draws are made.
    """

    sigma_t_ps: float = 0.0
    sigma_j_nev: float = 0.0
    resample: str = "per-step"

    def __post_init__(self):
        if self.sigma_t_ps < 0 or self.sigma_j_nev < 0:
            raise ValidationError("noise standard deviations must be non-negative")
        if self.resample not in _RESAMPLE_POLICIES:
            raise ValidationError(f"resample must be one of {_RESAMPLE_POLICIES}, got {self.resample!r}")


@dataclass(frozen=True)
class OneOverFParams:
    """1/f amplitude-noise parameters (timing jitter stays Gaussian).

    The PSD amplitude a_j_nev is normally obtained from
    :func:`calibrate_amplitude` so that the total 1/f power matches a QSG
    sigma_j; ``from_matched_power`` does exactly that.
    """

    a_j_nev: float
    f_min_hz: float = 50e3
    f_max_hz: float = 10e9
    sigma_t_ps: float = 0.0
    j_max_uev: float = 1.0

    def __post_init__(self):
        if not (0 < self.f_min_hz < self.f_max_hz):
            raise ValidationError("cutoffs must satisfy 0 < f_min < f_max")
        if self.a_j_nev < 0 or self.sigma_t_ps < 0:
            raise ValidationError("noise amplitudes must be non-negative")
        if self.j_max_uev <= 0:
            raise ValidationError("j_max_uev must be positive")

    @classmethod
    def from_matched_power(
        cls,
        sigma_j_nev: float,
        j_max_uev: float = 1.0,
        f_min_hz: float = 50e3,
        f_max_hz: float = 10e9,
        sigma_t_ps: float = 0.0,
    ) -> "OneOverFParams":
        a_j = calibrate_amplitude(sigma_j_nev, j_max_uev, f_min_hz, f_max_hz)
        return cls(a_j, f_min_hz, f_max_hz, sigma_t_ps, j_max_uev)

    @property
    def t0_ns(self) -> float:
        """Sampling grid spacing 1/f_max in ns."""
        return 1e9 / self.f_max_hz

    @property
    def sigma_eq_nev(self) -> float:
        """QSG-equivalent sigma_j implied by a_j through power matching."""
        j_max_nev = self.j_max_uev * 1e3
        var = self.a_j_nev * math.log(self.f_max_hz / self.f_min_hz) * j_max_nev**2 * self.t0_ns / (math.pi * H_NEV_NS)
        return math.sqrt(var)

    @property
    def window_ns(self) -> float:
        """Span 1/f_min of one trace; longer timelines need a fresh trace."""
        return 1e9 / self.f_min_hz


def calibrate_amplitude(sigma_j_nev: float, j_max_uev: float, f_min_hz: float, f_max_hz: float) -> float:
    """1/f PSD amplitude whose band power equals the QSG variance sigma_j^2.

    a_j = pi * t0 * h * (sigma_j / (J_max t0))^2 / ln(f_max/f_min), with
    t0 = 1/f_max; everything in neV and ns.
    """
    if not (0 < f_min_hz < f_max_hz):
        raise ValidationError("cutoffs must satisfy 0 < f_min < f_max")
    if sigma_j_nev < 0:
        raise ValidationError("sigma_j_nev must be non-negative")
    t0_ns = 1e9 / f_max_hz
    j_max_nev = j_max_uev * 1e3
    return math.pi * t0_ns * H_NEV_NS * (sigma_j_nev / (j_max_nev * t0_ns)) ** 2 / math.log(f_max_hz / f_min_hz)


@dataclass(frozen=True)
class NoiseRealization:
    """Per-step control errors: timing in ns, amplitudes in neV."""

    dt_ns: np.ndarray
    dj1_nev: np.ndarray
    dj2_nev: np.ndarray
    dj_nev: np.ndarray

    def __post_init__(self):
        n = len(self.dt_ns)
        for arr in (self.dj1_nev, self.dj2_nev, self.dj_nev):
            if len(arr) != n:
                raise ValidationError("all per-step arrays must have equal length")

    def __len__(self) -> int:
        return len(self.dt_ns)

    @classmethod
    def null(cls, n_steps: int) -> "NoiseRealization":
        z = np.zeros(n_steps)
        return cls(z, z.copy(), z.copy(), z.copy())

    def delta_for(self, channel: str, k: int) -> float:
        """Amplitude error of the named channel at step ``k``, in neV."""
        return float({"j1": self.dj1_nev, "j2": self.dj2_nev, "j": self.dj_nev}[channel][k])


def _schedule_j_max(schedule: GateSchedule) -> float:
    """Infer J_max from a schedule (intra-dot J is J_max/2 by construction)."""
    best = 0.0
    for s in schedule.steps:
        best = max(best, s.j1_uev, s.j2_uev, 2.0 * s.j_uev)
    if best <= 0:
        raise ValidationError("schedule has no active exchange to scale noise against")
    return best


def qsg_from_draws(params: QsgParams, schedule: GateSchedule, g: np.ndarray) -> NoiseRealization:
    """Turn normalized draws (one row of 4 per step) into a realization.

    Column order is (t, j1, j2, j): dt = sigma_t * g_t and, per channel,
    dJ_c = J_c * (sigma_j / J_max) * g_c, so inactive channels stay zero.
    """
    n = len(schedule.steps)
    if n == 0:
        return NoiseRealization.null(0)
    if g.shape != (n, 4):
        raise ValidationError(f"draws must have shape ({n}, 4), got {g.shape}")
    j_max = _schedule_j_max(schedule)
    sigma_rel = params.sigma_j_nev / (j_max * 1e3)
    j1 = np.array([s.j1_uev for s in schedule.steps]) * 1e3
    j2 = np.array([s.j2_uev for s in schedule.steps]) * 1e3
    jj = np.array([s.j_uev for s in schedule.steps]) * 1e3
    return NoiseRealization(
        dt_ns=params.sigma_t_ps * 1e-3 * g[:, 0],
        dj1_nev=sigma_rel * j1 * g[:, 1],
        dj2_nev=sigma_rel * j2 * g[:, 2],
        dj_nev=sigma_rel * jj * g[:, 3],
    )


def sample_qsg(params: QsgParams, schedule: GateSchedule, rng: np.random.Generator) -> NoiseRealization:
    """Draw one QSG realization for a schedule.

    Timing errors are additive, dt ~ N(0, sigma_t), per step.  Each channel
    with a nonzero nominal amplitude J_c gets dJ_c = J_c * g_c with
    g_c ~ N(0, sigma_j / J_max), so inactive channels stay exactly zero.
    Under 'per-gate' (and, for a single schedule, 'per-sequence') resampling
    one draw is shared by all steps.
    """
    n = len(schedule.steps)
    if n == 0:
        return NoiseRealization.null(0)
    n_draws = n if params.resample == "per-step" else 1
    g = rng.standard_normal((n_draws, 4))
    if n_draws == 1:
        g = np.broadcast_to(g, (n, 4))
    return qsg_from_draws(params, schedule, g)


class OneOverFSynth:
    """Frequency-domain 1/f trace generator for fixed parameters.

    Precomputes the spectral magnitudes once; each call draws fresh phases.
    Series length is M = ceil(f_max/f_min) samples on the grid t0.
    """

    def __init__(self, params: OneOverFParams):
        self.params = params
        self.m = int(math.ceil(params.f_max_hz / params.f_min_hz))
        self.t0_ns = params.t0_ns
        n_half = self.m // 2 + 1
        freqs_hz = np.arange(n_half) / (self.m * self.t0_ns * 1e-9)
        band = (freqs_hz >= params.f_min_hz * (1 - 1e-12)) & (freqs_hz <= params.f_max_hz)
        band[0] = False  # zero-mean
        if self.m % 2 == 0:
            band[-1] = False  # Nyquist bin must be real; drop its sliver of power
        mag2 = np.zeros(n_half)
        with np.errstate(divide="ignore"):
            mag2[band] = 1.0 / freqs_hz[band]
        # Time-domain variance of the symmetrized IDFT is 2*sum(mag^2)/M^2;
        # scale so it equals the matched power sigma_eq^2 exactly.
        total = 2.0 * float(np.sum(mag2))
        if total > 0 and params.a_j_nev > 0:
            mag2 *= self.m**2 * params.sigma_eq_nev**2 / total
        else:
            mag2[:] = 0.0
        self.magnitude = np.sqrt(mag2)
        # float32 is ample precision for noise values and roughly halves the
        # per-trace synthesis cost, which dominates 1/f campaigns.
        self._magnitude32 = self.magnitude.astype(np.float32)

    def sample(self, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        """Generate ``count`` traces, shape (count, M), values in neV.

        Phases are drawn as normalized Gaussian pairs, which is exactly a
        uniform phase on [0, 2*pi) and avoids two large trig evaluations.
        """
        k = len(self.magnitude)
        xy = rng.standard_normal((count, 2, k), dtype=np.float32)
        x, y = xy[:, 0, :], xy[:, 1, :]
        r = np.sqrt(x * x + y * y)
        np.maximum(r, np.float32(1e-30), out=r)
        scale = self._magnitude32 / r
        spectrum = np.empty((count, k), dtype=np.complex64)
        np.multiply(x, scale, out=spectrum.real)
        np.multiply(y, scale, out=spectrum.imag)
        return scipy.fft.irfft(spectrum, n=self.m, axis=1)

    def values_at(self, trace: np.ndarray, times_ns: np.ndarray) -> np.ndarray:
        """Trace values at arbitrary times (floor lookup on the t0 grid)."""
        idx = np.floor(times_ns / self.t0_ns).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= self.m):
            raise TraceWindowError(
                "timeline exceeds the 1/f trace window 1/f_min; generate a fresh trace per sequence"
            )
        return trace[idx]


def generate_1f_trace(params: OneOverFParams, total_duration_ns: float, rng: np.random.Generator) -> np.ndarray:
    """One 1/f trace covering ``total_duration_ns``, on the grid t0 = 1/f_max.

    Returns the needed prefix of the full M-sample series.  Durations beyond
    the 1/f_min window raise :class:`TraceWindowError`; regenerate per
    sequence instead of reusing one trace.
    """
    if total_duration_ns <= 0:
        raise ValidationError("total_duration_ns must be positive")
    synth = OneOverFSynth(params)
    if total_duration_ns > synth.m * synth.t0_ns:
        raise TraceWindowError(
            "timeline exceeds the 1/f trace window 1/f_min; generate a fresh trace per sequence"
        )
    n_needed = min(synth.m, int(math.ceil(total_duration_ns / synth.t0_ns)) + 1)
    return synth.sample(rng, 1)[0, :n_needed]


def sample_1f(
    params: OneOverFParams,
    schedules: Sequence[GateSchedule],
    rng: np.random.Generator,
    synth: OneOverFSynth | None = None,
) -> list[NoiseRealization]:
    """Draw one 1/f realization spanning a whole sequence of schedules.

    Three independent traces (channels J1, J2, J) cover the concatenated
    timeline; each step reads its channel traces at its start time, scaled
    by the channel's nominal amplitude over J_max.  Timing jitter is drawn
    per step from sigma_t as in the QSG model.  Returns one realization per
    schedule, in order.
    """
    synth = synth or OneOverFSynth(params)
    steps = [s for sched in schedules for s in sched.steps]
    if not steps:
        return [NoiseRealization.null(0) for _ in schedules]
    durations = np.array([s.duration_ns for s in steps])
    starts = np.concatenate(([0.0], np.cumsum(durations)[:-1]))
    if durations.sum() > synth.m * synth.t0_ns:
        raise TraceWindowError(
            "timeline exceeds the 1/f trace window 1/f_min; generate a fresh trace per sequence"
        )
    traces = synth.sample(rng, 3)  # channel order: j1, j2, j
    j_max_nev = params.j_max_uev * 1e3
    fractions = {
        "j1": np.array([s.j1_uev for s in steps]) * 1e3 / j_max_nev,
        "j2": np.array([s.j2_uev for s in steps]) * 1e3 / j_max_nev,
        "j": np.array([s.j_uev for s in steps]) * 1e3 / j_max_nev,
    }
    dj = {
        name: fractions[name] * synth.values_at(traces[i], starts)
        for i, name in enumerate(("j1", "j2", "j"))
    }
    dt = rng.standard_normal(len(steps)) * (params.sigma_t_ps * 1e-3)
    full = NoiseRealization(dt, dj["j1"], dj["j2"], dj["j"])
    out = []
    pos = 0
    for sched in schedules:
        n = len(sched.steps)
        out.append(
            NoiseRealization(
                full.dt_ns[pos : pos + n],
                full.dj1_nev[pos : pos + n],
                full.dj2_nev[pos : pos + n],
                full.dj_nev[pos : pos + n],
            )
        )
        pos += n
    return out

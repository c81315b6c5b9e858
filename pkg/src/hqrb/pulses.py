"""Exchange-pulse synthesis for x, z, y and general Euler-angle rotations.

Gates are realized by switching the two inter-dot exchange couplings J1, J2
one at a time while the intra-dot coupling J = J_max/2 stays on for the whole
sequence.  An x rotation takes two steps (J1 active, then J2 active); a z
rotation takes three (J1, J2, then a J-only stretch).  Step durations follow
closed-form expressions in the device energies, so synthesis is exact and
instantaneous.

Each step also records the nominal rotation it contributes under the
abstract-angle device model (see :mod:`hqrb.device`):

* x sequence: the two steps split the target angle in proportion to their
  durations, about x.
* z sequence: the two inter-dot steps carry equal and opposite z angles
  (their windings cancel pairwise), and the J-only step carries the backbone
  precession phase -2*pi*(J_max/2)*t_J/h = theta - 2*pi, so the whole
  sequence nets the target angle up to a full turn.

These shares telescope exactly, which is what guarantees the zero-noise
exactness of the abstract-angle model for every synthesized schedule.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SynthesisError, ValidationError
from .su2 import PLANCK_UEV_NS, euler_zxz, rx, ry, rz

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DeviceParams:
    """Static device parameters.

    Attributes
    ----------
    j_max_uev : float
        Maximum inter-dot exchange, max(J1) = max(J2) = 2J, in ueV.
    e_z_uev : float
        Zeeman energy in ueV.  The default 0.25*j_max is the unique value for
        which the three-step z sequence is continuous at theta = 2*pi/3 and
        non-negative on all of (0, 2*pi).
    t_min_ps : float
        Minimum realizable pulse duration in ps; shorter synthesized steps
        trigger a warning, not an error.
    """

    j_max_uev: float = 1.0
    e_z_uev: float = 0.25
    t_min_ps: float = 100.0

    def __post_init__(self):
        if not (self.j_max_uev > 0 and math.isfinite(self.j_max_uev)):
            raise ValidationError(f"j_max_uev must be positive, got {self.j_max_uev!r}")
        if not (self.e_z_uev >= 0 and math.isfinite(self.e_z_uev)):
            raise ValidationError(f"e_z_uev must be non-negative, got {self.e_z_uev!r}")
        if not (self.t_min_ps >= 0 and math.isfinite(self.t_min_ps)):
            raise ValidationError(f"t_min_ps must be non-negative, got {self.t_min_ps!r}")

    @property
    def j_uev(self) -> float:
        """Intra-dot exchange J = j_max/2, fixed by the device geometry."""
        return 0.5 * self.j_max_uev


def sequence_constants(dp: DeviceParams) -> tuple[float, float, float]:
    """Energy combinations (a, b, c) entering the analytic step times.

    a = E_z/2 + J_max/8 and b = -E_z + J_max/4 set the inter-dot step times
    of the z sequence; c = E_z + (3/4) J_max sets the x-sequence period h/c.
    """
    a = 0.5 * dp.e_z_uev + dp.j_max_uev / 8.0
    b = -dp.e_z_uev + dp.j_max_uev / 4.0
    c = dp.e_z_uev + 0.75 * dp.j_max_uev
    return a, b, c


def rz_discontinuity_ns(dp: DeviceParams) -> float:
    """Jump of the z-sequence inter-dot step time across theta = 2*pi/3.

    The sign convention (sign(0) = +1) makes the branch deterministic; this
    diagnostic surfaces the size |2b/c| * h / j_max of the discontinuity.
    """
    _, b, c = sequence_constants(dp)
    return abs(2.0 * b / c) * PLANCK_UEV_NS / dp.j_max_uev


@dataclass(frozen=True)
class PulseStep:
    """One timed segment of exchange controls.

    ``axis`` and ``angle_rad`` record the nominal rotation share consumed by
    the abstract-angle device model; ``channel`` names the driven exchange
    ('j1', 'j2' or 'j') whose amplitude noise scales that share.
    """

    j1_uev: float
    j2_uev: float
    j_uev: float
    duration_ns: float
    axis: str
    angle_rad: float
    channel: str

    def __post_init__(self):
        if self.duration_ns < 0:
            raise ValidationError(f"step duration must be non-negative, got {self.duration_ns!r}")
        if self.j1_uev != 0.0 and self.j2_uev != 0.0:
            raise ValidationError("at most one inter-dot coupling may be active per step")
        if self.axis not in ("x", "z"):
            raise ValidationError(f"axis must be 'x' or 'z', got {self.axis!r}")
        if self.channel not in ("j1", "j2", "j"):
            raise ValidationError(f"channel must be 'j1', 'j2' or 'j', got {self.channel!r}")

    @property
    def active_uev(self) -> float:
        """Amplitude of the driven exchange for this step."""
        return {"j1": self.j1_uev, "j2": self.j2_uev, "j": self.j_uev}[self.channel]


@dataclass(frozen=True)
class GateSchedule:
    """An ordered pulse sequence realizing one logical gate."""

    label: str
    steps: tuple[PulseStep, ...]
    target: np.ndarray = field(repr=False)

    @property
    def duration_ns(self) -> float:
        return float(sum(s.duration_ns for s in self.steps))

    def short_steps(self, dp: DeviceParams) -> list[int]:
        """Indices of nonzero steps shorter than the device minimum."""
        t_min_ns = dp.t_min_ps * 1e-3
        return [i for i, s in enumerate(self.steps) if 0.0 < s.duration_ns < t_min_ns]


def schedule_duration(schedule: GateSchedule) -> float:
    """Total duration of a schedule in ns (sum of step durations)."""
    return schedule.duration_ns


def wrap_angle(theta: float) -> float:
    """Canonicalize an angle from (-2*pi, 2*pi] to [0, 2*pi)."""
    if not math.isfinite(theta):
        raise ValidationError(f"angle must be finite, got {theta!r}")
    if abs(theta) > TWO_PI + 1e-9:
        raise ValidationError(f"angle must lie in (-2*pi, 2*pi], got {theta!r}")
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    if TWO_PI - wrapped < 1e-12:
        wrapped = 0.0
    return wrapped


def _warn_short_steps(schedule: GateSchedule, dp: DeviceParams) -> None:
    short = schedule.short_steps(dp)
    if short:
        warnings.warn(
            f"{schedule.label}: steps {short} are shorter than t_min = {dp.t_min_ps} ps",
            stacklevel=3,
        )


def synth_rx(theta: float, dp: DeviceParams | None = None) -> GateSchedule:
    """Two-step x-rotation schedule.

    With c = E_z + (3/4) J_max and n = ceil((c/J_max) (1/sqrt(3)) theta/(2*pi)),
    the step times are t_{1,2} = (n/c -+ (1/sqrt(3)) (theta/2pi) / J_max) h;
    step 1 drives J1, step 2 drives J2, and the total is 2n h/c independent
    of theta.
    """
    dp = dp or DeviceParams()
    theta = wrap_angle(theta)
    _, _, c = sequence_constants(dp)
    imbalance = (theta / TWO_PI) / (math.sqrt(3.0) * dp.j_max_uev)
    n = math.ceil(c * imbalance)
    t1 = (n / c - imbalance) * PLANCK_UEV_NS
    t2 = (n / c + imbalance) * PLANCK_UEV_NS
    for name, t in (("t_J1", t1), ("t_J2", t2)):
        if t < 0:
            raise SynthesisError(f"synth_rx({theta:.6g}): negative duration for step {name}: {t!r} ns")
    total = t1 + t2
    share1 = theta * t1 / total if total > 0 else 0.0
    steps = (
        PulseStep(dp.j_max_uev, 0.0, dp.j_uev, t1, "x", share1, "j1"),
        PulseStep(0.0, dp.j_max_uev, dp.j_uev, t2, "x", theta - share1, "j2"),
    )
    schedule = GateSchedule(f"X({theta:.6g})", steps, rx(theta))
    _warn_short_steps(schedule, dp)
    return schedule


def synth_rz(theta: float, dp: DeviceParams | None = None) -> GateSchedule:
    """Three-step z-rotation schedule.

    The two inter-dot steps share the time
    t_{J1} = t_{J2} = (1/c) [ (theta/pi) a + sign(2*pi/3 - theta) b ] h / J_max
    (sign(0) = +1), and a third J-only step of t_J = (2 - theta/pi) h / J_max
    completes the sequence.  If the configured E_z makes t_{J1} negative, whole
    precession periods h/c are added until it is not; any remaining negative
    time is a synthesis error.
    """
    dp = dp or DeviceParams()
    theta = wrap_angle(theta)
    a, b, c = sequence_constants(dp)
    sign = 1.0 if (TWO_PI / 3.0 - theta) >= 0.0 else -1.0
    t12 = ((theta / math.pi) * a + sign * b) / c * PLANCK_UEV_NS / dp.j_max_uev
    if t12 < 0:
        period = PLANCK_UEV_NS / c
        t12 += math.ceil(-t12 / period) * period
    if t12 < 0:
        raise SynthesisError(f"synth_rz({theta:.6g}): negative duration for steps t_J1 = t_J2: {t12!r} ns")
    t_j = (2.0 - theta / math.pi) * PLANCK_UEV_NS / dp.j_max_uev
    if t_j < 0:
        raise SynthesisError(f"synth_rz({theta:.6g}): negative duration for step t_J: {t_j!r} ns")
    total = 2.0 * t12 + t_j
    share12 = theta * t12 / total if total > 0 else 0.0
    # Backbone phase of the J-only stretch: -2*pi*(J_max/2)*t_J/h = theta - 2*pi.
    backbone = theta - TWO_PI
    steps = (
        PulseStep(dp.j_max_uev, 0.0, dp.j_uev, t12, "z", share12, "j1"),
        PulseStep(0.0, dp.j_max_uev, dp.j_uev, t12, "z", -share12, "j2"),
        PulseStep(0.0, 0.0, dp.j_uev, t_j, "z", backbone, "j"),
    )
    schedule = GateSchedule(f"Z({theta:.6g})", steps, rz(theta))
    _warn_short_steps(schedule, dp)
    return schedule


def synth_u(phi: float, theta: float, lam: float, dp: DeviceParams | None = None) -> GateSchedule:
    """Euler z-x-z schedule applied in time order phi, theta, lam.

    The target is rz(lam) @ rx(theta) @ rz(phi); the Hadamard is
    synth_u(pi/2, pi/2, pi/2) up to a global phase.
    """
    dp = dp or DeviceParams()
    parts = (synth_rz(phi, dp), synth_rx(theta, dp), synth_rz(lam, dp))
    steps = tuple(s for part in parts for s in part.steps)
    label = f"U({phi:.6g}, {theta:.6g}, {lam:.6g})"
    return GateSchedule(label, steps, euler_zxz(phi, theta, lam))


def synth_y(theta: float, dp: DeviceParams | None = None) -> GateSchedule:
    """Y rotation composed as Z(-pi/2), X(theta), Z(pi/2) in time order."""
    dp = dp or DeviceParams()
    base = synth_u(-math.pi / 2.0, wrap_angle(theta), math.pi / 2.0, dp)
    return GateSchedule(f"Y({wrap_angle(theta):.6g})", base.steps, ry(wrap_angle(theta)))


def synth_hadamard(dp: DeviceParams | None = None) -> GateSchedule:
    """Hadamard gate as the symmetric Euler sequence (pi/2, pi/2, pi/2)."""
    base = synth_u(math.pi / 2.0, math.pi / 2.0, math.pi / 2.0, dp)
    return GateSchedule("H", base.steps, base.target)

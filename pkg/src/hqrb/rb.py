"""RB/IRB sequence construction, noisy simulation, and campaign statistics.

A sequence is N Clifford elements drawn uniformly (optionally with a fixed
gate interleaved after each) closed by the exact group inverse of the whole
ordered product.  Each sequence is simulated from the six cardinal initial
states; a campaign averages n_seq sequence draws times n_rep noise
repetitions per sequence length and reports the decay curve.

Reproducibility contract: the sequence for (seed, N, seq_index) comes from
the stream [seed, 11, N, seq_index]; all noise repetitions of that sequence
come, in repetition order, from the stream [seed, 13, N, seq_index].
Results are therefore bit-identical across runs and across worker counts,
and aggregation always happens in index order.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO, Iterable

import numpy as np

from .cliffords import INTERLEAVE_QUATS, CliffordGroup, interleave_schedule
from .device import HamiltonianCoefficients, ModelKind, realize
from .errors import TraceWindowError, ValidationError
from .noise import (
    NoiseRealization,
    OneOverFParams,
    OneOverFSynth,
    QsgParams,
    qsg_from_draws,
    sample_1f,
    sample_qsg,
)
from .pulses import DeviceParams, GateSchedule

DEFAULT_N_GRID = (1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)

_SEQ_TAG = 11
_NOISE_TAG = 13


@dataclass(frozen=True)
class RbConfig:
    """Everything one campaign needs; hashable and JSON-serializable."""

    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    n_seq: int = 800
    n_rep: int = 10
    interleave: str | None = None
    seed: int = 2024
    model: ModelKind = ModelKind.ABSTRACT
    noise: QsgParams | OneOverFParams = field(default_factory=QsgParams)
    device: DeviceParams = field(default_factory=DeviceParams)
    coeffs: HamiltonianCoefficients = field(default_factory=HamiltonianCoefficients)

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 0:
            raise ValidationError("n_grid must be non-empty and strictly increasing")
        object.__setattr__(self, "n_grid", grid)
        if self.n_seq < 1 or self.n_rep < 1:
            raise ValidationError("n_seq and n_rep must be at least 1")
        if self.interleave not in (None, "x", "z", "h"):
            raise ValidationError(f"interleave must be one of None, 'x', 'z', 'h', got {self.interleave!r}")
        object.__setattr__(self, "model", ModelKind(self.model))

    @property
    def noise_kind(self) -> str:
        return "one_over_f" if isinstance(self.noise, OneOverFParams) else "qsg"

    @property
    def sigma_t_ps(self) -> float:
        return self.noise.sigma_t_ps

    @property
    def sigma_j_nev(self) -> float:
        """QSG sigma, or the power-matched equivalent for 1/f noise."""
        if isinstance(self.noise, OneOverFParams):
            return self.noise.sigma_eq_nev
        return self.noise.sigma_j_nev

    def canonical_dict(self) -> dict:
        noise: dict[str, object] = {"kind": self.noise_kind, "sigma_t_ps": self.noise.sigma_t_ps}
        if isinstance(self.noise, OneOverFParams):
            noise.update(
                a_j_nev=self.noise.a_j_nev,
                f_min_hz=self.noise.f_min_hz,
                f_max_hz=self.noise.f_max_hz,
                j_max_uev=self.noise.j_max_uev,
            )
        else:
            noise.update(sigma_j_nev=self.noise.sigma_j_nev, resample=self.noise.resample)
        return {
            "n_grid": list(self.n_grid),
            "n_seq": self.n_seq,
            "n_rep": self.n_rep,
            "interleave": self.interleave,
            "seed": self.seed,
            "model": self.model.value,
            "noise": noise,
            "device": {
                "j_max_uev": self.device.j_max_uev,
                "e_z_uev": self.device.e_z_uev,
                "t_min_ps": self.device.t_min_ps,
            },
            "coeffs": {
                "c_x": self.coeffs.c_x,
                "c_e": self.coeffs.c_e,
                "c_j": self.coeffs.c_j,
                "c_12": self.coeffs.c_12,
            },
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class DecayCurve:
    """Mean sequence fidelity vs length, with dispersion and provenance."""

    n_values: np.ndarray
    mean_fidelity: np.ndarray
    std_error: np.ndarray
    sample_count: np.ndarray
    noise_kind: str
    interleave: str | None
    sigma_t_ps: float
    sigma_j_nev: float
    seed: int
    config_digest: str
    clamped_steps: int = 0

    def __len__(self) -> int:
        return len(self.n_values)


# ---------------------------------------------------------------------------
# Compiled gate tables


@dataclass(frozen=True)
class FlatGate:
    """A schedule flattened to arrays for the abstract-angle fast path."""

    phi: np.ndarray       # nominal step angles (rad)
    dur: np.ndarray       # nominal step durations (ns)
    axis: np.ndarray      # 0 = x, 1 = z, per step
    chan: np.ndarray      # 0 = j1, 1 = j2, 2 = j, per step
    n_steps: int


def _flatten(schedule: GateSchedule) -> FlatGate:
    phi = np.array([s.angle_rad for s in schedule.steps])
    dur = np.array([s.duration_ns for s in schedule.steps])
    axis = np.array([0 if s.axis == "x" else 1 for s in schedule.steps], dtype=np.int8)
    chan = np.array([("j1", "j2", "j").index(s.channel) for s in schedule.steps], dtype=np.int8)
    return FlatGate(phi, dur, axis, chan, len(schedule.steps))


class CompiledGates:
    """Per-device compiled schedules: 24 Cliffords plus an interleaved gate."""

    def __init__(self, dp: DeviceParams, interleave: str | None):
        self.device = dp
        self.interleave = interleave
        self.group = CliffordGroup.build()
        self.schedules = self.group.compile_schedules(dp)
        self.flats = [_flatten(s) for s in self.schedules]
        self.interleave_gate_id: int | None = None
        self.interleave_group_index: int | None = None
        if interleave is not None:
            sched = interleave_schedule(interleave, dp)
            self.schedules.append(sched)
            self.flats.append(_flatten(sched))
            self.interleave_gate_id = len(self.flats) - 1
            self.interleave_group_index = self.group.index_of(INTERLEAVE_QUATS[interleave])


_COMPILED_CACHE: dict[tuple[DeviceParams, str | None], CompiledGates] = {}


def compiled_gates(dp: DeviceParams, interleave: str | None) -> CompiledGates:
    key = (dp, interleave)
    if key not in _COMPILED_CACHE:
        _COMPILED_CACHE[key] = CompiledGates(dp, interleave)
    return _COMPILED_CACHE[key]


# ---------------------------------------------------------------------------
# Sequence construction


@dataclass(frozen=True)
class SequenceSpec:
    """A drawn sequence: gate ids in time order, ending with the recovery."""

    gate_ids: np.ndarray
    clifford_indices: np.ndarray
    recovery_index: int


def build_sequence(
    n: int,
    interleave: str | None,
    rng: np.random.Generator,
    compiled: CompiledGates,
) -> SequenceSpec:
    """Draw N uniform Cliffords (plus interleaved copies) and the recovery.

    The recovery is the exact group inverse of the ordered product of
    everything before it, computed algebraically.
    """
    if interleave is not None and interleave != compiled.interleave:
        raise ValidationError(f"compiled table was built for interleave={compiled.interleave!r}")
    group = compiled.group
    draws = rng.integers(0, len(group), size=n).astype(np.int64)
    order: list[int] = []
    group_order: list[int] = []
    for idx in draws:
        order.append(int(idx))
        group_order.append(int(idx))
        if interleave is not None:
            assert compiled.interleave_gate_id is not None
            order.append(compiled.interleave_gate_id)
            group_order.append(int(compiled.interleave_group_index))
    recovery = group.inverse(group.product_index(group_order))
    order.append(recovery)
    return SequenceSpec(np.array(order, dtype=np.int64), draws, recovery)


# ---------------------------------------------------------------------------
# Fast abstract-angle simulation


@dataclass(frozen=True)
class FlatSequence:
    phi: np.ndarray
    dur: np.ndarray
    chan: np.ndarray
    start_ns: np.ndarray       # nominal step start times
    seg_starts: np.ndarray     # indices where a new same-axis run begins
    seg_axes: np.ndarray
    gate_lengths: np.ndarray   # steps per gate, for per-gate noise policies
    n_steps: int


def _flatten_sequence(spec: SequenceSpec, compiled: CompiledGates) -> FlatSequence:
    flats = [compiled.flats[g] for g in spec.gate_ids]
    phi = np.concatenate([f.phi for f in flats])
    dur = np.concatenate([f.dur for f in flats])
    axis = np.concatenate([f.axis for f in flats])
    chan = np.concatenate([f.chan for f in flats])
    start = np.concatenate(([0.0], np.cumsum(dur)[:-1]))
    seg_starts = np.concatenate(([0], np.flatnonzero(axis[1:] != axis[:-1]) + 1))
    seg_axes = axis[seg_starts]
    lengths = np.array([f.n_steps for f in flats], dtype=np.int64)
    return FlatSequence(phi, dur, chan, start, seg_starts, seg_axes, lengths, len(phi))


def _compose_fidelities(seg_angles: np.ndarray, seg_axes: np.ndarray) -> np.ndarray:
    """Six-state survival probabilities of an x/z rotation chain.

    Tracks the product as a unit quaternion (w, x, y, z); the six cardinal
    survival probabilities are w^2 plus the squared component matching each
    state's axis.
    """
    cs = np.cos(0.5 * seg_angles).tolist()
    ss = np.sin(0.5 * seg_angles).tolist()
    axes = seg_axes.tolist()
    w, x, y, z = 1.0, 0.0, 0.0, 0.0
    for c, s, a in zip(cs, ss, axes):
        if a == 0:  # x rotation
            w, x, y, z = c * w - s * x, c * x + s * w, c * y - s * z, c * z + s * y
        else:  # z rotation
            w, x, y, z = c * w - s * z, c * x - s * y, c * y + s * x, c * z + s * w
    w2 = w * w
    fx, fy, fz = w2 + x * x, w2 + y * y, w2 + z * z
    return np.array([fz, fx, fx, fy, fy, fz])


def _qsg_rep(flat: FlatSequence, params: QsgParams, j_max_uev: float, rng) -> tuple[np.ndarray, int]:
    n = flat.n_steps
    if params.resample == "per-step":
        g = rng.standard_normal((n, 4))
    elif params.resample == "per-gate":
        g = np.repeat(rng.standard_normal((len(flat.gate_lengths), 4)), flat.gate_lengths, axis=0)
    else:  # per-sequence
        g = np.broadcast_to(rng.standard_normal((1, 4)), (n, 4))
    sigma_rel = params.sigma_j_nev / (j_max_uev * 1e3)
    rel = sigma_rel * g[np.arange(n), 1 + flat.chan]
    dt = params.sigma_t_ps * 1e-3 * g[:, 0]
    return _finish_rep(flat, rel, dt)


def _one_over_f_rep(
    flat: FlatSequence, params: OneOverFParams, synth: OneOverFSynth, rng
) -> tuple[np.ndarray, int]:
    if flat.n_steps and (flat.start_ns[-1] + flat.dur[-1]) > synth.m * synth.t0_ns:
        raise TraceWindowError(
            "timeline exceeds the 1/f trace window 1/f_min; generate a fresh trace per sequence"
        )
    traces = synth.sample(rng, 3)  # channel order j1, j2, j
    idx = np.floor(flat.start_ns / synth.t0_ns).astype(np.int64)
    values = traces[flat.chan, idx]  # neV, already at full drive scale
    rel = values / (params.j_max_uev * 1e3)
    dt = params.sigma_t_ps * 1e-3 * rng.standard_normal(flat.n_steps)
    return _finish_rep(flat, rel, dt)


def _finish_rep(flat: FlatSequence, rel: np.ndarray, dt: np.ndarray) -> tuple[np.ndarray, int]:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(flat.dur > 0, dt / np.where(flat.dur > 0, flat.dur, 1.0), 0.0)
    clamped = int(np.count_nonzero((flat.dur > 0) & (ratio < -1.0)))
    time_factor = np.maximum(0.0, 1.0 + ratio)
    alpha = np.where(flat.dur > 0, flat.phi * (1.0 + rel) * time_factor, 0.0)
    seg_angles = np.add.reduceat(alpha, flat.seg_starts)
    return _compose_fidelities(seg_angles, flat.seg_axes), clamped


# ---------------------------------------------------------------------------
# Reference (slow) simulation shared by the two-level model and tests


def _reference_rep(
    spec: SequenceSpec,
    compiled: CompiledGates,
    config: RbConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    from .su2 import SIX_STATES

    schedules = [compiled.schedules[g] for g in spec.gate_ids]
    realizations: list[NoiseRealization]
    if isinstance(config.noise, OneOverFParams):
        realizations = sample_1f(config.noise, schedules, rng)
    elif config.noise.resample == "per-sequence":
        g = rng.standard_normal((1, 4))
        realizations = [
            qsg_from_draws(config.noise, s, np.broadcast_to(g, (len(s.steps), 4)))
            for s in schedules
        ]
    else:
        realizations = [sample_qsg(config.noise, sched, rng) for sched in schedules]
    u = np.eye(2, dtype=complex)
    for sched, noise in zip(schedules, realizations):
        u = realize(sched, noise, config.model, config.device, config.coeffs) @ u
    amp = SIX_STATES @ u.T  # row s: U @ psi_s
    overlaps = np.einsum("si,si->s", SIX_STATES.conj(), amp)
    return np.abs(overlaps) ** 2


def simulate_sequence(
    spec: SequenceSpec,
    config: RbConfig,
    rng: np.random.Generator,
    compiled: CompiledGates | None = None,
    synth: OneOverFSynth | None = None,
) -> np.ndarray:
    """Six-state fidelities of one noisy execution of a sequence."""
    compiled = compiled or compiled_gates(config.device, config.interleave)
    if config.model is not ModelKind.ABSTRACT:
        return _reference_rep(spec, compiled, config, rng)
    flat = _flatten_sequence(spec, compiled)
    if isinstance(config.noise, OneOverFParams):
        synth = synth or OneOverFSynth(config.noise)
        fid, _ = _one_over_f_rep(flat, config.noise, synth, rng)
    else:
        fid, _ = _qsg_rep(flat, config.noise, config.device.j_max_uev, rng)
    return fid


# ---------------------------------------------------------------------------
# Campaigns

_WORKER_STATE: dict = {}


def _simulate_point(config: RbConfig, n: int, seq_idx: int, compiled, synth) -> tuple[np.ndarray, int]:
    """All repetitions of one (N, sequence) cell: returns (n_rep, 6) + clamps."""
    seq_rng = np.random.default_rng([config.seed, _SEQ_TAG, n, seq_idx])
    spec = build_sequence(n, config.interleave, seq_rng, compiled)
    noise_rng = np.random.default_rng([config.seed, _NOISE_TAG, n, seq_idx])
    out = np.empty((config.n_rep, 6))
    clamped = 0
    if config.model is not ModelKind.ABSTRACT:
        for rep in range(config.n_rep):
            out[rep] = _reference_rep(spec, compiled, config, noise_rng)
        return out, clamped
    flat = _flatten_sequence(spec, compiled)
    if isinstance(config.noise, OneOverFParams):
        # One batched synthesis covers every repetition: 3 channels each.
        if flat.n_steps and (flat.start_ns[-1] + flat.dur[-1]) > synth.m * synth.t0_ns:
            raise TraceWindowError(
                "timeline exceeds the 1/f trace window 1/f_min; generate a fresh trace per sequence"
            )
        traces = synth.sample(noise_rng, 3 * config.n_rep).reshape(config.n_rep, 3, synth.m)
        idx = np.floor(flat.start_ns / synth.t0_ns).astype(np.int64)
        for rep in range(config.n_rep):
            rel = traces[rep, flat.chan, idx] / (config.noise.j_max_uev * 1e3)
            dt = config.noise.sigma_t_ps * 1e-3 * noise_rng.standard_normal(flat.n_steps)
            out[rep], nc = _finish_rep(flat, rel, dt)
            clamped += nc
    else:
        for rep in range(config.n_rep):
            fid, nc = _qsg_rep(flat, config.noise, config.device.j_max_uev, noise_rng)
            out[rep] = fid
            clamped += nc
    return out, clamped


def _worker_init(config: RbConfig) -> None:
    _WORKER_STATE["config"] = config
    _WORKER_STATE["compiled"] = compiled_gates(config.device, config.interleave)
    _WORKER_STATE["synth"] = (
        OneOverFSynth(config.noise) if isinstance(config.noise, OneOverFParams) else None
    )


def _worker_task(args: tuple[int, int, int]) -> tuple[int, int, bytes, int]:
    n_idx, n, seq_idx = args
    fid, clamped = _simulate_point(
        _WORKER_STATE["config"], n, seq_idx, _WORKER_STATE["compiled"], _WORKER_STATE["synth"]
    )
    return n_idx, seq_idx, fid.tobytes(), clamped


def run_campaign(config: RbConfig, threads: int = 1, progress: bool = False) -> DecayCurve:
    """Run the full campaign and aggregate the decay curve.

    Deterministic for a fixed seed regardless of ``threads``; never emits
    partial results (any task failure aborts the whole run).
    """
    fid = np.empty((len(config.n_grid), config.n_seq, config.n_rep, 6))
    clamped = 0
    tasks = [
        (n_idx, n, seq_idx)
        for n_idx, n in enumerate(config.n_grid)
        for seq_idx in range(config.n_seq)
    ]
    if threads <= 1:
        _worker_init(config)
        compiled, synth = _WORKER_STATE["compiled"], _WORKER_STATE["synth"]
        for n_idx, n, seq_idx in tasks:
            out, nc = _simulate_point(config, n, seq_idx, compiled, synth)
            fid[n_idx, seq_idx] = out
            clamped += nc
            if progress and seq_idx == config.n_seq - 1:
                print(f"  N = {n}: done")
    else:
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_worker_init, initargs=(config,)
        ) as pool:
            for n_idx, seq_idx, blob, nc in pool.map(_worker_task, tasks, chunksize=32):
                fid[n_idx, seq_idx] = np.frombuffer(blob).reshape(config.n_rep, 6)
                clamped += nc
    samples = config.n_seq * config.n_rep * 6
    flat = fid.reshape(len(config.n_grid), samples)
    mean = flat.mean(axis=1)
    stderr = flat.std(axis=1, ddof=1) / math.sqrt(samples)
    return DecayCurve(
        n_values=np.array(config.n_grid, dtype=np.int64),
        mean_fidelity=mean,
        std_error=stderr,
        sample_count=np.full(len(config.n_grid), samples, dtype=np.int64),
        noise_kind=config.noise_kind,
        interleave=config.interleave,
        sigma_t_ps=config.sigma_t_ps,
        sigma_j_nev=config.sigma_j_nev,
        seed=config.seed,
        config_digest=config.digest(),
        clamped_steps=clamped,
    )


# ---------------------------------------------------------------------------
# Decay CSV I/O

DECAY_HEADER = "model,interleave,sigma_t_ps,sigma_j_neV,N,mean_fidelity,std_error,samples"


def write_decay_csv(curve: DecayCurve, fh: IO[str]) -> None:
    """Write a decay curve with a provenance comment, 9 significant digits."""
    fh.write(f"# config={curve.config_digest} seed={curve.seed} clamped_steps={curve.clamped_steps}\n")
    fh.write(DECAY_HEADER + "\n")
    for i in range(len(curve)):
        fh.write(
            f"{curve.noise_kind},{curve.interleave or ''},"
            f"{curve.sigma_t_ps:.9g},{curve.sigma_j_nev:.9g},"
            f"{int(curve.n_values[i])},{curve.mean_fidelity[i]:.9g},"
            f"{curve.std_error[i]:.9g},{int(curve.sample_count[i])}\n"
        )


def read_decay_csv(lines: Iterable[str]) -> DecayCurve:
    """Parse a decay CSV written by :func:`write_decay_csv`."""
    digest, seed, clamped = "", 0, 0
    rows = []
    meta = {"model": "qsg", "interleave": None, "sigma_t": 0.0, "sigma_j": 0.0}
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                if key == "config":
                    digest = value
                elif key == "seed":
                    seed = int(value)
                elif key == "clamped_steps":
                    clamped = int(value)
            continue
        if line.startswith("model,"):
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ValidationError(f"malformed decay row: {line!r}")
        meta = {
            "model": parts[0],
            "interleave": parts[1] or None,
            "sigma_t": float(parts[2]),
            "sigma_j": float(parts[3]),
        }
        rows.append((int(parts[4]), float(parts[5]), float(parts[6]), int(parts[7])))
    if not rows:
        raise ValidationError("decay CSV contains no data rows")
    n, mean, err, cnt = (np.array(col) for col in zip(*rows))
    return DecayCurve(
        n_values=n.astype(np.int64),
        mean_fidelity=mean,
        std_error=err,
        sample_count=cnt.astype(np.int64),
        noise_kind=str(meta["model"]),
        interleave=meta["interleave"],  # type: ignore[arg-type]
        sigma_t_ps=float(meta["sigma_t"]),
        sigma_j_nev=float(meta["sigma_j"]),
        seed=seed,
        config_digest=digest,
        clamped_steps=clamped,
    )


def with_noise(config: RbConfig, sigma_t_ps: float, sigma_j_nev: float) -> RbConfig:
    """Copy a config with new noise levels, preserving the noise kind."""
    if isinstance(config.noise, OneOverFParams):
        noise: QsgParams | OneOverFParams = OneOverFParams.from_matched_power(
            sigma_j_nev,
            config.noise.j_max_uev,
            config.noise.f_min_hz,
            config.noise.f_max_hz,
            sigma_t_ps,
        )
    else:
        noise = QsgParams(sigma_t_ps, sigma_j_nev, config.noise.resample)
    return replace(config, noise=noise)

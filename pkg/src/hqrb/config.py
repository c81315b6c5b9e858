"""Run-configuration schema: one JSON file reproduces one campaign.

The schema is strict: unknown keys are rejected and every error names the
full path of the offending key.  All sections are optional and fall back to
the documented defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .device import HamiltonianCoefficients, ModelKind
from .errors import ValidationError
from .noise import OneOverFParams, QsgParams
from .pulses import DeviceParams
from .rb import DEFAULT_N_GRID, RbConfig

_DEFAULTS: dict[str, dict] = {
    "device": {"j_max_ueV": 1.0, "e_z_ueV": 0.25, "t_min_ps": 100.0},
    "noise": {
        "model": "qsg",
        "sigma_t_ps": 0.0,
        "sigma_j_neV": 0.0,
        "f_min_hz": 50e3,
        "f_max_hz": 10e9,
        "resample": "per-step",
    },
    "rb": {
        "n_grid": list(DEFAULT_N_GRID),
        "n_seq": 800,
        "n_rep": 10,
        "interleave": None,
        "seed": 2024,
    },
    "model": {
        "kind": "abstract-angle",
        "coefficients": {"c_x": None, "c_e": 1.0, "c_j": 1.0, "c_12": -0.5},
    },
    "sweep": {"sigma_t_ps": [10.0], "sigma_j_neV": [10.0]},
}

_POSITIVE = {
    "device.j_max_ueV",
    "noise.f_min_hz",
    "noise.f_max_hz",
    "rb.n_seq",
    "rb.n_rep",
}
_NON_NEGATIVE = {"device.e_z_ueV", "device.t_min_ps", "noise.sigma_t_ps", "noise.sigma_j_neV"}


def _require_number(path: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"config: {path} must be a number, got {value!r}")
    if path in _POSITIVE and value <= 0:
        raise ValidationError(f"config: {path} must be positive, got {value!r}")
    if path in _NON_NEGATIVE and value < 0:
        raise ValidationError(f"config: {path} must be non-negative, got {value!r}")
    return float(value)


def _merge_section(name: str, given: dict) -> dict:
    defaults = _DEFAULTS[name]
    if not isinstance(given, dict):
        raise ValidationError(f"config: {name} must be an object, got {type(given).__name__}")
    for key in given:
        if key not in defaults:
            raise ValidationError(f"config: unknown key {name}.{key}")
    merged = dict(defaults)
    merged.update(given)
    return merged


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration: the campaign plus sweep grids."""

    rb: RbConfig
    sweep_sigma_t_ps: tuple[float, ...]
    sweep_sigma_j_nev: tuple[float, ...]

    def digest(self) -> str:
        return self.rb.digest()


def validate_config(raw: dict) -> RunConfig:
    """Validate a parsed config dict against the schema."""
    if not isinstance(raw, dict):
        raise ValidationError("config: top level must be an object")
    for key in raw:
        if key not in _DEFAULTS:
            raise ValidationError(f"config: unknown key {key}")
    device_d = _merge_section("device", raw.get("device", {}))
    noise_d = _merge_section("noise", raw.get("noise", {}))
    rb_d = _merge_section("rb", raw.get("rb", {}))
    model_d = _merge_section("model", raw.get("model", {}))
    sweep_d = _merge_section("sweep", raw.get("sweep", {}))

    device = DeviceParams(
        j_max_uev=_require_number("device.j_max_ueV", device_d["j_max_ueV"]),
        e_z_uev=_require_number("device.e_z_ueV", device_d["e_z_ueV"]),
        t_min_ps=_require_number("device.t_min_ps", device_d["t_min_ps"]),
    )

    kind = noise_d["model"]
    if kind not in ("qsg", "one_over_f"):
        raise ValidationError(f"config: noise.model must be 'qsg' or 'one_over_f', got {kind!r}")
    sigma_t = _require_number("noise.sigma_t_ps", noise_d["sigma_t_ps"])
    sigma_j = _require_number("noise.sigma_j_neV", noise_d["sigma_j_neV"])
    if noise_d["resample"] not in ("per-step", "per-gate", "per-sequence"):
        raise ValidationError(
            f"config: noise.resample must be per-step, per-gate or per-sequence, got {noise_d['resample']!r}"
        )
    if kind == "qsg":
        noise: QsgParams | OneOverFParams = QsgParams(sigma_t, sigma_j, noise_d["resample"])
    else:
        f_min = _require_number("noise.f_min_hz", noise_d["f_min_hz"])
        f_max = _require_number("noise.f_max_hz", noise_d["f_max_hz"])
        if f_min >= f_max:
            raise ValidationError("config: noise.f_min_hz must be below noise.f_max_hz")
        noise = OneOverFParams.from_matched_power(sigma_j, device.j_max_uev, f_min, f_max, sigma_t)

    n_grid = rb_d["n_grid"]
    if not isinstance(n_grid, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in n_grid
    ):
        raise ValidationError("config: rb.n_grid must be a list of integers")
    interleave = rb_d["interleave"]
    if interleave is not None and interleave not in ("x", "z", "h"):
        raise ValidationError(f"config: rb.interleave must be null, 'x', 'z' or 'h', got {interleave!r}")
    seed = rb_d["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValidationError(f"config: rb.seed must be an integer, got {seed!r}")
    n_seq = int(_require_number("rb.n_seq", rb_d["n_seq"]))
    n_rep = int(_require_number("rb.n_rep", rb_d["n_rep"]))

    model_kind = model_d["kind"]
    try:
        model = ModelKind(model_kind)
    except ValueError:
        raise ValidationError(
            f"config: model.kind must be 'abstract-angle' or 'two-level-hamiltonian', got {model_kind!r}"
        ) from None
    coeff_d = dict(_DEFAULTS["model"]["coefficients"])
    given_coeffs = model_d["coefficients"] if model_d["coefficients"] is not None else {}
    if not isinstance(given_coeffs, dict):
        raise ValidationError("config: model.coefficients must be an object")
    for key in given_coeffs:
        if key not in coeff_d:
            raise ValidationError(f"config: unknown key model.coefficients.{key}")
    coeff_d.update(given_coeffs)
    coeffs = HamiltonianCoefficients(
        c_x=_require_number("model.coefficients.c_x", coeff_d["c_x"])
        if coeff_d["c_x"] is not None
        else HamiltonianCoefficients().c_x,
        c_e=_require_number("model.coefficients.c_e", coeff_d["c_e"]),
        c_j=_require_number("model.coefficients.c_j", coeff_d["c_j"]),
        c_12=_require_number("model.coefficients.c_12", coeff_d["c_12"]),
    )

    def grid(path: str, values) -> tuple[float, ...]:
        if not isinstance(values, list) or not values:
            raise ValidationError(f"config: {path} must be a non-empty list of numbers")
        return tuple(_require_number(path, v) for v in values)

    rb = RbConfig(
        n_grid=tuple(n_grid),
        n_seq=n_seq,
        n_rep=n_rep,
        interleave=interleave,
        seed=seed,
        model=model,
        noise=noise,
        device=device,
        coeffs=coeffs,
    )
    return RunConfig(
        rb=rb,
        sweep_sigma_t_ps=grid("sweep.sigma_t_ps", sweep_d["sigma_t_ps"]),
        sweep_sigma_j_nev=grid("sweep.sigma_j_neV", sweep_d["sigma_j_neV"]),
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON config file."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: invalid JSON ({exc})") from None
    return validate_config(raw)

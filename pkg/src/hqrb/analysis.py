"""Decay-curve fitting, error-per-Clifford, and interleaved error bounds.

The decay model is f(N) = f_a + f_b * p^N.  Fitting is damped (Levenberg-
Marquardt) least squares with the analytic Jacobian; all three parameters
are kept inside [0, 1] by an internal logistic reparameterization and
reported in natural units with standard errors from the linearized
covariance at the optimum.  Bounding f_a and f_b (not just p) matches
standard RB practice and removes the flat near-linear escape direction
(f_b large, p -> 1) that shallow decays otherwise fall into.  The fit is
unweighted; per-point standard errors are carried through for reporting
only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FitError, ValidationError
from .rb import DecayCurve, RbConfig, run_campaign, with_noise

_MAX_ITER = 200
_U_CLIP = 40.0


@dataclass(frozen=True)
class FitResult:
    """Fitted decay parameters with linearized standard errors."""

    f_a: float
    f_b: float
    p: float
    se_f_a: float
    se_f_b: float
    se_p: float
    epc: float
    se_epc: float
    residual_norm: float
    converged: bool
    status: str  # 'ok', 'boundary', or 'max_iterations'
    iterations: int

    def to_dict(self) -> dict:
        return {
            "f_a": self.f_a,
            "f_b": self.f_b,
            "p": self.p,
            "se_f_a": self.se_f_a,
            "se_f_b": self.se_f_b,
            "se_p": self.se_p,
            "epc": self.epc,
            "se_epc": self.se_epc,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class IrbResult:
    """Interleaved gate error with its rigorous interval."""

    p_i: float
    se_p_i: float
    eps: float
    se_eps: float
    bound_e: float
    interval: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "p_i": self.p_i,
            "eps": self.eps,
            "bound_e": self.bound_e,
            "interval": [self.interval[0], self.interval[1]],
        }


def _expit(u: float) -> float:
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def _logit(p: float) -> float:
    p = min(max(p, 1e-12), 1.0 - 1e-12)
    return math.log(p / (1.0 - p))


def decay_model(n: np.ndarray, f_a: float, f_b: float, p: float) -> np.ndarray:
    """f_a + f_b * p^N."""
    return f_a + f_b * np.power(p, n)


def decay_jacobian(n: np.ndarray, f_a: float, f_b: float, p: float) -> np.ndarray:
    """Analytic Jacobian of the model wrt (f_a, f_b, p), one row per point."""
    pn = np.power(p, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(n > 0, f_b * n * np.power(p, np.maximum(n - 1, 0)), 0.0)
    return np.column_stack([np.ones_like(pn), pn, dp])


def fit_decay(
    curve: DecayCurve | tuple[Sequence[float], Sequence[float]],
    initial: tuple[float, float, float] = (0.5, 0.5, 0.99),
) -> FitResult:
    """Fit f_a + f_b * p^N to a decay curve, all parameters bounded to [0, 1].

    Requires at least four distinct sequence lengths.  Non-convergence
    within the iteration budget and any parameter pinned at 0 or 1 are both
    flagged in ``status``.
    """
    if isinstance(curve, DecayCurve):
        n = np.asarray(curve.n_values, dtype=float)
        y = np.asarray(curve.mean_fidelity, dtype=float)
    else:
        n = np.asarray(curve[0], dtype=float)
        y = np.asarray(curve[1], dtype=float)
    if len(np.unique(n)) < 4:
        raise FitError(f"need at least 4 distinct sequence lengths, got {len(np.unique(n))}")
    if n.shape != y.shape:
        raise FitError("length mismatch between N values and fidelities")
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(y))):
        raise FitError("fit input contains non-finite values")

    beta = np.array([float(np.clip(_logit(v), -_U_CLIP, _U_CLIP)) for v in initial])

    def unpack(b):
        return tuple(_expit(float(np.clip(u, -_U_CLIP, _U_CLIP))) for u in b)

    def ssr_of(b):
        fa, fb, p = unpack(b)
        r = y - decay_model(n, fa, fb, p)
        return float(r @ r), r

    ssr, resid = ssr_of(beta)
    lam = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        fa, fb, p = unpack(beta)
        jac = decay_jacobian(n, fa, fb, p)
        # chain rule through the logistic bounds on each parameter
        jac[:, 0] *= fa * (1.0 - fa)
        jac[:, 1] *= fb * (1.0 - fb)
        jac[:, 2] *= p * (1.0 - p)
        jtj = jac.T @ jac
        jtr = jac.T @ resid
        if float(np.max(np.abs(jtr))) < 1e-14 * (1.0 + ssr):
            converged = True
            break
        stepped = False
        while lam <= 1e12:
            damped = jtj + lam * np.diag(np.maximum(np.diag(jtj), 1e-12))
            try:
                delta = np.linalg.solve(damped, jtr)
            except np.linalg.LinAlgError:
                lam *= 3.0
                continue
            trial = beta + delta
            trial[2] = float(np.clip(trial[2], -_U_CLIP, _U_CLIP))
            ssr_trial, resid_trial = ssr_of(trial)
            if ssr_trial <= ssr:
                improvement = ssr - ssr_trial
                beta, ssr, resid = trial, ssr_trial, resid_trial
                lam = max(lam / 3.0, 1e-12)
                stepped = True
                if improvement < 1e-16 * (1.0 + ssr) or float(np.max(np.abs(delta))) < 1e-12:
                    converged = True
                break
            lam *= 3.0
        if not stepped:
            # No damping level improves the fit: numerically at the optimum.
            converged = True
        if converged:
            break

    fa, fb, p = unpack(beta)
    status = "ok" if converged else "max_iterations"
    if min(p, fa, fb) <= 1e-9 or max(p, fa, fb) >= 1.0 - 1e-9:
        status = "boundary"

    dof = len(n) - 3
    jac_nat = decay_jacobian(n, fa, fb, p)
    jtj_nat = jac_nat.T @ jac_nat
    s2 = ssr / dof if dof > 0 else float("nan")
    try:
        cov = s2 * np.linalg.pinv(jtj_nat)
        ses = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        ses = np.full(3, float("nan"))
    se_fa, se_fb, se_p = (float(v) for v in ses)
    return FitResult(
        f_a=float(fa),
        f_b=float(fb),
        p=float(p),
        se_f_a=se_fa,
        se_f_b=se_fb,
        se_p=se_p,
        epc=(1.0 - float(p)) / 2.0,
        se_epc=se_p / 2.0,
        residual_norm=math.sqrt(ssr),
        converged=converged,
        status=status,
        iterations=iterations,
    )


def epc(p: float) -> float:
    """Error per Clifford (1 - p)/2 for a single qubit."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p!r}")
    return (1.0 - p) / 2.0


def interleaved_error(p_i: float, p: float) -> float:
    """Interleaved gate error (1 - p_i/p)/2, floored at zero for reporting."""
    _check_irb_inputs(p_i, p)
    return max(0.0, 0.5 * (1.0 - p_i / p))


def error_bound(p_i: float, p: float) -> tuple[float, tuple[float, float]]:
    """Half-width E and interval [max(0, eps - E), eps + E] for the gate error.

    E = min{ (|p - p_i/p| + (1 - p))/2,
             (3/2)(1 - p)/p + 4*sqrt(3)*sqrt(1 - p)/p }.
    """
    _check_irb_inputs(p_i, p)
    eps_raw = 0.5 * (1.0 - p_i / p)
    first = 0.5 * (abs(p - p_i / p) + (1.0 - p))
    second = 1.5 * (1.0 - p) / p + 4.0 * math.sqrt(3.0) * math.sqrt(max(0.0, 1.0 - p)) / p
    e = min(first, second)
    return e, (max(0.0, eps_raw - e), eps_raw + e)


def _check_irb_inputs(p_i: float, p: float) -> None:
    if p <= 0.0 or p > 1.0:
        raise ValidationError(f"reference decay parameter must lie in (0, 1], got {p!r}")
    if not 0.0 <= p_i <= 1.0:
        raise ValidationError(f"interleaved decay parameter must lie in [0, 1], got {p_i!r}")


def irb_result(rb_fit: FitResult, irb_fit: FitResult) -> IrbResult:
    """Combine a reference RB fit and an interleaved fit into a gate error."""
    p, p_i = rb_fit.p, irb_fit.p
    eps = interleaved_error(p_i, p)
    e, interval = error_bound(p_i, p)
    se_eps = 0.5 * math.hypot(irb_fit.se_p / p, p_i * rb_fit.se_p / p**2)
    return IrbResult(p_i=p_i, se_p_i=irb_fit.se_p, eps=eps, se_eps=se_eps, bound_e=e, interval=interval)


def fit_json_dict(fit: FitResult, irb: IrbResult | None = None) -> dict:
    """The JSON payload for a fit, optionally extended with IRB fields."""
    out = fit.to_dict()
    if irb is not None:
        out.update(irb.to_dict())
    return out


# ---------------------------------------------------------------------------
# Noise-grid sweeps


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a sigma_t x sigma_j sweep."""

    noise_kind: str
    sigma_t_ps: float
    sigma_j_nev: float
    fit: FitResult | None
    status: str
    message: str = ""


SWEEP_HEADER = "model,sigma_t_ps,sigma_j_neV,p,se_p,epc,se_epc,f_a,f_b,converged,status"


def sweep(
    base: RbConfig,
    sigma_t_list: Sequence[float],
    sigma_j_list: Sequence[float],
    threads: int = 1,
) -> list[SweepPoint]:
    """Run a campaign and fit per (sigma_t, sigma_j) grid point.

    Points fail independently: a failed campaign or fit yields a point with
    status 'error' and no fit, without aborting the rest of the grid.
    """
    points = []
    for sigma_t in sigma_t_list:
        for sigma_j in sigma_j_list:
            try:
                config = with_noise(base, sigma_t, sigma_j)
                curve = run_campaign(config, threads=threads)
                fit = fit_decay(curve)
                points.append(SweepPoint(config.noise_kind, sigma_t, sigma_j, fit, fit.status))
            except Exception as exc:  # grid points fail independently
                points.append(SweepPoint(base.noise_kind, sigma_t, sigma_j, None, "error", str(exc)))
    return points


def sweep_rows(points: Sequence[SweepPoint]) -> list[str]:
    """Long-format CSV rows (one per grid point) for a sweep."""
    rows = []
    for pt in points:
        if pt.fit is None:
            rows.append(
                f"{pt.noise_kind},{pt.sigma_t_ps:.9g},{pt.sigma_j_nev:.9g},,,,,,,False,{pt.status}"
            )
        else:
            f = pt.fit
            rows.append(
                f"{pt.noise_kind},{pt.sigma_t_ps:.9g},{pt.sigma_j_nev:.9g},"
                f"{f.p:.9g},{f.se_p:.9g},{f.epc:.9g},{f.se_epc:.9g},"
                f"{f.f_a:.9g},{f.f_b:.9g},{f.converged},{f.status}"
            )
    return rows

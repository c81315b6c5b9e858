import math

import numpy as np
import pytest

from hqrb.analysis import (
    FitResult,
    decay_jacobian,
    decay_model,
    epc,
    error_bound,
    fit_decay,
    fit_json_dict,
    interleaved_error,
    irb_result,
    sweep,
    sweep_rows,
)
from hqrb.errors import FitError, ValidationError
from hqrb.noise import QsgParams
from hqrb.rb import RbConfig

GRID = np.array([1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100], dtype=float)

# Operating points from the reference IRB tables: (p_i, p).
TABLE_PAIRS = [
    (0.9976, 0.9986),
    (0.9980, 0.9986),
    (0.9940, 0.9986),
    (0.9808, 0.9867),
    (0.9821, 0.9867),
    (0.9739, 0.9867),
]


def test_exact_model_recovery():
    y = decay_model(GRID, 0.5, 0.5, 0.99)
    fit = fit_decay((GRID, y))
    assert fit.converged
    assert fit.p == pytest.approx(0.99, abs=1e-6)
    assert fit.f_a == pytest.approx(0.5, abs=1e-6)
    assert fit.f_b == pytest.approx(0.5, abs=1e-6)


def test_constant_curve_is_boundary_degenerate():
    fit = fit_decay((GRID, np.ones_like(GRID)))
    assert fit.p == pytest.approx(1.0, abs=1e-9)
    assert fit.status == "boundary"
    assert fit.f_a + fit.f_b == pytest.approx(1.0, abs=1e-6)


def test_fit_requires_four_lengths():
    with pytest.raises(FitError):
        fit_decay((np.array([1.0, 5.0, 10.0]), np.array([1.0, 0.9, 0.8])))


def test_monte_carlo_coverage():
    # Recovered p must fall within 2 standard errors in at least 90 of 100
    # noisy refits; scatter 5e-4 matches a production-scale campaign.
    rng = np.random.default_rng(314)
    grid = np.arange(1, 100, 4, dtype=float)
    hits = 0
    trials = 0
    for p_true in (0.95, 0.97, 0.99, 0.995):
        for _ in range(25):
            y = decay_model(grid, 0.5, 0.5, p_true) + rng.normal(0.0, 5e-4, len(grid))
            fit = fit_decay((grid, y))
            trials += 1
            if abs(fit.p - p_true) <= 2.0 * fit.se_p:
                hits += 1
    assert trials == 100
    assert hits >= 90


def test_jacobian_matches_finite_differences():
    # Central differences with per-column steps: the model is linear in f_a
    # and f_b (large step, zero truncation error) and smooth in p.
    rng = np.random.default_rng(2718)
    steps = (1e-3, 1e-3, 1e-6)
    for _ in range(20):
        fa, fb = rng.uniform(0.2, 0.7, size=2)
        p = rng.uniform(0.9, 0.999)
        jac = decay_jacobian(GRID, fa, fb, p)
        base = np.array([fa, fb, p])
        for col, h in enumerate(steps):
            lo, hi = base.copy(), base.copy()
            lo[col] -= h
            hi[col] += h
            fd = (decay_model(GRID, *hi) - decay_model(GRID, *lo)) / (2 * h)
            scale = np.maximum(np.abs(jac[:, col]), 1e-9)
            assert np.max(np.abs(jac[:, col] - fd) / scale) < 1e-6


def test_fit_idempotence():
    rng = np.random.default_rng(11)
    y = decay_model(GRID, 0.48, 0.51, 0.97) + rng.normal(0.0, 5e-4, len(GRID))
    first = fit_decay((GRID, y))
    again = fit_decay((GRID, y), initial=(first.f_a, first.f_b, first.p))
    assert again.iterations <= 2
    assert again.p == pytest.approx(first.p, abs=1e-10)
    assert again.f_a == pytest.approx(first.f_a, abs=1e-10)


def test_epc_values():
    assert epc(1.0) == 0.0
    assert epc(0.9867) == pytest.approx(0.0066, abs=1e-4)
    assert epc(0.9996) == pytest.approx(0.0002, abs=1e-4)
    with pytest.raises(ValidationError):
        epc(1.2)


def test_interleaved_error_values():
    assert interleaved_error(0.98, 0.98) == 0.0
    assert interleaved_error(0.9808, 0.9867) == pytest.approx(0.0030, abs=1e-4)
    assert interleaved_error(0.9940, 0.9986) == pytest.approx(0.0023, abs=1e-4)
    with pytest.raises(ValidationError):
        interleaved_error(0.9, 0.0)


def test_error_bound_reference_values():
    e, interval = error_bound(0.9808, 0.9867)
    assert interval[1] == pytest.approx(0.0133, abs=1e-4)
    assert interval[0] == 0.0
    e, interval = error_bound(0.9940, 0.9986)
    assert interval[1] == pytest.approx(0.0046, abs=1e-4)
    e, interval = error_bound(0.9976, 0.9986)
    assert interval[1] == pytest.approx(0.0014, abs=1e-4)
    e, interval = error_bound(1.0, 1.0)
    assert e == 0.0
    assert interval == (0.0, 0.0)


def test_eps_always_inside_interval():
    rng = np.random.default_rng(5)
    for _ in range(300):
        p = rng.uniform(0.5, 1.0)
        p_i = rng.uniform(0.4, 1.0)
        eps = interleaved_error(p_i, p)
        e, (lo, hi) = error_bound(p_i, p)
        assert lo <= eps <= hi
        if eps <= e:
            assert lo == 0.0


def test_first_branch_dominates_at_reference_points():
    for p_i, p in TABLE_PAIRS:
        first = 0.5 * (abs(p - p_i / p) + (1.0 - p))
        second = 1.5 * (1.0 - p) / p + 4.0 * math.sqrt(3) * math.sqrt(1.0 - p) / p
        assert first < second
        e, _ = error_bound(p_i, p)
        assert e == pytest.approx(first, rel=1e-12)


def test_irb_result_combination():
    rb = _fit_like(p=0.9867, se_p=0.0003)
    ix = _fit_like(p=0.9808, se_p=0.0004)
    res = irb_result(rb, ix)
    assert res.eps == pytest.approx(0.0030, abs=1e-4)
    assert res.interval[0] == 0.0
    assert res.interval[1] == pytest.approx(0.0133, abs=1e-4)
    assert res.se_eps > 0.0


def test_fit_json_keys():
    fit = _fit_like(p=0.99, se_p=0.001)
    payload = fit_json_dict(fit)
    assert set(payload) == {
        "f_a", "f_b", "p", "se_f_a", "se_f_b", "se_p", "epc", "se_epc", "converged",
    }
    irb = irb_result(fit, _fit_like(p=0.985, se_p=0.001))
    payload = fit_json_dict(fit, irb)
    assert {"p_i", "eps", "bound_e", "interval"} <= set(payload)
    lo, hi = payload["interval"]
    assert lo <= payload["eps"] <= hi


def test_sweep_single_point_reduces_to_single_fit():
    base = RbConfig(n_grid=(1, 5, 10, 20), n_seq=8, n_rep=2, seed=3, noise=QsgParams(0.0, 0.0))
    points = sweep(base, [50.0], [20.0])
    assert len(points) == 1
    assert points[0].fit is not None
    assert points[0].sigma_t_ps == 50.0
    rows = sweep_rows(points)
    assert len(rows) == 1 and rows[0].startswith("qsg,50,20,")


def test_sweep_points_fail_independently():
    base = RbConfig(n_grid=(1, 5, 10, 20), n_seq=4, n_rep=2, seed=3, noise=QsgParams(0.0, 0.0))
    points = sweep(base, [10.0], [-5.0, 20.0])
    assert points[0].status == "error" and points[0].fit is None
    assert points[1].fit is not None
    rows = sweep_rows(points)
    assert rows[0].endswith("error")


def _fit_like(p, se_p):
    return FitResult(
        f_a=0.5, f_b=0.5, p=p, se_f_a=0.001, se_f_b=0.001, se_p=se_p,
        epc=(1 - p) / 2, se_epc=se_p / 2, residual_norm=0.0,
        converged=True, status="ok", iterations=3,
    )

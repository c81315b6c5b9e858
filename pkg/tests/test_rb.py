import io
import math

import numpy as np
import pytest
from scipy import stats

from hqrb.cliffords import IDENTITY_QUAT
from hqrb.errors import TraceWindowError, ValidationError
from hqrb.noise import NoiseRealization, OneOverFParams, QsgParams
from hqrb.pulses import DeviceParams
from hqrb.rb import (
    RbConfig,
    _reference_rep,
    build_sequence,
    compiled_gates,
    read_decay_csv,
    run_campaign,
    simulate_sequence,
    write_decay_csv,
)
from hqrb.su2 import SIX_STATES, gate_fidelity


@pytest.fixture(scope="module")
def compiled():
    return compiled_gates(DeviceParams(), None)


def test_zero_length_sequence_recovery_is_identity(compiled):
    spec = build_sequence(0, None, np.random.default_rng(0), compiled)
    ident = compiled.group.index_of(IDENTITY_QUAT)
    assert spec.recovery_index == ident
    assert list(spec.gate_ids) == [ident]


@pytest.mark.parametrize("interleave", [None, "x", "z", "h"])
def test_noiseless_product_is_identity(interleave):
    comp = compiled_gates(DeviceParams(), interleave)
    rng = np.random.default_rng(5)
    for n in (1, 4, 9):
        spec = build_sequence(n, interleave, rng, comp)
        u = np.eye(2, dtype=complex)
        for gid in spec.gate_ids:
            if gid < 24:
                u = comp.group.elements[gid].unitary @ u
            else:
                u = comp.schedules[gid].target @ u
        assert gate_fidelity(u, np.eye(2)) > 1.0 - 1e-10


def test_sequence_determinism(compiled):
    a = build_sequence(20, None, np.random.default_rng([3, 7]), compiled)
    b = build_sequence(20, None, np.random.default_rng([3, 7]), compiled)
    assert np.array_equal(a.clifford_indices, b.clifford_indices)
    assert a.recovery_index == b.recovery_index


def test_interleave_mismatch_rejected(compiled):
    with pytest.raises(ValidationError):
        build_sequence(3, "x", np.random.default_rng(0), compiled)


def test_simulate_zero_noise_all_states(compiled):
    cfg = RbConfig(n_grid=(1, 5, 10, 20), n_seq=1, n_rep=1, seed=9, noise=QsgParams(0.0, 0.0))
    for n in (1, 7, 30):
        spec = build_sequence(n, None, np.random.default_rng([9, 11, n, 0]), compiled)
        fid = simulate_sequence(spec, cfg, np.random.default_rng(1), compiled)
        assert np.all(fid > 1.0 - 1e-9)


@pytest.mark.parametrize("resample", ["per-step", "per-gate", "per-sequence"])
def test_fast_path_matches_reference_simulation(compiled, resample):
    cfg = RbConfig(
        n_grid=(1, 5, 10, 20), n_seq=1, n_rep=1, seed=13,
        noise=QsgParams(50.0, 20.0, resample=resample),
    )
    for n in (1, 6, 15):
        spec = build_sequence(n, None, np.random.default_rng([13, 11, n, 0]), compiled)
        fast = simulate_sequence(spec, cfg, np.random.default_rng([1, n]), compiled)
        slow = _reference_rep(spec, compiled, cfg, np.random.default_rng([1, n]))
        assert np.allclose(fast, slow, atol=1e-11)


def test_fast_path_matches_reference_one_over_f(compiled):
    noise = OneOverFParams.from_matched_power(20.0, sigma_t_ps=50.0)
    cfg = RbConfig(n_grid=(1, 5, 10, 20), n_seq=1, n_rep=1, seed=13, noise=noise)
    spec = build_sequence(8, None, np.random.default_rng([13, 11, 8, 0]), compiled)
    fast = simulate_sequence(spec, cfg, np.random.default_rng(2), compiled)
    slow = _reference_rep(spec, compiled, cfg, np.random.default_rng(2))
    assert np.allclose(fast, slow, atol=1e-8)


def test_timing_error_on_x_gate_survival(compiled):
    # [X(pi), recovery X(pi)] with a uniform relative timing error eta on the
    # first gate only: survival from |0> is cos^2(pi*eta/2).
    eta = 0.02
    x_idx = None
    for e in compiled.group.elements:
        if gate_fidelity(e.unitary, np.array([[0, -1j], [-1j, 0]])) > 1 - 1e-9:
            x_idx = e.group_index
    sched = compiled.schedules[x_idx]
    from hqrb.device import realize

    n = len(sched.steps)
    noise = NoiseRealization(
        dt_ns=np.array([s.duration_ns * eta for s in sched.steps]),
        dj1_nev=np.zeros(n),
        dj2_nev=np.zeros(n),
        dj_nev=np.zeros(n),
    )
    noisy = realize(sched, noise)
    total = sched.target @ noisy  # ideal recovery after the noisy gate
    survival = float(np.abs(total[0, 0]) ** 2)
    assert survival == pytest.approx(math.cos(math.pi * eta / 2.0) ** 2, abs=1e-10)


def test_z_errors_invisible_from_zero_state(compiled):
    # Pure z-axis error products stabilize |0>, which is why fidelity is
    # averaged over six states.
    from hqrb.device import realize
    from hqrb.pulses import synth_rz

    sched = synth_rz(1.0)
    n = len(sched.steps)
    noise = NoiseRealization(
        dt_ns=np.zeros(n),
        dj1_nev=np.full(n, 30.0),
        dj2_nev=np.full(n, 30.0),
        dj_nev=np.full(n, 30.0),
    )
    u = realize(sched, noise)
    survival = float(np.abs((sched.target.conj().T @ u)[0, 0]) ** 2)
    assert survival == pytest.approx(1.0, abs=1e-12)
    assert gate_fidelity(u, sched.target) < 1.0 - 1e-6


def test_campaign_zero_noise_means_one():
    cfg = RbConfig(n_grid=(1, 10, 40, 100), n_seq=12, n_rep=2, seed=21, noise=QsgParams(0.0, 0.0))
    curve = run_campaign(cfg)
    assert np.all(curve.mean_fidelity >= 1.0 - 1e-9)
    assert np.all(curve.std_error < 1e-9)
    assert np.all(curve.sample_count == 12 * 2 * 6)


def test_campaign_determinism_and_thread_independence():
    cfg = RbConfig(n_grid=(1, 5, 10, 20), n_seq=5, n_rep=2, seed=31, noise=QsgParams(50.0, 20.0))
    a = run_campaign(cfg, threads=1)
    b = run_campaign(cfg, threads=1)
    c = run_campaign(cfg, threads=2)
    assert np.array_equal(a.mean_fidelity, b.mean_fidelity)
    assert np.array_equal(a.mean_fidelity, c.mean_fidelity)
    assert np.array_equal(a.std_error, c.std_error)


def test_doubling_sequences_shrinks_std_error():
    base = dict(n_grid=(1, 5, 10, 20), n_rep=4, seed=17, noise=QsgParams(75.0, 30.0))
    small = run_campaign(RbConfig(n_seq=100, **base))
    big = run_campaign(RbConfig(n_seq=200, **base))
    ratios = big.std_error / small.std_error
    assert np.all(ratios > 0.5 / math.sqrt(2.0) * 0.8)
    assert np.all(ratios < math.sqrt(0.5) * 1.2)


def test_fidelity_decreases_with_length():
    cfg = RbConfig(
        n_grid=(1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100),
        n_seq=40,
        n_rep=5,
        seed=23,
        noise=QsgParams(50.0, 20.0),
    )
    curve = run_campaign(cfg)
    rho = stats.spearmanr(curve.n_values, curve.mean_fidelity).statistic
    assert rho < 0.0


def test_six_state_average_is_frame_invariant(compiled):
    # For any realized unitary the six-state survival average depends only on
    # the rotation angle, so a rotated six-state frame gives the same mean.
    from hqrb.device import realize
    from hqrb.noise import sample_qsg
    from hqrb.su2 import rotation

    cfg = RbConfig(n_grid=(1, 5, 10, 20), n_seq=1, n_rep=1, seed=3, noise=QsgParams(50.0, 20.0))
    rng = np.random.default_rng(6)
    frame = rotation(np.array([1.0, 2.0, 2.0]) / 3.0, 0.777)
    states = (frame @ SIX_STATES.T).T
    for n in (2, 8):
        spec = build_sequence(n, None, np.random.default_rng([3, 11, n, 0]), compiled)
        noise_rng = np.random.default_rng([3, 13, n, 0])
        schedules = [compiled.schedules[g] for g in spec.gate_ids]
        u = np.eye(2, dtype=complex)
        for sched in schedules:
            u = realize(sched, sample_qsg(cfg.noise, sched, noise_rng)) @ u
        plain = np.mean([float(np.abs(np.vdot(s, u @ s)) ** 2) for s in SIX_STATES])
        rotated = np.mean([float(np.abs(np.vdot(s, u @ s)) ** 2) for s in states])
        assert rotated == pytest.approx(plain, abs=1e-12)


def test_one_over_f_window_guard_in_campaign():
    noise = OneOverFParams.from_matched_power(10.0, f_min_hz=1e8, f_max_hz=10e9)
    cfg = RbConfig(n_grid=(1, 2, 3, 4), n_seq=1, n_rep=1, seed=1, noise=noise)
    with pytest.raises(TraceWindowError):
        run_campaign(cfg)


def test_decay_csv_round_trip():
    cfg = RbConfig(n_grid=(1, 5, 10, 20), n_seq=6, n_rep=2, seed=37, noise=QsgParams(50.0, 20.0))
    curve = run_campaign(cfg)
    buf = io.StringIO()
    write_decay_csv(curve, buf)
    text = buf.getvalue()
    assert text.startswith("# config=")
    back = read_decay_csv(io.StringIO(text))
    assert np.array_equal(back.n_values, curve.n_values)
    assert np.allclose(back.mean_fidelity, curve.mean_fidelity, rtol=1e-8)
    assert back.seed == curve.seed
    assert back.config_digest == curve.config_digest
    buf2 = io.StringIO()
    write_decay_csv(back, buf2)
    assert buf2.getvalue() == text


def test_rb_config_validation():
    with pytest.raises(ValidationError):
        RbConfig(n_grid=())
    with pytest.raises(ValidationError):
        RbConfig(n_grid=(5, 5))
    with pytest.raises(ValidationError):
        RbConfig(interleave="t")
    with pytest.raises(ValidationError):
        RbConfig(n_seq=0)

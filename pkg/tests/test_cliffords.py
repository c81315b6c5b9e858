import itertools

import numpy as np
import pytest
from scipy import stats

from hqrb.cliffords import (
    GENERATOR_ORDER,
    HADAMARD_QUAT,
    IDENTITY_QUAT,
    INTERLEAVE_QUATS,
    NATIVE_QUATS,
    CliffordGroup,
    Z180_QUAT,
    interleave_schedule,
    native_schedule,
    qcanon,
    qconj,
    qmul,
    quat_to_unitary,
)
from hqrb.device import ModelKind, realize
from hqrb.pulses import DeviceParams
from hqrb.su2 import gate_fidelity


@pytest.fixture(scope="module")
def group():
    return CliffordGroup.build()


def test_group_has_24_distinct_elements(group):
    assert len(group) == 24
    for a, b in itertools.combinations(group.elements, 2):
        assert gate_fidelity(a.unitary, b.unitary) < 1.0 - 1e-6


def test_numeric_closure_enumeration_oracle():
    # Independent oracle: enumerate products of the native unitaries
    # numerically, deduplicating up to global phase; exactly 24 must appear.
    gens = [quat_to_unitary(NATIVE_QUATS[g]) for g in GENERATOR_ORDER]
    found = [np.eye(2, dtype=complex)]
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        new = []
        for u in frontier:
            for g in gens:
                cand = g @ u
                if not any(gate_fidelity(cand, v) > 1.0 - 1e-9 for v in found):
                    found.append(cand)
                    new.append(cand)
        frontier = new
    assert len(found) == 24


def test_mult_table_matches_matrix_products(group):
    for i, j in itertools.product(range(24), repeat=2):
        k = group.compose(i, j)
        prod = group.elements[i].unitary @ group.elements[j].unitary
        assert gate_fidelity(prod, group.elements[k].unitary) > 1.0 - 1e-10


def test_associativity_on_sampled_triples(group):
    rng = np.random.default_rng(1)
    for _ in range(200):
        a, b, c = rng.integers(0, 24, size=3)
        left = group.compose(group.compose(int(a), int(b)), int(c))
        right = group.compose(int(a), group.compose(int(b), int(c)))
        assert left == right


def test_inverses_unique_and_identity_self_inverse(group):
    ident = group.index_of(IDENTITY_QUAT)
    assert group.inverse(ident) == ident
    seen = set()
    for i in range(24):
        inv = group.inverse(i)
        assert group.compose(i, inv) == ident
        assert group.compose(inv, i) == ident
        seen.add(inv)
    assert len(seen) == 24


def test_same_axis_quarter_turns_add(group):
    x90 = group.index_of(NATIVE_QUATS["X(pi/2)"])
    x180 = group.index_of(NATIVE_QUATS["X(pi)"])
    assert group.compose(x90, x90) == x180


def test_quaternion_algebra_is_exact():
    q = qmul(NATIVE_QUATS["X(pi/2)"], NATIVE_QUATS["Y(pi/2)"])
    for pair in q:
        assert all(isinstance(v, int) for v in pair)
    assert qcanon(qconj(qcanon(q))) == qcanon(qconj(q))


def test_every_decomposition_compiles_to_its_unitary(group):
    dp = DeviceParams()
    for element, sched in zip(group.elements, group.compile_schedules(dp)):
        u = realize(sched, None, ModelKind.ABSTRACT, dp)
        assert gate_fidelity(u, element.unitary) >= 1.0 - 1e-9


def test_decomposition_labels_are_native(group):
    allowed = {"I"} | set(GENERATOR_ORDER)
    for element in group.elements:
        assert set(element.decomposition) <= allowed
        if element.decomposition != ("I",):
            assert "I" not in element.decomposition


def test_uniform_sampling_chi_square(group):
    rng = np.random.default_rng(99)
    draws = 100_000
    counts = np.bincount(
        [group.sample_index(rng) for _ in range(draws)], minlength=24
    )
    expected = draws / 24.0
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    p_value = stats.chi2.sf(chi2, df=23)
    assert p_value > 0.001


def test_product_index_time_order(group):
    rng = np.random.default_rng(4)
    word = [int(i) for i in rng.integers(0, 24, size=7)]
    idx = group.product_index(word)
    u = np.eye(2, dtype=complex)
    for i in word:
        u = group.elements[i].unitary @ u
    assert gate_fidelity(u, group.elements[idx].unitary) > 1.0 - 1e-10


def test_interleaved_gates_are_group_elements(group):
    dp = DeviceParams()
    for label, quat in INTERLEAVE_QUATS.items():
        idx = group.index_of(quat)
        sched = interleave_schedule(label, dp)
        realized = realize(sched, None, ModelKind.ABSTRACT, dp)
        assert gate_fidelity(realized, group.elements[idx].unitary) >= 1.0 - 1e-9
    assert group.index_of(Z180_QUAT) != group.index_of(HADAMARD_QUAT)


def test_native_schedule_rejects_unknown_label():
    from hqrb.errors import ValidationError

    with pytest.raises(ValidationError):
        native_schedule("T(pi)", DeviceParams())

"""The 24-element single-qubit Clifford group with exact algebra.

Each Clifford rotation is stored as a unit quaternion identified up to sign
(the SU(2) double cover quotient).  All quaternion components of the binary
octahedral group are of the form (a + b*sqrt(2))/2 with integer a, b and
never both nonzero, so products, inverses and lookups are computed in exact
integer arithmetic; nothing in the group law is numeric.

Decompositions are shortest products over the native gate set
{I, X(pi), X(+-pi/2), Y(pi), Y(+-pi/2)}, found by breadth-first search with a
fixed generator ordering, so the table is deterministic.  Y(-pi) coincides
with Y(pi) as a rotation and is therefore not a separate generator.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .pulses import DeviceParams, GateSchedule, synth_hadamard, synth_rx, synth_rz, synth_y

# A quaternion is a 4-tuple of pairs; pair (a, b) has value (a + b*sqrt(2))/2.
Pair = tuple[int, int]
Quat = tuple[Pair, Pair, Pair, Pair]

_ZERO: Pair = (0, 0)
_ONE: Pair = (2, 0)
_HALF_SQRT2: Pair = (0, 1)

IDENTITY_QUAT: Quat = (_ONE, _ZERO, _ZERO, _ZERO)


def _pmul4(p: Pair, q: Pair) -> tuple[int, int]:
    """Product of two pair values, returned as quarter-unit numerators."""
    a1, b1 = p
    a2, b2 = q
    return a1 * a2 + 2 * b1 * b2, a1 * b2 + b1 * a2


def _phalve(num: tuple[int, int]) -> Pair:
    a, b = num
    if a % 2 or b % 2:  # cannot happen for binary-octahedral products
        raise ArithmeticError(f"quaternion product left the group ring: {num}")
    return a // 2, b // 2


def qmul(q1: Quat, q2: Quat) -> Quat:
    """Hamilton product q1*q2 (so unitaries compose as U(q1) @ U(q2))."""
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2

    def dot(terms):
        a = b = 0
        for sign, p, q in terms:
            da, db = _pmul4(p, q)
            a += sign * da
            b += sign * db
        return _phalve((a, b))

    w = dot(((1, w1, w2), (-1, x1, x2), (-1, y1, y2), (-1, z1, z2)))
    x = dot(((1, w1, x2), (1, x1, w2), (1, y1, z2), (-1, z1, y2)))
    y = dot(((1, w1, y2), (-1, x1, z2), (1, y1, w2), (1, z1, x2)))
    z = dot(((1, w1, z2), (1, x1, y2), (-1, y1, x2), (1, z1, w2)))
    return w, x, y, z


def qconj(q: Quat) -> Quat:
    w, x, y, z = q
    return w, (-x[0], -x[1]), (-y[0], -y[1]), (-z[0], -z[1])


def qcanon(q: Quat) -> Quat:
    """Canonical sign representative: first nonzero component positive."""
    for a, b in q:
        s = a if a != 0 else b
        if s > 0:
            return q
        if s < 0:
            return tuple((-a, -b) for a, b in q)  # type: ignore[return-value]
    raise ArithmeticError("zero quaternion has no canonical form")


def _pair_value(p: Pair) -> float:
    return (p[0] + p[1] * math.sqrt(2.0)) / 2.0


def quat_to_unitary(q: Quat) -> np.ndarray:
    """SU(2) matrix w*I - i*(x*sx + y*sy + z*sz) of a quaternion."""
    w, x, y, z = (_pair_value(p) for p in q)
    return np.array(
        [[w - 1j * z, -1j * x - y], [-1j * x + y, w + 1j * z]],
        dtype=complex,
    )


# Native gate quaternions, in the fixed ordering used by the decomposition
# search.  (cos(t/2), sin(t/2)*axis) for a rotation by t.
_NX = (-_HALF_SQRT2[0], -_HALF_SQRT2[1])
NATIVE_QUATS: dict[str, Quat] = {
    "X(pi)": (_ZERO, _ONE, _ZERO, _ZERO),
    "X(pi/2)": (_HALF_SQRT2, _HALF_SQRT2, _ZERO, _ZERO),
    "X(-pi/2)": (_HALF_SQRT2, _NX, _ZERO, _ZERO),
    "Y(pi)": (_ZERO, _ZERO, _ONE, _ZERO),
    "Y(pi/2)": (_HALF_SQRT2, _ZERO, _HALF_SQRT2, _ZERO),
    "Y(-pi/2)": (_HALF_SQRT2, _ZERO, _NX, _ZERO),
}
GENERATOR_ORDER = tuple(NATIVE_QUATS)

Z90_QUAT: Quat = (_HALF_SQRT2, _ZERO, _ZERO, _HALF_SQRT2)
Z270_QUAT: Quat = (_HALF_SQRT2, _ZERO, _ZERO, _NX)
Z180_QUAT: Quat = (_ZERO, _ZERO, _ZERO, _ONE)
HADAMARD_QUAT: Quat = (_ZERO, _HALF_SQRT2, _ZERO, _HALF_SQRT2)

#: Labels allowed in decompositions (Z rotations appear only inside Y gates).
NATIVE_LABELS = ("I",) + GENERATOR_ORDER


def native_schedule(label: str, dp: DeviceParams) -> GateSchedule:
    """Pulse schedule of one native gate label."""
    theta = {"I": 0.0, "X(pi)": math.pi, "X(pi/2)": math.pi / 2, "X(-pi/2)": -math.pi / 2,
             "Y(pi)": math.pi, "Y(pi/2)": math.pi / 2, "Y(-pi/2)": -math.pi / 2}
    if label not in theta:
        raise ValidationError(f"unknown native gate label {label!r}")
    if label.startswith("Y"):
        return synth_y(theta[label], dp)
    return synth_rx(theta[label], dp)


@dataclass(frozen=True)
class CliffordElement:
    """One Clifford operation: exact quaternion, unitary, native word."""

    group_index: int
    decomposition: tuple[str, ...]
    quat: Quat
    unitary: np.ndarray = field(repr=False)


class CliffordGroup:
    """The full group with multiplication and inverse tables.

    ``mult_table[i, j]`` is the index of the matrix product U_i @ U_j, i.e.
    element j applied first in time.  All tables come from the exact
    quaternion algebra.
    """

    def __init__(self, elements: list[CliffordElement]):
        self.elements = elements
        self._index: dict[Quat, int] = {e.quat: e.group_index for e in elements}
        n = len(elements)
        self.mult_table = np.empty((n, n), dtype=np.int64)
        for i, ei in enumerate(elements):
            for j, ej in enumerate(elements):
                self.mult_table[i, j] = self._index[qcanon(qmul(ei.quat, ej.quat))]
        self.inverse_table = np.array(
            [self._index[qcanon(qconj(e.quat))] for e in elements], dtype=np.int64
        )

    @classmethod
    def build(cls) -> "CliffordGroup":
        """Enumerate the group by breadth-first closure over the native set."""
        words: dict[Quat, tuple[str, ...]] = {qcanon(IDENTITY_QUAT): ()}
        queue: deque[Quat] = deque([qcanon(IDENTITY_QUAT)])
        while queue:
            q = queue.popleft()
            for label in GENERATOR_ORDER:
                new = qcanon(qmul(NATIVE_QUATS[label], q))
                if new not in words:
                    words[new] = words[q] + (label,)
                    queue.append(new)
        if len(words) != 24:
            raise ArithmeticError(f"native set generated {len(words)} elements, expected 24")
        elements = []
        for idx, (quat, word) in enumerate(words.items()):
            decomposition = word if word else ("I",)
            elements.append(CliffordElement(idx, decomposition, quat, quat_to_unitary(quat)))
        return cls(elements)

    def __len__(self) -> int:
        return len(self.elements)

    def index_of(self, quat: Quat) -> int:
        """Index of a quaternion (canonicalized); raises if not in the group."""
        key = qcanon(quat)
        if key not in self._index:
            raise ValidationError("quaternion is not a Clifford element")
        return self._index[key]

    def compose(self, i: int, j: int) -> int:
        """Index of U_i @ U_j."""
        return int(self.mult_table[i, j])

    def inverse(self, i: int) -> int:
        return int(self.inverse_table[i])

    def product_index(self, indices) -> int:
        """Index of the time-ordered product of elements (first applied first)."""
        acc = self.index_of(IDENTITY_QUAT)
        for idx in indices:
            acc = self.compose(int(idx), acc)
        return acc

    def sample_index(self, rng: np.random.Generator) -> int:
        """Uniform draw over the 24 group indices."""
        return int(rng.integers(0, len(self.elements)))

    def compile_schedules(self, dp: DeviceParams) -> list[GateSchedule]:
        """Concatenate each element's native-gate schedules, in time order."""
        native = {label: native_schedule(label, dp) for label in NATIVE_LABELS}
        out = []
        for e in self.elements:
            steps = tuple(s for label in e.decomposition for s in native[label].steps)
            out.append(GateSchedule(f"C{e.group_index}[{'*'.join(e.decomposition)}]", steps, e.unitary))
        return out


#: Group quaternion and schedule factory for each interleavable gate label.
INTERLEAVE_QUATS: dict[str, Quat] = {"x": NATIVE_QUATS["X(pi)"], "z": Z180_QUAT, "h": HADAMARD_QUAT}


def interleave_schedule(label: str, dp: DeviceParams) -> GateSchedule:
    """Compiled schedule of an interleaved gate ('x', 'z' or 'h')."""
    if label == "x":
        return synth_rx(math.pi, dp)
    if label == "z":
        return synth_rz(math.pi, dp)
    if label == "h":
        return synth_hadamard(dp)
    raise ValidationError(f"interleaved gate must be one of 'x', 'z', 'h', got {label!r}")

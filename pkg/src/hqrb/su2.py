"""Exact two-level quantum math: states, rotations, propagators, fidelities.

Energies are in ueV and times in ns throughout, so the Planck constant is the
single conversion factor ``PLANCK_UEV_NS``.  Global phase is never tracked;
use :func:`gate_fidelity` for phase-insensitive equality checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Planck constant h in ueV*ns (exact CODATA value scaled to these units).
PLANCK_UEV_NS = 4.135667696

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_SQ2 = 1.0 / np.sqrt(2.0)

#: The six cardinal pure states |0>, |+>, |->, |+i>, |-i>, |1> used for
#: fidelity averaging, one per row.
SIX_STATES = np.array(
    [
        [1, 0],
        [_SQ2, _SQ2],
        [_SQ2, -_SQ2],
        [_SQ2, 1j * _SQ2],
        [_SQ2, -1j * _SQ2],
        [0, 1],
    ],
    dtype=complex,
)
SIX_STATE_LABELS = ("0", "+", "-", "+i", "-i", "1")


def check_state(psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate a pure-state amplitude pair; returns it as a complex array."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValidationError(f"state must have shape (2,), got {psi.shape}")
    norm = float(np.sum(np.abs(psi) ** 2))
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"state is not normalized: |psi|^2 = {norm!r}")
    return psi


def check_unitary(u: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate a 2x2 unitary (U+U = I and |det U| = 1 within ``tol``)."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValidationError(f"unitary must have shape (2, 2), got {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - PAULI_I))
    if err > tol:
        raise ValidationError(f"matrix is not unitary: max |U+U - I| = {err!r}")
    det_err = abs(abs(np.linalg.det(u)) - 1.0)
    if det_err > tol:
        raise ValidationError(f"matrix is not unitary: ||det U| - 1| = {det_err!r}")
    return u


def rotation(axis, angle: float) -> np.ndarray:
    """Rotation exp(-i*angle*(axis.sigma)/2) about a unit 3-vector.

    Parameters
    ----------
    axis : array_like, shape (3,)
        Rotation axis; must be normalized to 1 within 1e-9.
    angle : float
        Rotation angle in radians.

    Returns
    -------
    np.ndarray
        The 2x2 SU(2) rotation, computed from the closed form
        cos(angle/2) I - i sin(angle/2) (axis.sigma).
    """
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (3,):
        raise ValidationError(f"axis must have shape (3,), got {axis.shape}")
    norm = float(np.linalg.norm(axis))
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(f"axis must be a unit vector, |axis| = {norm!r}")
    half = 0.5 * angle
    c, s = np.cos(half), np.sin(half)
    nx, ny, nz = axis
    return np.array(
        [
            [c - 1j * s * nz, -1j * s * nx - s * ny],
            [-1j * s * nx + s * ny, c + 1j * s * nz],
        ],
        dtype=complex,
    )


def rx(theta: float) -> np.ndarray:
    """Rotation about the x axis by ``theta`` radians."""
    half = 0.5 * theta
    c, s = np.cos(half), np.sin(half)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    """Rotation about the y axis by ``theta`` radians."""
    half = 0.5 * theta
    c, s = np.cos(half), np.sin(half)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    """Rotation about the z axis by ``theta`` radians."""
    half = 0.5 * theta
    return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]], dtype=complex)


def euler_zxz(phi: float, theta: float, lam: float) -> np.ndarray:
    """Unitary of a z-x-z Euler sequence applied in time order phi, theta, lam.

    The first rotation applied to the state is Rz(phi), then Rx(theta), then
    Rz(lam), so the matrix is rz(lam) @ rx(theta) @ rz(phi).  The Hadamard is
    euler_zxz(pi/2, pi/2, pi/2) up to a global phase.
    """
    return rz(lam) @ rx(theta) @ rz(phi)


@dataclass(frozen=True)
class StepGenerator:
    """Constant two-level generator h_x*sigma_x + h_z*sigma_z, in ueV."""

    h_x: float
    h_z: float

    def __post_init__(self):
        if not (np.isfinite(self.h_x) and np.isfinite(self.h_z)):
            raise ValidationError("generator coefficients must be finite")

    @property
    def splitting(self) -> float:
        """Energy splitting sqrt(h_x^2 + h_z^2) in ueV."""
        return float(np.hypot(self.h_x, self.h_z))


def propagator(gen: StepGenerator, duration_ns: float) -> np.ndarray:
    """Evolution exp(-i*2pi*(h_x sx + h_z sz)*t/(2h)) for a constant generator.

    Equals ``rotation(n, 2*pi*E*t/h)`` for n = (h_x, 0, h_z)/E and splitting
    E = sqrt(h_x^2 + h_z^2); the zero-splitting or zero-duration case is the
    identity.
    """
    if duration_ns < 0:
        raise ValidationError(f"duration must be non-negative, got {duration_ns!r}")
    e = gen.splitting
    if e == 0.0 or duration_ns == 0.0:
        return PAULI_I.copy()
    angle = 2.0 * np.pi * e * duration_ns / PLANCK_UEV_NS
    axis = np.array([gen.h_x / e, 0.0, gen.h_z / e])
    return rotation(axis, angle)


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Squared overlap |<a|b>|^2 of two normalized pure states."""
    a = check_state(a)
    b = check_state(b)
    return float(np.abs(np.vdot(a, b)) ** 2)


def gate_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """Average gate fidelity F = (|Tr(U+V)|^2 + 2)/6 of two unitaries.

    Equals 1 iff U = V up to a global phase; insensitive to any phase on
    either argument.
    """
    u = check_unitary(u)
    v = check_unitary(v)
    t = np.trace(u.conj().T @ v)
    return float((np.abs(t) ** 2 + 2.0) / 6.0)

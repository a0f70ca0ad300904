"""Explicit feasible decomposition for a two-qubit controlled-phase difference.

For ``U = diag(1, 1, e^{i theta}, 1)`` and a pure state ``|a> = sum a_jk |jk>``
the difference ``X = |a><a| - U|a><a|U^dagger`` only couples ``|10>`` to the
other three basis states. The construction below splits it as
``X = c1 F1 + c2 F2`` with ``Tr_0 F1 = 0``, ``Tr_1 F2 = 0`` and
``||F_i||_1 / 2 <= 1``, so ``c1 + c2 = sqrt(2) sin(theta / 2)`` upper-bounds
the W1 norm of ``X`` for every input state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import QuditRegister, trace_norm

__all__ = ["ControlledPhaseWitness", "witness_controlled_phase", "controlled_phase_difference"]

_REG = QuditRegister(2)
# basis indices of |00>, |01>, |10>, |11>
_I00, _I01, _I10, _I11 = 0, 1, 2, 3
_ZERO_TOL = 1e-13


@dataclass
class ControlledPhaseWitness:
    """Decomposition ``c1 * F1 + c2 * F2`` of a controlled-phase difference."""

    theta: float
    amplitudes: np.ndarray
    c1: float
    c2: float
    F1: np.ndarray
    F2: np.ndarray
    branch: str

    @property
    def total(self) -> float:
        return self.c1 + self.c2

    @property
    def difference(self) -> np.ndarray:
        return controlled_phase_difference(self.theta, self.amplitudes)

    @property
    def residual(self) -> float:
        """Largest entry of ``X - c1 F1 - c2 F2``."""
        R = self.difference - self.c1 * self.F1 - self.c2 * self.F2
        return float(np.max(np.abs(R)))

    def as_certificate(self):
        """Packages the decomposition as a :class:`~qwdist.w1.W1Certificate`."""
        from .w1 import W1Certificate, _residuals, marginal_bound

        X = self.difference
        blocks = [self.c1 * self.F1, self.c2 * self.F2]
        coeffs = [0.5 * trace_norm(B) for B in blocks]
        upper = float(sum(coeffs))
        return W1Certificate(
            value=upper,
            lower_bound=min(marginal_bound(X, _REG), upper),
            upper_bound=upper,
            components=list(zip(blocks, coeffs)),
            iterations=0,
            converged=True,
            method="witness",
            register=_REG,
            residuals=_residuals(X, blocks, _REG),
        )


def controlled_phase_difference(theta: float, amplitudes) -> np.ndarray:
    """``|a><a| - U |a><a| U^dagger`` for ``U = diag(1, 1, e^{i theta}, 1)``."""
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    U = np.diag([1, 1, np.exp(1j * theta), 1])
    rho = np.outer(a, a.conj())
    return rho - U @ rho @ U.conj().T


def _star(center: int, others: dict[int, complex]) -> np.ndarray:
    """Hermitian matrix with entries ``F[j, center] = 2 * others[j]`` and conjugates."""
    F = np.zeros((4, 4), dtype=complex)
    for j, v in others.items():
        F[j, center] = 2 * v
        F[center, j] = 2 * np.conj(v)
    return F


def _matrices(g, h):
    """Builds the two components from the coefficient vectors ``g`` and ``h``.

    ``F1[j, 10] = 2 g_j g_10^*`` for ``j`` in {00, 01}; ``F2[j, 10] = 2 h_j h_10^*``
    for ``j`` in {01, 11}. ``g_11`` and ``h_00`` never enter.
    """
    F1 = _star(_I10, {_I00: g[_I00] * np.conj(g[_I10]), _I01: g[_I01] * np.conj(g[_I10])})
    F2 = _star(_I10, {_I01: h[_I01] * np.conj(h[_I10]), _I11: h[_I11] * np.conj(h[_I10])})
    return F1, F2


def witness_controlled_phase(theta: float, amplitudes) -> ControlledPhaseWitness:
    """Feasible decomposition of ``X = rho - U rho U^dagger`` for ``U = diag(1,1,e^{i theta},1)``.

    Args:
        theta: Phase angle in ``[0, 2 pi)``.
        amplitudes: The four amplitudes ``(a_00, a_01, a_10, a_11)`` of a
            normalized pure state.

    Returns:
        A :class:`ControlledPhaseWitness` with ``c1 + c2 = sqrt(2) sin(theta/2)``
        whenever ``X`` is nonzero.

    Raises:
        ValueError: If the amplitudes are not a normalized 4-vector or theta
            is out of range.
    """
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if a.size != 4:
        raise ValueError(f"expected 4 amplitudes, got {a.size}")
    norm2 = float(np.sum(np.abs(a) ** 2))
    if abs(norm2 - 1.0) > 1e-9:
        raise ValueError(f"amplitudes have squared norm {norm2:.12g}, expected 1")
    theta = float(theta)
    if not 0.0 <= theta < 2 * math.pi:
        raise ValueError(f"theta must lie in [0, 2pi), got {theta}")

    s = math.sin(theta / 2)
    m = np.abs(a)
    zero = np.zeros((4, 4), dtype=complex)

    if m[_I10] * math.sqrt(max(0.0, 1.0 - m[_I10] ** 2)) <= _ZERO_TOL or s == 0.0:
        return ControlledPhaseWitness(theta, a, 0.0, 0.0, zero, zero.copy(), "trivial")

    phase = np.exp(1j * (theta / 2 - math.pi / 2))
    S = m[_I00] + m[_I11]
    if S <= _ZERO_TOL:
        g = np.zeros(4, dtype=complex)
        h = np.zeros(4, dtype=complex)
        g[_I10] = np.conj(a[_I01]) / math.sqrt(2)
        h[_I01] = a[_I01] / math.sqrt(2)
        g[_I01] = np.conj(a[_I10] * phase)
        h[_I10] = a[_I10] * phase
        c = s / math.sqrt(2)
        F1, F2 = _matrices(g, h)
        return ControlledPhaseWitness(theta, a, c, c, F1, F2, "antidiagonal")

    # solve with real magnitudes, then restore the phases of a by a diagonal unitary
    R = math.hypot(m[_I01], S)
    sin_a1, cos_a1 = S / R, m[_I01] / R
    alpha0 = 0.5 * math.asin(min(1.0, math.sqrt(2) * m[_I10] * R))
    g = np.zeros(4, dtype=complex)
    h = np.zeros(4, dtype=complex)
    g[_I10] = h[_I10] = math.sin(alpha0) * phase
    g[_I00] = h[_I11] = math.cos(alpha0) * sin_a1
    g[_I01] = h[_I01] = math.cos(alpha0) * cos_a1
    c1 = math.sqrt(2) * s * m[_I00] / S
    c2 = math.sqrt(2) * s * m[_I11] / S
    F1, F2 = _matrices(g, h)
    ph = np.where(m > 0, a / np.where(m > 0, m, 1.0), 1.0)
    D = np.outer(ph, ph.conj())
    return ControlledPhaseWitness(theta, a, c1, c2, D * F1, D * F2, "general")

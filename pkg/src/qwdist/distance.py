"""Distance ``D(U, V) = max_psi ||U psi psi^dagger U^dagger - V psi psi^dagger V^dagger||_W1``.

Right multiplication by a common unitary leaves ``D`` unchanged, so every
pair is first reduced to ``D(I, W)`` with ``W = V U^dagger``. ``W`` is then
matched against the closed-form catalog, single-qudit inputs use the
smallest-arc formula, and everything else goes to the numeric ascent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from .ascent import AscentOptions, DifferenceMap, maximize
from .gates import GateId, NotInCatalog, catalog_distance_value, gate_matrix, match_catalog
from .linalg import QuditRegister, as_unitary, ket, resolve_register

__all__ = [
    "ArcResult",
    "DistanceEstimate",
    "reduce_right_invariance",
    "smallest_arc",
    "single_qudit_witness",
    "d_single_qudit",
    "catalog_distance",
    "catalog_witness",
    "distance_upper_bound",
    "d_unitary",
]

TWO_PI = 2 * math.pi


@dataclass
class ArcResult:
    """Eigenphases of a unitary and the length of the shortest arc holding them.

    ``eigenvectors[:, j]`` belongs to ``eigenphases[j]``; ``start`` and
    ``end`` index the arc's endpoints (counter-clockwise from ``start``).
    """

    eigenphases: list[float]
    theta: float
    eigenvectors: np.ndarray
    start: int
    end: int


def reduce_right_invariance(U, V) -> np.ndarray:
    """``W = V U^dagger``, so that ``D(U, V) = D(I, W)``."""
    U = as_unitary(U)
    V = as_unitary(V)
    if U.shape != V.shape:
        raise ValueError(f"unitaries have different shapes {U.shape} and {V.shape}")
    return V @ U.conj().T


def smallest_arc(W) -> ArcResult:
    """Eigenphases of ``W`` in ``[0, 2 pi)`` and ``theta = 2 pi - largest circular gap``.

    Raises:
        ValueError: If ``W`` is not unitary.
    """
    W = as_unitary(W, atol=1e-8)
    T, Z = scipy.linalg.schur(W, output="complex")
    phases = np.mod(np.angle(np.diagonal(T)), TWO_PI)
    phases[phases >= TWO_PI] = 0.0
    order = np.argsort(phases, kind="stable")
    srt = phases[order]
    m = len(srt)
    if m == 1:
        return ArcResult([float(srt[0])], 0.0, Z, 0, 0)
    gaps = np.empty(m)
    gaps[:-1] = np.diff(srt)
    gaps[-1] = srt[0] + TWO_PI - srt[-1]
    j = int(np.argmax(gaps))
    theta = max(0.0, TWO_PI - float(gaps[j]))
    # the arc starts just after the largest gap and ends just before it
    start, end = order[(j + 1) % m], order[j]
    return ArcResult([float(p) for p in phases], theta, Z, int(start), int(end))


def _arc_value(theta: float) -> float:
    return math.sin(theta / 2) if theta < math.pi else 1.0


def single_qudit_witness(W) -> np.ndarray:
    """A unit vector ``psi`` maximizing ``||psi psi^dagger - W psi psi^dagger W^dagger||_1 / 2``."""
    arc = smallest_arc(W)
    V = arc.eigenvectors
    if arc.theta < math.pi:
        if arc.start == arc.end:
            return V[:, arc.start].copy()
        return (V[:, arc.start] + V[:, arc.end]) / math.sqrt(2)
    ph = np.asarray(arc.eigenphases)
    m = len(ph)
    # weights on the circle whose barycenter is the origin
    A_eq = np.vstack([np.cos(ph), np.sin(ph), np.ones(m)])
    res = linprog(np.zeros(m), A_eq=A_eq, b_eq=[0.0, 0.0, 1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"could not balance eigenphases: {res.message}")
    w = np.clip(res.x, 0, None)
    psi = V @ np.sqrt(w / w.sum())
    return psi / np.linalg.norm(psi)


@dataclass
class DistanceEstimate:
    """Value of ``D(U, V)`` with certified bounds.

    ``lower_bound`` is certified at ``witness_state`` when one is given.
    For the analytic methods ``lower_bound == value == upper_bound``.
    """

    value: float
    lower_bound: float
    upper_bound: float
    method: str
    restarts_used: int = 0
    witness_state: np.ndarray | None = None
    converged: bool = True
    gate: GateId | None = None

    @property
    def lower_witness(self):
        return self.witness_state, self.lower_bound

    def to_json(self) -> dict:
        from .io import vector_to_json

        out = {
            "value": float(self.value),
            "lower_bound": float(self.lower_bound),
            "upper_bound": float(self.upper_bound),
            "method": self.method,
            "restarts_used": int(self.restarts_used),
            "converged": bool(self.converged),
        }
        if self.gate is not None:
            out["gate"] = self.gate.describe()
        if self.witness_state is not None:
            out["witness_state"] = vector_to_json(self.witness_state)
        return out


def d_single_qudit(U, V) -> DistanceEstimate:
    """Closed form for one qudit: ``sin(theta / 2)`` if ``theta < pi`` else 1.

    ``theta`` is the smallest arc of ``U^dagger V``; for a qubit this is
    ``|sin(alpha / 2)|`` with ``alpha`` the relative eigenphase.
    """
    W = reduce_right_invariance(U, V)
    arc = smallest_arc(W)
    value = _arc_value(arc.theta)
    return DistanceEstimate(value, value, value, "single-qudit-arc",
                            witness_state=single_qudit_witness(W))


def _embed_site(psi_site, site, reg):
    out = np.ones(1, dtype=complex)
    for q in range(reg.n):
        v = psi_site if q == site else np.eye(reg.d)[0]
        out = np.kron(out, v)
    return out


def catalog_witness(gate: GateId) -> np.ndarray | None:
    """A state attaining the catalog value, where one is known in closed form."""
    kind = gate.kind
    if kind == "identity":
        return ket("0" * gate.n, gate.d)
    if kind in ("pauli-x", "hadamard"):
        return single_qudit_witness(gate_matrix(gate))
    if kind == "tensor-pauli-x":
        return ket("0" * gate.n)
    if kind in ("basis-complement", "permutation-4", "swap"):
        W = gate_matrix(gate)
        n = QuditRegister.from_dim(W.shape[0]).n
        from .gates import _complement_target

        x = _complement_target(W, n)
        if x is None:
            return None
        return np.eye(W.shape[0], dtype=complex)[x]
    if kind in ("controlled-phase", "cz"):
        k = 4 if kind == "cz" else gate.k
        b = k - 1
        psi = np.zeros(4, dtype=complex)
        psi[b] = 1 / math.sqrt(2)
        psi[b ^ 1] = psi[b ^ 2] = 0.5
        return psi
    if kind == "single-site":
        from .gates import _single_site_factor

        reg = QuditRegister(gate.n, gate.d)
        A = _single_site_factor(gate.matrix, gate.sites[0], reg)
        return _embed_site(single_qudit_witness(A), gate.sites[0], reg)
    if kind == "conjugated":
        psi = catalog_witness(gate.base)
        if psi is None:
            return None
        L = np.ones((1, 1), dtype=complex)
        for A in gate.local_unitaries:
            L = np.kron(L, np.asarray(A, dtype=complex))
        return L @ psi
    return None


def catalog_distance(gate: GateId) -> DistanceEstimate:
    """Closed-form ``D(I, gate)`` for catalog gates.

    Raises:
        NotInCatalog: For custom gates; callers fall back to :func:`d_unitary`.
    """
    value = catalog_distance_value(gate)
    return DistanceEstimate(value, value, value, "analytic-catalog",
                            witness_state=catalog_witness(gate), gate=gate)


def distance_upper_bound(W, register: QuditRegister) -> float:
    """``n sin(theta / 2)`` if the arc of ``W`` is shorter than ``pi``, else ``n``.

    It follows from the trace-norm sandwich: the W1 norm is at most ``n / 2``
    times the trace norm, and half the trace distance of ``psi`` and
    ``W psi`` is at most ``sin(theta / 2)``.
    """
    return register.n * _arc_value(smallest_arc(W).theta)


def d_unitary(U, V, options: AscentOptions | None = None, method: str = "auto",
              register: QuditRegister | None = None) -> DistanceEstimate:
    """Distance ``D(U, V)`` between two unitaries on the same register.

    Args:
        U, V: Unitaries of equal shape.
        options: Settings of the numeric ascent.
        method: ``"auto"`` (catalog, then single-qudit arc, then ascent) or
            ``"numeric"`` (always ascend).
        register: Register of the unitaries; qubits if omitted.

    Raises:
        ValueError: On non-unitary input, shape mismatch or unknown method.
    """
    if method not in ("auto", "numeric"):
        raise ValueError(f"method must be 'auto' or 'numeric', got {method!r}")
    U = as_unitary(U)
    V = as_unitary(V)
    W = reduce_right_invariance(U, V)
    reg = resolve_register(W, register)

    if method == "auto":
        gate = match_catalog(W, reg)
        if gate is not None:
            if reg.n == 1 and gate.kind == "single-site":
                return d_single_qudit(U, V)
            try:
                return catalog_distance(gate)
            except NotInCatalog:  # pragma: no cover - match_catalog only returns catalog kinds
                pass
        if reg.n == 1:
            return d_single_qudit(U, V)

    opts = options or AscentOptions()
    upper = distance_upper_bound(W, reg)
    res = maximize(DifferenceMap.unitaries(np.eye(reg.dim), W, reg), opts)
    value = min(res.value, upper)
    return DistanceEstimate(
        value=value,
        lower_bound=min(res.lower_bound, value),
        upper_bound=upper,
        method="numeric-ascent",
        restarts_used=res.restarts_used,
        witness_state=res.state,
        converged=res.converged,
    )

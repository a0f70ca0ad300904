"""Noise channels and the W1 error rate of a noisy gate implementation.

The noisy implementation of a gate ``U`` is ``V = G o E``: the noise channel
``E`` acts first, then the ideal gate ``G(rho) = U rho U^dagger``. Noise
after the gate can be expressed by conjugating the noise with ``U``.
The error rate is ``e(U, V) = max_rho ||U rho U^dagger - V(rho)||_W1 / n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ascent import AscentOptions, DifferenceMap, maximize
from .distance import d_unitary
from .linalg import QuditRegister, as_density_matrix, as_unitary, resolve_register

__all__ = [
    "NoiseChannel",
    "ErrorRateReport",
    "CostBounds",
    "OrderingReport",
    "weyl_operators",
    "apply_channel",
    "recovery_operation",
    "w1_error_rate",
    "cost_lower_bounds",
    "averaged_cost_lower_bounds",
    "error_rate_ordering_check",
    "average_gate_fidelity_reference",
]


@dataclass(frozen=True, eq=False)
class NoiseChannel:
    """A mixed-unitary, depolarizing or unitary noise channel.

    Use the constructors :meth:`depolarizing`, :meth:`unitary` and
    :meth:`mixed` rather than the raw fields. For ``unitary`` and
    ``mixed-unitary`` channels ``terms`` lists ``(p_k, V_k)``.
    """

    kind: str
    p: float | None = None
    terms: tuple = ()
    register: QuditRegister | None = None

    @classmethod
    def depolarizing(cls, p: float, register: QuditRegister | None = None) -> "NoiseChannel":
        """``rho -> (1 - p) rho + p I / dim``."""
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
        return cls("depolarizing", p=p, register=register)

    @classmethod
    def unitary(cls, E) -> "NoiseChannel":
        E = as_unitary(E)
        return cls("unitary", terms=((1.0, E),), register=QuditRegister.from_dim(E.shape[0]))

    @classmethod
    def mixed(cls, terms) -> "NoiseChannel":
        """``rho -> sum_k p_k V_k rho V_k^dagger``."""
        pairs = []
        for p, V in terms:
            p = float(p)
            if p < -1e-12:
                raise ValueError(f"mixed-unitary weight {p} is negative")
            pairs.append((max(p, 0.0), as_unitary(V)))
        if not pairs:
            raise ValueError("mixed-unitary channel needs at least one term")
        total = sum(p for p, _ in pairs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixed-unitary weights sum to {total:.12g}, expected 1")
        dims = {V.shape[0] for _, V in pairs}
        if len(dims) != 1:
            raise ValueError(f"Kraus unitaries have different dimensions {sorted(dims)}")
        return cls("mixed-unitary", terms=tuple(pairs), register=QuditRegister.from_dim(dims.pop()))

    @classmethod
    def weyl_depolarizing(cls, p: float, dim: int) -> "NoiseChannel":
        """Depolarizing channel written as a mixture of the ``dim**2`` operators ``X^s Z^t``."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
        ops = weyl_operators(dim)
        terms = [((1 - p) * ((s, t) == (0, 0)) + p / dim**2, W) for (s, t), W in ops.items()]
        return cls.mixed(terms)

    def difference_map(self, U) -> DifferenceMap:
        """The map ``psi -> U psi psi^dagger U^dagger - V(psi psi^dagger)`` for ``V = G o E``."""
        U = np.asarray(U, dtype=complex)
        reg = QuditRegister.from_dim(U.shape[0]) if self.register is None else self.register
        if reg.dim != U.shape[0]:
            raise ValueError(f"channel acts on dimension {reg.dim}, gate on {U.shape[0]}")
        if self.kind == "depolarizing":
            return DifferenceMap(U, [(1 - self.p, U)], self.p, reg)
        return DifferenceMap(U, [(p, U @ V) for p, V in self.terms], 0.0, reg)


def weyl_operators(dim: int) -> dict[tuple[int, int], np.ndarray]:
    """``X^s Z^t`` with ``X|q> = |q+1 mod dim>`` and ``Z|q> = omega^q |q>``.

    For ``dim = 4`` the phase is ``omega = i``.
    """
    X = np.roll(np.eye(dim), 1, axis=0).astype(complex)
    Z = np.diag(np.exp(2j * math.pi * np.arange(dim) / dim))
    out = {}
    for s in range(dim):
        for t in range(dim):
            out[(s, t)] = np.linalg.matrix_power(X, s) @ np.linalg.matrix_power(Z, t)
    return out


def apply_channel(ch: NoiseChannel, rho) -> np.ndarray:
    """Output state of the noise channel (before the ideal gate)."""
    rho = as_density_matrix(rho)
    dim = rho.shape[0]
    if ch.register is not None and ch.register.dim != dim:
        raise ValueError(f"channel acts on dimension {ch.register.dim}, state has dimension {dim}")
    if ch.kind == "depolarizing":
        return (1 - ch.p) * rho + ch.p * np.eye(dim) / dim
    out = np.zeros_like(rho)
    for p, V in ch.terms:
        out += p * V @ rho @ V.conj().T
    return out


def recovery_operation(U, E) -> np.ndarray:
    """``P = U E^dagger U^dagger``, which undoes noise ``E`` applied before ``U``: ``P U E = U``."""
    U = as_unitary(U)
    E = as_unitary(E)
    if U.shape != E.shape:
        raise ValueError(f"gate and noise have different shapes {U.shape} and {E.shape}")
    return U @ E.conj().T @ U.conj().T


@dataclass
class ErrorRateReport:
    """W1 error rate of a noisy gate.

    ``exact`` is set when the rate is known exactly; ``bracket`` always holds
    proven bounds and ``point_estimate`` the ascent value, when computed.
    """

    exact: float | None
    bracket: tuple[float, float]
    upper_bound_mixed: float | None
    method: str
    point_estimate: float | None = None
    n: int = 1

    def to_json(self) -> dict:
        out = {"bracket": [float(self.bracket[0]), float(self.bracket[1])], "method": self.method, "n": self.n}
        for key in ("exact", "upper_bound_mixed", "point_estimate"):
            v = getattr(self, key)
            out[key] = None if v is None else float(v)
        return out


def _clip01(x):
    return min(1.0, max(0.0, float(x)))


def w1_error_rate(U, ch: NoiseChannel, options: AscentOptions | None = None,
                  point_estimate: bool = True, mixed_bound: bool = False) -> ErrorRateReport:
    """W1 error rate ``e(U, G o E)``.

    Args:
        U: Ideal gate.
        ch: Noise channel ``E``.
        options: Ascent settings for numeric estimates.
        point_estimate: Run the ascent for depolarizing and mixed channels.
        mixed_bound: For depolarizing noise, also compute the convexity bound
            from its decomposition into ``X^s Z^t`` unitaries.

    Raises:
        ValueError: On register mismatch.
    """
    U = as_unitary(U)
    reg = resolve_register(U, ch.register)
    n = reg.n
    opts = options or AscentOptions()

    if ch.kind == "unitary":
        P = recovery_operation(U, ch.terms[0][1])
        est = d_unitary(np.eye(reg.dim), P, opts, register=reg)
        e = _clip01(est.value / n)
        bracket = (_clip01(est.lower_bound / n), _clip01(est.upper_bound / n))
        return ErrorRateReport(e, bracket, e, "unitary-recovery", e, n)

    if ch.kind == "depolarizing":
        p, dim = ch.p, reg.dim
        td = 2.0 - 2.0 / dim  # max over states of ||rho - I/dim||_1
        low = _clip01(p / n * 0.5 * td)
        high = _clip01(p / n * (n / 2) * td)
        exact = low if n == 1 else None
        mixed = None
        if mixed_bound:
            mixed = _mixed_upper(U, NoiseChannel.weyl_depolarizing(p, dim), reg, opts)
        est = None
        if point_estimate and p > 0:
            res = maximize(ch.difference_map(U), opts)
            est = _clip01(res.value / n)
        elif p == 0:
            est = 0.0
        return ErrorRateReport(exact, (low, high), mixed, "depolarizing-bracket", est, n)

    mixed = _mixed_upper(U, ch, reg, opts)
    dmap = ch.difference_map(U)
    # e <= e_1, and e_1 is bounded through the eigenphase arcs of each term
    high = dmap.trace_distance_upper()
    low, est = 0.0, None
    if point_estimate:
        res = maximize(dmap, opts)
        low = min(_clip01(res.lower_bound / n), high)
        est = _clip01(res.value / n)
    return ErrorRateReport(None, (low, high), mixed, "mixed-unitary", est, n)


def _mixed_upper(U, ch, reg, opts):
    """Convexity bound ``sum_k p_k D(I, U V_k^dagger U^dagger) / n``."""
    total = 0.0
    for p, V in ch.terms:
        if p == 0:
            continue
        P = recovery_operation(U, V)
        total += p * d_unitary(np.eye(reg.dim), P, opts, register=reg).value
    return _clip01(total / reg.n)


@dataclass(frozen=True)
class CostBounds:
    """Lower bounds on the circuit cost and experiment cost of the recovery operation."""

    circuit_cost_lb: float
    experiment_cost_lb: float

    def to_json(self) -> dict:
        return {"circuit_cost_lb": self.circuit_cost_lb, "experiment_cost_lb": self.experiment_cost_lb}


def cost_lower_bounds(e: float, n: int) -> CostBounds:
    """``C >= 4 sqrt(2) n e`` and ``R >= n e / 2`` for an error rate ``e``."""
    if e < 0:
        raise ValueError(f"error rate must be nonnegative, got {e}")
    if n < 1:
        raise ValueError(f"number of qudits must be positive, got {n}")
    return CostBounds(4 * math.sqrt(2) * n * e, n * e / 2)


def averaged_cost_lower_bounds(report: ErrorRateReport) -> CostBounds:
    """Lower bounds on ``sum_k p_k C(P_k)`` and ``sum_k p_k R(P_k)`` for a mixed-unitary noise.

    The convexity bound makes the weighted recovery costs at least the
    single-recovery bounds evaluated at the proven lower end of the rate.
    """
    return cost_lower_bounds(report.bracket[0], report.n)


@dataclass
class OrderingReport:
    """Comparison of the W1 error rate with the trace-distance error rate."""

    e_w1: float
    e_trace: float
    holds: bool
    slack: float


def error_rate_ordering_check(U, ch: NoiseChannel, options: AscentOptions | None = None,
                              tolerance: float = 2e-2) -> OrderingReport:
    """Checks ``e <= e_1`` with ``e_1 = max_rho ||U rho U^dagger - V(rho)||_1 / 2``."""
    U = as_unitary(U)
    reg = resolve_register(U, ch.register)
    dmap = ch.difference_map(U)
    opts = options or AscentOptions()
    e = maximize(dmap, opts).value / reg.n
    e1 = maximize(dmap, opts, objective="trace").value
    return OrderingReport(e, e1, e <= e1 + tolerance, e1 - e)


def average_gate_fidelity_reference(ch: NoiseChannel) -> float | None:
    """Average gate fidelity of depolarizing or unitary noise; ``None`` for other channels.

    Depolarizing: ``1 - p (1 - 1/d)``, which is ``1 - p/2`` for one qubit.
    Unitary ``E``: ``(d + |Tr E|^2) / (d (d + 1))``, which is
    ``1/3 + 2/3 cos^2(theta)`` for eigenvalues ``e^{+-i theta}``.
    """
    if ch.kind == "depolarizing":
        d = ch.register.dim if ch.register is not None else 2
        return 1.0 - ch.p * (1.0 - 1.0 / d)
    if ch.kind == "unitary":
        E = ch.terms[0][1]
        d = E.shape[0]
        return float((d + abs(np.trace(E)) ** 2) / (d * (d + 1)))
    return None

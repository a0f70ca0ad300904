"""Measurement-probability bounds and per-gate tolerance budgets for gate sequences.

For a POVM element ``M`` with largest eigenvalue ``lambda_0``, the outcome
probabilities of ``U psi`` and ``V psi`` differ by at most
``2 lambda_0 D(U, V)``. Distances of a gate sequence add up, so a per-gate
budget ``G = alpha / (2 t max_m lambda_0(M_m))`` keeps every outcome of a
``t``-gate circuit within ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ascent import AscentOptions
from .distance import d_unitary
from .linalg import QuditRegister, as_hermitian, as_unitary

__all__ = [
    "Povm",
    "BudgetReport",
    "ScenarioReport",
    "largest_eigenvalue",
    "povm_bound",
    "is_local_product",
    "sequence_bound",
    "tolerance_budget",
    "example1_povm",
    "example1_gates",
    "example1_scenario",
]


def largest_eigenvalue(M) -> float:
    return float(np.linalg.eigvalsh(as_hermitian(M))[-1])


@dataclass
class Povm:
    """Measurement with PSD elements summing to the identity (both within ``1e-9``)."""

    elements: list

    def __post_init__(self):
        if not self.elements:
            raise ValueError("a POVM needs at least one element")
        els = [as_hermitian(M) for M in self.elements]
        dim = els[0].shape[0]
        for i, M in enumerate(els):
            if M.shape != (dim, dim):
                raise ValueError(f"POVM element {i} has shape {M.shape}, expected {(dim, dim)}")
            lam = np.linalg.eigvalsh(M)[0]
            if lam < -1e-9:
                raise ValueError(f"POVM element {i} has negative eigenvalue {lam:.3g}")
        err = float(np.max(np.abs(sum(els) - np.eye(dim))))
        if err > 1e-9:
            raise ValueError(f"POVM elements do not sum to the identity (max deviation {err:.3g})")
        self.elements = els

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def lambda_max(self) -> float:
        return max(largest_eigenvalue(M) for M in self.elements)

    def probabilities(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return np.array([np.vdot(psi, M @ psi).real for M in self.elements])


def povm_bound(M, distance: float) -> float:
    """``2 lambda_0(M) D``: bound on ``|<psi|U^dag M U|psi> - <psi|V^dag M V|psi>|``."""
    if distance < 0:
        raise ValueError(f"distance must be nonnegative, got {distance}")
    M = as_hermitian(M)
    if np.linalg.eigvalsh(M)[0] < -1e-9:
        raise ValueError("POVM element must be positive semidefinite")
    return 2.0 * largest_eigenvalue(M) * distance


def is_local_product(V, register: QuditRegister | None = None, atol: float = 1e-9) -> bool:
    """True if ``V`` is a tensor product of single-qudit operators.

    Splits off one qudit at a time and tests that the realigned matrix has
    rank one.
    """
    V = np.asarray(V, dtype=complex)
    reg = register or QuditRegister.from_dim(V.shape[0])
    d = reg.d
    rest = V
    for k in range(reg.n - 1):
        m = rest.shape[0] // d
        R = rest.reshape(d, m, d, m).transpose(0, 2, 1, 3).reshape(d * d, m * m)
        s = np.linalg.svd(R, compute_uv=False)
        if s.size > 1 and s[1] > atol * max(1.0, s[0]):
            return False
        # the right factor of the rank-one split
        j = int(np.argmax(np.abs(R).sum(axis=1)))
        row = R[j]
        rest = row.reshape(m, m) / np.linalg.norm(row) * math.sqrt(m)
    return True


@dataclass
class BudgetReport:
    """Per-gate distances of a gate sequence and the derived probability bound."""

    per_gate_distances: list[float]
    sum: float
    lambda_max: float
    probability_bound: float
    per_gate_threshold: float | None = None
    premise_violated: bool = False
    methods: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "per_gate_distances": [float(x) for x in self.per_gate_distances],
            "sum": float(self.sum),
            "lambda_max": float(self.lambda_max),
            "probability_bound": float(self.probability_bound),
            "per_gate_threshold": None if self.per_gate_threshold is None else float(self.per_gate_threshold),
            "premise_violated": bool(self.premise_violated),
            "methods": list(self.methods),
        }


def sequence_bound(pairs, options: AscentOptions | None = None, povm: Povm | None = None,
                   alpha: float | None = None, register: QuditRegister | None = None) -> BudgetReport:
    """Bounds ``D(U_t ... U_1, V_t ... V_1)`` by ``sum_k D(U_k, V_k)``.

    Args:
        pairs: Ordered ``(U_k, V_k)`` pairs, ideal first.
        options: Ascent settings for non-catalog pairs.
        povm: Measurement for the probability bound; without one the bound
            uses ``lambda_max = 1``, valid for every POVM.
        alpha: Probability tolerance; sets ``per_gate_threshold``.
        register: Register of the gates; qubits if omitted.

    ``premise_violated`` is set when some ``V_k`` is not a product of
    single-qudit gates, the case the additivity argument covers.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("gate sequence is empty")
    dims = set()
    for U, V in pairs:
        dims.update({np.shape(U)[0], np.shape(V)[0]})
    if len(dims) != 1:
        raise ValueError(f"gates act on different dimensions {sorted(dims)}")
    dim = dims.pop()
    reg = register or QuditRegister.from_dim(dim)
    distances, methods = [], []
    premise_violated = False
    for U, V in pairs:
        U, V = as_unitary(U), as_unitary(V)
        est = d_unitary(U, V, options, register=reg)
        distances.append(est.value)
        methods.append(est.method)
        premise_violated |= not is_local_product(V, reg)
    total = float(sum(distances))
    lam = 1.0
    if povm is not None:
        if povm.dim != dim:
            raise ValueError(f"POVM acts on dimension {povm.dim}, gates on {dim}")
        lam = povm.lambda_max
    threshold = None
    if alpha is not None:
        threshold = alpha / (2 * len(pairs) * lam)
    return BudgetReport(distances, total, lam, 2 * lam * total, threshold, premise_violated, methods)


def tolerance_budget(alpha: float, t: int, povm: Povm) -> float:
    """Per-gate distance threshold ``alpha / (2 t max_m lambda_0(M_m))``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if int(t) != t or t < 1:
        raise ValueError(f"t must be a positive integer, got {t}")
    return alpha / (2 * int(t) * povm.lambda_max)


def example1_povm() -> Povm:
    """Eight-element single-qubit POVM: six rank-one elements of weight 1/4 and two of weight 1/4 on the poles."""
    def equator(phase):
        return np.array([[1, np.exp(1j * phase)], [np.exp(-1j * phase), 1]]) / 8

    els = [equator(-math.pi / 2), equator(math.pi / 2), equator(0.0), equator(math.pi),
           equator(math.pi / 4), equator(5 * math.pi / 4),
           np.diag([0.25, 0.0]), np.diag([0.0, 0.25])]
    return Povm([np.asarray(M, dtype=complex) for M in els])


def example1_gates(theta: float, t: int = 5, seed: int = 0):
    """Ideal diagonal qubit gates and their noisy versions ``U_k diag(e^{i theta}, e^{-i theta})``."""
    rng = np.random.default_rng(seed)
    E = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
    pairs = []
    for _ in range(t):
        a, b = rng.uniform(0, 2 * math.pi, size=2)
        U = np.diag([np.exp(1j * a), np.exp(1j * b)])
        pairs.append((U, U @ E))
    return pairs


@dataclass
class ScenarioReport:
    theta: float
    alpha: float
    t: int
    threshold: float
    distance: float
    admissible: bool
    admissible_ranges: list[tuple[float, float]]
    sequence: BudgetReport

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "alpha": self.alpha,
            "t": self.t,
            "threshold": self.threshold,
            "distance": self.distance,
            "admissible": self.admissible,
            "admissible_ranges": [list(r) for r in self.admissible_ranges],
            "sequence": self.sequence.to_json(),
        }


def example1_scenario(theta: float, alpha: float = 0.3, t: int = 5, seed: int = 0) -> ScenarioReport:
    """Checks whether noise ``diag(e^{i theta}, e^{-i theta})`` on ``t`` diagonal gates fits the budget.

    Admissible noise angles in ``[0, pi]`` are
    ``[0, arcsin G] U [pi - arcsin G, pi]``.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    povm = example1_povm()
    G = tolerance_budget(alpha, t, povm)
    seq = sequence_bound(example1_gates(theta, t, seed), povm=povm, alpha=alpha)
    dist = max(seq.per_gate_distances)
    if G >= 1.0:
        ranges = [(0.0, math.pi)]
    else:
        a = math.asin(G)
        ranges = [(0.0, a), (math.pi - a, math.pi)]
    return ScenarioReport(theta, alpha, t, G, dist, dist <= G + 1e-12, ranges, seq)

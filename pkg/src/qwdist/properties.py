"""Numerical check of the structural properties of the unitary distance ``D``.

Each property is evaluated on a given triple ``(U, V, M)`` plus random
single-qudit unitaries drawn from ``seed``. Inequalities are allowed a slack
and the two sides of equalities must agree within a tolerance, both
absorbing the ascent error of numeric distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ascent import AscentOptions
from .distance import d_unitary
from .linalg import QuditRegister, as_unitary, haar_random_unitary, tensor

__all__ = ["PropertyCheck", "PropertyReport", "property_suite", "SUITE_OPTIONS"]

# fewer restarts than the default: the suite evaluates about a dozen distances
SUITE_OPTIONS = AscentOptions(restarts=8, refine=2)


@dataclass
class PropertyCheck:
    """One property: ``relation`` is ``"=="``, ``"<="`` or ``">="`` between ``lhs`` and ``rhs``."""

    number: int
    name: str
    lhs: float
    rhs: float
    relation: str
    tolerance: float
    passed: bool

    @property
    def slack(self) -> float:
        """Margin by which the property holds (negative when violated, before tolerance)."""
        if self.relation == "==":
            return -abs(self.lhs - self.rhs)
        if self.relation == "<=":
            return self.rhs - self.lhs
        return self.lhs - self.rhs


@dataclass
class PropertyReport:
    checks: list[PropertyCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[PropertyCheck]:
        return [c for c in self.checks if not c.passed]

    def __bool__(self):
        return self.passed


def _check(number, name, lhs, rhs, relation, tol):
    if relation == "==":
        ok = abs(lhs - rhs) <= tol
    elif relation == "<=":
        ok = lhs <= rhs + tol
    else:
        ok = lhs >= rhs - tol
    return PropertyCheck(number, name, float(lhs), float(rhs), relation, tol, bool(ok))


def _phase_distance(U, V) -> float:
    """``min_c ||U - c V||_max`` over unit complex ``c`` (approximate, via the overlap phase)."""
    ov = np.vdot(V, U)
    c = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.max(np.abs(U - c * V)))


def property_suite(U, V, M, seed: int = 0, options: AscentOptions | None = None,
                   inequality_slack: float = 2e-2, equality_tolerance: float = 2e-2) -> PropertyReport:
    """Evaluates properties 1-10 of ``D`` on ``(U, V, M)``.

    Properties, in order: faithfulness, symmetry, triangle inequality,
    right invariance, invariance under a common product of single-qudit
    unitaries on the left, bounds ``0 <= D <= n``, ``D(I, U) = D(I, U^dag)``,
    the bound on composed gates, superadditivity under tensor products, and
    subadditivity over the two tensor factors. Properties 8-10 use extra
    random unitaries drawn from ``seed``.
    """
    U, V, M = as_unitary(U), as_unitary(V), as_unitary(M)
    if not U.shape == V.shape == M.shape:
        raise ValueError("U, V and M must have the same shape")
    reg = QuditRegister.from_dim(U.shape[0])
    n, dim = reg.n, reg.dim
    opts = options or SUITE_OPTIONS
    rng = np.random.default_rng(seed)
    ineq, eq = inequality_slack, equality_tolerance
    I = np.eye(dim)

    def D(A, B):
        return d_unitary(A, B, opts, register=reg if A.shape[0] == dim else None).value

    out = PropertyReport()
    d_uv = D(U, V)
    d_uu = D(U, U)
    distinct = _phase_distance(U, V) > 1e-6
    faithful = d_uu <= eq and (d_uv > 0 if distinct else d_uv <= eq)
    out.checks.append(PropertyCheck(1, "faithfulness", d_uu, 0.0, "==", eq, bool(faithful)))
    out.checks.append(_check(2, "symmetry", d_uv, D(V, U), "==", eq))
    out.checks.append(_check(3, "triangle inequality", d_uv, D(U, M) + D(M, V), "<=", ineq))
    out.checks.append(_check(4, "right unitary invariance", D(U @ M, V @ M), d_uv, "==", eq))

    N = tensor(*[haar_random_unitary(reg.d, rng) for _ in range(n)])
    out.checks.append(_check(5, "left invariance under local unitaries", D(N @ U, N @ V), d_uv, "==", eq))
    out.checks.append(PropertyCheck(6, "bounds", d_uv, float(n), "<=", ineq,
                                    bool(-ineq <= d_uv <= n + ineq)))
    out.checks.append(_check(7, "conjugate transpose invariance", D(I, U), D(I, U.conj().T), "==", eq))

    U1, U2, V1, V2 = (haar_random_unitary(dim, rng) for _ in range(4))
    lhs = D(U2 @ U1, V2 @ V1)
    out.checks.append(_check(8, "composition bound", lhs, D(U1.conj().T, U2) + D(V1.conj().T, V2), "<=", ineq))

    # tensor properties on a two-qudit product built from single-qudit factors
    a1, a2, b1, b2 = (haar_random_unitary(reg.d, rng) for _ in range(4))
    pair_reg = QuditRegister(2, reg.d)
    Id = np.eye(reg.d)
    D2 = lambda A, B: d_unitary(A, B, opts, register=pair_reg).value  # noqa: E731
    D1 = lambda A, B: d_unitary(A, B, opts, register=QuditRegister(1, reg.d)).value  # noqa: E731
    d_prod = D2(np.kron(a1, a2), np.kron(b1, b2))
    out.checks.append(_check(9, "superadditivity", d_prod, D1(a1, b1) + D1(a2, b2), ">=", ineq))
    rhs = D2(np.kron(a1, Id), np.kron(b1, Id)) + D2(np.kron(Id, a2), np.kron(Id, b2))
    out.checks.append(_check(10, "subadditivity over factors", d_prod, rhs, "<=", ineq))
    return out

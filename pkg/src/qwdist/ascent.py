"""Multi-start maximization of a W1 (or trace) distance over pure input states.

The objective is ``f(psi) = ||X(psi)||`` for a linear map
``X(psi) = U psi psi^dagger U^dagger - N(psi psi^dagger)`` with ``N`` a
mixture of unitary conjugations and complete depolarization. Each norm
evaluation returns a dual observable ``H`` with ``f(psi') >= <psi'|K|psi'>``
for every ``psi'``, where ``K`` is the adjoint of the map applied to ``H``.
The main step therefore jumps to the top eigenvector of ``K``, which can only
raise that lower bound; when it fails to improve ``f`` a projected gradient
step with step halving is tried instead.

Every start is first climbed on a cheap surrogate (the larger of the
trace-norm and marginal bounds); only the best ``refine`` starts are then
climbed on the full W1 norm, warm-starting each solve from the previous one.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import QuditRegister, haar_random_vector, trace_norm
from .w1 import SolverOptions, _best_simple_dual, _w1_norm_impl

__all__ = ["AscentOptions", "DifferenceMap", "AscentResult", "maximize"]


@dataclass(frozen=True)
class AscentOptions:
    """Settings of the multi-start ascent.

    ``restarts`` Haar-random starts are drawn from seeds
    ``seed, seed + 1, ...``; ``refine`` of them get the full W1 ascent.
    """

    restarts: int = 32
    seed: int = 0
    refine: int = 4
    max_steps: int = 60
    min_step: float = 1e-4
    rel_improvement: float = 1e-7
    solver: SolverOptions = field(default_factory=SolverOptions)
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.refine < 1:
            raise ValueError("refine must be at least 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not self.min_step > 0:
            raise ValueError("min_step must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


class DifferenceMap:
    """``psi -> U psi psi^dagger U^dagger - sum_k p_k W_k psi psi^dagger W_k^dagger - q I / dim``.

    Args:
        ideal: Unitary ``U``.
        noisy: Pairs ``(p_k, W_k)``.
        depolarizing: Weight ``q`` of the completely depolarized output.
        register: Register of the operators.
    """

    def __init__(self, ideal, noisy, depolarizing: float = 0.0, register: QuditRegister | None = None):
        self.ideal = np.asarray(ideal, dtype=complex)
        self.noisy = [(float(p), np.asarray(W, dtype=complex)) for p, W in noisy if p != 0]
        self.depolarizing = float(depolarizing)
        self.register = register or QuditRegister.from_dim(self.ideal.shape[0])
        self.dim = self.register.dim
        total = sum(p for p, _ in self.noisy) + self.depolarizing
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"noisy weights sum to {total:.12g}, expected 1")

    @classmethod
    def unitaries(cls, U, V, register=None) -> "DifferenceMap":
        return cls(U, [(1.0, V)], 0.0, register)

    def __call__(self, psi) -> np.ndarray:
        a = self.ideal @ psi
        X = np.outer(a, a.conj())
        for p, W in self.noisy:
            b = W @ psi
            X -= p * np.outer(b, b.conj())
        if self.depolarizing:
            X -= self.depolarizing / self.dim * np.eye(self.dim)
        return 0.5 * (X + X.conj().T)

    def adjoint(self, H) -> np.ndarray:
        K = self.ideal.conj().T @ H @ self.ideal
        for p, W in self.noisy:
            K -= p * (W.conj().T @ H @ W)
        if self.depolarizing:
            K -= self.depolarizing * np.trace(H) / self.dim * np.eye(self.dim)
        return 0.5 * (K + K.conj().T)

    def trace_distance_upper(self) -> float:
        """Upper bound on ``max_psi ||X(psi)||_1 / 2`` from eigenphase arcs."""
        from .distance import smallest_arc

        total = self.depolarizing * (1.0 - 1.0 / self.dim)
        for p, W in self.noisy:
            theta = smallest_arc(self.ideal.conj().T @ W).theta
            total += p * (math.sin(theta / 2) if theta < math.pi else 1.0)
        return min(1.0, total)


@dataclass
class AscentResult:
    """Best state found by :func:`maximize` and its certified values."""

    value: float
    lower_bound: float
    state: np.ndarray
    certificate: object | None
    restarts_used: int
    converged: bool
    start_values: list[float]
    steps: int


def _evaluate(dmap, psi, objective, solver, warm):
    X = dmap(psi)
    reg = dmap.register
    if objective == "trace":
        w, V = np.linalg.eigh(X)
        H = 0.5 * (V * np.sign(w)) @ V.conj().T
        v = 0.5 * float(np.abs(w).sum())
        return v, v, H, None, None
    if objective == "surrogate":
        low, H, _ = _best_simple_dual(X, reg)
        return low, low, H, None, None
    cert, state = _w1_norm_impl(X, reg, solver, warm)
    H = cert.dual
    return cert.value, cert.lower_bound, H, cert, state


def _climb(dmap, psi, objective, opts, warm=None):
    """Monotone ascent from ``psi``; returns ``(value, low, psi, cert, steps, converged, warm)``."""
    solver = opts.solver
    f, low, H, cert, warm = _evaluate(dmap, psi, objective, solver, warm)
    step = 0.5
    converged = False
    steps = 0
    for steps in range(1, opts.max_steps + 1):
        K = dmap.adjoint(H)
        w, V = np.linalg.eigh(K)
        cand = V[:, -1]
        moved = False
        if abs(abs(np.vdot(cand, psi)) - 1.0) > 1e-12:
            res = _evaluate(dmap, cand, objective, solver, warm)
            if res[0] > f * (1 + opts.rel_improvement) + 1e-14:
                gain = res[0] - f
                psi, (f, low, H, cert, warm) = cand, res
                moved = True
        if not moved:
            Kpsi = K @ psi
            grad = Kpsi - np.vdot(psi, Kpsi).real * psi
            gnorm = np.linalg.norm(grad)
            if gnorm < 1e-12:
                converged = True
                break
            grad /= gnorm
            while step >= opts.min_step:
                trial = psi + step * grad
                trial /= np.linalg.norm(trial)
                res = _evaluate(dmap, trial, objective, solver, warm)
                if res[0] > f * (1 + opts.rel_improvement) + 1e-14:
                    gain = res[0] - f
                    psi, (f, low, H, cert, warm) = trial, res
                    moved = True
                    break
                step *= 0.5
            if not moved:
                converged = True
                break
        if gain <= opts.rel_improvement * max(1.0, f):
            converged = True
            break
    return f, low, psi, cert, steps, converged, warm


def _surrogate_job(args):
    dmap, seed, opts, objective = args
    psi = haar_random_vector(dmap.dim, seed)
    f, _, psi, _, _, _, _ = _climb(dmap, psi, objective, opts)
    return f, psi


def _refine_job(args):
    dmap, psi, opts, objective = args
    return _climb(dmap, psi, objective, opts)


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def maximize(dmap: DifferenceMap, options: AscentOptions | None = None,
             objective: str = "w1", extra_starts=()) -> AscentResult:
    """Maximizes ``||X(psi)||`` over unit vectors ``psi``.

    Args:
        dmap: The linear map ``psi -> X(psi)``.
        options: Ascent settings.
        objective: ``"w1"`` for the W1 norm or ``"trace"`` for half the
            trace norm.
        extra_starts: Additional deterministic start vectors, tried before
            the random ones.

    Returns:
        An :class:`AscentResult`. ``lower_bound`` is certified for the
        returned state; ``value`` is the solver's (upper) value there.
    """
    opts = options or AscentOptions()
    if objective not in ("w1", "trace"):
        raise ValueError(f"objective must be 'w1' or 'trace', got {objective!r}")
    seeds = [opts.seed + i for i in range(opts.restarts)]
    cheap = "surrogate" if objective == "w1" else "trace"
    screened = _map(_surrogate_job, [(dmap, s, opts, cheap) for s in seeds], opts.workers)
    starts = [np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in extra_starts]
    screened_vals = [f for f, _ in screened]
    order = sorted(range(len(screened)), key=lambda i: -screened_vals[i])
    starts += [screened[i][1] for i in order[: opts.refine]]
    results = _map(_refine_job, [(dmap, psi, opts, objective) for psi in starts], opts.workers)

    best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    f, low, psi, cert, _, _, _ = results[best]
    return AscentResult(
        value=float(f),
        lower_bound=float(low),
        state=psi,
        certificate=cert,
        restarts_used=len(seeds) + len(extra_starts),
        converged=all(r[5] for r in results) and (cert is None or cert.converged),
        start_values=[float(r[0]) for r in results],
        steps=sum(r[4] for r in results),
    )


def state_value(dmap: DifferenceMap, psi, solver: SolverOptions | None = None):
    """W1 certificate of ``X(psi)`` for one state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    cert, _ = _w1_norm_impl(dmap(psi), dmap.register, solver or SolverOptions())
    return cert


def trace_distance_at(dmap: DifferenceMap, psi) -> float:
    return 0.5 * trace_norm(dmap(np.asarray(psi, dtype=complex)))


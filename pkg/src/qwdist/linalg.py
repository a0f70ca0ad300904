"""Dense linear algebra over registers of qudits.

Operators are plain ``numpy`` arrays of shape ``(dim, dim)`` with
``dim = d**n``. Qudit ``0`` is the leftmost (most significant) tensor factor,
so the basis state ``|x_0 x_1 ... x_{n-1}>`` has index
``sum_i x_i * d**(n - 1 - i)``.

The ``as_hermitian``, ``as_density_matrix`` and ``as_unitary`` helpers
validate (and for Hermitian inputs, symmetrize) matrices at API boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

MAX_DIM = 256


class NumericError(RuntimeError):
    """Raised when a numerical routine fails to converge."""


@dataclass(frozen=True)
class QuditRegister:
    """Shape of an ``n``-qudit register with local dimension ``d``."""

    n: int
    d: int = 2

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"number of qudits must be a positive integer, got {self.n}")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"local dimension must be an integer >= 2, got {self.d}")
        if self.d**self.n > MAX_DIM:
            raise ValueError(f"register dimension {self.d ** self.n} exceeds the cap of {MAX_DIM}")

    @property
    def dim(self) -> int:
        return self.d**self.n

    @classmethod
    def from_dim(cls, dim: int, d: int = 2) -> "QuditRegister":
        """Infers the number of qudits from a Hilbert-space dimension."""
        if dim < d:
            raise ValueError(f"dimension {dim} is smaller than the local dimension {d}")
        n = round(math.log(dim, d))
        if d**n != dim:
            raise ValueError(f"dimension {dim} is not a power of the local dimension {d}")
        return cls(n, d)

    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d}

    @classmethod
    def from_json(cls, obj: dict) -> "QuditRegister":
        try:
            return cls(int(obj["n"]), int(obj.get("d", 2)))
        except KeyError as exc:
            raise ValueError(f"register JSON is missing field {exc.args[0]!r}") from None


def resolve_register(matrix: np.ndarray, register: QuditRegister | None = None) -> QuditRegister:
    """Returns ``register`` after checking it against ``matrix`` (qubits if omitted)."""
    dim = matrix.shape[0]
    if register is None:
        return QuditRegister.from_dim(dim)
    if register.dim != dim:
        raise ValueError(f"matrix of dimension {dim} does not fit register {register}")
    return register


def _square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def as_hermitian(A, atol: float = 1e-8) -> np.ndarray:
    """Returns ``(A + A^dagger) / 2`` after checking that ``A`` is nearly Hermitian."""
    A = _square(A)
    skew = np.max(np.abs(A - A.conj().T), initial=0.0)
    if skew > atol * max(1.0, np.max(np.abs(A), initial=0.0)):
        raise ValueError(f"matrix is not Hermitian (max |A - A^dagger| = {skew:.3g})")
    return 0.5 * (A + A.conj().T)


def as_density_matrix(rho, atol: float = 1e-9) -> np.ndarray:
    """Validates a density matrix: Hermitian, unit trace, positive semidefinite."""
    rho = as_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix has trace {tr:.12g}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -atol:
        raise ValueError(f"density matrix has negative eigenvalue {lam_min:.3g}")
    return rho


def as_unitary(U, atol: float = 1e-9) -> np.ndarray:
    """Validates that ``U^dagger U = I`` entrywise within ``atol``."""
    U = _square(U)
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err > atol:
        raise ValueError(f"matrix is not unitary (max |U^dagger U - I| = {err:.3g})")
    return U


def is_unitary(U, atol: float = 1e-9) -> bool:
    try:
        as_unitary(U, atol)
    except ValueError:
        return False
    return True


def partial_trace(A, subsystems: Iterable[int], register: QuditRegister | None = None) -> np.ndarray:
    """Traces out the given qudits.

    Args:
        A: Operator on the full register.
        subsystems: Indices of the qudits to trace out (0-based, 0 = leftmost).
        register: Register of ``A``; qubits are assumed when omitted.

    Returns:
        The reduced operator on the remaining qudits, in their original order.
        Tracing out every qudit gives a ``1 x 1`` array holding ``Tr A``.
    """
    A = _square(A)
    reg = resolve_register(A, register)
    traced = sorted(set(int(i) for i in subsystems))
    if not traced:
        raise ValueError("at least one subsystem must be traced out")
    if traced[0] < 0 or traced[-1] >= reg.n:
        raise ValueError(f"subsystem indices {traced} out of range for {reg.n} qudits")
    n, d = reg.n, reg.d
    keep = [i for i in range(n) if i not in traced]
    T = A.reshape((d,) * (2 * n))
    # einsum labels: rows 0..n-1, columns n..2n-1; traced columns reuse row labels
    rows = list(range(n))
    cols = [i if i in traced else n + i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    R = np.einsum(T, rows + cols, out)
    k = d ** len(keep)
    return R.reshape(k, k)


def reduced_marginals(A, register: QuditRegister | None = None) -> list[np.ndarray]:
    """Single-qudit marginals ``[Tr_{all but i} A for i in range(n)]``."""
    A = _square(A)
    reg = resolve_register(A, register)
    n, d = reg.n, reg.d
    T = A.reshape((d,) * (2 * n))
    out = []
    for i in range(n):
        rows = list(range(n))
        cols = [j if j != i else n + i for j in range(n)]
        out.append(np.einsum(T, rows + cols, [i, n + i]))
    return out


def embed_identity(B, position: int, register: QuditRegister) -> np.ndarray:
    """Inserts an identity factor on qudit ``position`` of ``register``.

    ``B`` acts on the other ``n - 1`` qudits (in order). The result is the
    operator that acts as ``I`` on ``position`` and as ``B`` elsewhere.
    """
    n, d = register.n, register.d
    B = np.asarray(B, dtype=complex)
    if n == 1:
        return complex(B.reshape(-1)[0]) * np.eye(d, dtype=complex)
    T = np.multiply.outer(np.eye(d), B.reshape((d,) * (2 * (n - 1))))
    # axes now: (r_pos, c_pos, rows of B..., cols of B...)
    rows_b = list(range(2, n + 1))
    cols_b = list(range(n + 1, 2 * n))
    rows = rows_b[:position] + [0] + rows_b[position:]
    cols = cols_b[:position] + [1] + cols_b[position:]
    return T.transpose(rows + cols).reshape(register.dim, register.dim)


def tensor(*operators) -> np.ndarray:
    """Kronecker product of operators, leftmost factor first."""
    if not operators:
        raise ValueError("tensor needs at least one operator")
    out = np.asarray(operators[0], dtype=complex)
    for B in operators[1:]:
        B = np.asarray(B, dtype=complex)
        if out.ndim != 2 or B.ndim != 2:
            raise ValueError("tensor expects 2-d operators")
        out = np.kron(out, B)
    return out


def tensor_registers(a: QuditRegister, b: QuditRegister) -> QuditRegister:
    if a.d != b.d:
        raise ValueError(f"cannot concatenate registers with local dimensions {a.d} and {b.d}")
    return QuditRegister(a.n + b.n, a.d)


def hermitian_eig(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``A = V diag(w) V^dagger`` with ascending ``w``."""
    A = as_hermitian(A)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Hermitian eigensolver did not converge on a {A.shape[0]}-dim input: {exc}") from exc
    return w, V


def trace_norm(A) -> float:
    """Schatten 1-norm of a Hermitian operator (sum of |eigenvalues|)."""
    A = _square(A)
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (A + A.conj().T)))))


def operator_norm(A) -> float:
    A = _square(A)
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (A + A.conj().T)))))


def ket(bits: str | Iterable[int], d: int = 2) -> np.ndarray:
    """Computational basis vector, e.g. ``ket("01")``."""
    digits = [int(c) for c in bits]
    idx = 0
    for x in digits:
        if not 0 <= x < d:
            raise ValueError(f"digit {x} out of range for local dimension {d}")
        idx = idx * d + x
    v = np.zeros(d ** len(digits), dtype=complex)
    v[idx] = 1.0
    return v


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def basis_digits(index: int, register: QuditRegister) -> tuple[int, ...]:
    digits = []
    for _ in range(register.n):
        index, r = divmod(index, register.d)
        digits.append(r)
    return tuple(reversed(digits))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_random_vector(dim: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def haar_random_state(register: QuditRegister, seed=None) -> np.ndarray:
    """Haar-random pure density matrix, deterministic in ``seed``."""
    return projector(haar_random_vector(register.dim, seed))


def haar_random_unitary(register: QuditRegister | int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix.

    The phases of ``R``'s diagonal are absorbed into ``Q`` so that the
    distribution is exactly Haar.
    """
    dim = register if isinstance(register, int) else register.dim
    rng = _rng(seed)
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * ph


def random_traceless_hermitian(register: QuditRegister, seed=None) -> np.ndarray:
    rng = _rng(seed)
    dim = register.dim
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = 0.5 * (G + G.conj().T)
    return H - np.trace(H).real / dim * np.eye(dim)


def global_phase_aligned(A, B) -> np.ndarray:
    """Returns ``B`` multiplied by the unit phase that best aligns it with ``A``."""
    ov = np.vdot(B, A)
    if abs(ov) < 1e-300:
        return np.asarray(B)
    return np.asarray(B) * (ov / abs(ov))

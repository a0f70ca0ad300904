"""Standard gates, the closed-form distance catalog and a small gate-expression language.

Expression grammar (``*`` is the matrix product, ``⊗`` or ``kron`` the tensor
product, which binds tighter)::

    expr   := tensor ('*' tensor)*
    tensor := atom (('⊗' | 'kron') atom)*
    atom   := NAME ['(' args ')'] | '(' expr ')'

Names: ``I``, ``X``, ``Y``, ``Z``, ``H``, ``S``, ``T``, ``CNOT``, ``CZ``,
``SWAP``, ``CP(theta=..., k=...)``, ``PERM4(i)``, ``XK(k=..., n=...)``,
``PHASE(theta)``, ``RX/RY/RZ(theta)`` and ``FILE(path)``. A bare ``I`` in a
product adapts to the size of the other factor; ``I(n=3)`` is explicit.
Numeric arguments may use ``pi`` and ``+ - * /``.
"""

from __future__ import annotations

import ast
import itertools
import math
import operator
import re
from dataclasses import dataclass, field

import numpy as np

from .linalg import QuditRegister, as_unitary

__all__ = [
    "GateId",
    "NotInCatalog",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "HADAMARD",
    "CNOT",
    "CZ",
    "SWAP",
    "controlled_phase",
    "permutation4",
    "permutation4_table",
    "tensor_pauli_x",
    "gate_matrix",
    "catalog_distance_value",
    "match_catalog",
    "parse_gate",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.diag([1, -1]).astype(complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

SQRT2 = math.sqrt(2)
_MATCH_ATOL = 1e-12

KINDS = (
    "identity",
    "pauli-x",
    "hadamard",
    "controlled-phase",
    "cz",
    "cnot",
    "swap",
    "permutation-4",
    "tensor-pauli-x",
    "single-site",
    "basis-complement",
    "conjugated",
    "custom",
)


class NotInCatalog(LookupError):
    """Raised when a gate has no closed-form distance from the identity."""


@dataclass(frozen=True, eq=False)
class GateId:
    """Identifier of a gate, with the parameters its kind needs.

    Kinds and parameters:

    * ``identity``: ``n`` qubits.
    * ``pauli-x``, ``hadamard``, ``cz``, ``cnot``, ``swap``: none.
    * ``controlled-phase``: ``theta`` in ``[0, 2 pi)``, ``k`` in 1..4; the
      two-qubit diagonal gate whose ``k``-th entry is ``e^{i theta}``.
    * ``permutation-4``: ``index`` in 1..24 (lexicographic order).
    * ``tensor-pauli-x``: ``X`` on ``k`` of ``n`` qubits, the last ``k`` by
      default or the qubits listed in ``sites``.
    * ``single-site``: ``matrix`` acting on qudit ``sites[0]`` of ``n``.
    * ``basis-complement``: ``matrix`` that maps some basis state to a phase
      times its complement.
    * ``conjugated``: ``(A_0 (x) ... ) base (A_0 (x) ...)^dagger`` with
      single-qudit unitaries ``local_unitaries``.
    * ``custom``: arbitrary ``matrix``.
    """

    kind: str
    theta: float | None = None
    k: int | None = None
    n: int | None = None
    index: int | None = None
    sites: tuple[int, ...] | None = None
    base: "GateId | None" = None
    local_unitaries: tuple | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)
    d: int = 2

    def __post_init__(self):
        kind = self.kind
        if kind not in KINDS:
            raise ValueError(f"unknown gate kind {kind!r}")
        if kind == "identity" and (self.n is None or self.n < 1):
            raise ValueError("identity needs a qubit count n >= 1")
        if kind == "controlled-phase":
            if self.theta is None or not 0.0 <= self.theta < 2 * math.pi:
                raise ValueError(f"controlled-phase theta must lie in [0, 2pi), got {self.theta}")
            if self.k not in (1, 2, 3, 4):
                raise ValueError(f"controlled-phase k must be 1..4, got {self.k}")
        if kind == "permutation-4" and self.index not in range(1, 25):
            raise ValueError(f"permutation index must be 1..24, got {self.index}")
        if kind == "tensor-pauli-x":
            if self.n is None or self.k is None or not 0 <= self.k <= self.n:
                raise ValueError(f"tensor-pauli-x needs 0 <= k <= n, got k={self.k}, n={self.n}")
            if self.sites is not None and (len(self.sites) != self.k
                                           or any(not 0 <= s < self.n for s in self.sites)):
                raise ValueError(f"sites {self.sites} do not fit k={self.k} of n={self.n}")
        if kind == "conjugated":
            if self.base is None or self.local_unitaries is None:
                raise ValueError("conjugated gate needs a base gate and local unitaries")
        if kind in ("custom", "single-site", "basis-complement") and self.matrix is None:
            raise ValueError(f"{kind} gate needs a matrix")

    def describe(self) -> str:
        if self.kind == "controlled-phase":
            return f"CP(theta={self.theta:.6g},k={self.k})"
        if self.kind == "permutation-4":
            return f"PERM4({self.index})"
        if self.kind == "tensor-pauli-x":
            return f"XK(k={self.k},n={self.n})"
        if self.kind == "identity":
            return f"I(n={self.n})"
        if self.kind == "conjugated":
            return f"conjugated({self.base.describe()})"
        return self.kind


def controlled_phase(theta: float, k: int = 4) -> np.ndarray:
    """Two-qubit diagonal gate whose ``k``-th diagonal entry (1-based) is ``e^{i theta}``."""
    if k not in (1, 2, 3, 4):
        raise ValueError(f"k must be 1..4, got {k}")
    diag = np.ones(4, dtype=complex)
    diag[k - 1] = np.exp(1j * theta)
    return np.diag(diag)


_PERMS = list(itertools.permutations(range(4)))


def permutation4(index: int) -> np.ndarray:
    """Permutation matrix ``P_index``; row ``i`` is the unit vector ``e_{pi(i)}``."""
    if index not in range(1, 25):
        raise ValueError(f"permutation index must be 1..24, got {index}")
    return np.eye(4, dtype=complex)[list(_PERMS[index - 1])]


def _complement_target(W, n, d=2):
    """Basis index ``x`` with ``|W x> = phase |x complement>``, or None (qubits only)."""
    if d != 2:
        return None
    dim = 2**n
    mask = dim - 1
    col_abs = np.abs(W)
    for x in range(dim):
        if abs(col_abs[x ^ mask, x] - 1.0) <= _MATCH_ATOL:
            return x
    return None


# distances of the nine permutations that do not send a basis state to its complement
_H_VALUES = [
    (np.eye(4), 0.0),
    (CNOT.real, SQRT2),
    (np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]), SQRT2),
    (np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]), 1.0),
    (np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]), 1.0),
    (np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]]), SQRT2),
    (np.array([[0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]]), SQRT2),
    (np.array([[0, 1, 0, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 0, 1, 0]]), 2.0),
    (np.array([[0, 0, 1, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0]]), 2.0),
]


def permutation4_table() -> list[float]:
    """Distance from the identity of each of ``P_1 .. P_24``."""
    out = []
    for i in range(1, 25):
        P = permutation4(i)
        if _complement_target(P, 2) is not None:
            out.append(2.0)
            continue
        for Hk, value in _H_VALUES:
            if np.array_equal(P.real, Hk):
                out.append(value)
                break
        else:  # pragma: no cover - the two families cover all 24 permutations
            raise AssertionError(f"permutation {i} is not classified")
    return out


def tensor_pauli_x(k: int, n: int, sites=None) -> np.ndarray:
    """``X`` on ``k`` of ``n`` qubits (the last ``k`` unless ``sites`` is given)."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    sites = set(range(n - k, n)) if sites is None else set(sites)
    out = np.ones((1, 1), dtype=complex)
    for q in range(n):
        out = np.kron(out, PAULI_X if q in sites else np.eye(2))
    return out


def gate_matrix(gate: GateId) -> np.ndarray:
    """Unitary matrix of a :class:`GateId`."""
    kind = gate.kind
    if kind == "identity":
        return np.eye(gate.d**gate.n, dtype=complex)
    if kind == "pauli-x":
        return PAULI_X.copy()
    if kind == "hadamard":
        return HADAMARD.copy()
    if kind == "controlled-phase":
        return controlled_phase(gate.theta, gate.k)
    if kind == "cz":
        return CZ.copy()
    if kind == "cnot":
        return CNOT.copy()
    if kind == "swap":
        return SWAP.copy()
    if kind == "permutation-4":
        return permutation4(gate.index)
    if kind == "tensor-pauli-x":
        return tensor_pauli_x(gate.k, gate.n, gate.sites)
    if kind == "conjugated":
        L = np.ones((1, 1), dtype=complex)
        for A in gate.local_unitaries:
            L = np.kron(L, as_unitary(A))
        B = gate_matrix(gate.base)
        if L.shape != B.shape:
            raise ValueError(f"local unitaries of total dimension {L.shape[0]} do not fit base gate "
                             f"of dimension {B.shape[0]}")
        return L @ B @ L.conj().T
    return np.asarray(gate.matrix, dtype=complex)


def catalog_distance_value(gate: GateId) -> float:
    """Closed-form distance ``D(I, gate)``.

    Raises:
        NotInCatalog: For custom gates.
    """
    from .distance import smallest_arc

    kind = gate.kind
    if kind == "identity":
        return 0.0
    if kind in ("pauli-x", "hadamard"):
        return 1.0
    if kind == "controlled-phase":
        return SQRT2 * math.sin(gate.theta / 2)
    if kind in ("cz", "cnot"):
        return SQRT2
    if kind == "swap":
        return 2.0
    if kind == "permutation-4":
        return permutation4_table()[gate.index - 1]
    if kind == "tensor-pauli-x":
        return float(gate.k)
    if kind == "single-site":
        reg = QuditRegister(gate.n, gate.d)
        theta = smallest_arc(_single_site_factor(gate.matrix, gate.sites[0], reg)).theta
        return math.sin(theta / 2) if theta < math.pi else 1.0
    if kind == "basis-complement":
        return float(gate.n)
    if kind == "conjugated":
        return catalog_distance_value(gate.base)
    raise NotInCatalog(f"no closed form for gate kind {kind!r}")


def _phase_match(W, G, atol=_MATCH_ATOL):
    """True if ``W = c G`` entrywise within ``atol`` for a unit complex ``c``."""
    if W.shape != G.shape:
        return False
    c = np.vdot(G, W) / W.shape[0]
    if abs(abs(c) - 1.0) > 1e-9:
        return False
    return float(np.max(np.abs(W - c * G))) <= atol


def _single_site_factor(W, site, reg):
    """The ``d x d`` block ``A`` if ``W = I (x) A (x) I`` on ``site``, else None."""
    d, n = reg.d, reg.n
    T = W.reshape((d,) * (2 * n))
    sl = tuple(slice(None) if q == site else 0 for q in range(n))
    return T[sl + sl]


def _is_single_site(W, reg):
    for site in range(reg.n):
        A = _single_site_factor(W, site, reg)
        ops = [np.eye(reg.d)] * reg.n
        ops[site] = A
        full = ops[0]
        for o in ops[1:]:
            full = np.kron(full, o)
        if np.max(np.abs(W - full)) <= _MATCH_ATOL:
            return site
    return None


def match_catalog(W, register: QuditRegister | None = None) -> GateId | None:
    """Identifies ``W`` (up to global phase) with a catalog gate.

    Matching is exact-matrix: every entry must agree within ``1e-12``.
    Recognized: the identity, ``X`` on a subset of qubits, gates acting on a
    single qudit, two-qubit controlled phases, the 24 two-qubit
    permutations and any gate sending a basis state to its complement.
    """
    W = np.asarray(W, dtype=complex)
    reg = register or QuditRegister.from_dim(W.shape[0])
    n, d = reg.n, reg.d
    if _phase_match(W, np.eye(reg.dim)):
        return GateId("identity", n=n, d=d)
    if d == 2:
        for k in range(1, n + 1):
            for sites in itertools.combinations(range(n), k):
                if _phase_match(W, tensor_pauli_x(k, n, sites)):
                    last = tuple(range(n - k, n))
                    return GateId("tensor-pauli-x", k=k, n=n,
                                  sites=None if sites == last else sites)
    if n == 2 and d == 2:
        for i in range(1, 25):
            if _phase_match(W, permutation4(i)):
                return GateId("permutation-4", index=i)
        diag = np.diagonal(W)
        if np.max(np.abs(W - np.diag(diag))) <= _MATCH_ATOL:
            for k in range(1, 5):
                rest = np.delete(diag, k - 1)
                if np.max(np.abs(rest - rest[0])) <= _MATCH_ATOL and abs(abs(rest[0]) - 1) <= 1e-9:
                    rel = np.angle(diag[k - 1] / rest[0]) % (2 * math.pi)
                    if rel >= 2 * math.pi:
                        rel = 0.0
                    return GateId("controlled-phase", theta=float(rel), k=k)
    site = _is_single_site(W, reg)
    if site is not None:
        return GateId("single-site", n=n, d=d, sites=(site,), matrix=W)
    if _complement_target(W, n, d) is not None:
        return GateId("basis-complement", n=n, matrix=W)
    return None


# --- expression parser -------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>⊗|[*(),=]))")
_ARITH = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
          ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_number(text: str) -> float:
    """Evaluates a numeric argument such as ``pi/2`` or ``3*pi/4``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _ARITH:
            return _ARITH[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(f"unsupported numeric expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError:
        raise ValueError(f"malformed number {text!r}") from None


class _Elastic:
    """A bare identity whose size is fixed by the surrounding product."""


def _split_args(body: str) -> tuple[list[str], dict[str, str]]:
    pos, kw = [], {}
    if not body.strip():
        return pos, kw
    for part in body.split(","):
        if "=" in part:
            k, v = part.split("=", 1)
            kw[k.strip().lower()] = v.strip()
        else:
            pos.append(part.strip())
    return pos, kw


def _arg(pos, kw, name, index, default=None, cast=float):
    if name in kw:
        raw = kw[name]
    elif index < len(pos):
        raw = pos[index]
    elif default is not None:
        return default
    else:
        raise ValueError(f"missing argument {name!r}")
    value = _eval_number(raw)
    if cast is int:
        if value != int(value):
            raise ValueError(f"argument {name!r} must be an integer, got {raw!r}")
        return int(value)
    return value


def _wrap_angle(theta):
    t = theta % (2 * math.pi)
    return 0.0 if t >= 2 * math.pi else t


def _atom(name: str, body: str | None, base_dir=None):
    pos, kw = _split_args(body or "")
    up = name.upper()
    if up == "I":
        if body is None or not (pos or kw):
            return _Elastic()
        return GateId("identity", n=_arg(pos, kw, "n", 0, cast=int))
    if up == "FILE":
        if body is None:
            raise ValueError("FILE needs a path argument")
        from .io import load_matrix

        path = body.strip().strip("'\"")
        if base_dir is not None and not path.startswith("/"):
            import os

            path = os.path.join(base_dir, path)
        return GateId("custom", matrix=as_unitary(load_matrix(path)))
    simple = {
        "X": GateId("pauli-x"),
        "H": GateId("hadamard"),
        "CNOT": GateId("cnot"),
        "CZ": GateId("cz"),
        "SWAP": GateId("swap"),
        "Y": GateId("custom", matrix=PAULI_Y),
        "Z": GateId("custom", matrix=PAULI_Z),
        "S": GateId("custom", matrix=np.diag([1, 1j])),
        "T": GateId("custom", matrix=np.diag([1, np.exp(1j * math.pi / 4)])),
    }
    if up in simple:
        if body is not None and (pos or kw):
            raise ValueError(f"gate {name} takes no arguments")
        return simple[up]
    if body is None:
        raise ValueError(f"unknown gate {name!r}")
    if up == "CP":
        theta = _wrap_angle(_arg(pos, kw, "theta", 0))
        return GateId("controlled-phase", theta=theta, k=_arg(pos, kw, "k", 1, default=4, cast=int))
    if up == "PERM4":
        return GateId("permutation-4", index=_arg(pos, kw, "i", 0, cast=int))
    if up == "XK":
        return GateId("tensor-pauli-x", k=_arg(pos, kw, "k", 0, cast=int), n=_arg(pos, kw, "n", 1, cast=int))
    if up in ("PHASE", "RX", "RY", "RZ"):
        t = _arg(pos, kw, "theta", 0)
        c, s = math.cos(t / 2), math.sin(t / 2)
        mats = {
            "PHASE": np.diag([1, np.exp(1j * t)]),
            "RZ": np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]),
            "RX": np.array([[c, -1j * s], [-1j * s, c]]),
            "RY": np.array([[c, -s], [s, c]]),
        }
        return GateId("custom", matrix=np.asarray(mats[up], dtype=complex))
    raise ValueError(f"unknown gate {name!r}")


class _Parser:
    def __init__(self, text: str, base_dir=None):
        self.text = text
        self.base_dir = base_dir
        self.pos = 0

    def _peek(self):
        m = _TOKEN.match(self.text, self.pos)
        if not m or m.end() == self.pos:
            rest = self.text[self.pos:].strip()
            if not rest:
                return None, None, self.pos
            raise ValueError(f"unexpected character {rest[0]!r} in gate expression {self.text!r}")
        if m.group("num"):
            return "num", m.group("num"), m.end()
        if m.group("name"):
            return "name", m.group("name"), m.end()
        return "op", m.group("op"), m.end()

    def _take(self):
        kind, val, end = self._peek()
        self.pos = end
        return kind, val

    def parse(self):
        node = self._expr()
        kind, val, _ = self._peek()
        if kind is not None:
            raise ValueError(f"unexpected {val!r} in gate expression {self.text!r}")
        return node

    def _expr(self):
        nodes = [self._tensor()]
        while self._peek()[1] == "*":
            self._take()
            nodes.append(self._tensor())
        return ("mul", nodes) if len(nodes) > 1 else nodes[0]

    def _tensor(self):
        nodes = [self._atom()]
        while True:
            kind, val, _ = self._peek()
            if val == "⊗" or (kind == "name" and val.lower() == "kron"):
                self._take()
                nodes.append(self._atom())
            else:
                break
        return ("kron", nodes) if len(nodes) > 1 else nodes[0]

    def _atom(self):
        kind, val = self._take()
        if val == "(" and kind == "op":
            node = self._expr()
            if self._take()[1] != ")":
                raise ValueError(f"missing ')' in gate expression {self.text!r}")
            return node
        if kind != "name":
            raise ValueError(f"expected a gate name in {self.text!r}, got {val!r}")
        body = None
        if self._peek()[1] == "(":
            self._take()
            depth, start = 1, self.pos
            while depth:
                if self.pos >= len(self.text):
                    raise ValueError(f"missing ')' in gate expression {self.text!r}")
                ch = self.text[self.pos]
                depth += ch == "("
                depth -= ch == ")"
                self.pos += 1
            body = self.text[start:self.pos - 1]
        return ("atom", _atom(val, body, self.base_dir))


def _dim(node):
    """Dimension of a parsed node, or None if it is elastic."""
    tag, val = node
    if tag == "atom":
        return None if isinstance(val, _Elastic) else gate_matrix(val).shape[0]
    if tag == "kron":
        out = 1
        for sub in val:
            out *= _dim(sub) or 2
        return out
    dims = {x for x in (_dim(sub) for sub in val) if x is not None}
    if len(dims) > 1:
        raise ValueError(f"matrix product of gates with dimensions {sorted(dims)}")
    return dims.pop() if dims else None


def _evaluate(node, dim):
    tag, val = node
    if tag == "atom":
        if isinstance(val, _Elastic):
            return GateId("identity", n=QuditRegister.from_dim(dim or 2).n)
        return val
    if tag == "kron":
        M = np.ones((1, 1), dtype=complex)
        for sub in val:
            M = np.kron(M, gate_matrix(_evaluate(sub, _dim(sub) or 2)))
        return GateId("custom", matrix=M)
    inner = _dim(node) or dim
    M = None
    for sub in val:
        G = gate_matrix(_evaluate(sub, inner))
        M = G if M is None else M @ G
    return GateId("custom", matrix=M)


def parse_gate(text: str, dim: int | None = None, base_dir=None) -> GateId:
    """Parses a gate expression into a :class:`GateId`.

    Args:
        text: Expression such as ``"CNOT * (H ⊗ I)"``.
        dim: Dimension for a bare elastic ``I`` at top level.
        base_dir: Directory against which ``FILE(...)`` paths are resolved.

    Raises:
        ValueError: On syntax errors, unknown names, bad parameters or
            dimension mismatches.
    """
    if not text or not text.strip():
        raise ValueError("empty gate expression")
    node = _Parser(text, base_dir).parse()
    gate = _evaluate(node, dim if _dim(node) is None else None)
    if dim is not None and gate_matrix(gate).shape[0] != dim:
        raise ValueError(f"gate {text!r} has dimension {gate_matrix(gate).shape[0]}, expected {dim}")
    return gate

"""JSON encodings of matrices, registers, channels and POVMs.

Matrix JSON is ``{"rows": R, "cols": C, "data": [[re, im], ...]}`` in
row-major order; vectors are ``C = 1`` matrices. Errors name the offending
field so that the CLI can report them.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = [
    "matrix_to_json",
    "vector_to_json",
    "matrix_from_json",
    "load_json",
    "load_matrix",
    "dumps",
    "channel_from_json",
    "channel_to_json",
    "povm_from_json",
    "povm_to_json",
]


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got an array of shape {A.shape}")
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in A.reshape(-1)],
    }


def vector_to_json(v) -> dict:
    return matrix_to_json(np.asarray(v, dtype=complex).reshape(-1, 1))


def matrix_from_json(obj, field: str = "matrix") -> np.ndarray:
    """Decodes matrix JSON.

    Args:
        obj: Decoded JSON object.
        field: Name used in error messages.

    Raises:
        ValueError: If the object is malformed.
    """
    if not isinstance(obj, dict):
        raise ValueError(f"field {field!r}: expected a matrix object, got {type(obj).__name__}")
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except KeyError as exc:
        raise ValueError(f"field {field!r}: missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise ValueError(f"field {field!r}: rows and cols must be integers") from None
    if rows < 1 or cols < 1:
        raise ValueError(f"field {field!r}: rows and cols must be positive")
    if not isinstance(data, list) or len(data) != rows * cols:
        n = len(data) if isinstance(data, list) else "no"
        raise ValueError(f"field {field!r}: expected {rows * cols} entries, got {n}")
    out = np.empty(rows * cols, dtype=complex)
    for i, z in enumerate(data):
        if isinstance(z, (int, float)):
            out[i] = z
            continue
        if not (isinstance(z, (list, tuple)) and len(z) == 2):
            raise ValueError(f"field {field!r}: entry {i} must be [re, im]")
        try:
            out[i] = complex(float(z[0]), float(z[1]))
        except (TypeError, ValueError):
            raise ValueError(f"field {field!r}: entry {i} is not numeric") from None
    return out.reshape(rows, cols)


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def load_matrix(path) -> np.ndarray:
    """Loads a matrix from a JSON file; a ``{"matrix": ...}`` wrapper is accepted."""
    obj = load_json(path)
    if isinstance(obj, dict) and "matrix" in obj and "rows" not in obj:
        obj = obj["matrix"]
    return matrix_from_json(obj, field=f"{Path(path).name}")


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed float formatting)."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_plain)


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"object of type {type(x).__name__} is not JSON serializable")


def channel_from_json(obj, register=None):
    """Decodes channel JSON into a :class:`~qwdist.noise.NoiseChannel`.

    Accepted forms: ``{"kind": "depolarizing", "p": 0.1}``,
    ``{"kind": "unitary", "matrix": M}`` and
    ``{"kind": "mixed", "terms": [{"p": 0.5, "matrix": M}, ...]}``.
    """
    from .noise import NoiseChannel

    if not isinstance(obj, dict):
        raise ValueError("channel: expected a JSON object")
    kind = obj.get("kind")
    if kind == "depolarizing":
        if "p" not in obj:
            raise ValueError("channel: missing field 'p'")
        try:
            p = float(obj["p"])
        except (TypeError, ValueError):
            raise ValueError("channel: field 'p' is not a number") from None
        return NoiseChannel.depolarizing(p, register)
    if kind == "unitary":
        if "matrix" not in obj:
            raise ValueError("channel: missing field 'matrix'")
        return NoiseChannel.unitary(matrix_from_json(obj["matrix"], "matrix"))
    if kind == "mixed":
        terms = obj.get("terms")
        if not isinstance(terms, list) or not terms:
            raise ValueError("channel: field 'terms' must be a nonempty list")
        pairs = []
        for i, t in enumerate(terms):
            if not isinstance(t, dict) or "p" not in t or "matrix" not in t:
                raise ValueError(f"channel: terms[{i}] needs fields 'p' and 'matrix'")
            pairs.append((float(t["p"]), matrix_from_json(t["matrix"], f"terms[{i}].matrix")))
        return NoiseChannel.mixed(pairs)
    raise ValueError(f"channel: field 'kind' must be depolarizing, unitary or mixed, got {kind!r}")


def channel_to_json(ch) -> dict:
    if ch.kind == "depolarizing":
        return {"kind": "depolarizing", "p": float(ch.p)}
    if ch.kind == "unitary":
        return {"kind": "unitary", "matrix": matrix_to_json(ch.terms[0][1])}
    return {"kind": "mixed", "terms": [{"p": float(p), "matrix": matrix_to_json(V)} for p, V in ch.terms]}


def povm_from_json(obj):
    from .budget import Povm

    if not isinstance(obj, dict) or not isinstance(obj.get("elements"), list):
        raise ValueError("povm: field 'elements' must be a list of matrices")
    return Povm([matrix_from_json(m, f"elements[{i}]") for i, m in enumerate(obj["elements"])])


def povm_to_json(povm) -> dict:
    return {"elements": [matrix_to_json(M) for M in povm.elements]}

import json

import numpy as np
import pytest

from qwdist.budget import example1_povm
from qwdist.io import (
    channel_from_json,
    channel_to_json,
    dumps,
    load_json,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    povm_from_json,
    povm_to_json,
    vector_to_json,
)
from qwdist.linalg import haar_random_unitary
from qwdist.noise import NoiseChannel, apply_channel


def test_matrix_round_trip():
    U = haar_random_unitary(4, seed=0)
    obj = json.loads(json.dumps(matrix_to_json(U)))
    np.testing.assert_array_equal(matrix_from_json(obj), U)
    v = np.array([1, 1j]) / np.sqrt(2)
    assert matrix_from_json(vector_to_json(v)).shape == (2, 1)


def test_real_entries_accepted():
    M = matrix_from_json({"rows": 1, "cols": 2, "data": [1, 2.5]})
    np.testing.assert_array_equal(M, [[1, 2.5]])


@pytest.mark.parametrize("obj,match", [
    ([1, 2], "expected a matrix object"),
    ({"rows": 2, "cols": 2}, "missing key 'data'"),
    ({"rows": 2, "cols": 2, "data": [[1, 0]]}, "expected 4 entries"),
    ({"rows": 1, "cols": 1, "data": [["a", 0]]}, "not numeric"),
    ({"rows": 1, "cols": 1, "data": [[1, 0, 0]]}, r"\[re, im\]"),
    ({"rows": "x", "cols": 1, "data": []}, "integers"),
    ({"rows": 0, "cols": 1, "data": []}, "positive"),
])
def test_malformed_matrix_names_field(obj, match):
    with pytest.raises(ValueError, match=match) as exc:
        matrix_from_json(obj, field="u")
    assert "'u'" in str(exc.value)


def test_load_errors(tmp_path):
    with pytest.raises(ValueError, match="not found"):
        load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ValueError, match="malformed"):
        load_json(bad)


def test_load_matrix_wrapper(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"matrix": matrix_to_json(np.eye(2))}))
    np.testing.assert_array_equal(load_matrix(path), np.eye(2))


def test_dumps_is_deterministic():
    obj = {"b": np.float64(1.5), "a": [np.bool_(True), np.int64(3)], "c": np.arange(2)}
    assert dumps(obj) == dumps(dict(reversed(list(obj.items()))))
    assert json.loads(dumps(obj)) == {"a": [True, 3], "b": 1.5, "c": [0, 1]}


@pytest.mark.parametrize("ch", [
    NoiseChannel.depolarizing(0.25),
    NoiseChannel.unitary(haar_random_unitary(2, seed=1)),
    NoiseChannel.mixed([(0.5, np.eye(2)), (0.5, np.diag([1, -1]))]),
])
def test_channel_round_trip(ch):
    back = channel_from_json(json.loads(dumps(channel_to_json(ch))))
    rho = np.diag([0.7, 0.3]).astype(complex)
    np.testing.assert_allclose(apply_channel(back, rho), apply_channel(ch, rho), atol=1e-15)


@pytest.mark.parametrize("obj,match", [
    ({"kind": "depolarizing"}, "missing field 'p'"),
    ({"kind": "depolarizing", "p": "x"}, "not a number"),
    ({"kind": "unitary"}, "missing field 'matrix'"),
    ({"kind": "mixed", "terms": []}, "nonempty"),
    ({"kind": "mixed", "terms": [{"p": 1}]}, r"terms\[0\]"),
    ({"kind": "amplitude-damping"}, "kind"),
    ([], "JSON object"),
])
def test_channel_errors(obj, match):
    with pytest.raises(ValueError, match=match):
        channel_from_json(obj)


def test_povm_round_trip():
    povm = povm_from_json(json.loads(dumps(povm_to_json(example1_povm()))))
    assert povm.lambda_max == pytest.approx(0.25)
    with pytest.raises(ValueError, match="elements"):
        povm_from_json({"elems": []})

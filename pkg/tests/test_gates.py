import json
import math

import numpy as np
import pytest

from qwdist.distance import catalog_distance
from qwdist.gates import (
    CNOT,
    CZ,
    HADAMARD,
    PAULI_X,
    SWAP,
    GateId,
    NotInCatalog,
    controlled_phase,
    gate_matrix,
    match_catalog,
    parse_gate,
    permutation4,
    permutation4_table,
    tensor_pauli_x,
)
from qwdist.io import matrix_to_json
from qwdist.linalg import QuditRegister, haar_random_unitary

SQRT2 = math.sqrt(2)


def test_controlled_phase_matrix():
    U = controlled_phase(0.3, 3)
    np.testing.assert_allclose(np.diag(U), [1, 1, np.exp(0.3j), 1])
    np.testing.assert_allclose(controlled_phase(math.pi, 4), CZ)


def test_permutation_matrices_are_lexicographic():
    np.testing.assert_allclose(permutation4(1), np.eye(4))
    np.testing.assert_allclose(permutation4(2), CNOT)
    np.testing.assert_allclose(permutation4(3), SWAP)
    np.testing.assert_allclose(permutation4(24), np.eye(4)[::-1])
    mats = {permutation4(i).real.tobytes() for i in range(1, 25)}
    assert len(mats) == 24


def test_permutation_table_histogram():
    table = permutation4_table()
    assert sorted(set(table)) == [0.0, 1.0, SQRT2, 2.0]
    assert table.count(2.0) == 17
    assert table.count(SQRT2) == 4
    assert table.count(1.0) == 2
    assert table.count(0.0) == 1


def test_catalog_values_exact():
    for k in (1, 2, 3, 4):
        for theta in np.linspace(0, 2 * math.pi, 20, endpoint=False):
            g = GateId("controlled-phase", theta=float(theta), k=k)
            assert abs(catalog_distance(g).value - SQRT2 * math.sin(theta / 2)) <= 1e-12
    assert catalog_distance(GateId("cnot")).value == SQRT2
    assert catalog_distance(GateId("cz")).value == SQRT2
    assert catalog_distance(GateId("swap")).value == 2.0
    assert catalog_distance(GateId("identity", n=3)).value == 0.0
    assert catalog_distance(GateId("tensor-pauli-x", k=2, n=5)).value == 2.0


def test_catalog_estimate_is_tight():
    est = catalog_distance(GateId("swap"))
    assert est.lower_bound == est.value == est.upper_bound
    assert est.method == "analytic-catalog"


def test_custom_gate_not_in_catalog():
    with pytest.raises(NotInCatalog):
        catalog_distance(GateId("custom", matrix=haar_random_unitary(4, seed=0)))


@pytest.mark.parametrize("kwargs,match", [
    ({"kind": "controlled-phase", "theta": 7.0, "k": 1}, "theta"),
    ({"kind": "controlled-phase", "theta": 1.0, "k": 5}, "k must"),
    ({"kind": "permutation-4", "index": 25}, "index"),
    ({"kind": "tensor-pauli-x", "k": 3, "n": 2}, "k <= n"),
    ({"kind": "nonsense"}, "unknown"),
    ({"kind": "custom"}, "matrix"),
])
def test_gate_id_validation(kwargs, match):
    with pytest.raises(ValueError, match=match):
        GateId(**kwargs)


def test_match_catalog_recognizes_gates():
    assert match_catalog(CNOT).kind == "permutation-4"
    assert match_catalog(np.eye(8)).kind == "identity"
    assert match_catalog(np.exp(0.4j) * CZ) is not None
    g = match_catalog(tensor_pauli_x(2, 3, sites=(0, 2)))
    assert catalog_distance(g).value == 2.0
    assert match_catalog(controlled_phase(1.0, 2)).kind == "controlled-phase"
    assert match_catalog(haar_random_unitary(4, seed=1)) is None


def test_match_single_site_gate():
    A = haar_random_unitary(2, seed=2)
    g = match_catalog(np.kron(np.eye(2), A), QuditRegister(2))
    assert g is not None and g.kind == "single-site"


def test_conjugated_gate_keeps_base_value():
    locs = (haar_random_unitary(2, seed=3), haar_random_unitary(2, seed=4))
    g = GateId("conjugated", base=GateId("swap"), local_unitaries=locs)
    U = gate_matrix(g)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-12)
    assert catalog_distance(g).value == 2.0


def test_parse_simple_names():
    np.testing.assert_allclose(gate_matrix(parse_gate("CNOT")), CNOT)
    np.testing.assert_allclose(gate_matrix(parse_gate("H")), HADAMARD)
    assert parse_gate("CP(theta=1.57,k=4)").kind == "controlled-phase"
    assert parse_gate("CP(pi/2, 3)").theta == pytest.approx(math.pi / 2)
    assert parse_gate("PERM4(7)").index == 7
    g = parse_gate("XK(k=2,n=3)")
    assert (g.k, g.n) == (2, 3)


def test_parse_composition_and_tensor():
    U = gate_matrix(parse_gate("CNOT * (H ⊗ I)"))
    np.testing.assert_allclose(U, CNOT @ np.kron(HADAMARD, np.eye(2)), atol=1e-12)
    V = gate_matrix(parse_gate("X kron X"))
    np.testing.assert_allclose(V, np.kron(PAULI_X, PAULI_X))
    # tensor binds tighter than the product
    W = gate_matrix(parse_gate("X ⊗ I * CNOT"))
    np.testing.assert_allclose(W, np.kron(PAULI_X, np.eye(2)) @ CNOT)


def test_parse_elastic_identity():
    assert gate_matrix(parse_gate("I", dim=8)).shape == (8, 8)
    assert gate_matrix(parse_gate("I(n=2)")).shape == (4, 4)


def test_parse_file(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(matrix_to_json(SWAP)))
    g = parse_gate("FILE(g.json)", base_dir=tmp_path)
    np.testing.assert_allclose(gate_matrix(g), SWAP)


@pytest.mark.parametrize("text", ["", "FOO", "CNOT *", "CP(theta=1,k=9)", "CNOT * X", "PERM4(0)", "(CNOT"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_gate(text)


def test_parse_wraps_angles():
    assert parse_gate("CP(theta=9)").theta == pytest.approx(9 - 2 * math.pi)
    assert parse_gate("CP(theta=-pi/2,k=1)").theta == pytest.approx(1.5 * math.pi)


def test_parse_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        parse_gate("CNOT", dim=8)

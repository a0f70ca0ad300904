import math

import numpy as np
import pytest

from qwdist.ascent import AscentOptions
from qwdist.distance import (
    catalog_distance,
    d_single_qudit,
    d_unitary,
    distance_upper_bound,
    reduce_right_invariance,
    single_qudit_witness,
    smallest_arc,
)
from qwdist.gates import CNOT, GateId, controlled_phase, gate_matrix, permutation4
from qwdist.linalg import QuditRegister, haar_random_unitary, haar_random_vector, projector, trace_norm
from qwdist.w1 import marginal_bound, w1_norm

FAST = AscentOptions(restarts=8, refine=2)


def test_reduce_right_invariance():
    U = haar_random_unitary(4, seed=0)
    np.testing.assert_allclose(reduce_right_invariance(U, U), np.eye(4), atol=1e-12)
    np.testing.assert_allclose(reduce_right_invariance(np.eye(4), U), U)
    with pytest.raises(ValueError):
        reduce_right_invariance(np.eye(2), np.eye(4))


def test_smallest_arc_examples():
    assert smallest_arc(np.diag([1, np.exp(1.2j)])).theta == pytest.approx(1.2)
    assert smallest_arc(np.diag([1, 1j, -1, -1j])).theta == pytest.approx(1.5 * math.pi)
    assert smallest_arc(np.eye(3)).theta == pytest.approx(0.0, abs=1e-12)
    # arcs straddling the cut at angle 0
    assert smallest_arc(np.diag([np.exp(-0.3j), np.exp(0.2j)])).theta == pytest.approx(0.5)
    with pytest.raises(ValueError):
        smallest_arc(np.diag([1.0, 2.0]))


def test_smallest_arc_phases_in_range():
    arc = smallest_arc(haar_random_unitary(5, seed=1))
    assert all(0 <= p < 2 * math.pi for p in arc.eigenphases)
    assert 0 <= arc.theta <= 2 * math.pi


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, 2.0, 3.0])
def test_single_qubit_diagonal_noise(theta):
    V = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
    assert d_single_qudit(np.eye(2), V).value == pytest.approx(abs(math.sin(theta)), abs=1e-12)


def test_single_qudit_faithful_and_qutrit_branch():
    U = haar_random_unitary(3, seed=2)
    assert d_single_qudit(U, U).value == pytest.approx(0.0, abs=1e-7)
    w = np.exp(2j * math.pi / 3)
    assert d_single_qudit(np.eye(3), np.diag([1, w, w**2])).value == 1.0


@pytest.mark.parametrize("d,seed", [(2, 0), (2, 1), (2, 2), (3, 3), (4, 4)])
def test_single_qudit_witness_attains_value(d, seed):
    W = haar_random_unitary(d, seed=seed)
    psi = single_qudit_witness(W)
    value = 0.5 * trace_norm(projector(psi) - projector(W @ psi))
    assert value == pytest.approx(d_single_qudit(np.eye(d), W).value, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_single_qubit_formula_against_sampling(seed):
    # for one qudit the W1 distance is half the trace distance
    W = haar_random_unitary(2, seed=seed)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(10_000):
        psi = haar_random_vector(2, rng)
        best = max(best, math.sqrt(max(0.0, 1 - abs(np.vdot(psi, W @ psi)) ** 2)))
    formula = d_single_qudit(np.eye(2), W).value
    assert best <= formula + 1e-9
    assert abs(best - formula) <= 1e-3


def test_dispatch_methods():
    assert d_unitary(np.eye(4), CNOT).method == "analytic-catalog"
    assert d_unitary(np.eye(2), haar_random_unitary(2, seed=0)).method == "single-qudit-arc"
    est = d_unitary(np.eye(4), haar_random_unitary(4, seed=0), FAST)
    assert est.method == "numeric-ascent"
    assert est.lower_bound <= est.value <= est.upper_bound
    with pytest.raises(ValueError, match="method"):
        d_unitary(np.eye(2), np.eye(2), method="exact")


def test_catalog_found_after_right_reduction():
    U = haar_random_unitary(4, seed=5)
    est = d_unitary(U, CNOT @ U)
    assert est.method == "analytic-catalog"
    assert est.value == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("name,G,value", [
    ("CP(1.3,k=2)", controlled_phase(1.3, 2), math.sqrt(2) * math.sin(0.65)),
    ("PERM4(8)", permutation4(8), 1.0),
    ("PERM4(10)", permutation4(10), 2.0),
    ("XK(2,2)", gate_matrix(GateId("tensor-pauli-x", k=2, n=2)), 2.0),
])
def test_numeric_reaches_catalog_values(name, G, value):
    est = d_unitary(np.eye(4), G, FAST, method="numeric")
    assert est.value == pytest.approx(value, abs=1e-2), name


@pytest.mark.parametrize("seed", range(3))
def test_numeric_value_within_certified_bounds(seed):
    reg = QuditRegister(2)
    W = haar_random_unitary(4, seed=10 + seed)
    est = d_unitary(np.eye(4), W, FAST, method="numeric")
    assert est.value <= reg.n
    assert est.upper_bound == pytest.approx(distance_upper_bound(W, reg))
    psi = est.witness_state
    X = projector(psi) - projector(W @ psi)
    assert est.value >= marginal_bound(X, reg) - 1e-9
    assert w1_norm(X, reg).value == pytest.approx(est.value, abs=1e-5)


@pytest.mark.parametrize("n,seed", [(1, 0), (2, 1), (2, 2)])
def test_right_invariance_numeric(n, seed):
    rng = np.random.default_rng(seed)
    dim = 2**n
    U, V, M = (haar_random_unitary(dim, rng) for _ in range(3))
    a = d_unitary(U @ M, V @ M, FAST, method="numeric").value
    b = d_unitary(U, V, FAST, method="numeric").value
    c = d_unitary(np.eye(dim), V @ U.conj().T, FAST, method="numeric").value
    assert abs(a - b) <= 2e-3
    assert abs(b - c) <= 2e-3


def test_estimate_json():
    obj = catalog_distance(GateId("cz")).to_json()
    assert obj["method"] == "analytic-catalog"
    assert obj["value"] == obj["lower_bound"] == obj["upper_bound"]
    assert "witness_state" in obj


def test_catalog_witnesses_attain_values():
    for g in (GateId("cz"), GateId("swap"), GateId("controlled-phase", theta=2.0, k=1),
              GateId("permutation-4", index=20)):
        est = catalog_distance(g)
        psi = est.witness_state
        W = gate_matrix(g)
        assert w1_norm(projector(psi) - projector(W @ psi)).value == pytest.approx(est.value, abs=1e-5)

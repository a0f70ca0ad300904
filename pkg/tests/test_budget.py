import math

import numpy as np
import pytest

from qwdist.ascent import AscentOptions
from qwdist.budget import (
    Povm,
    example1_gates,
    example1_povm,
    example1_scenario,
    is_local_product,
    largest_eigenvalue,
    povm_bound,
    sequence_bound,
    tolerance_budget,
)
from qwdist.distance import d_unitary
from qwdist.gates import CNOT, HADAMARD, SWAP
from qwdist.linalg import QuditRegister, haar_random_unitary, haar_random_vector

FAST = AscentOptions(restarts=8, refine=2)


def random_povm(dim, m, rng):
    """POVM from ``m`` random PSD operators normalized by ``S^{-1/2}``."""
    As = []
    for k in range(m):
        # the first element has full rank so that the sum is invertible
        rank = dim if k == 0 else int(rng.integers(1, dim + 1))
        G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
        As.append(G @ G.conj().T)
    w, V = np.linalg.eigh(sum(As))
    S_inv_half = (V / np.sqrt(w)) @ V.conj().T
    return Povm([S_inv_half @ A @ S_inv_half for A in As])


def test_example1_povm_is_valid():
    povm = example1_povm()
    assert len(povm.elements) == 8
    np.testing.assert_allclose(sum(povm.elements), np.eye(2), atol=1e-15)
    assert povm.lambda_max == pytest.approx(0.25)
    for M in povm.elements:
        assert largest_eigenvalue(M) == pytest.approx(0.25)


def test_povm_validation():
    with pytest.raises(ValueError, match="identity"):
        Povm([np.eye(2) / 3])
    with pytest.raises(ValueError, match="negative"):
        Povm([np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])])
    with pytest.raises(ValueError, match="at least one"):
        Povm([])
    with pytest.raises(ValueError, match="shape"):
        Povm([np.eye(2), np.zeros((4, 4))])


def test_povm_bound_examples():
    M = np.diag([0.25, 0.0])
    assert povm_bound(M, math.sqrt(2)) == pytest.approx(math.sqrt(2) / 2)
    assert povm_bound(M, 0.0) == 0.0
    with pytest.raises(ValueError):
        povm_bound(M, -1.0)
    with pytest.raises(ValueError):
        povm_bound(np.diag([1.0, -1.0]), 1.0)


def test_tolerance_budget_examples():
    assert tolerance_budget(0.3, 5, example1_povm()) == pytest.approx(0.12, abs=1e-12)
    basis = Povm([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert tolerance_budget(0.3, 5, basis) == pytest.approx(0.03)
    assert tolerance_budget(1e-12, 5, basis) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError, match="alpha"):
        tolerance_budget(0.0, 5, basis)
    with pytest.raises(ValueError, match="t must"):
        tolerance_budget(0.3, 0, basis)


def test_example1_scenario():
    rep = example1_scenario(0.1)
    assert rep.threshold == pytest.approx(0.12, abs=1e-12)
    assert rep.admissible
    assert rep.distance == pytest.approx(math.sin(0.1))
    assert rep.sequence.sum == pytest.approx(5 * math.sin(0.1))
    assert rep.admissible_ranges[0][1] == pytest.approx(math.asin(0.12), abs=1e-9)
    assert rep.admissible_ranges[1][0] == pytest.approx(math.pi - math.asin(0.12), abs=1e-9)
    assert not example1_scenario(math.pi / 2).admissible
    assert example1_scenario(math.pi - 0.05).admissible
    with pytest.raises(ValueError):
        example1_scenario(4.0)


def test_example1_gates_are_diagonal():
    for U, V in example1_gates(0.2, 3, seed=1):
        assert np.allclose(U, np.diag(np.diag(U)))
        assert d_unitary(U, V).value == pytest.approx(math.sin(0.2))


def test_sequence_identical_is_zero():
    pairs = [(HADAMARD, HADAMARD), (np.eye(2), np.eye(2))]
    rep = sequence_bound(pairs)
    assert rep.sum == 0.0
    assert rep.probability_bound == 0.0
    assert rep.lambda_max == 1.0


def test_sequence_invariant_under_identity_pairs():
    rng = np.random.default_rng(0)
    pairs = [(haar_random_unitary(2, rng), haar_random_unitary(2, rng)) for _ in range(3)]
    a = sequence_bound(pairs).sum
    b = sequence_bound(pairs[:1] + [(np.eye(2), np.eye(2))] + pairs[1:]).sum
    assert a == pytest.approx(b)


def test_sequence_threshold_and_premise_flag():
    rep = sequence_bound([(np.eye(4), CNOT), (np.eye(4), SWAP)], alpha=0.2)
    assert rep.sum == pytest.approx(math.sqrt(2) + 2)
    assert rep.per_gate_threshold == pytest.approx(0.2 / 4)
    assert rep.premise_violated
    local = sequence_bound([(CNOT, np.kron(HADAMARD, np.eye(2)))], FAST)
    assert not local.premise_violated
    with pytest.raises(ValueError):
        sequence_bound([])
    with pytest.raises(ValueError):
        sequence_bound([(np.eye(2), np.eye(2)), (np.eye(4), np.eye(4))])


def test_two_gate_composition_bound():
    rng = np.random.default_rng(1)
    for _ in range(5):
        U1, U2, V1, V2 = (haar_random_unitary(2, rng) for _ in range(4))
        lhs = d_unitary(U2 @ U1, V2 @ V1).value
        assert lhs <= sequence_bound([(U1, V1), (U2, V2)]).sum + 1e-9


def test_is_local_product():
    reg = QuditRegister(3)
    A, B, C = (haar_random_unitary(2, seed=s) for s in range(3))
    assert is_local_product(np.kron(np.kron(A, B), C), reg)
    assert not is_local_product(np.kron(CNOT, A), reg)
    assert is_local_product(np.eye(8), reg)


def test_random_povm_trials_never_violate_bound():
    rng = np.random.default_rng(0)
    D = math.sqrt(2)
    for _ in range(1000):
        povm = random_povm(4, int(rng.integers(2, 6)), rng)
        psi = haar_random_vector(4, rng)
        pu = povm.probabilities(psi)
        pv = povm.probabilities(CNOT @ psi)
        for M, a, b in zip(povm.elements, pu, pv):
            assert abs(a - b) <= povm_bound(M, D) + 1e-12

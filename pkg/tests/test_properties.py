import numpy as np
import pytest

from qwdist.gates import CNOT, SWAP
from qwdist.linalg import haar_random_unitary
from qwdist.properties import PropertyCheck, property_suite


@pytest.mark.parametrize("dim,seed", [(2, 0), (2, 1), (4, 2)])
def test_suite_passes_on_random_triples(dim, seed):
    rng = np.random.default_rng(seed)
    U, V, M = (haar_random_unitary(dim, rng) for _ in range(3))
    report = property_suite(U, V, M, seed=seed)
    assert [c.number for c in report.checks] == list(range(1, 11))
    assert report.passed, [(c.name, c.lhs, c.rhs) for c in report.failures()]


def test_suite_on_catalog_gates():
    report = property_suite(np.eye(4), CNOT, SWAP)
    assert report
    sym = report.checks[1]
    assert sym.lhs == pytest.approx(np.sqrt(2))


def test_suite_on_equal_unitaries():
    U = haar_random_unitary(2, seed=9)
    report = property_suite(U, U, haar_random_unitary(2, seed=10))
    assert report.checks[0].passed
    assert report.checks[0].lhs == pytest.approx(0.0, abs=1e-9)


def test_slack_sign():
    assert PropertyCheck(3, "t", 1.0, 2.0, "<=", 0.0, True).slack == 1.0
    assert PropertyCheck(9, "s", 1.0, 2.0, ">=", 0.0, False).slack == -1.0
    assert PropertyCheck(2, "e", 1.0, 1.5, "==", 0.0, False).slack == -0.5


def test_shape_mismatch():
    with pytest.raises(ValueError):
        property_suite(np.eye(2), np.eye(4), np.eye(2))

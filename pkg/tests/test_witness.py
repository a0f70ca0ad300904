import math

import numpy as np
import pytest

from qwdist.gates import controlled_phase
from qwdist.linalg import QuditRegister, partial_trace, projector, trace_norm
from qwdist.w1 import verify_certificate, w1_norm
from qwdist.witness import controlled_phase_difference, witness_controlled_phase

SQRT2 = math.sqrt(2)


def _random_amplitudes(rng):
    a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return a / np.linalg.norm(a)


def test_difference_matches_direct_conjugation():
    rng = np.random.default_rng(0)
    a = _random_amplitudes(rng)
    U = controlled_phase(1.1, 3)
    rho = projector(a)
    np.testing.assert_allclose(controlled_phase_difference(1.1, a), rho - U @ rho @ U.conj().T, atol=1e-14)


def test_extremal_state_at_pi():
    w = witness_controlled_phase(math.pi, [0.5, 0, 1 / SQRT2, 0.5])
    assert w.total == pytest.approx(SQRT2, abs=1e-12)
    assert w.residual <= 1e-12


def test_trivial_branch():
    w = witness_controlled_phase(1.0, [1, 0, 0, 0])
    assert w.branch == "trivial"
    assert w.c1 == w.c2 == 0
    assert np.allclose(w.difference, 0)


def test_antidiagonal_branch_symmetric_split():
    w = witness_controlled_phase(2.0, [0, 0.6, 0.8, 0])
    assert w.branch == "antidiagonal"
    assert w.c1 == pytest.approx(math.sin(1.0) / SQRT2)
    assert w.c2 == pytest.approx(math.sin(1.0) / SQRT2)
    assert w.residual <= 1e-12


def test_components_have_vanishing_marginals():
    rng = np.random.default_rng(3)
    reg = QuditRegister(2)
    w = witness_controlled_phase(2.5, _random_amplitudes(rng))
    assert np.max(np.abs(partial_trace(w.F1, [0], reg))) <= 1e-12
    assert np.max(np.abs(partial_trace(w.F2, [1], reg))) <= 1e-12
    # each component is a difference of two states
    assert trace_norm(w.F1) <= 2 + 1e-12
    assert trace_norm(w.F2) <= 2 + 1e-12


def test_certificate_from_witness_verifies():
    rng = np.random.default_rng(4)
    w = witness_controlled_phase(0.7, _random_amplitudes(rng))
    cert = w.as_certificate()
    assert verify_certificate(cert, w.difference, QuditRegister(2), tol=1e-9)
    # coefficients are re-measured trace norms, never above c1 + c2
    assert cert.upper_bound <= w.total + 1e-12


def test_validation():
    with pytest.raises(ValueError, match="norm"):
        witness_controlled_phase(1.0, [1, 1, 0, 0])
    with pytest.raises(ValueError, match="theta"):
        witness_controlled_phase(7.0, [1, 0, 0, 0])
    with pytest.raises(ValueError, match="4 amplitudes"):
        witness_controlled_phase(1.0, [1, 0])


def test_random_witnesses_bound_the_solver():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        theta = rng.uniform(0, 2 * math.pi)
        a = _random_amplitudes(rng)
        w = witness_controlled_phase(theta, a)
        assert w.residual <= 1e-9
        if w.branch != "trivial":
            assert w.total == pytest.approx(SQRT2 * math.sin(theta / 2), abs=1e-9)
        assert w1_norm(w.difference).value <= w.total + 1e-4

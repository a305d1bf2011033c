import numpy as np
import pytest
from scipy.linalg import expm

from qcond.dynamics import (
    HamiltonianSchedule, evolve_observable, expm_hermitian, flow_residual, heisenberg, piecewise, propagator,
)
from qcond.errors import NotUnitary, OutOfSchedule, ValidationError
from qcond.numerics import SIGMA_X, SIGMA_Y, SIGMA_Z, random_hermitian, random_unitary


def test_expm_matches_scipy(rng):
    for d in (1, 2, 4, 7):
        H = random_hermitian(d, rng)
        assert np.allclose(expm_hermitian(H, 0.37), expm(-0.37j * H), atol=1e-10)


def test_piecewise_propagator_is_ordered_product(rng):
    H1, H2 = random_hermitian(3, rng), random_hermitian(3, rng)
    sched = piecewise([0.0, 1.0, 2.5], [H1, H2])
    U = propagator(sched, 0.5, 2.0)
    oracle = expm(-1j * 1.0 * H2) @ expm(-1j * 0.5 * H1)
    assert np.allclose(U, oracle, atol=1e-10)
    assert flow_residual(sched, 0.2, 1.3, 2.4) < 1e-10


def test_quarter_period_rotation():
    # H = sigma_x for pi/4 rotates sigma_z into the y axis
    sched = HamiltonianSchedule.constant(SIGMA_X, np.pi / 4)
    Z = evolve_observable(sched, 0.0, np.pi / 4, SIGMA_Z).matrix
    assert np.allclose(Z, SIGMA_Y) or np.allclose(Z, -SIGMA_Y)


def test_heisenberg_preserves_spectrum(rng):
    U = random_unitary(4, rng)
    X = random_hermitian(4, rng)
    Y = heisenberg(U, X).matrix
    assert np.allclose(np.linalg.eigvalsh(Y), np.linalg.eigvalsh(X))
    with pytest.raises(NotUnitary):
        heisenberg(2 * np.eye(4), X)


def test_schedule_validation():
    with pytest.raises(ValidationError):
        piecewise([0.0, 1.0, 1.0], [SIGMA_X, SIGMA_Z])
    with pytest.raises(ValidationError):
        HamiltonianSchedule(((0.0, 1.0, SIGMA_X), (1.5, 2.0, SIGMA_Z)))
    sched = HamiltonianSchedule.constant(SIGMA_Z, 1.0)
    with pytest.raises(OutOfSchedule):
        propagator(sched, 0.0, 2.0)
    with pytest.raises(ValidationError):
        propagator(sched, 0.8, 0.2)
    assert np.allclose(propagator(sched, 0.3, 0.3), np.eye(2))

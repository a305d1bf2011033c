import numpy as np
import pytest

from qcond.errors import NotDensityMatrix, NotHermitian, NotProjection, UnknownOutcome, ValidationError, ZeroVector
from qcond.numerics import SIGMA_X, SIGMA_Z, random_density_matrix
from qcond.qpspace import (
    PVM, Event, Observable, State, distribution, event_complement, event_probability, expectation,
    make_pure_state, pvm_restrict, spectral_pvm,
)


def test_state_validation():
    with pytest.raises(NotDensityMatrix):
        State(np.diag([0.5, 0.4]))
    with pytest.raises(NotDensityMatrix):
        State(np.diag([1.5, -0.5]))
    with pytest.raises(NotDensityMatrix):
        State(np.array([[0.5, 0.5], [0, 0.5]]))
    # tiny negative eigenvalue is repaired
    s = State(np.diag([1 + 1e-12, -1e-12]))
    assert np.linalg.eigvalsh(s.rho)[0] >= 0


def test_pure_state_normalizes():
    s = make_pure_state([3, 4j])
    assert np.isclose(np.trace(s.rho), 1)
    with pytest.raises(ZeroVector):
        make_pure_state([0, 0])


def test_expectation_and_distribution():
    plus = make_pure_state([1, 1])
    assert expectation(plus, SIGMA_X) == pytest.approx(1.0)
    assert expectation(plus, SIGMA_Z) == pytest.approx(0.0)
    d = distribution(make_pure_state([1, 0]), SIGMA_X)
    assert d.as_dict() == pytest.approx({-1.0: 0.5, 1.0: 0.5})
    assert d.mean() == pytest.approx(0.0)


def test_spectral_pvm_recovers_observable(rng):
    for d in (2, 3, 5):
        A = rng.normal(size=(d, d))
        A = A + A.T
        pvm = spectral_pvm(A)
        assert np.allclose(pvm.observable(), A)


def test_pvm_rejects_bad_outcomes():
    P0, P1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    with pytest.raises(ValidationError):
        PVM(((1.0, P0), (1.0, P1)))
    with pytest.raises(ValidationError):
        PVM(((1.0, P0),))
    pvm = PVM(((1.0, P0), (-1.0, P1)))
    with pytest.raises(UnknownOutcome):
        pvm.event(0.0)
    assert np.allclose(pvm_restrict(pvm, [1.0, -1.0]).projector, np.eye(2))


def test_event_checks():
    with pytest.raises(NotProjection):
        Event(np.array([[1, 1], [0, 0]]))
    with pytest.raises(NotHermitian):
        Observable(np.array([[0, 1], [0, 0]]))
    e = Event(np.diag([1.0, 0.0]), label="up")
    assert event_complement(e).label == "not up"
    assert np.allclose(event_complement(e).projector, np.diag([0.0, 1.0]))


def test_probability_matches_born_rule(rng):
    rho = random_density_matrix(3, rng)
    P = np.diag([1.0, 1.0, 0.0])
    assert event_probability(rho, P) == pytest.approx((rho[0, 0] + rho[1, 1]).real)

import itertools

import numpy as np
import pytest

from qcond.algebra import conditional_expectation, generated_algebra
from qcond.errors import ChainTooLarge, ZeroProbabilityOutcome
from qcond.filtering import (
    FilterState, RepeatedInteractionModel, chain_observables, check_non_demolition, check_self_non_demolition,
    cnot_model, filter_run, filter_step, global_oracle, initial_chain_state, partial_trace, simulate_record,
    trace_distance,
)
from qcond.numerics import SIGMA_X, SIGMA_Z, random_density_matrix, random_hermitian, random_unitary
from qcond.qpspace import Observable, State, make_pure_state, spectral_pvm

PLUS = make_pure_state(np.array([1, 1]) / np.sqrt(2))


def test_partial_trace():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(bell, bell)
    assert np.allclose(partial_trace(rho, (2, 2), keep=0), np.eye(2) / 2)
    assert np.allclose(partial_trace(np.eye(4), (2, 2), keep="A"), 2 * np.eye(2))
    A, B = random_density_matrix(2, np.random.default_rng(0)), random_density_matrix(3, np.random.default_rng(1))
    assert np.allclose(partial_trace(np.kron(A, B), (2, 3), keep=1), B)


def test_filter_step_cnot():
    model = cnot_model()
    fs = filter_step(model, FilterState(PLUS), 1.0)
    assert np.allclose(fs.conditioned.rho, np.diag([1.0, 0.0]))
    assert fs.record_prob == pytest.approx(0.5)
    with pytest.raises(ZeroProbabilityOutcome) as err:
        filter_run(model, make_pure_state([1, 0]), [1.0, -1.0])
    assert err.value.step == 2


def test_identity_interaction_learns_nothing(rng):
    sigma = random_density_matrix(2, rng)
    model = RepeatedInteractionModel(2, 2, np.eye(4), State(sigma), spectral_pvm(Observable(SIGMA_Z)),
                                     Observable(SIGMA_X))
    rho = random_density_matrix(2, rng)
    fs = filter_step(model, FilterState(State(rho)), 1.0)
    assert np.allclose(fs.conditioned.rho, rho)
    assert fs.record_prob == pytest.approx(sigma[0, 0].real)


def test_filter_run_estimates():
    alpha, beta = 0.6, 0.8
    traj, est = filter_run(cnot_model(), make_pure_state([alpha, beta]), [1.0, 1.0, 1.0])
    assert traj[-1].record_prob == pytest.approx(alpha ** 2)
    assert est[0] == pytest.approx(alpha ** 2 - beta ** 2)
    assert est[1:] == pytest.approx([1.0, 1.0, 1.0])
    traj, est = filter_run(cnot_model(), PLUS, [])
    assert len(traj) == 1 and est == pytest.approx([0.0])


def _random_model(rng, s):
    return RepeatedInteractionModel(s, 2, random_unitary(2 * s, rng), State(random_density_matrix(2, rng)),
                                    spectral_pvm(Observable(SIGMA_Z)), Observable(random_hermitian(s, rng)))


@pytest.mark.parametrize("s,n", [(1, 2), (2, 1), (2, 3), (3, 2)])
def test_filter_matches_oracle(rng, s, n):
    model = _random_model(rng, s)
    rho = random_density_matrix(s, rng)
    oracle = global_oracle(model, rho, n)
    assert oracle.distribution.total == pytest.approx(1.0, abs=1e-9)
    for record in itertools.product(model.outcomes, repeat=n):
        traj, _ = filter_run(model, rho, record)
        assert traj[-1].record_prob == pytest.approx(oracle.prob(record), abs=1e-10)
        assert trace_distance(traj[-1].conditioned.rho, oracle.states[record]) < 1e-9


def test_filter_is_unbiased(rng):
    model = _random_model(rng, 2)
    # X_n always commutes with the record here, so the filter averages back to the Heisenberg mean
    n = 2
    rho = random_density_matrix(2, rng)
    chain = chain_observables(model, n)
    big = initial_chain_state(model, rho, n)
    heis = np.trace(big @ chain.X_n).real
    total = 0.0
    for record in itertools.product(model.outcomes, repeat=n):
        traj, est = filter_run(model, rho, record)
        total += traj[-1].record_prob * est[-1]
    assert total == pytest.approx(heis, abs=1e-9)


def test_chain_observables_trivial_interaction():
    model = RepeatedInteractionModel(2, 2, np.eye(4), make_pure_state([1, 0]), spectral_pvm(Observable(SIGMA_Z)),
                                     Observable(SIGMA_X))
    chain = chain_observables(model, 1)
    assert np.allclose(chain.Y[0], np.kron(np.eye(2), SIGMA_Z))
    assert np.allclose(chain.X_n, np.kron(SIGMA_X, np.eye(2)))
    with pytest.raises(ChainTooLarge):
        chain_observables(model, 8)


def test_cnot_chain_correlation():
    dist = global_oracle(cnot_model(), PLUS, 3).distribution
    assert dist.prob(1.0, 1.0, 1.0) == pytest.approx(0.5)
    assert dist.prob(-1.0, -1.0, -1.0) == pytest.approx(0.5)
    assert dist.prob(1.0, -1.0, 1.0) == pytest.approx(0.0)


def test_demolition_reports():
    assert check_self_non_demolition(cnot_model(), 3).passed
    assert check_self_non_demolition(cnot_model(), 1).passed
    assert check_non_demolition(cnot_model(), 2).passed
    assert check_non_demolition(cnot_model(np.eye(2)), 3).passed
    # the present value of sigma_x commutes with the record; its initial value does not
    assert check_non_demolition(cnot_model(SIGMA_X), 1).passed
    past = check_non_demolition(cnot_model(SIGMA_X), 1, at=0)
    assert not past.passed and past.max_residual == pytest.approx(4.0)


def test_simulate_record():
    model = cnot_model()
    r1, _ = simulate_record(model, PLUS, 5, seed=9)
    r2, _ = simulate_record(model, PLUS, 5, seed=9)
    assert r1 == r2 and len(set(r1)) == 1
    firsts = [simulate_record(model, PLUS, 1, seed=s)[0][0] for s in range(2000)]
    assert np.mean(np.array(firsts) == 1.0) == pytest.approx(0.5, abs=0.04)
    rec, traj = simulate_record(model, make_pure_state([1, 0]), 4, seed=1)
    assert rec == [1.0] * 4 and traj[-1].record_prob == pytest.approx(1.0)


def test_operator_form_matches_branch_estimates(rng):
    model = _random_model(rng, 2)
    n = 2
    rho = random_density_matrix(2, rng)
    chain = chain_observables(model, n)
    big = initial_chain_state(model, rho, n)
    E = conditional_expectation(big, chain.X_n, generated_algebra(chain.Y), tol=1e-9)
    for record in itertools.product(model.outcomes, repeat=n):
        P = np.eye(chain.dim)
        for k, y in enumerate(record):
            P = chain.record_events[k][y] @ P
        _, est = filter_run(model, rho, record)
        assert np.allclose(P @ E, est[-1] * P, atol=1e-8)

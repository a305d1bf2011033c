import numpy as np
import pytest
from hypothesis import given, strategies as st

from qcond.algebra import (
    Superoperator, algebra_defects, choi_matrix, commutant, conditional_expectation, events_compatible,
    generated_algebra, is_completely_positive, is_qp_morphism, minimal_projections,
    observables_compatible, projection_lemma_witness, span_distance,
)
from qcond.errors import IncompatibleConditioning, NotCommutative
from qcond.numerics import SIGMA_X, SIGMA_Y, SIGMA_Z, random_density_matrix, random_projector, random_unitary


@pytest.mark.parametrize("gens,dim", [([SIGMA_Z], 2), ([SIGMA_Z, SIGMA_X], 4), ([np.eye(2)], 1)])
def test_generated_algebra_dimensions(gens, dim):
    A = generated_algebra(gens)
    assert len(A) == dim
    assert max(algebra_defects(A).values()) < 1e-10


@pytest.mark.parametrize("gens,dim", [([SIGMA_Z], 2), ([SIGMA_Z, SIGMA_X], 1), ([np.eye(2)], 4)])
def test_commutant_dimensions(gens, dim):
    assert len(commutant(gens)) == dim


def test_commutant_of_tensor_factor(rng):
    # the commutant of M_2 (x) I_3 is I_2 (x) M_3
    gens = [np.kron(SIGMA_X, np.eye(3)), np.kron(SIGMA_Z, np.eye(3))]
    C = commutant(gens)
    assert len(C) == 9
    B = np.kron(np.eye(2), rng.normal(size=(3, 3)))
    assert C.contains(B)


def test_non_hermitian_generator_includes_adjoint():
    E12 = np.array([[0, 1], [0, 0]], dtype=complex)
    assert len(generated_algebra([E12])) == 4
    assert len(commutant([E12])) == 1


def test_double_commutant_on_block_algebra(rng):
    V = random_unitary(5, rng)
    D = V @ np.diag([1, 1, 2, 2, 3]) @ V.conj().T
    assert span_distance(generated_algebra([D]), commutant(commutant([D]))) < 1e-9


def test_minimal_projections_resolve_algebra(rng):
    V = random_unitary(4, rng)
    D = V @ np.diag([0, 0, 1, 2]) @ V.conj().T
    Ps = minimal_projections(generated_algebra([D]))
    assert len(Ps) == 3
    assert np.allclose(sum(P.projector for P in Ps), np.eye(4))
    with pytest.raises(NotCommutative):
        minimal_projections(generated_algebra([SIGMA_X, SIGMA_Z]))


def test_conditional_expectation_value():
    # rho diagonal, X commutes with sigma_z: E[X|sigma_z] = diag(X)
    rho = np.diag([0.3, 0.7])
    X = np.diag([2.0, -1.0])
    Y = generated_algebra([SIGMA_Z])
    assert np.allclose(conditional_expectation(rho, X, Y), X)
    # conditioning on the trivial algebra gives the mean
    T = generated_algebra([], dim=2)
    assert np.allclose(conditional_expectation(rho, X, T), (0.6 - 0.7) * np.eye(2))


def test_conditional_expectation_errors():
    Y = generated_algebra([SIGMA_Z])
    with pytest.raises(IncompatibleConditioning):
        conditional_expectation(np.eye(2) / 2, SIGMA_X, Y)
    with pytest.raises(NotCommutative):
        conditional_expectation(np.eye(2) / 2, np.eye(2), generated_algebra([SIGMA_X, SIGMA_Z]))


def test_zero_probability_branch_is_dropped():
    Y = generated_algebra([SIGMA_Z])
    E = conditional_expectation(np.diag([1.0, 0.0]), np.diag([5.0, 7.0]), Y)
    assert np.allclose(E, np.diag([5.0, 0.0]))


def test_compatibility_predicates():
    assert events_compatible(np.diag([1, 0, 0]), np.diag([1, 1, 0]))
    plus = np.full((2, 2), 0.5)
    assert not events_compatible(np.diag([1.0, 0.0]), plus)
    assert observables_compatible(SIGMA_Z, np.diag([3.0, -1.0]))
    assert not observables_compatible(SIGMA_Z, SIGMA_X)


@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
def test_lemma_witness_is_consistent(d, seed):
    rng = np.random.default_rng(seed)
    P = random_projector(d, int(rng.integers(0, d + 1)), rng)
    Q = random_projector(d, int(rng.integers(0, d + 1)), rng)
    assert projection_lemma_witness(P, Q).consistent
    assert projection_lemma_witness(P, np.eye(d) - P).commute


def test_choi_and_cp(rng):
    T = Superoperator.transpose(2)
    C = choi_matrix(T)
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(C, swap)
    assert not is_completely_positive(T)
    # depolarizing channel is CP
    dep = Superoperator.from_function(lambda X: 0.5 * X + 0.25 * np.trace(X) * np.eye(2), 2)
    assert is_completely_positive(dep)
    K = [np.sqrt(0.7) * np.eye(2), np.sqrt(0.3) * SIGMA_Y]
    assert is_completely_positive(Superoperator.from_kraus(K))


def test_morphism_pairs(rng):
    U = random_unitary(3, rng)
    rho = random_density_matrix(3, rng)
    phi = Superoperator.conjugation(U)
    assert is_qp_morphism(phi, rho, U @ rho @ U.conj().T)
    # the mismatched pairing is not a morphism for a generic state
    assert not is_qp_morphism(phi, rho, U.conj().T @ rho @ U)
    assert not is_qp_morphism(Superoperator.transpose(3), rho, rho.T)

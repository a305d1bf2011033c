"""States, observables, quantum events and projection-valued measures.

The wrappers here are thin frozen dataclasses around numpy arrays. They
validate on construction so that downstream code can assume, e.g., that an
``Event`` really is an orthogonal projection.
"""
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionMismatch,
    NotDensityMatrix,
    NotHermitian,
    NotProjection,
    UnknownOutcome,
    ValidationError,
    ZeroVector,
)
from .numerics import DEFAULT_TOL, as_matrix, check_same_dim, dagger, eig_hermitian, fro


def _check_projector(P: np.ndarray, tol: float) -> None:
    if fro(P - dagger(P)) > tol * max(1.0, fro(P)):
        raise NotProjection("projector is not self-adjoint")
    if fro(P @ P - P) > tol * max(1.0, fro(P)):
        raise NotProjection(f"projector is not idempotent (defect {fro(P @ P - P):.3e})")


@dataclass(frozen=True, eq=False)
class State:
    """Density matrix. Small violations (within ``tol``) are repaired on construction."""

    rho: np.ndarray
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        rho = as_matrix(self.rho)
        tol = self.tol
        if fro(rho - dagger(rho)) > tol * max(1.0, fro(rho)):
            raise NotDensityMatrix("density matrix is not Hermitian")
        rho = (rho + dagger(rho)) / 2
        tr = np.trace(rho).real
        if abs(tr - 1.0) > tol:
            raise NotDensityMatrix(f"density matrix has trace {tr:.12g}, expected 1")
        w, V = np.linalg.eigh(rho)
        if w[0] < -tol:
            raise NotDensityMatrix(f"density matrix has negative eigenvalue {w[0]:.3e}")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            rho = (V * w) @ dagger(V)
            rho = (rho + dagger(rho)) / 2
        rho = rho / np.trace(rho).real
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "State":
        return cls(np.eye(dim) / dim)


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: np.ndarray
    label: str = ""
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        A = as_matrix(self.matrix)
        if fro(A - dagger(A)) > self.tol * max(1.0, fro(A)):
            raise NotHermitian(f"observable {self.label!r} is not Hermitian")
        object.__setattr__(self, "matrix", (A + dagger(A)) / 2)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Event:
    """Quantum event, i.e. an orthogonal projection."""

    projector: np.ndarray
    label: str = ""
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        P = as_matrix(self.projector)
        _check_projector(P, self.tol)
        object.__setattr__(self, "projector", (P + dagger(P)) / 2)

    @property
    def dim(self) -> int:
        return self.projector.shape[0]


@dataclass(frozen=True, eq=False)
class PVM:
    """Finite projection-valued measure: distinct real outcomes, orthogonal events summing to 1."""

    outcomes: Tuple[Tuple[float, Event], ...]
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        outcomes = tuple((float(v), e if isinstance(e, Event) else Event(e, tol=self.tol))
                         for v, e in self.outcomes)
        if not outcomes:
            raise ValidationError("PVM needs at least one outcome")
        values = [v for v, _ in outcomes]
        if len(set(values)) != len(values):
            raise ValidationError("PVM outcome values must be distinct")
        dim = check_same_dim(*(e.projector for _, e in outcomes))
        total = sum(e.projector for _, e in outcomes)
        if fro(total - np.eye(dim)) > self.tol * dim:
            raise ValidationError("PVM events do not sum to the identity")
        for i, (_, a) in enumerate(outcomes):
            for _, b in outcomes[i + 1:]:
                if fro(a.projector @ b.projector) > self.tol * dim:
                    raise ValidationError("PVM events are not mutually orthogonal")
        object.__setattr__(self, "outcomes", outcomes)

    @property
    def values(self) -> List[float]:
        return [v for v, _ in self.outcomes]

    @property
    def events(self) -> List[Event]:
        return [e for _, e in self.outcomes]

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].dim

    def event(self, value: float) -> Event:
        for v, e in self.outcomes:
            if v == value:
                return e
        # fall back to tolerant match so labels that went through JSON still resolve
        for v, e in self.outcomes:
            if abs(v - value) <= 1e-9 * max(1.0, abs(v)):
                return e
        raise UnknownOutcome(f"{value!r} is not an outcome of this PVM (outcomes: {self.values})")

    def observable(self) -> np.ndarray:
        return sum(v * e.projector for v, e in self.outcomes)

    def __len__(self):
        return len(self.outcomes)


@dataclass(frozen=True)
class Distribution:
    support: List[float]
    probs: np.ndarray

    def as_dict(self) -> dict:
        return dict(zip(self.support, (float(p) for p in self.probs)))

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))


def _state(s) -> State:
    return s if isinstance(s, State) else State(s)


def _event(A) -> Event:
    return A if isinstance(A, Event) else Event(A)


def _observable(X) -> Observable:
    return X if isinstance(X, Observable) else Observable(X)


def make_pure_state(psi, tol: float = DEFAULT_TOL) -> State:
    """``|psi><psi| / ||psi||^2``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = np.linalg.norm(psi)
    if n <= tol:
        raise ZeroVector("cannot build a state from a zero vector")
    psi = psi / n
    return State(np.outer(psi, np.conj(psi)), tol=tol)


def expectation(state, X, tol: float = DEFAULT_TOL) -> float:
    """``tr(rho X)`` for a Hermitian ``X``."""
    rho = _state(state).rho
    X = _observable(X).matrix
    check_same_dim(rho, X)
    val = np.trace(rho @ X)
    if abs(val.imag) > tol * max(1.0, fro(X)):  # pragma: no cover - Hermitian inputs guarantee this
        raise NotHermitian("expectation has a non-negligible imaginary part")
    return float(val.real)


def event_probability(state, A, tol: float = DEFAULT_TOL) -> float:
    """``Pr{A} = tr(rho P_A)``, clamped to [0, 1] after a tolerance check."""
    rho = _state(state).rho
    P = _event(A).projector
    check_same_dim(rho, P)
    p = float(np.trace(rho @ P).real)
    if p < -tol or p > 1 + tol:
        raise ValidationError(f"event probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def event_complement(A, tol: float = DEFAULT_TOL) -> Event:
    A = A if isinstance(A, Event) else Event(A, tol=tol)
    label = f"not {A.label}" if A.label else ""
    return Event(np.eye(A.dim) - A.projector, label=label, tol=tol)


def spectral_pvm(X, tol: float = DEFAULT_TOL) -> PVM:
    """Spectral measure of ``X``; outcome values are the clustered eigenvalues."""
    X = _observable(X)
    sd = eig_hermitian(X.matrix, tol)
    return PVM(tuple((float(x), Event(P, label=f"{X.label}={x:.6g}" if X.label else ""))
                     for x, P in zip(sd.eigenvalues, sd.projectors)))


def pvm_restrict(pvm: PVM, G: Iterable[float]) -> Event:
    """The event ``P_X[G]``: sum of the PVM's events over outcome values in ``G``."""
    G = list(G)
    P = np.zeros((pvm.dim, pvm.dim), dtype=complex)
    for g in G:
        P = P + pvm.event(g).projector
    return Event(P, label="{" + ",".join(f"{g:g}" for g in G) + "}")


def distribution(state, X, tol: float = DEFAULT_TOL) -> Distribution:
    """Outcome distribution of ``X`` in ``state``."""
    state = _state(state)
    pvm = X if isinstance(X, PVM) else spectral_pvm(X, tol)
    if pvm.dim != state.dim:
        raise DimensionMismatch(f"state has dim {state.dim}, observable {pvm.dim}")
    probs = np.array([event_probability(state, e, tol) for e in pvm.events])
    return Distribution(pvm.values, probs)


def pvm_from_basis(vectors: Sequence, values: Sequence[float]) -> PVM:
    """PVM built from an orthonormal basis; vectors sharing a value span one outcome."""
    groups = {}
    for v, x in zip(vectors, values):
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        groups.setdefault(float(x), []).append(np.outer(v, np.conj(v)))
    return PVM(tuple((x, Event(sum(ps))) for x, ps in sorted(groups.items())))

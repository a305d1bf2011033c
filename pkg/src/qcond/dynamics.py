"""Unitary propagators for piecewise-constant Hamiltonians and Heisenberg maps.

``propagator(schedule, s, t)`` is ``U(t, s)``: the ordered product of exact
per-piece exponentials ``exp(-i dt H)``, later pieces on the left.
``heisenberg(U, X)`` is ``U^dagger X U``.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, NotUnitary, OutOfSchedule, ValidationError
from .numerics import DEFAULT_TOL, as_matrix, check_same_dim, dagger, eig_hermitian, fro
from .qpspace import Observable


@dataclass(frozen=True, eq=False)
class HamiltonianSchedule:
    """Contiguous pieces ``(t_start, t_end, H)`` with constant Hermitian ``H`` on each."""

    pieces: Tuple[Tuple[float, float, Observable], ...]

    def __post_init__(self):
        pieces = []
        for t0, t1, H in self.pieces:
            H = H if isinstance(H, Observable) else Observable(H)
            if not t1 > t0:
                raise ValidationError(f"piece [{t0}, {t1}] has non-positive length")
            pieces.append((float(t0), float(t1), H))
        if not pieces:
            raise ValidationError("schedule has no pieces")
        check_same_dim(*(H.matrix for _, _, H in pieces))
        for (_, a1, _), (b0, _, _) in zip(pieces, pieces[1:]):
            if b0 != a1:
                raise ValidationError(f"schedule pieces are not contiguous at t={a1}")
        object.__setattr__(self, "pieces", tuple(pieces))

    @property
    def start(self) -> float:
        return self.pieces[0][0]

    @property
    def end(self) -> float:
        return self.pieces[-1][1]

    @property
    def dim(self) -> int:
        return self.pieces[0][2].dim

    @classmethod
    def constant(cls, H, t_end: float, t_start: float = 0.0) -> "HamiltonianSchedule":
        return cls(((t_start, t_end, H),))


def expm_hermitian(H, tau: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``exp(-i tau H)`` through the spectral resolution of ``H``."""
    sd = eig_hermitian(H, tol)
    return sum(np.exp(-1j * tau * x) * P for x, P in zip(sd.eigenvalues, sd.projectors))


def propagator(schedule: HamiltonianSchedule, s: float, t: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``U(t, s)`` for ``t >= s`` inside the schedule's time span."""
    if t < s:
        raise ValidationError(f"propagator needs t >= s (got s={s}, t={t})")
    if s < schedule.start or t > schedule.end:
        raise OutOfSchedule(f"[{s}, {t}] is not covered by the schedule [{schedule.start}, {schedule.end}]")
    U = np.eye(schedule.dim, dtype=complex)
    for t0, t1, H in schedule.pieces:
        a, b = max(t0, s), min(t1, t)
        if b > a:
            U = expm_hermitian(H.matrix, b - a, tol) @ U
    return U


def heisenberg(U, X, tol: float = DEFAULT_TOL) -> Observable:
    """``U^dagger X U``."""
    U = as_matrix(U)
    X = X if isinstance(X, Observable) else Observable(X, tol=tol)
    Xm = X.matrix
    if U.shape != Xm.shape:
        raise DimensionMismatch(f"unitary has dim {U.shape[0]}, observable {Xm.shape[0]}")
    if fro(dagger(U) @ U - np.eye(U.shape[0])) > tol * U.shape[0]:
        raise NotUnitary("heisenberg map needs a unitary")
    Y = dagger(U) @ Xm @ U
    return Observable((Y + dagger(Y)) / 2, label=X.label)


def evolve_observable(schedule: HamiltonianSchedule, t1: float, t2: float, X,
                      tol: float = DEFAULT_TOL) -> Observable:
    """``J_(t1, t2)(X) = U(t2, t1)^dagger X U(t2, t1)``."""
    if not isinstance(X, Observable):
        X = Observable(X)
    return heisenberg(propagator(schedule, t1, t2, tol), X, tol)


def heisenberg_projector(schedule, t: float, P: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``J_(0, t)(P)``, or ``P`` itself when there is no schedule."""
    if schedule is None:
        return P
    U = propagator(schedule, 0.0, t, tol)
    Y = dagger(U) @ P @ U
    return (Y + dagger(Y)) / 2


def flow_residual(schedule: HamiltonianSchedule, t1: float, t2: float, t3: float) -> float:
    """``||U(t3, t2) U(t2, t1) - U(t3, t1)||_F``."""
    return fro(propagator(schedule, t2, t3) @ propagator(schedule, t1, t2) - propagator(schedule, t1, t3))


def piecewise(times: Sequence[float], hamiltonians: Sequence) -> HamiltonianSchedule:
    """Schedule from breakpoints ``times[0] < ... < times[k]`` and ``k`` Hamiltonians."""
    if len(times) != len(hamiltonians) + 1:
        raise ValidationError("need one more breakpoint than Hamiltonians")
    return HamiltonianSchedule(tuple((times[i], times[i + 1], H) for i, H in enumerate(hamiltonians)))

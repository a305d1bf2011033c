"""Wigner's form of the Bell inequality: ``Pr{A,C} <= Pr{A,not B} + Pr{B,C}``.

The "gap" is ``Pr{A,C} - Pr{A,not B} - Pr{B,C}``; it is never positive for a
classical joint distribution of three events, and a positive value for
sequentially measured quantum events is a violation.

Classical joints are indexed ``p[a, b, c]`` with index 1 meaning the event
occurred.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidJoint, NotQubit, ValidationError
from .measurement import sequential_probability
from .numerics import DEFAULT_TOL, SIGMA_X, SIGMA_Z, check_same_dim
from .qpspace import Event, _event, _state, event_complement


@dataclass(frozen=True, eq=False)
class ClassicalJoint3:
    p: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.size != 8:
            raise InvalidJoint(f"need 8 probabilities, got {p.size}")
        p = p.reshape(2, 2, 2)
        if not np.all(np.isfinite(p)) or p.min() < -self.tol:
            raise InvalidJoint("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > self.tol:
            raise InvalidJoint(f"probabilities sum to {p.sum()}, expected 1")
        object.__setattr__(self, "p", p)

    def marginal(self, a=None, b=None, c=None) -> float:
        """Probability that the specified events take the given values (None = summed out)."""
        idx = tuple(slice(None) if v is None else v for v in (a, b, c))
        return float(self.p[idx].sum())


def classical_wigner_gap(j) -> float:
    j = j if isinstance(j, ClassicalJoint3) else ClassicalJoint3(j)
    return j.marginal(a=1, c=1) - j.marginal(a=1, b=0) - j.marginal(b=1, c=1)


def wigner_identity_residual(j) -> float:
    """``Pr{A,notB} + Pr{B,C} - Pr{A,C} - (Pr{A,notB,notC} + Pr{notA,B,C})``; zero for any joint."""
    j = j if isinstance(j, ClassicalJoint3) else ClassicalJoint3(j)
    return -classical_wigner_gap(j) - (float(j.p[1, 0, 0]) + float(j.p[0, 1, 1]))


def quantum_wigner_gap(state, Pa, Pb, Pc) -> float:
    """Gap for events measured in the order A, B, C; each term is a two-step sequential probability."""
    rho = _state(state)
    A, B, C = _event(Pa), _event(Pb), _event(Pc)
    check_same_dim(rho.rho, A.projector, B.projector, C.projector)
    return (sequential_probability(rho, [A, C])
            - sequential_probability(rho, [A, event_complement(B)])
            - sequential_probability(rho, [B, C]))


def spin_projector(theta: float) -> np.ndarray:
    """Projector on spin-up along the x-z plane direction at polar angle ``theta``."""
    return 0.5 * (np.eye(2) + np.sin(theta) * SIGMA_X + np.cos(theta) * SIGMA_Z)


@dataclass(frozen=True)
class BellScanResult:
    best_gap: float
    angles: Tuple[float, float, float]
    grid_resolution: int
    grid: Optional[np.ndarray] = None

    def grid_rows(self):
        """Yield ``(alpha, beta, gamma, gap)`` for every grid point."""
        if self.grid is None:
            return
        thetas = angle_grid(self.grid_resolution)
        n = self.grid_resolution
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    yield thetas[a], thetas[b], thetas[c], float(self.grid[a, b, c])


def angle_grid(resolution: int) -> np.ndarray:
    return np.pi * np.arange(resolution) / resolution


def bell_scan(state, resolution: int = 32, keep_grid: bool = False) -> BellScanResult:
    """Exhaustive search over ``(alpha, beta, gamma)`` in ``[0, pi)^3`` for the largest gap.

    Ties are broken towards the lexicographically smallest angle triple.
    """
    rho = _state(state).rho
    if rho.shape[0] != 2:
        raise NotQubit(f"bell_scan works on a qubit, got dim {rho.shape[0]}")
    if resolution < 8:
        raise ValidationError("grid resolution must be at least 8 per axis")
    thetas = angle_grid(resolution)
    P = np.stack([spin_projector(t) for t in thetas])
    Pbar = np.eye(2) - P
    # first measurement leaves the unnormalized state P rho P, second multiplies by its projector
    after = np.einsum("aij,jk,akl->ail", P, rho, P)
    two_step = np.einsum("ail,cli->ac", after, P).real        # tr(P_a rho P_a P_c)
    a_notb = np.einsum("ail,bli->ab", after, Pbar).real
    gap = two_step[:, None, :] - a_notb[:, :, None] - two_step[None, :, :]
    flat = int(np.argmax(gap))
    a, b, c = np.unravel_index(flat, gap.shape)
    angles = (float(thetas[a]), float(thetas[b]), float(thetas[c]))
    best = quantum_wigner_gap(rho, *(Event(spin_projector(t)) for t in angles))
    return BellScanResult(best, angles, resolution, gap if keep_grid else None)


def random_classical_sweep(n: int, seed: int = 0) -> float:
    """Largest classical gap over ``n`` joints drawn uniformly from the simplex."""
    if n < 1:
        raise ValueError("sweep needs at least one sample")
    rng = np.random.default_rng(seed)
    w = rng.exponential(size=(n, 8))
    p = (w / w.sum(axis=1, keepdims=True)).reshape(n, 2, 2, 2)
    gap = p[:, 1, :, 1].sum(axis=1) - p[:, 1, 0, :].sum(axis=1) - p[:, :, 1, 1].sum(axis=1)
    return float(gap.max())

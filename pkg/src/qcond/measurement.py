"""Sequential projective measurement.

Probabilities of measurement records are evaluated in the pyramidal form
``tr(P_n ... P_1 rho P_1 ... P_n)`` where each ``P_k`` is the Heisenberg
picture event ``J_(0, t_k)(P_{Z_k}[G_k])``. The order of the list is the
chronological order of the measurements.
"""
import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import HamiltonianSchedule, heisenberg_projector
from .errors import (
    AxisOutOfRange,
    DimensionMismatch,
    NotMutuallyExclusive,
    TooFewSteps,
    ValidationError,
    ZeroProbabilityOutcome,
)
from .numerics import DEFAULT_TOL, check_same_dim, dagger, fro
from .qpspace import PVM, Event, State, _event, _state, pvm_restrict, spectral_pvm


def project_state(state, A, tol: float = DEFAULT_TOL) -> Tuple[float, State]:
    """Projection postulate in density-matrix form: ``(tr(rho P), P rho P / tr(rho P))``."""
    rho = _state(state).rho
    P = _event(A).projector
    check_same_dim(rho, P)
    post = P @ rho @ P
    p = float(np.trace(post).real)
    if p <= tol:
        raise ZeroProbabilityOutcome(f"event has probability {p:.3e}")
    return min(p, 1.0), State(post / p)


def sequential_probability(state, events: Sequence) -> float:
    """``tr(P_n ... P_1 rho P_1 ... P_n)`` for events listed in measurement order."""
    rho = _state(state).rho
    projs = [_event(e).projector for e in events]
    check_same_dim(rho, *projs)
    M = np.eye(rho.shape[0], dtype=complex)
    for P in projs:
        M = P @ M
    return max(float(np.trace(M @ rho @ dagger(M)).real), 0.0)


@dataclass(frozen=True, eq=False)
class PlanStep:
    """Measure ``pvm`` at ``time``; ``groups`` optionally coarse-grains its outcomes."""

    time: float
    pvm: PVM
    label: str = ""
    groups: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        pvm = self.pvm if isinstance(self.pvm, PVM) else spectral_pvm(self.pvm)
        object.__setattr__(self, "pvm", pvm)
        if self.groups is not None:
            groups = tuple(tuple(float(v) for v in g) for g in self.groups)
            flat = [v for g in groups for v in g]
            if len(set(flat)) != len(flat):
                raise ValidationError(f"step {self.label!r}: outcome groups overlap")
            for v in flat:
                pvm.event(v)
            if len(flat) != len(pvm):
                raise ValidationError(f"step {self.label!r}: outcome groups do not cover every outcome")
            object.__setattr__(self, "groups", groups)

    def outcome_labels(self) -> list:
        if self.groups is None:
            return list(self.pvm.values)
        return [g for g in self.groups]

    def events(self) -> List[Event]:
        if self.groups is None:
            return self.pvm.events
        return [pvm_restrict(self.pvm, g) for g in self.groups]


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    steps: Tuple[PlanStep, ...]
    schedule: Optional[HamiltonianSchedule] = None

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise ValidationError("a plan needs at least one step")
        times = [s.time for s in steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("measurement times must be strictly increasing")
        dims = {s.pvm.dim for s in steps}
        if self.schedule is not None:
            dims.add(self.schedule.dim)
        if len(dims) != 1:
            raise DimensionMismatch(f"plan mixes dimensions {sorted(dims)}")
        object.__setattr__(self, "steps", steps)

    @property
    def dim(self) -> int:
        return self.steps[0].pvm.dim

    def heisenberg_events(self, tol: float = DEFAULT_TOL) -> List[List[np.ndarray]]:
        """Per step, the projectors ``J_(0, t_k)(P)`` of its outcomes."""
        return [[heisenberg_projector(self.schedule, s.time, e.projector, tol) for e in s.events()]
                for s in self.steps]

    def without(self, axis: int) -> "MeasurementPlan":
        if not 0 <= axis < len(self.steps):
            raise AxisOutOfRange(f"plan has {len(self.steps)} steps, no axis {axis}")
        steps = self.steps[:axis] + self.steps[axis + 1:]
        return MeasurementPlan(steps, self.schedule)

    def prefix(self, n: int) -> "MeasurementPlan":
        return MeasurementPlan(self.steps[:n], self.schedule)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    axes: List[list]
    probs: np.ndarray
    labels: List[str] = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def prob(self, *record) -> float:
        idx = tuple(self.axes[k].index(r) for k, r in enumerate(record))
        return float(self.probs[idx])

    def records(self):
        """Yield ``(outcome labels, probability)`` in row-major order."""
        for idx in itertools.product(*(range(len(a)) for a in self.axes)):
            yield tuple(self.axes[k][i] for k, i in enumerate(idx)), float(self.probs[idx])


def run_plan(state, plan: MeasurementPlan, tol: float = DEFAULT_TOL) -> JointDistribution:
    """Joint table of record probabilities for every outcome combination of the plan.

    Unnormalized post-measurement states are propagated level by level, so a
    record's cell is ``tr(P_n ... P_1 rho P_1 ... P_n)``. A prefix whose weight
    is exactly zero contributes zeros to all of its extensions.
    """
    rho = _state(state).rho
    if rho.shape[0] != plan.dim:
        raise DimensionMismatch(f"state has dim {rho.shape[0]}, plan {plan.dim}")
    events = plan.heisenberg_events(tol)
    branch = rho[None, :, :]
    for projs in events:
        P = np.stack(projs)  # (m, d, d)
        branch = np.einsum("mij,bjk,mkl->bmil", P, branch, P, optimize=True)
        branch = branch.reshape(-1, plan.dim, plan.dim)
    probs = np.clip(np.einsum("bii->b", branch).real, 0.0, None)
    shape = tuple(len(p) for p in events)
    return JointDistribution(
        axes=[s.outcome_labels() for s in plan.steps],
        probs=probs.reshape(shape),
        labels=[s.label or f"step{k + 1}" for k, s in enumerate(plan.steps)],
    )


def marginalize_last(joint: JointDistribution) -> JointDistribution:
    """Sum out the most recent measurement."""
    if len(joint.axes) < 2:
        raise TooFewSteps("need at least two steps to marginalize")
    return JointDistribution(joint.axes[:-1], joint.probs.sum(axis=-1), joint.labels[:-1])


def marginalize(joint: JointDistribution, axis: int) -> JointDistribution:
    if not 0 <= axis < len(joint.axes):
        raise AxisOutOfRange(f"joint has {len(joint.axes)} axes, no axis {axis}")
    return JointDistribution(
        joint.axes[:axis] + joint.axes[axis + 1:],
        joint.probs.sum(axis=axis),
        joint.labels[:axis] + joint.labels[axis + 1:],
    )


def marginal_defect(joint: JointDistribution, axis: int, truncated: JointDistribution) -> float:
    """Max discrepancy between summing out ``axis`` and the plan with that step deleted."""
    summed = marginalize(joint, axis)
    if summed.probs.shape != truncated.probs.shape:
        raise DimensionMismatch("truncated distribution does not match the marginal's shape")
    return float(np.abs(summed.probs - truncated.probs).max())


def plan_marginal_defect(state, plan: MeasurementPlan, axis: int, tol: float = DEFAULT_TOL) -> float:
    """``marginal_defect`` with the truncated plan evaluated for you."""
    return marginal_defect(run_plan(state, plan, tol), axis, run_plan(state, plan.without(axis), tol))


def interference_defect(state, exclusive: Sequence, B, tol: float = DEFAULT_TOL) -> float:
    """``Pr{union A_k ; B} - sum_k Pr{A_k ; B}`` for mutually exclusive ``A_k`` measured before ``B``."""
    projs = [_event(a).projector for a in exclusive]
    B = _event(B)
    for i, P in enumerate(projs):
        for Q in projs[i + 1:]:
            if fro(P @ Q) > tol * max(1.0, fro(P) * fro(Q)):
                raise NotMutuallyExclusive("events are not mutually orthogonal")
    union = Event(sum(projs), tol=1e3 * tol)
    joint = sequential_probability(state, [union, B])
    separate = sum(sequential_probability(state, [Event(P), B]) for P in projs)
    return joint - separate


def order_asymmetry(state, P, Q) -> float:
    """``Pr{P ; Q} - Pr{Q ; P}``."""
    return sequential_probability(state, [P, Q]) - sequential_probability(state, [Q, P])

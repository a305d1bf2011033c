"""Discrete quantum filtering with repeated system-probe interactions.

At every step a fresh probe in ``probe_state`` meets the system through the
unitary ``U`` (system factor first), and the probe is measured with
``probe_pvm``. ``filter_step`` updates the conditioned system state directly;
``global_oracle`` instead builds the whole chain ``system (x) probe_1 (x) ... (x) probe_n``
and evaluates records with the pyramidal formula on Heisenberg-picture
projections. The two must agree.
"""
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import generated_algebra
from .errors import ChainTooLarge, DimensionMismatch, NotUnitary, ValidationError, ZeroProbabilityOutcome
from .measurement import JointDistribution, sequential_probability
from .numerics import CNOT, DEFAULT_TOL, SIGMA_Z, as_matrix, dagger, fro
from .qpspace import PVM, Event, Observable, State, _state, make_pure_state, spectral_pvm

DEFAULT_CHAIN_CAP = 256


def partial_trace(M, dims: Tuple[int, int], keep: int = 0) -> np.ndarray:
    """Partial trace of an operator on ``A (x) B``; ``keep=0`` keeps A, ``keep=1`` keeps B."""
    M = as_matrix(M)
    dA, dB = dims
    if M.shape[0] != dA * dB:
        raise DimensionMismatch(f"operator has dim {M.shape[0]}, expected {dA}*{dB}")
    T = M.reshape(dA, dB, dA, dB)
    if keep in (0, "A"):
        return np.einsum("ibjb->ij", T)
    if keep in (1, "B"):
        return np.einsum("aiaj->ij", T)
    raise ValueError(f"keep must be 0 or 1, got {keep!r}")


@dataclass(frozen=True, eq=False)
class RepeatedInteractionModel:
    sys_dim: int
    probe_dim: int
    U: np.ndarray
    probe_state: State
    probe_pvm: PVM
    observed: Observable
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        U = as_matrix(self.U)
        d = self.sys_dim * self.probe_dim
        if U.shape[0] != d:
            raise DimensionMismatch(f"U has dim {U.shape[0]}, expected {self.sys_dim}*{self.probe_dim}")
        if fro(dagger(U) @ U - np.eye(d)) > self.tol * d:
            raise NotUnitary("interaction U is not unitary")
        probe_state = _state(self.probe_state)
        observed = self.observed if isinstance(self.observed, Observable) else Observable(self.observed)
        if probe_state.dim != self.probe_dim or self.probe_pvm.dim != self.probe_dim:
            raise DimensionMismatch("probe state / PVM dimension does not match probe_dim")
        if observed.dim != self.sys_dim:
            raise DimensionMismatch("observed operator does not act on the system")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "probe_state", probe_state)
        object.__setattr__(self, "observed", observed)

    def probe_event(self, y: float) -> np.ndarray:
        return self.probe_pvm.event(y).projector

    @property
    def outcomes(self) -> List[float]:
        return self.probe_pvm.values


@dataclass(frozen=True, eq=False)
class FilterState:
    conditioned: State
    record: Tuple[float, ...] = ()
    record_prob: float = 1.0


def _entangle(model: RepeatedInteractionModel, rho: np.ndarray) -> np.ndarray:
    joint = np.kron(rho, model.probe_state.rho)
    return model.U @ joint @ dagger(model.U)


def outcome_probabilities(model: RepeatedInteractionModel, rho) -> Dict[float, float]:
    """``p(y) = tr[(I (x) Q_y) U (rho (x) sigma) U^dagger]`` for every probe outcome."""
    joint = _entangle(model, _state(rho).rho)
    reduced = partial_trace(joint, (model.sys_dim, model.probe_dim), keep=1)
    return {y: float(np.trace(reduced @ e.projector).real) for y, e in model.probe_pvm.outcomes}


def filter_step(model: RepeatedInteractionModel, fs: FilterState, y: float,
                tol: float = DEFAULT_TOL) -> FilterState:
    """Condition on probe outcome ``y`` after one interaction."""
    Q = np.kron(np.eye(model.sys_dim), model.probe_event(y))
    joint = _entangle(model, fs.conditioned.rho)
    p = float(np.trace(Q @ joint).real)
    if p <= tol:
        raise ZeroProbabilityOutcome(f"step {len(fs.record) + 1}: outcome {y} has probability {p:.3e}", step=len(fs.record) + 1)
    post = partial_trace(Q @ joint @ Q, (model.sys_dim, model.probe_dim), keep=0) / p
    return FilterState(State(post, tol=max(tol, 1e-9)), fs.record + (float(y),), fs.record_prob * p)


def filter_run(model: RepeatedInteractionModel, initial, record: Sequence[float],
               tol: float = DEFAULT_TOL) -> Tuple[List[FilterState], List[float]]:
    """Iterate ``filter_step`` along ``record``.

    Returns the trajectory (initial state first) and ``tr(rho_k X)`` for each
    entry of it. A ``ZeroProbabilityOutcome`` carries the 1-based ``step``
    at which the record became impossible.
    """
    fs = FilterState(_state(initial))
    traj = [fs]
    for y in record:
        fs = filter_step(model, fs, y, tol)
        traj.append(fs)
    X = model.observed.matrix
    estimates = [float(np.trace(f.conditioned.rho @ X).real) for f in traj]
    return traj, estimates


def simulate_record(model: RepeatedInteractionModel, initial, n: int, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> Tuple[List[float], List[FilterState]]:
    """Sample a record of length ``n`` from the model, one outcome at a time."""
    if n < 1:
        raise ValidationError("need at least one step")
    rng = np.random.default_rng(seed)
    fs = FilterState(_state(initial))
    traj = [fs]
    for _ in range(n):
        probs = outcome_probabilities(model, fs.conditioned)
        ys = list(probs)
        p = np.array([probs[y] if probs[y] > tol else 0.0 for y in ys])
        y = ys[rng.choice(len(ys), p=p / p.sum())]
        fs = filter_step(model, fs, y, tol)
        traj.append(fs)
    return list(fs.record), traj


@dataclass(frozen=True, eq=False)
class Chain:
    """Heisenberg-picture observables of an ``n``-step interaction chain."""

    dims: Tuple[int, ...]
    step_unitaries: List[np.ndarray]
    cumulative: List[np.ndarray]        # V_k = U_k ... U_1, with V_0 = I
    record_events: List[Dict[float, np.ndarray]]   # P_{Y_k}(y)
    Y: List[np.ndarray]
    X_n: np.ndarray

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))


def _embed(U: np.ndarray, sys_dim: int, probe_dim: int, n: int, slot: int) -> np.ndarray:
    """Lift an operator on ``system (x) probe`` to the chain, acting on probe ``slot`` (1-based)."""
    rest = probe_dim ** (n - 1)
    big = np.kron(U, np.eye(rest))                      # order: sys, probe_slot, other probes
    k = n + 1
    T = big.reshape((sys_dim, probe_dim) + (probe_dim,) * (n - 1)
                    + (sys_dim, probe_dim) + (probe_dim,) * (n - 1))
    # axis order after kron is (sys, slot, others...); move slot back to its position
    order = [0] + list(range(2, slot + 1)) + [1] + list(range(slot + 1, k))
    perm = order + [k + i for i in order]
    T = T.transpose(perm)
    d = sys_dim * probe_dim ** n
    return T.reshape(d, d)


def chain_observables(model: RepeatedInteractionModel, n: int,
                      cap: int = DEFAULT_CHAIN_CAP) -> Chain:
    """Record observables ``Y_k = V_k^dagger (Z at probe k) V_k`` and ``X_n = V_n^dagger (X (x) I) V_n``."""
    if n < 1:
        raise ValidationError("need at least one step")
    s, p = model.sys_dim, model.probe_dim
    d = s * p ** n
    if d > cap:
        raise ChainTooLarge(f"chain dimension {d} exceeds the cap of {cap}")
    Z = model.probe_pvm.observable()
    steps = [_embed(model.U, s, p, n, k) for k in range(1, n + 1)]
    V = [np.eye(d, dtype=complex)]
    for Uk in steps:
        V.append(Uk @ V[-1])
    events, Ys = [], []
    for k in range(1, n + 1):
        Vk = V[k]
        ev = {}
        for y, e in model.probe_pvm.outcomes:
            Qk = _embed(np.kron(np.eye(s), e.projector), s, p, n, k)
            Pk = dagger(Vk) @ Qk @ Vk
            ev[y] = (Pk + dagger(Pk)) / 2
        events.append(ev)
        Zk = _embed(np.kron(np.eye(s), Z), s, p, n, k)
        Ys.append(dagger(Vk) @ Zk @ Vk)
    Xfull = np.kron(model.observed.matrix, np.eye(p ** n))
    X_n = dagger(V[n]) @ Xfull @ V[n]
    return Chain((s,) + (p,) * n, steps, V, events, Ys, X_n)


def initial_chain_state(model: RepeatedInteractionModel, initial, n: int) -> np.ndarray:
    rho = _state(initial).rho
    for _ in range(n):
        rho = np.kron(rho, model.probe_state.rho)
    return rho


@dataclass(frozen=True)
class DemolitionReport:
    max_residual: float
    threshold: float
    residuals: Dict[Tuple[int, int], float]
    filtration: Optional[bool] = None

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.threshold and self.filtration is not False


def check_self_non_demolition(model: RepeatedInteractionModel, n: int, tol: float = DEFAULT_TOL,
                              cap: int = DEFAULT_CHAIN_CAP) -> DemolitionReport:
    """Pairwise commutators of the record observables, plus the nesting of their algebras."""
    chain = chain_observables(model, n, cap)
    res = {}
    for j in range(n):
        for k in range(j + 1, n):
            A, B = chain.Y[j], chain.Y[k]
            res[(j + 1, k + 1)] = fro(A @ B - B @ A)
    scale = tol * max(1.0, max(fro(Y) for Y in chain.Y) ** 2)
    algebras = [generated_algebra(chain.Y[:k], tol=1e-8) for k in range(1, n + 1)]
    nested = all(
        all(big.contains(B, tol=1e-7) for B in small.basis)
        for small, big in zip(algebras, algebras[1:])
    )
    return DemolitionReport(max(res.values(), default=0.0), scale, res, nested)


def check_non_demolition(model: RepeatedInteractionModel, n: int, tol: float = DEFAULT_TOL,
                         cap: int = DEFAULT_CHAIN_CAP, at: Optional[int] = None) -> DemolitionReport:
    """Commutators ``||[X_t, Y_j]||`` for ``j <= n``, with ``X_t`` the observed operator at step ``at``.

    ``at`` defaults to ``n`` (the filtering situation). Choosing an earlier
    step asks whether a past value of ``X`` can still be conditioned on the
    later record.
    """
    chain = chain_observables(model, n, cap)
    at = n if at is None else at
    if not 0 <= at <= n:
        raise ValidationError(f"'at' must lie in [0, {n}]")
    V = chain.cumulative[at]
    X = dagger(V) @ np.kron(model.observed.matrix, np.eye(model.probe_dim ** n)) @ V
    res = {(at, j + 1): fro(X @ Y - Y @ X) for j, Y in enumerate(chain.Y)}
    scale = tol * max(1.0, fro(X) * max(fro(Y) for Y in chain.Y))
    return DemolitionReport(max(res.values(), default=0.0), scale, res)


@dataclass(frozen=True, eq=False)
class OracleResult:
    distribution: JointDistribution
    states: Dict[Tuple[float, ...], Optional[np.ndarray]]

    def prob(self, record) -> float:
        return self.distribution.prob(*record)


def global_oracle(model: RepeatedInteractionModel, initial, n: int, tol: float = DEFAULT_TOL,
                  cap: int = DEFAULT_CHAIN_CAP) -> OracleResult:
    """Record probabilities and conditioned system states from the full chain.

    Each record's probability is the pyramidal trace with the Heisenberg
    projections ``P_{Y_k}(y_k)``; its conditioned state is
    ``V_n M rho M^dagger V_n^dagger`` (``M`` the product of those projections),
    normalized and reduced to the system. Records of probability at most
    ``tol`` get no state.
    """
    chain = chain_observables(model, n, cap)
    rho = initial_chain_state(model, initial, n)
    state = State(rho)
    ys = model.outcomes
    probs = np.zeros((len(ys),) * n)
    states = {}
    rest = model.probe_dim ** n
    for idx in itertools.product(range(len(ys)), repeat=n):
        record = tuple(ys[i] for i in idx)
        projs = [chain.record_events[k][y] for k, y in enumerate(record)]
        pr = sequential_probability(state, [Event(P, tol=1e-8) for P in projs])
        probs[idx] = pr
        if pr > tol:
            M = np.eye(chain.dim, dtype=complex)
            for P in projs:
                M = P @ M
            out = chain.cumulative[n] @ M @ rho @ dagger(M) @ dagger(chain.cumulative[n])
            states[record] = partial_trace(out, (model.sys_dim, rest), keep=0) / pr
        else:
            states[record] = None
    dist = JointDistribution([list(ys) for _ in range(n)], probs, [f"y{k + 1}" for k in range(n)])
    return OracleResult(dist, states)


def trace_distance(rho, sigma) -> float:
    D = as_matrix(rho) - as_matrix(sigma)
    return 0.5 * float(np.abs(np.linalg.eigvalsh((D + dagger(D)) / 2)).sum())


def cnot_model(observed=None) -> RepeatedInteractionModel:
    """System qubit controls a CNOT onto a probe prepared in ``|0>``; the probe's sigma_z is read."""
    return RepeatedInteractionModel(
        sys_dim=2, probe_dim=2, U=CNOT,
        probe_state=make_pure_state([1, 0]),
        probe_pvm=spectral_pvm(Observable(SIGMA_Z)),
        observed=Observable(SIGMA_Z if observed is None else observed),
    )

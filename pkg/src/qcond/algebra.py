"""Finite-dimensional operator algebras.

An algebra is stored as a Hilbert-Schmidt orthonormal basis of a unital,
adjoint-closed, multiplicatively closed subspace of M_d. The ambient algebra
for commutants is always the full matrix algebra M_d.

Superoperators act on column-stacked operators: ``vec(Phi(X)) = S @ vec(X)``
with ``vec(X) = X.reshape(-1, order="F")``. Choi matrices use the ordering
``C = sum_ij Phi(E_ij) kron E_ij`` (output factor first).
"""
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import (
    AllBranchesNull,
    DimensionMismatch,
    IncompatibleConditioning,
    NoConvergence,
    NotCommutative,
    NotProjection,
)
from .numerics import (
    DEFAULT_TOL,
    as_matrix,
    check_same_dim,
    dagger,
    eig_hermitian,
    fro,
    unvec,
    vec,
)
from .qpspace import Event, _state

MAX_MINIMAL_PROJECTION_TRIES = 8


def commutator(A, B) -> np.ndarray:
    A = as_matrix(A)
    B = as_matrix(B)
    check_same_dim(A, B)
    return A @ B - B @ A


def _projector(P, tol) -> np.ndarray:
    if isinstance(P, Event):
        return P.projector
    P = as_matrix(P)
    if fro(P - dagger(P)) > tol * max(1.0, fro(P)) or fro(P @ P - P) > tol * max(1.0, fro(P)):
        raise NotProjection("operand is not an orthogonal projection")
    return P


def events_compatible(P, Q, tol: float = DEFAULT_TOL) -> bool:
    """True iff the two projections commute; in that case ``PQ`` is verified to be a projection."""
    P = _projector(P, tol)
    Q = _projector(Q, tol)
    check_same_dim(P, Q)
    scale = tol * (1.0 + fro(P) * fro(Q))
    if fro(P @ Q - Q @ P) > scale:
        return False
    # a commuting pair must multiply to an event
    Event(P @ Q, tol=scale)
    return True


def observables_compatible(X, Y, tol: float = DEFAULT_TOL) -> bool:
    """Compatibility of two observables via their spectral projections.

    The commutator test ``||[X, Y]||_F <= tol * (1 + ||X|| ||Y||)`` is run as
    well; a disagreement between the two verdicts only happens for
    near-degenerate spectra and is reported with a warning.
    """
    X = as_matrix(X)
    Y = as_matrix(Y)
    check_same_dim(X, Y)
    sx = eig_hermitian(X, tol)
    sy = eig_hermitian(Y, tol)
    by_projectors = all(
        fro(P @ Q - Q @ P) <= tol * (1.0 + fro(P) * fro(Q))
        for P in sx.projectors
        for Q in sy.projectors
    )
    by_commutator = fro(X @ Y - Y @ X) <= tol * (1.0 + fro(X) * fro(Y))
    if by_projectors != by_commutator:
        warnings.warn("projector and commutator compatibility tests disagree; "
                      "the spectrum is probably nearly degenerate", RuntimeWarning)
    return by_projectors


@dataclass(frozen=True)
class LemmaReport:
    qpq_vs_pqp: float
    pqp_vs_qp: float
    commutator: float
    threshold: float

    @property
    def commute(self) -> bool:
        return max(self.qpq_vs_pqp, self.pqp_vs_qp, self.commutator) <= self.threshold

    @property
    def consistent(self) -> bool:
        flags = {r <= self.threshold for r in (self.qpq_vs_pqp, self.pqp_vs_qp, self.commutator)}
        return len(flags) == 1


def projection_lemma_witness(P, Q, tol: float = DEFAULT_TOL) -> LemmaReport:
    """Residuals of ``QPQ = PQP``, ``PQP = QP`` and ``[P, Q] = 0`` for two projections."""
    P = _projector(P, tol)
    Q = _projector(Q, tol)
    check_same_dim(P, Q)
    PQ = P @ Q
    QP = Q @ P
    PQP = PQ @ P
    QPQ = QP @ Q
    return LemmaReport(
        qpq_vs_pqp=fro(QPQ - PQP),
        pqp_vs_qp=fro(PQP - QP),
        commutator=fro(PQ - QP),
        threshold=tol * (1.0 + fro(P) * fro(Q)),
    )


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    """HS-orthonormal basis of a finite-dimensional operator algebra inside M_dim."""

    dim: int
    basis: List[np.ndarray]
    contains_identity: bool = True

    @property
    def columns(self) -> np.ndarray:
        """The basis as orthonormal columns of vectorized operators, shape (dim**2, len)."""
        if not self.basis:
            return np.zeros((self.dim * self.dim, 0), dtype=complex)
        return np.column_stack([vec(B) for B in self.basis])

    def __len__(self):
        return len(self.basis)

    def project(self, X) -> np.ndarray:
        """HS-orthogonal projection of ``X`` onto the span."""
        Q = self.columns
        return unvec(Q @ (dagger(Q) @ vec(as_matrix(X))), self.dim)

    def contains(self, X, tol: float = DEFAULT_TOL) -> bool:
        X = as_matrix(X)
        return fro(X - self.project(X)) <= tol * max(1.0, fro(X))


def _orthonormal_extend(Q: np.ndarray, cands: np.ndarray, tol: float) -> np.ndarray:
    """Append to ``Q`` an orthonormal basis for the part of ``cands`` columns outside span(Q)."""
    if cands.shape[1] == 0:
        return Q
    R = cands
    for _ in range(2):
        if Q.shape[1]:
            R = R - Q @ (dagger(Q) @ R)
    U, s, _ = np.linalg.svd(R, full_matrices=False)
    new = U[:, s > tol]
    if new.shape[1] == 0:
        return Q
    for _ in range(2):
        if Q.shape[1]:
            new = new - Q @ (dagger(Q) @ new)
        new, _ = np.linalg.qr(new)
    return np.column_stack([Q, new])


def _from_columns(Q: np.ndarray, dim: int, tol: float) -> AlgebraBasis:
    basis = [unvec(Q[:, i], dim) for i in range(Q.shape[1])]
    eye = vec(np.eye(dim))
    has_id = np.linalg.norm(eye - Q @ (dagger(Q) @ eye)) <= tol * np.sqrt(dim) if Q.shape[1] else False
    return AlgebraBasis(dim, basis, bool(has_id))


def _normalized_columns(ops: Sequence[np.ndarray]) -> np.ndarray:
    cols = []
    for op in ops:
        n = fro(op)
        if n > 0:
            cols.append(vec(op) / n)
    if not cols:
        return np.zeros((0, 0), dtype=complex)
    return np.column_stack(cols)


def generated_algebra(generators: Sequence, tol: float = DEFAULT_TOL, dim: Optional[int] = None) -> AlgebraBasis:
    """Smallest unital *-algebra containing the generators.

    Seeds the span with the identity, the generators and their adjoints, then
    adds all pairwise products of basis elements until the dimension stops
    growing (at most ``dim**2``).
    """
    gens = [as_matrix(g) for g in generators]
    if gens:
        d = check_same_dim(*gens)
        if dim is not None and dim != d:
            raise DimensionMismatch(f"generators have dim {d}, expected {dim}")
    elif dim is None:
        raise DimensionMismatch("ambient dimension required when there are no generators")
    else:
        d = dim
    seed = [np.eye(d, dtype=complex)] + gens + [dagger(g) for g in gens]
    Q = _orthonormal_extend(np.zeros((d * d, 0), dtype=complex), _normalized_columns(seed), tol)
    while True:
        k = Q.shape[1]
        B = Q.T.reshape(k, d, d).transpose(0, 2, 1)  # unvec each column
        prods = np.einsum("aij,bjk->abik", B, B).reshape(k * k, d, d)
        cands = prods.transpose(0, 2, 1).reshape(k * k, d * d).T
        Q = _orthonormal_extend(Q, cands, tol)
        if Q.shape[1] == k or Q.shape[1] >= d * d:
            break
    return _from_columns(Q, d, tol)


def commutation_matrix(A: np.ndarray) -> np.ndarray:
    """Matrix ``L`` with ``L vec(X) = vec(AX - XA)``."""
    d = A.shape[0]
    eye = np.eye(d)
    return np.kron(eye, A) - np.kron(A.T, eye)


def commutant(generators: Sequence, tol: float = DEFAULT_TOL, dim: Optional[int] = None) -> AlgebraBasis:
    """All ``X`` in M_d commuting with every generator and every generator's adjoint.

    Including adjoints makes the result the commutant of the *-algebra the
    generators produce, so it is itself a *-algebra. For Hermitian generators
    this is exactly ``{X : [X, A_i] = 0}``.
    """
    if isinstance(generators, AlgebraBasis):
        gens = list(generators.basis)
        d = generators.dim
    elif generators:
        gens = [as_matrix(g) for g in generators]
        d = check_same_dim(*gens)
    elif dim is not None:
        gens, d = [], dim
    else:
        raise DimensionMismatch("ambient dimension required when there are no generators")
    ops = []
    for g in gens:
        ops.append(g)
        if fro(g - dagger(g)) > tol * max(1.0, fro(g)):
            ops.append(dagger(g))
    if not ops:
        Q = np.eye(d * d, dtype=complex)
        return _from_columns(Q, d, tol)
    L = np.vstack([commutation_matrix(g / max(fro(g), 1e-300)) for g in ops])
    _, s, Vh = np.linalg.svd(L)
    s_full = np.zeros(d * d)
    s_full[: len(s)] = s
    smax = s_full[0]
    keep = s_full <= tol * max(smax, 1.0)
    Q = np.conj(Vh[keep]).T
    # the SVD basis is orthonormal already; run through the extender for a clean QR finish
    Q = _orthonormal_extend(np.zeros((d * d, 0), dtype=complex), Q, tol)
    return _from_columns(Q, d, tol)


def span_distance(A: AlgebraBasis, B: AlgebraBasis) -> float:
    """Largest distance from a unit vector of one span to the other span (spectral norm)."""
    QA, QB = A.columns, B.columns
    if QA.shape[1] != QB.shape[1]:
        return 1.0
    if QA.shape[1] == 0:
        return 0.0
    ra = QA - QB @ (dagger(QB) @ QA)
    rb = QB - QA @ (dagger(QA) @ QB)
    return float(max(np.linalg.norm(ra, 2), np.linalg.norm(rb, 2)))


def algebra_defects(A: AlgebraBasis) -> dict:
    """Residuals of the algebra invariants: orthonormality, *-closure, product closure, unit."""
    Q = A.columns
    k = Q.shape[1]
    gram = dagger(Q) @ Q
    out = {"orthonormality": float(np.abs(gram - np.eye(k)).max()) if k else 0.0}
    adj = max((fro(dagger(B) - A.project(dagger(B))) for B in A.basis), default=0.0)
    prod = 0.0
    for Bi in A.basis:
        for Bj in A.basis:
            P = Bi @ Bj
            prod = max(prod, fro(P - A.project(P)))
    eye = np.eye(A.dim)
    out.update(adjoint=adj, product=prod, identity=fro(eye - A.project(eye)))
    return out


def is_commutative(A: AlgebraBasis, tol: float = DEFAULT_TOL) -> bool:
    return all(
        fro(Bi @ Bj - Bj @ Bi) <= tol
        for i, Bi in enumerate(A.basis)
        for Bj in A.basis[i + 1:]
    )


def minimal_projections(A: AlgebraBasis, tol: float = DEFAULT_TOL,
                        rng: Optional[np.random.Generator] = None) -> List[Event]:
    """Minimal projections of a commutative algebra (its joint spectral resolution).

    A random real combination of the Hermitian parts of the basis is
    diagonalized; its spectral projections are accepted once every basis
    element is reproduced as a combination of them. Up to eight fresh draws are
    tried before giving up with ``NoConvergence``.
    """
    if not is_commutative(A, tol):
        raise NotCommutative("minimal projections need a commutative algebra")
    rng = np.random.default_rng(0) if rng is None else rng
    herm = []
    for B in A.basis:
        herm.append((B + dagger(B)) / 2)
        herm.append((B - dagger(B)) / 2j)
    for _ in range(MAX_MINIMAL_PROJECTION_TRIES):
        c = rng.uniform(-1.0, 1.0, size=len(herm))
        H = sum(ci * h for ci, h in zip(c, herm)) if herm else np.zeros((A.dim, A.dim))
        sd = eig_hermitian(H, tol)
        Ps = sd.projectors
        ok = True
        for B in A.basis:
            rebuilt = sum(np.trace(P @ B) / np.trace(P).real * P for P in Ps)
            if fro(B - rebuilt) > 1e3 * tol * max(1.0, fro(B)):
                ok = False
                break
        if ok:
            return [Event(P, tol=1e3 * tol) for P in Ps]
    raise NoConvergence("could not resolve minimal projections with a generic element")


@dataclass(frozen=True)
class Branch:
    projector: np.ndarray
    probability: float
    value: complex
    retained: bool


def conditioning_branches(state, X, Y: AlgebraBasis, tol: float = DEFAULT_TOL,
                          rng: Optional[np.random.Generator] = None) -> List[Branch]:
    """Per-outcome pieces of ``E[X | Y]``: minimal projection, its probability and conditional value."""
    rho = _state(state).rho
    X = as_matrix(X)
    check_same_dim(rho, X)
    if Y.dim != X.shape[0]:
        raise DimensionMismatch(f"algebra lives in M_{Y.dim}, operator in M_{X.shape[0]}")
    if not is_commutative(Y, tol):
        raise NotCommutative("conditioning algebra is not commutative")
    scale = tol * max(1.0, fro(X))
    worst = max((fro(X @ B - B @ X) for B in Y.basis), default=0.0)
    if worst > scale:
        raise IncompatibleConditioning(
            f"operator does not commute with the conditioning algebra (residual {worst:.3e})")
    branches = []
    for E in minimal_projections(Y, tol, rng):
        P = E.projector
        p = float(np.trace(rho @ P).real)
        if p > tol:
            branches.append(Branch(P, p, complex(np.trace(rho @ P @ X) / p), True))
        else:
            branches.append(Branch(P, max(p, 0.0), 0.0, False))
    if not any(b.retained for b in branches):
        raise AllBranchesNull("every outcome of the conditioning algebra has zero probability")
    return branches


def conditional_expectation(state, X, Y: AlgebraBasis, tol: float = DEFAULT_TOL,
                            rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """``E[X | Y] = sum_y tr(rho P_y X) / tr(rho P_y) P_y`` over the minimal projections of ``Y``.

    ``X`` must commute with ``Y`` (non-demolition), otherwise
    ``IncompatibleConditioning`` is raised. Branches of probability at most
    ``tol`` are dropped, i.e. get conditional value 0. The map is linear, so
    ``X`` need not be Hermitian; the result is Hermitian whenever ``X`` is.
    """
    branches = conditioning_branches(state, X, Y, tol, rng)
    d = Y.dim
    out = np.zeros((d, d), dtype=complex)
    for b in branches:
        if b.retained:
            out = out + b.value * b.projector
    return out


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map M_in -> M_out stored as its action on column-stacked operators."""

    in_dim: int
    out_dim: int
    action: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.action, dtype=complex)
        if S.shape != (self.out_dim ** 2, self.in_dim ** 2):
            raise DimensionMismatch(
                f"action must be {(self.out_dim ** 2, self.in_dim ** 2)}, got {S.shape}")
        if not np.all(np.isfinite(S)):
            raise DimensionMismatch("action has non-finite entries")
        object.__setattr__(self, "action", S)

    def __call__(self, X) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[0] != self.in_dim:
            raise DimensionMismatch(f"map expects dim {self.in_dim}, got {X.shape[0]}")
        return unvec(self.action @ vec(X), self.out_dim)

    @classmethod
    def from_kraus(cls, kraus: Sequence) -> "Superoperator":
        """``X -> sum_k K_k X K_k^dagger``; each ``K_k`` has shape (out_dim, in_dim)."""
        ks = [np.asarray(K, dtype=complex) for K in kraus]
        out_dim, in_dim = ks[0].shape
        S = sum(np.kron(np.conj(K), K) for K in ks)
        return cls(in_dim, out_dim, S)

    @classmethod
    def from_function(cls, f: Callable, in_dim: int, out_dim: Optional[int] = None) -> "Superoperator":
        cols = []
        for j in range(in_dim):
            for i in range(in_dim):
                E = np.zeros((in_dim, in_dim), dtype=complex)
                E[i, j] = 1.0
                cols.append(vec(np.asarray(f(E), dtype=complex)))
        S = np.column_stack(cols)
        out_dim = out_dim or int(round(np.sqrt(S.shape[0])))
        return cls(in_dim, out_dim, S)

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(dim, dim, np.eye(dim * dim, dtype=complex))

    @classmethod
    def transpose(cls, dim: int) -> "Superoperator":
        return cls.from_function(lambda X: X.T, dim)

    @classmethod
    def conjugation(cls, V) -> "Superoperator":
        """``X -> V X V^dagger``."""
        return cls.from_kraus([V])


def choi_matrix(phi: Superoperator) -> np.ndarray:
    """``C = sum_ij Phi(E_ij) kron E_ij``, a square matrix of size out_dim*in_dim."""
    n, m = phi.in_dim, phi.out_dim
    C = np.zeros((m * n, m * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1.0
            C += np.kron(phi(E), E)
    return C


def is_completely_positive(phi: Superoperator, tol: float = DEFAULT_TOL) -> bool:
    """Choi criterion: CP iff the Choi matrix is positive semidefinite."""
    C = choi_matrix(phi)
    scale = max(1.0, fro(C))
    if fro(C - dagger(C)) > tol * scale:
        return False
    w = np.linalg.eigvalsh((C + dagger(C)) / 2)
    return bool(w[0] >= -tol * scale)


def is_qp_morphism(phi: Superoperator, E1, E2, tol: float = DEFAULT_TOL) -> bool:
    """CP, unital, and ``tr(rho2 Phi(A)) = tr(rho1 A)`` on the matrix units of M_in."""
    rho1 = _state(E1).rho
    rho2 = _state(E2).rho
    if rho1.shape[0] != phi.in_dim or rho2.shape[0] != phi.out_dim:
        raise DimensionMismatch("state dimensions do not match the map")
    if not is_completely_positive(phi, tol):
        return False
    if fro(phi(np.eye(phi.in_dim)) - np.eye(phi.out_dim)) > tol * phi.out_dim:
        return False
    n = phi.in_dim
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1.0
            if abs(np.trace(rho2 @ phi(E)) - np.trace(rho1 @ E)) > tol * n:
                return False
    return True

"""Dense complex-matrix kernel.

Hermitian eigendecomposition with eigenvalue clustering, Hilbert-Schmidt
geometry and nullspace extraction. Everything else in the package is built
on these few routines.

Vectorization uses column stacking throughout: ``vec(X) = X.reshape(-1, order="F")``,
so that ``vec(A X B) = (B.T kron A) vec(X)``.
"""
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian, ValidationError

DEFAULT_TOL = 1e-9


def as_matrix(A) -> np.ndarray:
    """Coerce ``A`` to a finite square complex array.

    Objects exposing a ``matrix`` or ``projector`` or ``rho`` attribute are
    unwrapped first, so the semantic wrappers in :mod:`qcond.qpspace` can be
    passed anywhere a plain array is accepted.
    """
    for attr in ("matrix", "projector", "rho"):
        if hasattr(A, attr):
            A = getattr(A, attr)
            break
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix has non-finite entries")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def fro(A) -> float:
    return float(np.linalg.norm(A))


def vec(X: np.ndarray) -> np.ndarray:
    return np.asarray(X).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def check_same_dim(*mats) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) > 1:
        raise DimensionMismatch(f"operator dimensions differ: {sorted(dims)}")
    return dims.pop()


def hermiticity_defect(A: np.ndarray) -> float:
    return fro(A - dagger(A))


def is_hermitian(A, tol: float = DEFAULT_TOL) -> bool:
    A = as_matrix(A)
    return hermiticity_defect(A) <= tol * max(1.0, fro(A))


def is_unitary(U, tol: float = DEFAULT_TOL) -> bool:
    U = as_matrix(U)
    return fro(dagger(U) @ U - np.eye(U.shape[0])) <= tol * U.shape[0]


def cluster_threshold(norm: float, tol: float) -> float:
    return max(1e-8, 1e3 * tol) * (1.0 + norm)


@dataclass(frozen=True)
class SpectralData:
    """Clustered spectral resolution ``A = sum_i eigenvalues[i] * projectors[i]``."""

    eigenvalues: np.ndarray
    projectors: List[np.ndarray]

    def reconstruct(self) -> np.ndarray:
        return sum(x * P for x, P in zip(self.eigenvalues, self.projectors))

    def __len__(self):
        return len(self.eigenvalues)


def eig_hermitian(A, tol: float = DEFAULT_TOL) -> SpectralData:
    """Spectral resolution of a Hermitian matrix with degenerate eigenvalues merged.

    Sorted eigenvalues are chained into one cluster while consecutive gaps stay
    below ``max(1e-8, 1e3*tol) * (1 + ||A||)``. Each cluster is reported with
    the mean of its eigenvalues and the projector ``V V^dagger`` built from the
    cluster's eigenvectors.

    Raises:
        NotHermitian: if ``||A - A^dagger||_F`` exceeds the tolerance.
        NoConvergence: if LAPACK fails to converge.
    """
    A = as_matrix(A)
    if hermiticity_defect(A) > tol * max(1.0, fro(A)):
        raise NotHermitian(f"matrix is not Hermitian (defect {hermiticity_defect(A):.3e})")
    H = (A + dagger(A)) / 2
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc

    thr = cluster_threshold(float(np.max(np.abs(w))), tol)
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= thr:
            groups[-1].append(i)
        else:
            groups.append([i])

    values = np.array([w[g].mean() for g in groups])
    projectors = []
    for g in groups:
        Vg = V[:, g]
        P = Vg @ dagger(Vg)
        projectors.append((P + dagger(P)) / 2)
    return SpectralData(values, projectors)


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt inner product ``tr(A^dagger B)``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    return complex(np.vdot(A, B))


def nullspace(L, tol: float = DEFAULT_TOL) -> List[np.ndarray]:
    """Orthonormal basis of ``{v : ||L v|| <= tol * ||L||}`` (spectral norm).

    Works for rectangular ``L``. A zero matrix has the whole space as nullspace.
    """
    L = np.asarray(L, dtype=complex)
    if L.ndim != 2:
        raise DimensionMismatch("nullspace expects a 2-d array")
    if not np.all(np.isfinite(L)):
        raise ValidationError("matrix has non-finite entries")
    n = L.shape[1]
    if L.size == 0:
        return [np.eye(n, dtype=complex)[:, i] for i in range(n)]
    try:
        _, s, Vh = np.linalg.svd(L)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc
    smax = s[0] if len(s) else 0.0
    if smax == 0.0:
        return [np.eye(n, dtype=complex)[:, i] for i in range(n)]
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    return [np.conj(Vh[i]) for i in range(n) if s_full[i] <= tol * smax]


def gram_schmidt_hs(ops: Sequence, tol: float = DEFAULT_TOL) -> List[np.ndarray]:
    """Hilbert-Schmidt orthonormalization of a list of square matrices.

    Inputs whose residual after projection onto the previous span is at most
    ``tol * max(1, ||op||)`` are dropped. Two projection passes are used per
    input, which keeps the output orthonormal to working precision.
    """
    ops = [np.asarray(op, dtype=complex) for op in ops]
    if not ops:
        return []
    shape = ops[0].shape
    for op in ops:
        if op.shape != shape:
            raise DimensionMismatch(f"shapes differ: {shape} vs {op.shape}")
    Q = np.zeros((ops[0].size, 0), dtype=complex)
    for op in ops:
        Q = _extend_basis(Q, vec(op), tol)
    d = shape[0]
    return [unvec(Q[:, i], d) for i in range(Q.shape[1])]


def _extend_basis(Q: np.ndarray, v: np.ndarray, tol: float) -> np.ndarray:
    # Q has orthonormal columns; append the normalized residual of v if it is significant
    norm = np.linalg.norm(v)
    r = v.copy()
    for _ in range(2):
        if Q.shape[1]:
            r = r - Q @ (dagger(Q) @ r)
    rn = np.linalg.norm(r)
    if rn <= tol * max(1.0, norm):
        return Q
    return np.column_stack([Q, r / rn])


def orthonormal_columns(ops: Sequence, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal matrix whose columns span ``vec`` of the given operators."""
    G = gram_schmidt_hs(ops, tol)
    if not G:
        d2 = np.asarray(ops[0]).size if len(ops) else 0
        return np.zeros((d2, 0), dtype=complex)
    return np.column_stack([vec(g) for g in G])


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (A + dagger(A)) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    Z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int = None) -> np.ndarray:
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ dagger(G)
    return rho / np.trace(rho).real


def random_projector(dim: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    V = random_unitary(dim, rng)[:, :rank]
    return V @ dagger(V)


I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

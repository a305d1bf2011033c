"""JSON conventions shared by scenario files and reports.

Complex scalars are ``[re, im]`` pairs (plain reals are accepted on input);
matrices are row-major nested lists of such scalars.
"""
from numbers import Real

import numpy as np

from .errors import SchemaError


def complex_to_json(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in M]


def vector_to_json(v) -> list:
    return [complex_to_json(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def scalar_from_json(x, path: str) -> complex:
    if isinstance(x, bool):
        raise SchemaError(path, "expected a number or [re, im] pair, got a boolean")
    if isinstance(x, Real):
        return complex(float(x), 0.0)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
            isinstance(v, Real) and not isinstance(v, bool) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise SchemaError(path, f"expected a number or [re, im] pair, got {x!r}")


def vector_from_json(v, path: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise SchemaError(path, "expected a non-empty array of complex entries")
    return np.array([scalar_from_json(x, f"{path}[{i}]") for i, x in enumerate(v)], dtype=complex)


def matrix_from_json(M, path: str) -> np.ndarray:
    if not isinstance(M, list) or not M or not all(isinstance(r, list) for r in M):
        raise SchemaError(path, "expected a non-empty array of rows")
    n = len(M)
    rows = []
    for i, row in enumerate(M):
        if len(row) != n:
            raise SchemaError(f"{path}[{i}]", f"row has {len(row)} entries, matrix must be {n}x{n}")
        rows.append([scalar_from_json(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    A = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise SchemaError(path, "matrix has non-finite entries")
    return A

"""Dense complex linear algebra substrate.

All matrices and vectors are plain ``numpy.ndarray`` objects with
``complex128`` entries.  Everything here is a pure function; inputs are
never mutated.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinalgError",
    "DimensionMismatchError",
    "SingularMatrixError",
    "NonFiniteError",
    "as_matrix",
    "as_vector",
    "max_norm",
    "adjoint",
    "commutator",
    "mat_exp",
    "inverse",
    "solve",
    "is_hermitian",
    "hermitian_eigenvalues",
    "eigenvalues",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
]

# Pivot smaller than this (relative to the matrix max-norm) is treated
# as an exactly singular matrix.
SINGULAR_PIVOT_RTOL = 1e-13

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class LinalgError(Exception):
    """Base error for the linear algebra layer."""


class DimensionMismatchError(LinalgError):
    """Operands have incompatible shapes."""


class SingularMatrixError(LinalgError):
    """A matrix required to be invertible is (numerically) singular."""


class NonFiniteError(LinalgError):
    """An entry is NaN or infinite."""


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Validate ``a`` as a finite complex matrix and return a complex copy."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise NonFiniteError("matrix has NaN or Inf entries")
    return m


def as_vector(a) -> np.ndarray:
    """Validate ``a`` as a finite complex vector and return a complex copy."""
    v = np.asarray(a, dtype=complex)
    if v.ndim != 1 or v.shape[0] == 0:
        raise DimensionMismatchError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise NonFiniteError("vector has NaN or Inf entries")
    return v


def max_norm(a) -> float:
    """Entrywise max-norm, the norm used by every residual bound."""
    return float(np.max(np.abs(np.asarray(a))))


def adjoint(a) -> np.ndarray:
    """Hermitian conjugate (conjugate transpose)."""
    return as_matrix(a).conj().T


def commutator(a, b) -> np.ndarray:
    """Commutator ``a @ b - b @ a`` of two square matrices."""
    a = as_matrix(a, square=True)
    b = as_matrix(b, square=True)
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"commutator needs equal shapes, got {a.shape} and {b.shape}"
        )
    return a @ b - b @ a


def is_hermitian(a, rtol: float = 1e-12) -> bool:
    """True when ``a`` equals its adjoint to ``rtol`` relative in max-norm."""
    a = as_matrix(a, square=True)
    scale = max(max_norm(a), 1.0)
    return max_norm(a - a.conj().T) <= rtol * scale


# Taylor kernel: with the argument scaled below this 1-norm bound, 25 terms
# reach full double precision.
_EXP_THETA = 0.25
_EXP_TERMS = 25


def mat_exp(a) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Taylor kernel.

    Relative accuracy is ~1e-14 for max-norm up to ~10, comfortably inside
    the 1e-12 contract.
    """
    a = as_matrix(a, square=True)
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > _EXP_THETA:
        squarings = int(np.ceil(np.log2(norm / _EXP_THETA)))
        a = a / (2.0**squarings)
    # Horner evaluation of the truncated series.
    result = np.eye(n, dtype=complex)
    for k in range(_EXP_TERMS, 0, -1):
        result = np.eye(n, dtype=complex) + (a / k) @ result
    for _ in range(squarings):
        result = result @ result
    return result


def _lu_decompose(a: np.ndarray):
    """LU with partial pivoting; raises on pivots below the singular cutoff."""
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    cutoff = SINGULAR_PIVOT_RTOL * max(max_norm(a), np.finfo(float).tiny)
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(lu[col:, col])))
        if np.abs(lu[pivot_row, col]) < cutoff:
            raise SingularMatrixError(
                f"pivot {np.abs(lu[pivot_row, col]):.3e} below cutoff {cutoff:.3e}"
            )
        if pivot_row != col:
            lu[[col, pivot_row]] = lu[[pivot_row, col]]
            perm[[col, pivot_row]] = perm[[pivot_row, col]]
        lu[col + 1 :, col] /= lu[col, col]
        lu[col + 1 :, col + 1 :] -= np.outer(lu[col + 1 :, col], lu[col, col + 1 :])
    return lu, perm


def solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` (b a vector or matrix) via pivoted LU."""
    a = as_matrix(a, square=True)
    b_arr = np.asarray(b, dtype=complex)
    vector_rhs = b_arr.ndim == 1
    if vector_rhs:
        b_arr = b_arr[:, None]
    if b_arr.shape[0] != a.shape[0]:
        raise DimensionMismatchError(
            f"rhs has {b_arr.shape[0]} rows, matrix is {a.shape[0]}x{a.shape[1]}"
        )
    lu, perm = _lu_decompose(a)
    n = a.shape[0]
    x = b_arr[perm].copy()
    for col in range(n):  # forward: unit lower triangle
        x[col + 1 :] -= np.outer(lu[col + 1 :, col], x[col])
    for col in range(n - 1, -1, -1):  # backward: upper triangle
        x[col] /= lu[col, col]
        x[:col] -= np.outer(lu[:col, col], x[col])
    return x[:, 0] if vector_rhs else x


def inverse(a) -> np.ndarray:
    """Inverse of a square matrix; raises ``SingularMatrixError`` when a
    pivot falls below ``1e-13 * max_norm(a)``."""
    a = as_matrix(a, square=True)
    return solve(a, np.eye(a.shape[0], dtype=complex))


def hermitian_eigenvalues(a) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, ascending."""
    return np.linalg.eigvalsh(as_matrix(a, square=True))


def eigenvalues(a) -> np.ndarray:
    """Eigenvalues of a general square matrix, sorted by (real, imag)."""
    vals = np.linalg.eigvals(as_matrix(a, square=True))
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]

"""Small dense complex linear algebra used throughout the package.

Every matrix here is at most 16x16 (superoperators on two spin-1/2
particles), so plain dense numpy arrays are used everywhere.

Vectorization convention is column stacking::

    vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

CMatrix = NDArray[np.complex128]


class DegenerateSteadyStateError(ValueError):
    """The near-null space of a generator is not one-dimensional."""

    def __init__(self, message: str, null_dimension: int):
        super().__init__(message)
        self.null_dimension = null_dimension


def _as_square(a: ArrayLike, name: str = "a") -> CMatrix:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def kron(a: ArrayLike, b: ArrayLike) -> CMatrix:
    """Kronecker product; the left factor indexes the coarse blocks."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def commutator(a: ArrayLike, b: ArrayLike) -> CMatrix:
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def anticommutator(a: ArrayLike, b: ArrayLike) -> CMatrix:
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b + b @ a


def dagger(a: ArrayLike) -> CMatrix:
    return np.asarray(a, dtype=np.complex128).conj().T


# -- vectorization ----------------------------------------------------------

def vec(rho: ArrayLike) -> NDArray[np.complex128]:
    """Column-stack a matrix into a vector."""
    return np.asarray(rho, dtype=np.complex128).reshape(-1, order="F")


def unvec(v: ArrayLike, dim: int | None = None) -> CMatrix:
    v = np.asarray(v, dtype=np.complex128).ravel()
    if dim is None:
        dim = math.isqrt(v.size)
    if dim * dim != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((dim, dim), order="F")


def spre(a: ArrayLike) -> CMatrix:
    """Superoperator of rho -> a @ rho."""
    a = _as_square(a)
    return np.kron(np.eye(a.shape[0]), a)


def spost(a: ArrayLike) -> CMatrix:
    """Superoperator of rho -> rho @ a."""
    a = _as_square(a)
    return np.kron(a.T, np.eye(a.shape[0]))


def commutator_super(a: ArrayLike) -> CMatrix:
    """Superoperator of rho -> [a, rho]."""
    return spre(a) - spost(a)


def lindblad_super(jump: ArrayLike) -> CMatrix:
    """Superoperator of rho -> J rho J^dag - 1/2 {J^dag J, rho}."""
    j = _as_square(jump, "jump")
    jdj = j.conj().T @ j
    return spre(j) @ spost(j.conj().T) - 0.5 * (spre(jdj) + spost(jdj))


# -- matrix exponential -----------------------------------------------------

# Pade(13) coefficients and the theta_13 bound from Higham (2005).
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(a: ArrayLike) -> CMatrix:
    """Matrix exponential by scaling and squaring around a [13/13] Pade core."""
    a = _as_square(a)
    n = a.shape[0]
    ident = np.eye(n, dtype=np.complex128)
    if n == 0:
        return a.copy()
    norm1 = np.linalg.norm(a, 1)
    if not np.isfinite(norm1):
        raise ValueError("expm input contains non-finite entries")
    if norm1 == 0.0:
        return ident

    s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
    x = a / (2.0 ** s)

    b = _PADE13
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    u = x @ (
        x6 @ (b[13] * x6 + b[11] * x4 + b[9] * x2)
        + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * ident
    )
    v = (
        x6 @ (b[12] * x6 + b[10] * x4 + b[8] * x2)
        + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * ident
    )
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


# -- null space and eigen -----------------------------------------------------

def null_vector(a: ArrayLike, tol: float = 1e-12) -> tuple[NDArray[np.complex128], float, int]:
    """Unit vector minimising ``|a v|``.

    Returns ``(v, residual, null_dimension)`` where ``null_dimension`` counts
    singular values at or below ``tol * |a|_2``. Raises
    :class:`DegenerateSteadyStateError` unless that count is exactly one.
    """
    a = _as_square(a)
    _, s, vh = np.linalg.svd(a)
    scale = s[0] if s.size else 0.0
    null_dim = int(np.count_nonzero(s <= tol * scale)) if scale > 0 else a.shape[0]
    if null_dim != 1:
        raise DegenerateSteadyStateError(
            f"near-null space has dimension {null_dim} at tol={tol:g}", null_dim
        )
    v = vh[-1].conj()
    v = v / np.linalg.norm(v)
    residual = float(np.linalg.norm(a @ v))
    return v, residual, null_dim


def herm_eig(a: ArrayLike) -> tuple[NDArray[np.float64], CMatrix]:
    """Eigen-decomposition of the Hermitian part of ``a`` (ascending)."""
    a = _as_square(a)
    return np.linalg.eigh(0.5 * (a + a.conj().T))

"""Dense complex linear algebra primitives.

Every routine here is a pure function on numpy arrays. Hermitian-input
routines symmetrize via ``(A + A^H) / 2`` and refuse inputs whose
anti-Hermitian part is larger than the tolerance allows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

# one shared SVD cutoff for pseudoinverses and kernels
SVD_RTOL = 1e-10
# relative size of accumulated roundoff in a handful of dense products
ROUNDOFF = 100 * np.finfo(float).eps


class DimensionError(ValueError):
    """Raised when matrix shapes are incompatible."""


class NotPSDError(ValueError):
    """Raised when a matrix expected to be positive semidefinite is not."""


@dataclass(frozen=True)
class Tolerance:
    """Relative/absolute tolerance pair used by every predicate.

    Parameters
    ----------
    rel_eps : float
        Relative tolerance, scaled by the norms of the operands.
    abs_floor : float
        Absolute floor used when all operands vanish.
    """

    rel_eps: float = 1e-9
    abs_floor: float = 1e-12

    def __post_init__(self):
        if self.rel_eps < 0 or self.abs_floor < 0:
            raise ValueError("tolerances must be nonnegative")

    def bound(self, scale: float) -> float:
        return max(self.rel_eps * scale, self.abs_floor)


DEFAULT_TOL = Tolerance()


def as_cmatrix(A, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Return ``A`` as a finite 2-d complex array, optionally checking its shape."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got ndim={A.ndim}")
    if rows is not None and A.shape[0] != rows:
        raise DimensionError(f"expected {rows} rows, got {A.shape[0]}")
    if cols is not None and A.shape[1] != cols:
        raise DimensionError(f"expected {cols} columns, got {A.shape[1]}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def dag(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def op_norm(A) -> float:
    """Operator (spectral) norm, i.e. the largest singular value."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def _require_square(A: np.ndarray) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")


def hermitize(A, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Return ``(A + A^H) / 2`` after checking ``A`` is Hermitian within ``tol``.

    Raises
    ------
    DimensionError
        If ``A`` is not square or its anti-Hermitian part exceeds
        ``rel_eps * (1 + ||A||)``.
    """
    A = np.asarray(A, dtype=complex)
    _require_square(A)
    skew = op_norm(A - dag(A))
    if skew > tol.bound(1.0 + op_norm(A)):
        raise DimensionError(f"matrix is not Hermitian (||A - A^H|| = {skew:.3e})")
    return 0.5 * (A + dag(A))


def mat_exp(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a degree-13 Pade approximant.

    Backed by :func:`scipy.linalg.expm` (Al-Mohy & Higham), which is the
    same algorithm.
    """
    A = np.asarray(A, dtype=complex)
    _require_square(A)
    if A.shape[0] == 0:
        return np.zeros((0, 0), dtype=complex)
    return scipy.linalg.expm(A)


def psd_sqrt(A, tol: Tolerance = DEFAULT_TOL, floor: float = 0.0) -> np.ndarray:
    """Hermitian positive semidefinite square root.

    Eigenvalues in ``[-rel_eps * ||A||, 0)`` are clamped to zero; anything
    more negative raises :class:`NotPSDError`. When ``A`` carries an
    absolute error, pass it as ``floor``: eigenvalues with modulus up to
    ``floor`` are then treated as exact zeros instead of contributing
    ``sqrt(floor)``-sized noise.
    """
    H = hermitize(A, tol)
    if H.shape[0] == 0:
        return H.copy()
    w, V = np.linalg.eigh(H)
    scale = float(np.max(np.abs(w)))
    if w.min() < -max(tol.bound(scale), floor):
        raise NotPSDError(f"smallest eigenvalue {w.min():.3e} is negative")
    w = np.where(w <= floor, 0.0, w)
    B = (V * np.sqrt(w)) @ dag(V)
    return 0.5 * (B + dag(B))


def _kept(s: np.ndarray, rtol: float, atol: float) -> np.ndarray:
    # singular values above max(rtol * s_max, atol); s is sorted descending
    if s.size == 0 or s[0] == 0:
        return np.zeros(s.shape, dtype=bool)
    return s > max(rtol * s[0], atol)


def pseudo_inverse(A, rtol: float = SVD_RTOL, atol: float = 0.0) -> np.ndarray:
    """Moore-Penrose pseudoinverse.

    Singular values at or below ``max(rtol * s_max, atol)`` count as zero.
    """
    A = np.asarray(A, dtype=complex)
    m, n = A.shape
    if A.size == 0:
        return np.zeros((n, m), dtype=complex)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = _kept(s, rtol, atol)
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (dag(Vh) * s_inv) @ dag(U)


def numerical_rank(A, rtol: float = SVD_RTOL, atol: float = 0.0) -> int:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0
    return int(np.count_nonzero(_kept(np.linalg.svd(A, compute_uv=False), rtol, atol)))


def kernel_basis(A, rtol: float = SVD_RTOL, atol: float = 0.0) -> np.ndarray:
    """Orthonormal columns spanning the numerical kernel of ``A``.

    The nullity is decided with the cutoff ``max(rtol * s_max, atol)``; pass
    ``atol`` when ``A`` is known only up to an absolute error. A zero matrix
    gives the identity basis.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[1]
    if A.size == 0 or not np.any(A):
        return np.eye(n, dtype=complex)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    rank = int(np.count_nonzero(_kept(s, rtol, atol)))
    return dag(Vh[rank:])


def range_basis(A, rtol: float = SVD_RTOL, atol: float = 0.0) -> np.ndarray:
    """Orthonormal columns spanning the numerical range of ``A``."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    rank = int(np.count_nonzero(_kept(s, rtol, atol)))
    return U[:, :rank]


def orth_complement(Q) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of ``Q``."""
    Q = np.asarray(Q, dtype=complex)
    n, k = Q.shape
    if k == 0:
        return np.eye(n, dtype=complex)
    return kernel_basis(dag(Q))


def lambda_max(A, tol: Tolerance = DEFAULT_TOL) -> float:
    """Largest eigenvalue of a Hermitian matrix (``-inf`` for the empty matrix)."""
    H = hermitize(A, tol)
    if H.shape[0] == 0:
        return -np.inf
    return float(np.linalg.eigvalsh(H)[-1])


def lambda_min(A, tol: Tolerance = DEFAULT_TOL) -> float:
    H = hermitize(A, tol)
    if H.shape[0] == 0:
        return np.inf
    return float(np.linalg.eigvalsh(H)[0])


def loewner_leq(A, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Return True iff ``A <= B`` in the Loewner order, within tolerance.

    Decided as ``lambda_max(A - B) <= rel_eps * (1 + ||A|| + ||B||)``.
    """
    A = hermitize(A, tol)
    B = hermitize(B, tol)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    if A.shape[0] == 0:
        return True
    return lambda_max(A - B, tol) <= tol.bound(1.0 + op_norm(A) + op_norm(B))


def is_zero(A, tol: Tolerance = DEFAULT_TOL, scale: float = 1.0) -> bool:
    A = np.asarray(A)
    if A.size == 0:
        return True
    return op_norm(A) <= tol.bound(scale)

r"""The quantum Ito *-monoid of stochastic generators on finite-dimensional spaces.

A generator acts on :math:`\hat{k}\otimes h = h \oplus (k\otimes h)` and is
stored as four blocks ``(K, M, L, C)`` representing

.. math::

    F = \begin{bmatrix} K & M \\ L & C - I \end{bmatrix}.

The noise factor is the outer tensor factor, so ``k (x) h`` vectors are
stacked noise-index-major: the ``j``-th ``d_h``-block of ``L`` belongs to
the ``j``-th noise basis vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .numkit import (
    DEFAULT_TOL,
    ROUNDOFF,
    DimensionError,
    Tolerance,
    as_cmatrix,
    dag,
    hermitize,
    kernel_basis,
    lambda_max,
    loewner_leq,
    op_norm,
    pseudo_inverse,
    psd_sqrt,
    range_basis,
)

logger = logging.getLogger(__name__)


class NotQuasicontractiveError(ValueError):
    """The generator lies outside the quasicontractive class."""


class NotContractiveError(ValueError):
    """The generator lies outside the contractive class."""


class RecoveryError(ValueError):
    """A parametrization could not be recovered to the required residual."""


def _frozen(A: np.ndarray) -> np.ndarray:
    A = np.array(A, dtype=complex, copy=True)
    A.setflags(write=False)
    return A


@dataclass(frozen=True, eq=False)
class BlockGenerator:
    """A stochastic generator on ``h (+) (k (x) h)``.

    Parameters
    ----------
    K : (d_h, d_h) array
    M : (d_h, d_k*d_h) array
    L : (d_k*d_h, d_h) array
    C : (d_k*d_h, d_k*d_h) array
        The stored block is ``C``; the generator's corner block is ``C - I``.
    d_h, d_k : int, optional
        Inferred from ``K`` and ``L`` when omitted.
    """

    K: np.ndarray
    M: np.ndarray
    L: np.ndarray
    C: np.ndarray
    d_h: int = field(default=-1)
    d_k: int = field(default=-1)

    def __post_init__(self):
        K = np.asarray(self.K, dtype=complex)
        d_h = self.d_h if self.d_h >= 0 else K.shape[0]
        if self.d_k >= 0:
            d_k = self.d_k
        else:
            rows = np.asarray(self.L).shape[0]
            if d_h == 0 or rows % d_h:
                raise DimensionError("cannot infer d_k from L")
            d_k = rows // d_h
        n = d_k * d_h
        object.__setattr__(self, "d_h", int(d_h))
        object.__setattr__(self, "d_k", int(d_k))
        object.__setattr__(self, "K", _frozen(as_cmatrix(np.reshape(K, (d_h, d_h)), d_h, d_h)))
        object.__setattr__(self, "M", _frozen(as_cmatrix(np.reshape(self.M, (d_h, n)), d_h, n)))
        object.__setattr__(self, "L", _frozen(as_cmatrix(np.reshape(self.L, (n, d_h)), n, d_h)))
        object.__setattr__(self, "C", _frozen(as_cmatrix(np.reshape(self.C, (n, n)), n, n)))

    @property
    def n_noise(self) -> int:
        """Dimension of ``k (x) h``."""
        return self.d_k * self.d_h

    @property
    def N(self) -> np.ndarray:
        """The corner block ``C - I``."""
        return self.C - np.eye(self.n_noise)

    @property
    def dims(self) -> tuple[int, int]:
        return self.d_h, self.d_k

    def matrix(self) -> np.ndarray:
        """The full generator matrix on ``h (+) (k (x) h)``."""
        return np.block([[self.K, self.M], [self.L, self.N]])

    @classmethod
    def from_matrix(cls, F, d_h: int, d_k: int) -> "BlockGenerator":
        F = as_cmatrix(F)
        n = d_k * d_h
        if F.shape != (d_h + n, d_h + n):
            raise DimensionError(f"matrix of shape {F.shape} does not fit (d_h, d_k) = ({d_h}, {d_k})")
        return cls(F[:d_h, :d_h], F[:d_h, d_h:], F[d_h:, :d_h], F[d_h:, d_h:] + np.eye(n), d_h, d_k)

    def norm(self) -> float:
        return op_norm(self.matrix())

    def allclose(self, other: "BlockGenerator", atol: float = 1e-10) -> bool:
        if self.dims != other.dims:
            return False
        return all(
            np.allclose(a, b, rtol=0.0, atol=atol)
            for a, b in zip(self.blocks(), other.blocks())
        )

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.K, self.M, self.L, self.C

    def __eq__(self, other):
        if not isinstance(other, BlockGenerator):
            return NotImplemented
        return self.dims == other.dims and all(
            np.array_equal(a, b) for a, b in zip(self.blocks(), other.blocks())
        )

    __hash__ = None

    def __add__(self, other: "BlockGenerator") -> "BlockGenerator":
        _check_same_dims(self, other)
        return BlockGenerator(
            self.K + other.K, self.M + other.M, self.L + other.L,
            self.C + other.C - np.eye(self.n_noise), self.d_h, self.d_k,
        )

    def __sub__(self, other: "BlockGenerator") -> "BlockGenerator":
        _check_same_dims(self, other)
        return BlockGenerator(
            self.K - other.K, self.M - other.M, self.L - other.L,
            self.C - other.C + np.eye(self.n_noise), self.d_h, self.d_k,
        )

    def __repr__(self):
        return f"BlockGenerator(d_h={self.d_h}, d_k={self.d_k}, norm={self.norm():.4g})"


def _check_same_dims(F1: BlockGenerator, F2: BlockGenerator) -> None:
    if F1.dims != F2.dims:
        raise DimensionError(f"dimension mismatch: {F1.dims} vs {F2.dims}")


def zero_generator(d_h: int, d_k: int) -> BlockGenerator:
    """The monoid identity (the zero operator)."""
    n = d_h * d_k
    return BlockGenerator(
        np.zeros((d_h, d_h)), np.zeros((d_h, n)), np.zeros((n, d_h)), np.eye(n), d_h, d_k
    )


def drift_generator(K, d_k: int) -> BlockGenerator:
    """The pure-drift generator ``K (+) 0``."""
    K = as_cmatrix(K)
    d_h = K.shape[0]
    n = d_h * d_k
    return BlockGenerator(K, np.zeros((d_h, n)), np.zeros((n, d_h)), np.eye(n), d_h, d_k)


def delta_projection(d_h: int, d_k: int) -> np.ndarray:
    """``Delta = 0_h (+) I_{k (x) h}`` as a matrix."""
    return np.diag(np.r_[np.zeros(d_h), np.ones(d_h * d_k)]).astype(complex)


def delta_perp(d_h: int, d_k: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(d_h), np.zeros(d_h * d_k)]).astype(complex)


# ---------------------------------------------------------------------------
# products and involution


def series(F1: BlockGenerator, F2: BlockGenerator) -> BlockGenerator:
    """Series product ``F1 o F2 = F1 + F1 Delta F2 + F2`` by the block formula."""
    _check_same_dims(F1, F2)
    return BlockGenerator(
        F1.K + F2.K + F1.M @ F2.L,
        F1.M @ F2.C + F2.M,
        F1.L + F1.C @ F2.L,
        F1.C @ F2.C,
        F1.d_h,
        F1.d_k,
    )


def series_all(generators: Sequence[BlockGenerator]) -> BlockGenerator:
    """Fold a nonempty sequence under the series product (left to right)."""
    if not generators:
        raise ValueError("need at least one generator")
    return reduce(series, generators)


def adjoint(F: BlockGenerator) -> BlockGenerator:
    return BlockGenerator(dag(F.K), dag(F.L), dag(F.M), dag(F.C), F.d_h, F.d_k)


def ito_defect(F: BlockGenerator) -> np.ndarray:
    """The Hermitian matrix ``F* o F``."""
    K, M, L, C = F.blocks()
    B = M + dag(L) @ C
    D = np.block([
        [dag(K) + K + dag(L) @ L, B],
        [dag(B), dag(C) @ C - np.eye(F.n_noise)],
    ])
    return 0.5 * (D + dag(D))


def co_defect(F: BlockGenerator) -> np.ndarray:
    """The Hermitian matrix ``F o F*``."""
    return ito_defect(adjoint(F))


def explicit_inverse(F: BlockGenerator) -> BlockGenerator:
    """Inverse in the series monoid; requires ``C`` invertible."""
    Ci = np.linalg.inv(F.C)
    return BlockGenerator(
        F.M @ Ci @ F.L - F.K, -F.M @ Ci, -Ci @ F.L, Ci, F.d_h, F.d_k
    )


def wills_check(F: BlockGenerator) -> float:
    """Residual norm of ``(Delta F + I)* (F o F*) (Delta F + I) = D + D Delta D``, ``D = F* o F``."""
    Fm = F.matrix()
    Delta = delta_projection(F.d_h, F.d_k)
    I = np.eye(Fm.shape[0])
    X = Delta @ Fm + I
    D = ito_defect(F)
    lhs = dag(X) @ co_defect(F) @ X
    rhs = D + D @ Delta @ D
    return op_norm(lhs - rhs)


# ---------------------------------------------------------------------------
# growth bound and classification


def _scale(F: BlockGenerator) -> float:
    n = F.norm()
    return 1.0 + n + n * n


def beta0(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL) -> float | None:
    r"""Exponential growth bound :math:`\beta_0(F)`, or ``None`` when F is not quasicontractive.

    Closed form from the Schur complement of the defect inequality:

    .. math::

        \beta_0 = \tfrac12 \lambda_{\max}\big(2\,\mathrm{re}\,K + L^*L
            + B (I - C^*C)^+ B^*\big),\qquad B = M + L^*C,

    valid when ``||C|| <= 1`` and ``B`` vanishes on the kernel of ``I - C*C``.
    """
    K, M, L, C = F.blocks()
    n = F.n_noise
    base = K + dag(K) + dag(L) @ L
    if n == 0:
        return 0.5 * lambda_max(base, tol)
    scale = _scale(F)
    S2 = hermitize(np.eye(n) - dag(C) @ C, tol)
    if np.linalg.eigvalsh(S2)[0] < -tol.bound(scale):
        return None
    B = M + dag(L) @ C
    floor = ROUNDOFF * scale
    ran = range_basis(S2, atol=floor)
    B_off = B - (B @ ran) @ dag(ran)
    if op_norm(B_off) > feasibility_bound(scale, tol):
        return None
    schur = base + B @ pseudo_inverse(S2, atol=floor) @ dag(B)
    b0 = 0.5 * lambda_max(0.5 * (schur + dag(schur)), tol)
    w = np.linalg.eigvalsh(S2)
    kept = w[w > floor]
    ill = kept.size and kept[0] < ILL_CONDITIONED * scale
    if ill or logger.isEnabledFor(logging.DEBUG):
        b0 = _cross_check(F, b0, tol)
    return b0


ILL_CONDITIONED = 1e-8


def _cross_check(F: BlockGenerator, b0: float, tol: Tolerance) -> float:
    # bisection wins on disagreement: the Schur complement loses accuracy as I - C*C nears singular
    b_bis = beta0_bisection(F, tol, max_beta=max(1e6, 4 * abs(b0)))
    if b_bis is not None and abs(b_bis - b0) > 1e-6 * (1 + abs(b0)):
        logger.warning("beta0 closed form %r disagrees with bisection %r; using bisection", b0, b_bis)
        return b_bis
    logger.debug("beta0 %r checked against bisection %r", b0, b_bis)
    return b0


def feasibility_bound(scale: float, tol: Tolerance = DEFAULT_TOL) -> float:
    # B must vanish on ker(I - C*C); roundoff in (I - C*C)^{1/2} reaches B at sqrt(eps) size
    return max(np.sqrt(tol.rel_eps) * scale, tol.abs_floor)


def beta0_bisection(
    F: BlockGenerator,
    tol: Tolerance = DEFAULT_TOL,
    rtol: float = 1e-12,
    max_beta: float = 1e12,
) -> float | None:
    """Growth bound by bisection on ``beta -> lambda_max(F* o F - 2 beta Delta_perp) <= 0``.

    Independent of :func:`beta0`; used as its cross-check.
    """
    D = ito_defect(F)
    d_h, n = F.d_h, F.n_noise
    scale = _scale(F)
    thresh = tol.abs_floor + 1e-12 * scale
    if n and np.linalg.eigvalsh(D[d_h:, d_h:])[-1] > tol.bound(scale):
        return None
    P = delta_perp(d_h, F.d_k)

    def feasible(b):
        return np.linalg.eigvalsh(D - 2 * b * P)[-1] <= thresh

    lo = 0.5 * np.linalg.eigvalsh(D[:d_h, :d_h])[-1] - 1.0
    hi = max(lo + 2.0, 1.0)
    while not feasible(hi):
        hi = 2 * hi + 1.0
        if hi > max_beta:
            return None
    while feasible(lo):
        lo = lo - 2 * (abs(lo) + 1.0)
    while hi - lo > rtol * (1.0 + abs(hi)):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class GeneratorClassReport:
    """Membership of a generator in the classes of the Ito monoid."""

    is_quasicontractive: bool
    beta0: float | None
    is_contractive: bool
    is_isometric: bool
    is_coisometric: bool
    is_unitary: bool
    is_gaussian: bool
    is_pure_gaussian: bool
    is_wholly_non_gaussian: bool
    is_pure_preservation: bool
    is_pure_drift: bool
    defect_spectrum: tuple[float, ...]


def gaussian_subspace(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of ``{c in k : (C - I) E_c = 0}``, ``E_c = |c> (x) I_h``."""
    d_h, d_k = F.d_h, F.d_k
    if d_k == 0:
        return np.zeros((0, 0), dtype=complex)
    N = F.N
    cols = [N[:, j * d_h:(j + 1) * d_h].reshape(-1) for j in range(d_k)]
    return kernel_basis(np.stack(cols, axis=1), atol=tol.bound(_scale(F)))


def classify(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL) -> GeneratorClassReport:
    K, M, L, C = F.blocks()
    n = F.n_noise
    scale = _scale(F)
    bound = tol.bound(scale)
    D = ito_defect(F)
    Dco = co_defect(F)
    b0 = beta0(F, tol)
    isometric = op_norm(D) <= bound
    coisometric = op_norm(Dco) <= bound
    contractive = loewner_leq(D, np.zeros_like(D), tol)
    gaussian = op_norm(F.N) <= bound
    small = lambda A: op_norm(A) <= bound  # noqa: E731
    pure_gaussian = gaussian and small(K + 0.5 * dag(L) @ L) and small(M + dag(L))
    if F.d_k == 0:
        wholly_non_gaussian = True
    else:
        wholly_non_gaussian = gaussian_subspace(F, tol).shape[1] == 0
    return GeneratorClassReport(
        is_quasicontractive=b0 is not None,
        beta0=b0,
        is_contractive=contractive,
        is_isometric=isometric,
        is_coisometric=coisometric,
        is_unitary=isometric and coisometric,
        is_gaussian=gaussian,
        is_pure_gaussian=pure_gaussian,
        is_wholly_non_gaussian=wholly_non_gaussian,
        is_pure_preservation=n > 0 and small(K) and small(M) and small(L),
        is_pure_drift=small(M) and small(L) and small(F.N),
        defect_spectrum=tuple(float(x) for x in np.linalg.eigvalsh(D)),
    )


# ---------------------------------------------------------------------------
# embeddings and the concatenation product


def iota(F1: BlockGenerator, d_k2: int) -> BlockGenerator:
    """Embed ``F1`` over ``k1`` into ``k1 (+) k2`` as ``F1 (+) 0``."""
    d_h, n1, n2 = F1.d_h, F1.n_noise, d_k2 * F1.d_h
    C = np.eye(n1 + n2, dtype=complex)
    C[:n1, :n1] = F1.C
    return BlockGenerator(
        F1.K,
        np.hstack([F1.M, np.zeros((d_h, n2))]),
        np.vstack([F1.L, np.zeros((n2, d_h))]),
        C,
        d_h,
        F1.d_k + d_k2,
    )


def iota_prime(F2: BlockGenerator, d_k1: int) -> BlockGenerator:
    """Embed ``F2`` over ``k2`` into ``k1 (+) k2`` (the flipped embedding)."""
    d_h, n1, n2 = F2.d_h, d_k1 * F2.d_h, F2.n_noise
    C = np.eye(n1 + n2, dtype=complex)
    C[n1:, n1:] = F2.C
    return BlockGenerator(
        F2.K,
        np.hstack([np.zeros((d_h, n1)), F2.M]),
        np.vstack([np.zeros((n1, d_h)), F2.L]),
        C,
        d_h,
        d_k1 + F2.d_k,
    )


def concat(F1: BlockGenerator, F2: BlockGenerator) -> BlockGenerator:
    """Concatenation product ``F1 [+] F2`` over ``k1 (+) k2``."""
    if F1.d_h != F2.d_h:
        raise DimensionError(f"initial dimensions differ: {F1.d_h} vs {F2.d_h}")
    n1, n2 = F1.n_noise, F2.n_noise
    C = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    C[:n1, :n1] = F1.C
    C[n1:, n1:] = F2.C
    return BlockGenerator(
        F1.K + F2.K,
        np.hstack([F1.M, F2.M]),
        np.vstack([F1.L, F2.L]),
        C,
        F1.d_h,
        F1.d_k + F2.d_k,
    )


def noise_frame_operator(frame: np.ndarray, d_h: int) -> np.ndarray:
    """``J (x) I_h`` for a frame ``J`` of orthonormal columns in ``k``."""
    return np.kron(np.asarray(frame, dtype=complex), np.eye(d_h))


def compress(F: BlockGenerator, frame: np.ndarray) -> BlockGenerator:
    """Compress ``F`` to the noise subspace spanned by the orthonormal columns of ``frame``.

    With ``frame`` a coordinate inclusion this is ``J1* F J1``.
    """
    frame = np.asarray(frame, dtype=complex)
    if frame.shape[0] != F.d_k:
        raise DimensionError(f"frame has {frame.shape[0]} rows, expected d_k = {F.d_k}")
    J = noise_frame_operator(frame, F.d_h)
    return BlockGenerator(F.K, F.M @ J, dag(J) @ F.L, dag(J) @ F.C @ J, F.d_h, frame.shape[1])


def rotate_noise(F: BlockGenerator, U: np.ndarray) -> BlockGenerator:
    """Express ``F`` in the noise basis given by the unitary ``U`` (columns = new basis)."""
    return compress(F, U)


# ---------------------------------------------------------------------------
# triangular representation


def phi(F: BlockGenerator) -> np.ndarray:
    """Upper-triangular representation ``[[I, M, K], [0, C, L], [0, 0, I]]``."""
    d_h, n = F.d_h, F.n_noise
    Z = np.zeros
    return np.block([
        [np.eye(d_h), F.M, F.K],
        [Z((n, d_h)), F.C, F.L],
        [Z((d_h, d_h)), Z((d_h, n)), np.eye(d_h)],
    ])


def xi_flip(d_h: int, d_k: int) -> np.ndarray:
    n = d_h * d_k
    Z = np.zeros
    return np.block([
        [Z((d_h, d_h)), Z((d_h, n)), np.eye(d_h)],
        [Z((n, d_h)), np.eye(n), Z((n, d_h))],
        [np.eye(d_h), Z((d_h, n)), Z((d_h, d_h))],
    ]).astype(complex)


def phi_star(T: np.ndarray, d_h: int, d_k: int) -> np.ndarray:
    """The involution ``T -> Xi T* Xi`` on the triangular monoid."""
    X = xi_flip(d_h, d_k)
    return X @ dag(np.asarray(T, dtype=complex)) @ X


def phi_inverse(T: np.ndarray, d_h: int, d_k: int) -> BlockGenerator:
    n = d_h * d_k
    T = np.asarray(T, dtype=complex)
    return BlockGenerator(
        T[:d_h, d_h + n:], T[:d_h, d_h:d_h + n], T[d_h:d_h + n, d_h + n:],
        T[d_h:d_h + n, d_h:d_h + n], d_h, d_k,
    )


# ---------------------------------------------------------------------------
# sampling


def _random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    Q, R = np.linalg.qr(_random_complex(rng, (n, n)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_contraction(rng: np.random.Generator, rows: int, cols: int, max_norm: float = 1.0) -> np.ndarray:
    """A random matrix rescaled to a norm drawn uniformly from ``(0.1, max_norm)``."""
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=complex)
    X = _random_complex(rng, (rows, cols))
    return X * (rng.uniform(0.1, max_norm) / op_norm(X))


def sample_qc(
    d_h: int,
    d_k: int,
    beta: float = 0.0,
    seed=None,
    *,
    scale: float = 1.0,
    p_unitary: float = 0.25,
    p_zero_a: float = 0.25,
    unitary_c: bool | None = None,
    zero_a: bool | None = None,
) -> BlockGenerator:
    r"""Draw a generator in the class :math:`\mathfrak{qc}_\beta` via the ``(H, A, L, C, D)`` parametrization.

    ``K = beta I + iH - (L*L + A^2)/2`` and ``M = -L*C - A D (I - C*C)^{1/2}``.

    Parameters
    ----------
    d_h, d_k : int
        Initial and noise dimensions.
    beta : float
        Target growth level; the result satisfies ``beta0(F) <= beta``.
    seed : int or numpy Generator
        Explicit seed; no global RNG state is touched.
    scale : float
        Overall size of ``H``, ``A`` and ``L``.
    p_unitary, p_zero_a : float
        Probabilities of the boundary draws (``C`` exactly unitary,
        ``A = 0``). ``unitary_c`` / ``zero_a`` force either choice.
    """
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = d_h * d_k
    H = _random_complex(rng, (d_h, d_h))
    H = 0.5 * scale * (H + dag(H))
    if zero_a is None:
        zero_a = rng.uniform() < p_zero_a
    if zero_a:
        A = np.zeros((d_h, d_h), dtype=complex)
    else:
        G = _random_complex(rng, (d_h, d_h))
        A = scale * (G @ dag(G)) / max(1.0, d_h)
    L = scale * _random_complex(rng, (n, d_h)) / np.sqrt(max(d_k, 1))
    if unitary_c is None:
        unitary_c = rng.uniform() < p_unitary
    if unitary_c:
        C = random_unitary(rng, n)
        S = np.zeros((n, n), dtype=complex)
    else:
        C = random_contraction(rng, n, n, max_norm=0.95)
        S = psd_sqrt(np.eye(n) - dag(C) @ C)
    D = random_contraction(rng, d_h, n)
    K = beta * np.eye(d_h) + 1j * H - 0.5 * (dag(L) @ L + A @ A)
    M = -dag(L) @ C - A @ D @ S
    return BlockGenerator(K, M, L, C, d_h, d_k)


def sample_generator(d_h: int, d_k: int, seed=None, scale: float = 1.0) -> BlockGenerator:
    """An arbitrary (unconstrained) generator with Gaussian entries."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = d_h * d_k
    return BlockGenerator(
        scale * _random_complex(rng, (d_h, d_h)),
        scale * _random_complex(rng, (d_h, n)),
        scale * _random_complex(rng, (n, d_h)),
        np.eye(n) + scale * _random_complex(rng, (n, n)),
        d_h,
        d_k,
    )


# ---------------------------------------------------------------------------
# product-formula constants


def trotter_constant(F1: BlockGenerator, F2: BlockGenerator) -> float:
    """``C(F1, F2) = ||K1|| + ||K2|| + ||M1|| ||L2||``."""
    _check_same_dims(F1, F2)
    return op_norm(F1.K) + op_norm(F2.K) + op_norm(F1.M) * op_norm(F2.L)


def _norm_matrix(F: BlockGenerator) -> np.ndarray:
    return np.array([
        [op_norm(F.K), op_norm(F.M)],
        [op_norm(F.L), op_norm(F.N)],
    ])


def trotter_constant_n(generators: Sequence[BlockGenerator]) -> float:
    """n-fold constant: the (1,1) entry of the scalar series product of the norm matrices."""
    if len(generators) < 2:
        raise ValueError("need at least two generators")
    Delta = np.diag([0.0, 1.0])
    fs = [_norm_matrix(F) for F in generators]
    total = reduce(lambda a, b: a + a @ Delta @ b + b, fs)
    return float(total[0, 0])


def weyl_generator(c, d_h: int) -> BlockGenerator:
    r"""Stochastic generator of the Weyl cocycle, ``[[-|c|^2/2, -<c|], [|c>, 0]] (x) I_h``."""
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    d_k = c.shape[0]
    E = np.kron(c[:, None], np.eye(d_h))
    return BlockGenerator(
        -0.5 * np.vdot(c, c).real * np.eye(d_h), -dag(E), E, np.eye(d_k * d_h), d_h, d_k
    )


def dressed_generator(F: BlockGenerator, c_prime, c) -> BlockGenerator:
    """``F_{c'}* o F o F_c``; its drift block generates ``t -> Omega(c', c)(X^F_t)``."""
    Wp = weyl_generator(c_prime, F.d_h)
    W = weyl_generator(c, F.d_h)
    _check_same_dims(Wp, F)
    _check_same_dims(F, W)
    return series(series(adjoint(Wp), F), W)


def trotter_constant_dressed(g_prime, generators, g) -> float:
    """Maximum of the (n-fold) constant over all dressings by values of the step functions."""
    generators = list(generators)
    if len(generators) < 2:
        raise ValueError("need at least two generators")
    d_h = generators[0].d_h
    best = 0.0
    for cp in g_prime.distinct_values():
        left = series(adjoint(weyl_generator(cp, d_h)), generators[0])
        for c in g.distinct_values():
            right = series(generators[-1], weyl_generator(c, d_h))
            best = max(best, trotter_constant_n([left, *generators[1:-1], right]))
    return best

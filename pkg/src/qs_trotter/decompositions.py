"""Structural decompositions of quasicontractive generators.

* left/right series decompositions into drift, unitary and contractive factors;
* the unique split into a wholly non-Gaussian part concatenated with a
  maximal pure-Gaussian part;
* the unitary dilation of a contractive generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ito_algebra import (
    BlockGenerator,
    NotContractiveError,
    NotQuasicontractiveError,
    RecoveryError,
    beta0,
    classify,
    compress,
    concat,
    gaussian_subspace,
    ito_defect,
    noise_frame_operator,
)
from .numkit import (
    DEFAULT_TOL,
    ROUNDOFF,
    Tolerance,
    dag,
    loewner_leq,
    op_norm,
    orth_complement,
    pseudo_inverse,
    psd_sqrt,
)


def _require_beta0(F: BlockGenerator, tol: Tolerance) -> float:
    b = beta0(F, tol)
    if b is None:
        raise NotQuasicontractiveError("generator is not quasicontractive")
    return b


def _re(X):
    return 0.5 * (X + dag(X))


def left_series_decomposition(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL):
    """Return ``(F1, F2l, F3l)`` with ``F = F1 o F2l o F3l``.

    ``F1`` is pure drift, ``F2l`` is pure Gaussian (unitary class) and
    ``F3l`` is contractive.
    """
    b0 = _require_beta0(F, tol)
    K, M, L, C = F.blocks()
    d_h, d_k, n = F.d_h, F.d_k, F.n_noise
    I_h = np.eye(d_h)
    LL = dag(L) @ L
    F1 = BlockGenerator(b0 * I_h + 0.5 * (K - dag(K)), np.zeros((d_h, n)), np.zeros((n, d_h)), np.eye(n), d_h, d_k)
    F2 = BlockGenerator(-0.5 * LL, -dag(L), L, np.eye(n), d_h, d_k)
    F3 = BlockGenerator(_re(K) + 0.5 * LL - b0 * I_h, M + dag(L) @ C, np.zeros((n, d_h)), C, d_h, d_k)
    return F1, F2, F3


def right_series_decomposition(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL):
    """Return ``(F1, F2r, F3r)`` with ``F = F1 o F2r o F3r``; ``F2r`` contractive, ``F3r`` pure Gaussian."""
    b0 = _require_beta0(F, tol)
    K, M, L, C = F.blocks()
    d_h, d_k, n = F.d_h, F.d_k, F.n_noise
    I_h = np.eye(d_h)
    MM = M @ dag(M)
    F1 = BlockGenerator(b0 * I_h + 0.5 * (K - dag(K)), np.zeros((d_h, n)), np.zeros((n, d_h)), np.eye(n), d_h, d_k)
    F2 = BlockGenerator(_re(K) + 0.5 * MM - b0 * I_h, np.zeros((d_h, n)), L + C @ dag(M), C, d_h, d_k)
    F3 = BlockGenerator(-0.5 * MM, M, -dag(M), np.eye(n), d_h, d_k)
    return F1, F2, F3


@dataclass(frozen=True)
class GaussianSplit:
    """``F = F_wng [+] F_mg`` after rotating the noise basis to ``[basis_pres, basis_gauss]``."""

    F_wng: BlockGenerator
    F_mg: BlockGenerator
    basis_pres: np.ndarray
    basis_gauss: np.ndarray

    @property
    def noise_unitary(self) -> np.ndarray:
        return np.hstack([self.basis_pres, self.basis_gauss])

    def reconstruct(self) -> BlockGenerator:
        """Reassemble the generator in the original noise basis."""
        G = concat(self.F_wng, self.F_mg)
        return compress(G, dag(self.noise_unitary))


def gaussian_split(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL) -> GaussianSplit:
    """Split ``F`` into its wholly non-Gaussian and maximal pure-Gaussian parts.

    The Gaussian noise directions are ``{c : (C - I)(|c> (x) I_h) = 0}``;
    the preservation directions are their orthocomplement.
    """
    _require_beta0(F, tol)
    d_h = F.d_h
    gauss = gaussian_subspace(F, tol)
    if F.d_k == 0:
        gauss = np.zeros((0, 0), dtype=complex)
    pres = orth_complement(gauss) if F.d_k else np.zeros((0, 0), dtype=complex)
    Jg = noise_frame_operator(gauss, d_h)
    Jp = noise_frame_operator(pres, d_h)
    L_g = dag(Jg) @ F.L
    L_p = dag(Jp) @ F.L
    half = 0.5 * dag(L_g) @ L_g
    F_wng = BlockGenerator(F.K + half, F.M @ Jp, L_p, dag(Jp) @ F.C @ Jp, d_h, pres.shape[1])
    F_mg = BlockGenerator(-half, F.M @ Jg, L_g, np.eye(Jg.shape[1]), d_h, gauss.shape[1])
    return GaussianSplit(F_wng, F_mg, pres, gauss)


@dataclass(frozen=True)
class Dilation:
    """Unitary-class generator over ``k (+) k (+) C`` compressing to the input."""

    F_prime: BlockGenerator
    H: np.ndarray
    A: np.ndarray
    D: np.ndarray
    residual: float

    def compression(self, d_k: int) -> BlockGenerator:
        """``J* F' J`` for the inclusion of ``h (+) (k (x) h)``."""
        frame = np.eye(self.F_prime.d_k, d_k)
        return compress(self.F_prime, frame)


def dilate_to_unitary(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL) -> Dilation:
    """Unitary dilation of a contractive generator.

    Recovers ``H = im K``, ``A = (-(K* + K + L*L))^{1/2}`` and a contraction
    ``D`` with ``M = -L*C - A D S`` (minimal-norm solution via
    pseudoinverses), then assembles the 4x4 block unitary-class generator
    over the enlarged noise space ``k (+) k (+) C``.

    Raises
    ------
    NotContractiveError
        If ``F* o F <= 0`` fails.
    RecoveryError
        If the recovered ``D`` does not reproduce ``M`` to tolerance.
    """
    defect = ito_defect(F)
    if not loewner_leq(defect, np.zeros_like(defect), tol):
        raise NotContractiveError("generator is not contractive")
    K, M, L, C = F.blocks()
    d_h, d_k, n = F.d_h, F.d_k, F.n_noise
    I_h, I_n = np.eye(d_h), np.eye(n)
    scale = 1.0 + F.norm() ** 2
    # radicands carry roundoff of order eps_machine * scale; eigenvalues inside that band are zero
    eps = ROUNDOFF * scale
    H = (K - dag(K)) / 2j
    A = psd_sqrt(-(dag(K) + K + dag(L) @ L), tol, floor=eps)
    S = psd_sqrt(I_n - dag(C) @ C, tol, floor=eps)
    T = psd_sqrt(I_n - C @ dag(C), tol, floor=eps)
    X = -(M + dag(L) @ C)
    D = pseudo_inverse(A, atol=np.sqrt(eps)) @ X @ pseudo_inverse(S, atol=np.sqrt(eps))
    residual = op_norm(M + dag(L) @ C + A @ D @ S)
    if residual > np.sqrt(tol.rel_eps) * scale:
        raise RecoveryError(f"parametrization residual {residual:.3e} too large")
    R = psd_sqrt(I_h - D @ dag(D), tol, floor=eps)
    Z = np.zeros
    K_p = 1j * H - 0.5 * (dag(L) @ L + A @ A)
    M_p = np.hstack([-(dag(L) @ C + A @ D @ S), dag(L) @ T - A @ D @ dag(C), -A @ R])
    L_p = np.vstack([L, dag(D) @ A, R @ A])
    C_p = np.block([
        [C, -T, Z((n, d_h))],
        [S, dag(C), Z((n, d_h))],
        [Z((d_h, n)), Z((d_h, n)), I_h],
    ])
    F_p = BlockGenerator(K_p, M_p, L_p, C_p, d_h, 2 * d_k + 1)
    return Dilation(F_p, H, A, D, residual)


def is_pure_gaussian(F: BlockGenerator, tol: Tolerance = DEFAULT_TOL) -> bool:
    return classify(F, tol).is_pure_gaussian

"""Quadratic-form stochastic generators on a finite-dimensional space.

A form ``Gamma ~ (gamma, L, Lt, C)`` lives on ``D (+) (k (x) h)`` where the
subspace ``D`` of ``h`` is given by an orthonormal frame ``Q``
(``d_h x m``). In frame coordinates ``xi = (Q a, zeta)`` the form is

    Gamma[xi] = <xi~, Phi xi~>,   Phi = [[G, -Lt^H], [-L, -(C - I)]],

with ``G`` the ``m x m`` matrix of ``gamma``. A bounded generator ``F``
corresponds to ``Phi = -F`` on the full domain (``gamma = -K``, ``Lt = M*``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ito_algebra import BlockGenerator
from .numkit import (
    DEFAULT_TOL,
    DimensionError,
    Tolerance,
    as_cmatrix,
    dag,
    hermitize,
    kernel_basis,
    lambda_min,
    op_norm,
)


class DomainError(ValueError):
    """A vector does not lie in the form domain."""


def _frozen(A) -> np.ndarray:
    A = np.array(A, dtype=complex)
    A.setflags(write=False)
    return A


@dataclass(frozen=True, eq=False)
class QuadForm:
    """Form generator with an explicit (possibly proper) domain ``D``.

    Attributes
    ----------
    frame : (d_h, m) array with orthonormal columns spanning ``D``.
    gamma : (m, m) matrix of the drift form in frame coordinates.
    L, Lt : (d_k d_h, m) arrays, the two off-diagonal components.
    C : (d_k d_h, d_k d_h) array.
    """

    frame: np.ndarray
    gamma: np.ndarray
    L: np.ndarray
    Lt: np.ndarray
    C: np.ndarray
    d_h: int
    d_k: int

    def __post_init__(self):
        d_h, n = self.d_h, self.d_h * self.d_k
        Q = as_cmatrix(self.frame, rows=d_h)
        m = Q.shape[1]
        if m and op_norm(dag(Q) @ Q - np.eye(m)) > 1e-10:
            raise DimensionError("domain frame columns are not orthonormal")
        object.__setattr__(self, "frame", _frozen(Q))
        object.__setattr__(self, "gamma", _frozen(as_cmatrix(self.gamma, m, m)))
        object.__setattr__(self, "L", _frozen(as_cmatrix(self.L, n, m)))
        object.__setattr__(self, "Lt", _frozen(as_cmatrix(self.Lt, n, m)))
        object.__setattr__(self, "C", _frozen(as_cmatrix(self.C, n, n)))

    @property
    def m(self) -> int:
        return self.frame.shape[1]

    @property
    def n_noise(self) -> int:
        return self.d_h * self.d_k

    @property
    def full_domain(self) -> bool:
        return self.m == self.d_h

    def projector(self) -> np.ndarray:
        return self.frame @ dag(self.frame)

    def matrix(self) -> np.ndarray:
        """``Phi`` in the coordinates ``(a, zeta)``."""
        n = self.n_noise
        return np.block([
            [self.gamma, -dag(self.Lt)],
            [-self.L, -(self.C - np.eye(n))],
        ])

    def in_h(self):
        """Components as operators on ``h`` (zero on ``D``-perp): ``(Q G Q*, L Q*, Lt Q*)``."""
        Q = self.frame
        return Q @ self.gamma @ dag(Q), self.L @ dag(Q), self.Lt @ dag(Q)

    def scale(self) -> float:
        return 1.0 + op_norm(self.matrix())

    def restrict(self, frame: np.ndarray) -> "QuadForm":
        """Restriction to a subspace of ``D`` given by an orthonormal frame."""
        R = dag(self.frame) @ frame
        return QuadForm(frame, dag(R) @ self.gamma @ R, self.L @ R, self.Lt @ R, self.C, self.d_h, self.d_k)


@dataclass(frozen=True)
class FormVector:
    u: np.ndarray
    zeta: np.ndarray

    @classmethod
    def make(cls, u, zeta) -> "FormVector":
        return cls(np.asarray(u, dtype=complex).reshape(-1), np.asarray(zeta, dtype=complex).reshape(-1))


def _coords(G: QuadForm, xi: FormVector, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    if xi.u.size != G.d_h or xi.zeta.size != G.n_noise:
        raise DimensionError("vector dimensions do not match the form")
    a = dag(G.frame) @ xi.u
    off = np.linalg.norm(xi.u - G.frame @ a)
    if off > max(1e3 * tol.rel_eps * (1.0 + np.linalg.norm(xi.u)), tol.abs_floor):
        raise DomainError(f"vector lies {off:.2e} outside the form domain")
    return np.r_[a, xi.zeta]


# ---------------------------------------------------------------------------
# constructors


def identity_form(d_h: int, d_k: int) -> QuadForm:
    """``Gamma_0 ~ (0, 0, 0, I)`` on the full domain."""
    n = d_h * d_k
    return QuadForm(np.eye(d_h), np.zeros((d_h, d_h)), np.zeros((n, d_h)), np.zeros((n, d_h)), np.eye(n), d_h, d_k)


def bounded_to_form(F: BlockGenerator) -> QuadForm:
    """``(q_{-K}, L, M*, C)`` on the full domain; the only place the sign bridge lives."""
    return QuadForm(np.eye(F.d_h), -F.K, F.L, dag(F.M), F.C, F.d_h, F.d_k)


def form_to_bounded(G: QuadForm) -> BlockGenerator:
    """Inverse of :func:`bounded_to_form`; requires a full domain."""
    if not G.full_domain:
        raise DomainError("only full-domain forms correspond to bounded generators")
    g, L, Lt = G.in_h()
    return BlockGenerator(-g, dag(Lt), L, G.C, G.d_h, G.d_k)


def random_frame(rng: np.random.Generator, d_h: int, m: int) -> np.ndarray:
    if m == d_h:
        return np.eye(d_h, dtype=complex)
    Z = rng.standard_normal((d_h, m)) + 1j * rng.standard_normal((d_h, m))
    Q, _ = np.linalg.qr(Z)
    return Q


def random_form(
    d_h: int,
    d_k: int,
    seed=None,
    *,
    dim: int | None = None,
    frame: np.ndarray | None = None,
    scale: float = 1.0,
) -> QuadForm:
    """Form with Gaussian components on a random (or given) domain."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if frame is None:
        frame = random_frame(rng, d_h, d_h if dim is None else dim)
    m, n = frame.shape[1], d_h * d_k

    def z(*shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    return QuadForm(frame, z(m, m), z(n, m), z(n, m), np.eye(n) + z(n, n), d_h, d_k)


def form_from_bounded_on(F: BlockGenerator, frame: np.ndarray) -> QuadForm:
    """Restriction of ``bounded_to_form(F)`` to a subspace domain."""
    return bounded_to_form(F).restrict(frame)


# ---------------------------------------------------------------------------
# algebra


def intersect_frames(Q1: np.ndarray, Q2: np.ndarray) -> np.ndarray:
    """Orthonormal frame of ``span Q1 n span Q2``; a full frame leaves the other untouched."""
    d = Q1.shape[0]
    if Q1.shape[1] == d:
        return Q2
    if Q2.shape[1] == d:
        return Q1
    P1 = np.eye(d) - Q1 @ dag(Q1)
    P2 = np.eye(d) - Q2 @ dag(Q2)
    return kernel_basis(np.vstack([P1, P2]))


def _check_pair(G1: QuadForm, G2: QuadForm) -> None:
    if (G1.d_h, G1.d_k) != (G2.d_h, G2.d_k):
        raise DimensionError("forms act on different spaces")


def _common(G1: QuadForm, G2: QuadForm):
    _check_pair(G1, G2)
    Q = intersect_frames(G1.frame, G2.frame)
    return Q, G1.restrict(Q), G2.restrict(Q)


def qf_eval(G: QuadForm, xi: FormVector, tol: Tolerance = DEFAULT_TOL) -> complex:
    """``gamma[u] - (<zeta, L u> + <Lt u, zeta> + <zeta, (C - I) zeta>)``."""
    x = _coords(G, xi, tol)
    return complex(np.vdot(x, G.matrix() @ x))


def qf_sesq(G: QuadForm, eta: FormVector, xi: FormVector, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Polarized form ``Gamma(eta, xi)``, antilinear in ``eta``."""
    return complex(np.vdot(_coords(G, eta, tol), G.matrix() @ _coords(G, xi, tol)))


def qf_add(G1: QuadForm, G2: QuadForm) -> QuadForm:
    Q, A, B = _common(G1, G2)
    return QuadForm(Q, A.gamma + B.gamma, A.L + B.L, A.Lt + B.Lt, A.C + B.C - np.eye(A.n_noise), A.d_h, A.d_k)


def qf_scale(z: complex, G: QuadForm) -> QuadForm:
    """``z Gamma`` in the vector space of forms (``C - I`` scales, not ``C``)."""
    n = G.n_noise
    return QuadForm(G.frame, z * G.gamma, z * G.L, np.conj(z) * G.Lt, np.eye(n) + z * (G.C - np.eye(n)), G.d_h, G.d_k)


def qf_delta(G1: QuadForm, G2: QuadForm) -> QuadForm:
    """``Gamma_1 Delta Gamma_2`` on ``D_1 n D_2``."""
    Q, A, B = _common(G1, G2)
    I = np.eye(A.n_noise)
    return QuadForm(
        Q,
        -dag(A.Lt) @ B.L,
        (A.C - I) @ B.L,
        (dag(B.C) - I) @ A.Lt,
        (A.C - I) @ (B.C - I) + I,
        A.d_h,
        A.d_k,
    )


def qf_series(G1: QuadForm, G2: QuadForm) -> QuadForm:
    """``Gamma_1 o Gamma_2 = Gamma_1 + Gamma_2 + Gamma_1 Delta Gamma_2``."""
    Q, A, B = _common(G1, G2)
    return QuadForm(
        Q,
        A.gamma + B.gamma - dag(A.Lt) @ B.L,
        A.L + A.C @ B.L,
        dag(B.C) @ A.Lt + B.Lt,
        A.C @ B.C,
        A.d_h,
        A.d_k,
    )


def qf_series_all(forms) -> QuadForm:
    forms = list(forms)
    out = forms[0]
    for G in forms[1:]:
        out = qf_series(out, G)
    return out


def qf_adjoint(G: QuadForm) -> QuadForm:
    """``Gamma* ~ (gamma*, Lt, L, C*)``."""
    return QuadForm(G.frame, dag(G.gamma), G.Lt, G.L, dag(G.C), G.d_h, G.d_k)


def qf_inverse(G: QuadForm) -> QuadForm:
    """Series inverse for invertible ``C``: ``(-gamma - <Lt., C^-1 L.>, -C^-1 L, -C^-* Lt, C^-1)``."""
    Ci = np.linalg.inv(G.C)
    return QuadForm(
        G.frame,
        -G.gamma - dag(G.Lt) @ Ci @ G.L,
        -Ci @ G.L,
        -dag(Ci) @ G.Lt,
        Ci,
        G.d_h,
        G.d_k,
    )


def f_delta(G: QuadForm, xi: FormVector, tol: Tolerance = DEFAULT_TOL) -> FormVector:
    """``F^Delta_Gamma xi = (0, L u + (C - I) zeta)``."""
    x = _coords(G, xi, tol)
    a = x[: G.m]
    return FormVector(np.zeros(G.d_h, dtype=complex), G.L @ a + (G.C - np.eye(G.n_noise)) @ xi.zeta)


def _plus(xi: FormVector, eta: FormVector) -> FormVector:
    return FormVector(xi.u + eta.u, xi.zeta + eta.zeta)


def forms_allclose(G1: QuadForm, G2: QuadForm, atol: float = 1e-10) -> bool:
    """Frame-independent equality: same domain and same components on it."""
    if (G1.d_h, G1.d_k) != (G2.d_h, G2.d_k) or G1.m != G2.m:
        return False
    pairs = [(G1.projector(), G2.projector()), (G1.C, G2.C)]
    pairs += list(zip(G1.in_h(), G2.in_h()))
    scale = max(G1.scale(), G2.scale())
    return all(op_norm(a - b) <= atol * scale for a, b in pairs)


# ---------------------------------------------------------------------------
# identities


def qf_three_factor_residual(
    G1: QuadForm, G2: QuadForm, G3: QuadForm, xi: FormVector, tol: Tolerance = DEFAULT_TOL
) -> float:
    """``|(G1 o G2 o G3)[xi] - (G1 o G3)[xi] - G2((I + F_{G1*}) xi, (I + F_{G3}) xi)|``."""
    lhs = qf_eval(qf_series_all([G1, G2, G3]), xi, tol)
    eta = _plus(xi, f_delta(qf_adjoint(G1), xi, tol))
    chi = _plus(xi, f_delta(G3, xi, tol))
    rhs = qf_eval(qf_series(G1, G3), xi, tol) + qf_sesq(G2, eta, chi, tol)
    return abs(lhs - rhs)


def qf_wills_residual(G: QuadForm, xi: FormVector, tol: Tolerance = DEFAULT_TOL) -> float:
    """``|(G* o G)[xi] - (G o G*)[(I + F_G) xi] - ||F_{G* o G} xi||^2|``."""
    Gs = qf_adjoint(G)
    D = qf_series(Gs, G)
    lhs = qf_eval(D, xi, tol)
    moved = _plus(xi, f_delta(G, xi, tol))
    rhs = qf_eval(qf_series(G, Gs), moved, tol) + np.linalg.norm(f_delta(D, xi, tol).zeta) ** 2
    return abs(lhs - rhs)


def defect_margin(G: QuadForm, beta: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``lambda_min`` of ``Phi(G* o G) - 2 beta (I_D (+) 0)``."""
    D = qf_series(qf_adjoint(G), G)
    P = np.zeros((D.m + D.n_noise,) * 2)
    P[: D.m, : D.m] = np.eye(D.m)
    return lambda_min(hermitize(D.matrix() - 2.0 * beta * P, Tolerance(1e-8, tol.abs_floor)), tol)


def qf_defect_check(G: QuadForm, beta: float, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``G* o G >= 2 beta Delta-perp`` on the domain, within tolerance."""
    return defect_margin(G, beta, tol) >= -tol.bound(G.scale() ** 2)


def random_vector(G: QuadForm, rng: np.random.Generator) -> FormVector:
    """A random domain vector ``(Q a, zeta)``."""
    a = rng.standard_normal(G.m) + 1j * rng.standard_normal(G.m)
    z = rng.standard_normal(G.n_noise) + 1j * rng.standard_normal(G.n_noise)
    return FormVector(G.frame @ a, z)


__all__ = [
    "DomainError",
    "QuadForm",
    "FormVector",
    "identity_form",
    "bounded_to_form",
    "form_to_bounded",
    "form_from_bounded_on",
    "random_frame",
    "random_form",
    "random_vector",
    "intersect_frames",
    "qf_eval",
    "qf_sesq",
    "qf_add",
    "qf_scale",
    "qf_delta",
    "qf_series",
    "qf_series_all",
    "qf_adjoint",
    "qf_inverse",
    "f_delta",
    "forms_allclose",
    "qf_three_factor_residual",
    "qf_lemma64_residual",
    "qf_wills_residual",
    "defect_margin",
    "qf_defect_check",
]


# name fixed by the published API
qf_lemma64_residual = qf_three_factor_residual

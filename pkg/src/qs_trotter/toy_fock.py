"""Toy-Fock (quantum random walk) evaluation of Trotter approximants.

Each partition cell of length ``delta`` gets its own toy Fock space
``(C + k)^{(x) m}`` with step ``h = delta / m``. A generator ``F`` is
discretized by ``G(h) = [[I + hK, sqrt(h) M], [sqrt(h) L, C]]`` and the
cell factor of its (left) cocycle is ``G^(1) G^(2) ... G^(m)``, the
superscript marking the slot. Products of several cocycle factors on the
same cell are multiplied in list order and compressed with discretized
normalized exponential vectors.

Truncation in ``m`` is controlled by polynomial extrapolation in ``1/m``
over the levels ``(m, ceil(3m/2), 2m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cocycle_sim import (
    Partition,
    SliceResult,
    StepFunction,
    growth_bounds,
    mesh_bound,
    slice_cocycle,
    trotter_limit_slice,
)
from .ito_algebra import BlockGenerator, zero_generator
from .numkit import DEFAULT_TOL, Tolerance, op_norm

MEMORY_CAP = 20_000_000


class MemoryGuardError(ValueError):
    """The toy Fock space for the requested substeps exceeds the memory cap."""


@dataclass(frozen=True)
class WalkConfig:
    substeps_m: int
    d_h: int
    d_k: int
    tolerance: Tolerance = DEFAULT_TOL
    cap: int = MEMORY_CAP

    def __post_init__(self):
        if self.substeps_m < 1:
            raise ValueError("substeps_m must be >= 1")
        if self.d_h < 1 or self.d_k < 0:
            raise ValueError("invalid dimensions")

    @property
    def levels(self) -> tuple[int, int, int]:
        return richardson_levels(self.substeps_m)

    def fock_size(self, m: int | None = None) -> int:
        """Dimension ``d_h (1 + d_k)^m`` of the materialized toy Fock space."""
        m = self.substeps_m if m is None else m
        return self.d_h * (1 + self.d_k) ** m

    def check_tensor(self, m: int | None = None) -> None:
        size = self.fock_size(m)
        if size > self.cap:
            raise MemoryGuardError(f"toy Fock space of size {size} exceeds cap {self.cap}")


def richardson_levels(m: int) -> tuple[int, int, int]:
    return m, math.ceil(1.5 * m), 2 * m


def walk_step(F: BlockGenerator, h: float) -> np.ndarray:
    """``G(h) = [[I + hK, sqrt(h) M], [sqrt(h) L, C]]`` on ``(C + k) (x) h``."""
    if not h > 0:
        raise ValueError("h must be positive")
    s = math.sqrt(h)
    return np.block([
        [np.eye(F.d_h) + h * F.K, s * F.M],
        [s * F.L, F.C],
    ])


def unsandwich(G: np.ndarray, h: float, d_h: int) -> np.ndarray:
    """``(h^{-1/2} Dperp + Delta)(G - Dperp)(h^{-1/2} Dperp + Delta)``, which recovers ``F + Delta``."""
    n = G.shape[0]
    scale = np.ones(n)
    scale[:d_h] = 1.0 / math.sqrt(h)
    Dperp = np.zeros((n, n))
    Dperp[:d_h, :d_h] = np.eye(d_h)
    return scale[:, None] * (G - Dperp) * scale[None, :]


def slot_vector(c, h: float) -> np.ndarray:
    """Normalized ``(1, sqrt(h) c)``; the slot component of a discretized exponential vector."""
    c = np.asarray(c, dtype=complex).reshape(-1)
    v = np.r_[1.0 + 0j, math.sqrt(h) * c]
    return v / math.sqrt(1.0 + h * np.vdot(c, c).real)


def _apply(G4: np.ndarray, state: np.ndarray, j: int) -> np.ndarray:
    # state axes: (h, slot_0..slot_{m-1}, col); G4 axes: (a, i, b, k)
    out = np.tensordot(G4, state, axes=([2, 3], [1 + j, 0]))
    return np.moveaxis(out, [0, 1], [1 + j, 0])


def _tensor_cell(steps: Sequence[np.ndarray], d_h: int, u_prime: np.ndarray, u: np.ndarray, m: int) -> np.ndarray:
    """``<u'^m | V^1 ... V^n | u^m>`` with ``V^i = G_i^(1) ... G_i^(m)``."""
    ns = u.size
    G4s = [G.reshape(ns, d_h, ns, d_h) for G in steps]
    out = np.empty((d_h, d_h), dtype=complex)
    prod_u = u
    for _ in range(m - 1):
        prod_u = np.multiply.outer(prod_u, u)
    for col in range(d_h):
        state = np.zeros((d_h,) + (ns,) * m + (1,), dtype=complex)
        state[col, ..., 0] = prod_u
        # the rightmost factor acts first
        for G4 in reversed(G4s):
            for j in reversed(range(m)):
                state = _apply(G4, state, j)
        for _ in range(m):
            state = np.tensordot(state, u_prime.conj(), axes=([1], [0]))
        out[:, col] = state[:, 0]
    return out


def transfer_matrix(F_list: Sequence[BlockGenerator], c_prime, c, h: float) -> np.ndarray:
    """One-slot transfer matrix ``sum_w X^1_w (x) ... (x) X^n_w`` on ``h^{(x) n}``.

    The slot wire runs ``u -> G_n -> ... -> G_1 -> u'``; ``w`` ranges over
    its internal indices. For one generator this is the compression
    ``<u'| G |u>``.
    """
    F_list = list(F_list)
    d_h, ns = F_list[0].d_h, 1 + F_list[0].d_k
    up, u = slot_vector(c_prime, h), slot_vector(c, h)
    G4s = [walk_step(F, h).reshape(ns, d_h, ns, d_h) for F in F_list]
    # Y axes: (open wire, row multi-index, column multi-index)
    Y = np.einsum("a,aibk->bik", up.conj(), G4s[0])
    for G4 in G4s[1:]:
        D = Y.shape[1]
        Y = np.einsum("wIK,wivk->vIiKk", Y, G4).reshape(ns, D * d_h, D * d_h)
    return np.tensordot(u, Y, axes=([0], [0]))


def _partial_trace_chain(Tm: np.ndarray, d_h: int, n: int) -> np.ndarray:
    # sum_l Tm[(i, l_1..l_{n-1}), (l_1..l_{n-1}, k)]
    if n == 1:
        return Tm
    A = Tm.reshape((d_h,) * (2 * n))
    inner = d_h ** (n - 1)
    A = A.reshape(d_h, inner, inner, d_h)
    return np.einsum("illk->ik", A)


def walk_cell(F_list: Sequence[BlockGenerator], c_prime, c, delta: float, m: int) -> np.ndarray:
    """Raw (unextrapolated) toy-Fock slice of ``V^1 ... V^n`` on one cell.

    Evaluated through the one-slot transfer matrix, so the cost is
    independent of the toy Fock dimension ``(1 + d_k)^m``.
    """
    F_list = list(F_list)
    if not delta > 0:
        raise ValueError("delta must be positive")
    h = delta / m
    T = transfer_matrix(F_list, c_prime, c, h)
    return _partial_trace_chain(np.linalg.matrix_power(T, m), F_list[0].d_h, len(F_list))


def walk_cell_tensor(
    F_list: Sequence[BlockGenerator], c_prime, c, delta: float, m: int, cap: int = MEMORY_CAP
) -> np.ndarray:
    """Same as :func:`walk_cell` but through the full toy Fock state vector.

    Reference implementation; subject to the memory guard
    ``d_h (1 + d_k)^m <= cap``.
    """
    F_list = list(F_list)
    WalkConfig(m, F_list[0].d_h, F_list[0].d_k, cap=cap).check_tensor()
    h = delta / m
    steps = [walk_step(F, h) for F in F_list]
    return _tensor_cell(steps, F_list[0].d_h, slot_vector(c_prime, h), slot_vector(c, h), m)


def _extrapolate(values: Sequence[np.ndarray], ms: Sequence[int]) -> np.ndarray:
    # Lagrange interpolation in x = 1/m, evaluated at x = 0
    xs = [1.0 / m for m in ms]
    out = np.zeros_like(values[0])
    for i, (v, xi) in enumerate(zip(values, xs)):
        w = 1.0
        for j, xj in enumerate(xs):
            if j != i:
                w *= xj / (xj - xi)
        out = out + w * v
    return out


@dataclass(frozen=True)
class CellSlice:
    """Per-cell walk slice: extrapolated value plus the two first-order estimates."""

    value: np.ndarray
    first_a: np.ndarray
    first_b: np.ndarray
    raw: tuple
    levels: tuple

    @property
    def estimate(self) -> float:
        return op_norm(self.first_b - self.first_a)


def _cell(F_list, c_prime, c, delta, cfg: WalkConfig) -> CellSlice:
    ms = cfg.levels
    raw = tuple(walk_cell(F_list, c_prime, c, delta, m) for m in ms)
    return CellSlice(
        _extrapolate(raw, ms),
        _extrapolate(raw[:2], ms[:2]),
        _extrapolate(raw[1:], ms[1:]),
        raw,
        ms,
    )


def _config_for(F_list, m: int, tol: Tolerance, cap: int) -> WalkConfig:
    return WalkConfig(m, F_list[0].d_h, F_list[0].d_k, tol, cap)


def cell_pair_slice(
    F_list: Sequence[BlockGenerator],
    c_prime,
    c,
    delta: float,
    m: int,
    tol: Tolerance = DEFAULT_TOL,
    cap: int = MEMORY_CAP,
) -> SliceResult:
    """Slice of ``V^1_delta ... V^n_delta`` between constant exponential arguments.

    Returns the extrapolated matrix with ``truncation_level = m`` and the
    truncation estimate ``||R_b - R_a||`` from the two first-order
    extrapolations; ``raw`` holds the three unextrapolated level values.
    """
    F_list = list(F_list)
    if not F_list:
        raise ValueError("empty generator list")
    if not delta > 0:
        raise ValueError("delta must be positive")
    cfg = _config_for(F_list, m, tol, cap)
    cs = _cell(F_list, c_prime, c, delta, cfg)
    return SliceResult(cs.value, m, cs.estimate, np.array(cs.raw))


def _nontrivial(F_list: Sequence[BlockGenerator]) -> list[BlockGenerator]:
    return [F for F in F_list if not np.array_equal(F.matrix(), zero_generator(F.d_h, F.d_k).matrix())]


def _cell_points(partition: Partition, g_prime: StepFunction, g: StepFunction, r: float, t: float) -> np.ndarray:
    pts = partition.cell_points(r, t)
    for f in (g_prime, g):
        for b in f.breaks_in(r, t):
            if not np.any(np.isclose(pts, b, rtol=0.0, atol=1e-12 * max(1.0, abs(t)))):
                raise ValueError(f"step function break {b} is not a partition point")
    return pts


def trotter_approximant_slice(
    F_list: Sequence[BlockGenerator],
    g_prime: StepFunction,
    g: StepFunction,
    partition: Partition,
    r: float,
    t: float,
    m: int,
    tol: Tolerance = DEFAULT_TOL,
    cap: int = MEMORY_CAP,
    cache: dict | None = None,
) -> SliceResult:
    """Slice of the Trotter product ``prod_j V^1_{t_{j-1},t_j} ... V^n_{t_{j-1},t_j}``.

    Exact zero generators are dropped first: their cocycle is the
    identity. When a single factor remains there is nothing to
    approximate and the exact slice is used (estimate 0).
    Step-function breaks must be partition points so that the exponential
    arguments are constant on every cell.
    """
    F_list = list(F_list)
    if not F_list:
        raise ValueError("empty generator list")
    d_h, d_k = F_list[0].d_h, F_list[0].d_k
    pts = _cell_points(partition, g_prime, g, r, t)
    active = _nontrivial(F_list)
    if len(active) <= 1:
        F = active[0] if active else zero_generator(d_h, d_k)
        exact = slice_cocycle(F, g_prime, g, r, t)
        return SliceResult(exact.matrix, m, 0.0)
    cfg = _config_for(active, m, tol, cap)
    cache = {} if cache is None else cache
    val = np.eye(d_h, dtype=complex)
    pa = np.eye(d_h, dtype=complex)
    pb = np.eye(d_h, dtype=complex)
    for a, b in zip(pts[:-1], pts[1:]):
        cp, c = g_prime(a), g(a)
        delta = b - a
        key = (cp.tobytes(), c.tobytes(), round(delta, 14), m)
        if key not in cache:
            cache[key] = _cell(active, cp, c, delta, cfg)
        cs = cache[key]
        val = val @ cs.value
        pa = pa @ cs.first_a
        pb = pb @ cs.first_b
    return SliceResult(val, m, op_norm(pb - pa))


@dataclass(frozen=True)
class TrotterRow:
    mesh: float
    measured_error: float
    bound: float
    ratio: float
    truncation_estimate: float
    m_used: int
    inconclusive: bool

    @property
    def within_bound(self) -> bool:
        return self.measured_error <= self.bound + self.truncation_estimate


@dataclass
class TrotterReport:
    rows: list[TrotterRow]
    slope: float

    @property
    def inconclusive(self) -> bool:
        return any(r.inconclusive for r in self.rows)

    @property
    def bound_ok(self) -> bool:
        return all(r.within_bound for r in self.rows)

    def verdicts(self, slope_range: tuple[float, float] | None = None) -> dict[str, str]:
        """``pass``/``fail``/``inconclusive`` for the bound and, if a range is given, the slope.

        A row over its bound fails even when inconclusive, since the
        allowance already includes the truncation estimate.
        """
        if not self.bound_ok:
            bound = "fail"
        else:
            bound = "inconclusive" if self.inconclusive else "pass"
        out = {"bound": bound}
        if slope_range is not None:
            lo, hi = slope_range
            if sum(not r.inconclusive for r in self.rows) < 2 or not math.isfinite(self.slope):
                out["slope"] = "inconclusive"
            else:
                out["slope"] = "pass" if lo <= self.slope <= hi else "fail"
        return out

    def verdict(self, slope_range: tuple[float, float] | None = None) -> str:
        v = set(self.verdicts(slope_range).values())
        return "fail" if "fail" in v else "inconclusive" if "inconclusive" in v else "pass"


def fit_slope(xs, ys) -> float:
    """Least-squares slope of ``log y`` against ``log x`` over positive pairs."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    keep = (xs > 0) & (ys > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])


def uniform_partition(r: float, t: float, mesh: float) -> Partition:
    n = int(round((t - r) / mesh))
    if n < 1 or not np.isclose(n * mesh, t - r, rtol=1e-12, atol=0.0):
        raise ValueError(f"mesh {mesh} does not divide the window [{r}, {t}]")
    return Partition(r + mesh * np.arange(1, n + 1))


def auto_schedule(start: int = 16, stop: int = 4096) -> list[int]:
    """Doubling substep schedule ``start, 2 start, ..., stop``."""
    out, m = [], start
    while m <= stop:
        out.append(m)
        m *= 2
    return out


def trotter_report(
    F_list: Sequence[BlockGenerator],
    g_prime: StepFunction,
    g: StepFunction,
    r: float,
    t: float,
    meshes: Sequence[float],
    m_schedule: Sequence[int] | str = "auto",
    tol: Tolerance = DEFAULT_TOL,
    cap: int = MEMORY_CAP,
    budget: float = 0.1,
) -> TrotterReport:
    """Measured Trotter error against the mesh bound, one row per mesh.

    For each mesh the substep count is escalated along ``m_schedule``
    until ``truncation_estimate <= budget * measured_error``; rows that
    never meet the budget are marked inconclusive.
    """
    F_list = list(F_list)
    meshes = [float(x) for x in meshes]
    if any(b >= a for a, b in zip(meshes, meshes[1:])):
        raise ValueError("meshes must be strictly decreasing")
    growth_bounds(F_list, tol)
    schedule = auto_schedule() if m_schedule == "auto" else [int(m) for m in m_schedule]
    limit = trotter_limit_slice(F_list, g_prime, g, r, t, tol).matrix
    cache: dict = {}
    rows = []
    for mesh in meshes:
        P = uniform_partition(r, t, mesh)
        if len(F_list) >= 2:
            bound = mesh_bound(F_list, g_prime, g, P, r, t, tol)
        else:
            bound = 0.0
        res = err = None
        ok = False
        for m in schedule:
            res = trotter_approximant_slice(F_list, g_prime, g, P, r, t, m, tol, cap, cache)
            err = op_norm(res.matrix - limit)
            if res.truncation_estimate <= budget * err:
                ok = True
                break
        ratio = err / bound if bound > 0 else (0.0 if err == 0 else float("inf"))
        rows.append(TrotterRow(mesh, err, bound, ratio, res.truncation_estimate, res.truncation_level, not ok))
    good = [r_ for r_ in rows if not r_.inconclusive]
    slope = fit_slope([r_.mesh for r_ in good], [r_.measured_error for r_ in good])
    return TrotterReport(rows, slope)


def walk_convergence(
    F: BlockGenerator,
    c_prime,
    c,
    delta: float,
    ms: Sequence[int],
) -> tuple[np.ndarray, float]:
    """Raw single-generator walk errors against the exact slice, and their slope in ``m``."""
    exact = slice_cocycle(F, StepFunction.constant(c_prime), StepFunction.constant(c), 0.0, delta).matrix
    errs = np.array([op_norm(walk_cell([F], c_prime, c, delta, m) - exact) for m in ms])
    return errs, -fit_slope(ms, errs)


__all__ = [
    "MEMORY_CAP",
    "MemoryGuardError",
    "WalkConfig",
    "richardson_levels",
    "walk_step",
    "unsandwich",
    "slot_vector",
    "walk_cell",
    "walk_cell_tensor",
    "cell_pair_slice",
    "trotter_approximant_slice",
    "TrotterRow",
    "TrotterReport",
    "trotter_report",
    "fit_slope",
    "uniform_partition",
    "auto_schedule",
    "walk_convergence",
]

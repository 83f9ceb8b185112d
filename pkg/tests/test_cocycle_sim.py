import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qs_trotter.cocycle_sim import (
    Partition,
    SliceResult,
    StepFunction,
    dressed_generator,
    mesh_bound,
    single_step_bound,
    refinement,
    slice_cocycle,
    trotter_limit_slice,
    weyl_generator,
)
from qs_trotter.ito_algebra import (
    BlockGenerator,
    NotQuasicontractiveError,
    adjoint,
    beta0,
    concat,
    iota,
    iota_prime,
    sample_generator,
    sample_qc,
    series,
    trotter_constant,
    zero_generator,
)
from qs_trotter.numkit import op_norm


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def expvec_inner(gp, g, r, t, n):
    # oracle: midpoint rule for <g', g> - |g'|^2/2 - |g|^2/2 over [r, t);
    # exact when every break lies on the grid
    s = np.linspace(r, t, n + 1)
    mid = 0.5 * (s[1:] + s[:-1])
    f = [np.vdot(gp(x), g(x)) - 0.5 * np.vdot(gp(x), gp(x)).real - 0.5 * np.vdot(g(x), g(x)).real for x in mid]
    return np.exp(np.sum(f) * (t - r) / n)


class TestStepFunction:
    def test_right_continuous(self):
        f = StepFunction([0.5, 1.0], [[1.0], [2.0], [3.0]])
        assert f(0.0)[0] == 1.0
        assert f(0.5)[0] == 2.0
        assert f(0.999)[0] == 2.0
        assert f(1.0)[0] == 3.0
        assert f(7.0)[0] == 3.0

    def test_validation(self):
        with pytest.raises(ValueError):
            StepFunction([0.5], [[1.0]])
        with pytest.raises(ValueError):
            StepFunction([0.5, 0.5], [[1.0], [2.0], [3.0]])
        with pytest.raises(ValueError):
            StepFunction([0.0], [[1.0], [2.0]])
        with pytest.raises(ValueError):
            StepFunction([], [[np.nan]])

    def test_distinct_values(self):
        f = StepFunction([0.25, 0.5, 0.75], [[0.0], [1.0], [0.0], [2.0]])
        vals = f.distinct_values(0.0, 0.7)
        assert len(vals) == 2
        assert len(f.distinct_values()) == 3


class TestPartition:
    def test_uniform(self):
        P = Partition.uniform(0.25, 1.0)
        assert np.allclose(P.times, [0.25, 0.5, 0.75, 1.0])
        assert P.mesh() == pytest.approx(0.25)
        with pytest.raises(ValueError):
            Partition.uniform(0.3, 1.0)

    def test_mesh_counts_origin(self):
        P = Partition([0.5, 0.6])
        assert P.mesh() == pytest.approx(0.5)

    def test_cells(self):
        P = Partition([0.1, 0.4, 0.9])
        assert np.allclose(P.cell_points(0.2, 1.0), [0.2, 0.4, 0.9, 1.0])
        assert P.cell_mesh(0.2, 1.0) == pytest.approx(0.5)

    def test_rejects(self):
        with pytest.raises(ValueError):
            Partition([0.3, 0.2])


class TestSliceResult:
    def test_exact_has_no_estimate(self):
        with pytest.raises(ValueError):
            SliceResult(np.eye(1), None, 0.1)
        assert SliceResult(np.eye(1)).exact


class TestWeylAndDressing:
    def test_zero_argument(self):
        assert weyl_generator([0.0], 2) == zero_generator(2, 1)

    def test_blocks(self):
        W = weyl_generator([2.0], 1)
        assert W.K[0, 0] == -2.0 and W.M[0, 0] == -2.0 and W.L[0, 0] == 2.0 and W.C[0, 0] == 1.0

    def test_dressing_trivial(self):
        F = sample_generator(2, 2, 0)
        assert dressed_generator(F, [0, 0], [0, 0]).allclose(F, 0.0)

    def test_dressing_zero_generator(self, rng):
        for _ in range(10):
            cp, c = cvec(rng, 1), cvec(rng, 1)
            K = dressed_generator(zero_generator(1, 1), cp, c).K[0, 0]
            expected = np.vdot(cp, c) - 0.5 * np.vdot(cp, cp).real - 0.5 * np.vdot(c, c).real
            assert K == pytest.approx(expected, abs=1e-13)
            assert abs(dressed_generator(zero_generator(1, 1), c, c).K[0, 0]) <= 1e-13


class TestSliceCocycle:
    def test_zero_generator_scalar(self):
        gp = StepFunction([0.3, 0.8], [[1.0], [0.5j], [0.0]])
        g = StepFunction([0.5], [[-1.0 + 1j], [2.0]])
        S = slice_cocycle(zero_generator(2, 1), gp, g, 0.1, 1.2)
        assert S.exact
        assert np.allclose(S.matrix, expvec_inner(gp, g, 0.1, 1.2, 1100) * np.eye(2), atol=1e-13)

    def test_weyl_expectation(self):
        c = np.array([1.0 - 2j, 0.5])
        z = StepFunction.zero(2)
        S = slice_cocycle(weyl_generator(c, 2), z, z, 0.2, 0.9)
        assert np.allclose(S.matrix, math.exp(-0.5 * 5.25 * 0.7) * np.eye(2), atol=1e-14)

    def test_refinement(self):
        gp = StepFunction([0.2, 0.6], [[0.0], [1.0], [0.0]])
        g = StepFunction([0.4, 0.6], [[0.0], [1.0], [2.0]])
        assert np.allclose(refinement(gp, g, 0.1, 0.7), [0.1, 0.2, 0.4, 0.6, 0.7])
        with pytest.raises(ValueError):
            refinement(gp, g, 0.5, 0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            slice_cocycle(zero_generator(1, 2), StepFunction.zero(1), StepFunction.zero(1), 0, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.95))
    def test_multiplicative(self, seed, frac):
        rng = np.random.default_rng(seed)
        F = sample_generator(2, 1, rng, 0.5)
        gp = StepFunction([0.3, 0.7], cvec(rng, 3)[:, None])
        g = StepFunction([0.5], cvec(rng, 2)[:, None])
        r, t = 0.1, 1.1
        s = r + frac * (t - r)
        whole = slice_cocycle(F, gp, g, r, t).matrix
        split = slice_cocycle(F, gp, g, r, s).matrix @ slice_cocycle(F, gp, g, s, t).matrix
        assert op_norm(whole - split) <= 1e-10 * (1 + op_norm(whole))

    def test_duality_constant_args(self, rng):
        for _ in range(10):
            F = sample_generator(2, 2, rng, 0.5)
            cp, c = StepFunction.constant(cvec(rng, 2)), StepFunction.constant(cvec(rng, 2))
            A = slice_cocycle(F, cp, c, 0.0, 0.8).matrix
            B = slice_cocycle(adjoint(F), c, cp, 0.0, 0.8).matrix
            assert np.allclose(B, A.conj().T, atol=1e-12)

    def test_weyl_commutation_phase(self, rng):
        for _ in range(10):
            c, d = cvec(rng, 2), cvec(rng, 2)
            cp, g = cvec(rng, 2), cvec(rng, 2)
            prod = dressed_generator(series(weyl_generator(c, 1), weyl_generator(d, 1)), cp, g).K
            summ = dressed_generator(weyl_generator(c + d, 1), cp, g).K
            assert np.allclose(prod - summ, -1j * np.vdot(c, d).imag, atol=1e-12)

    def test_contractive(self, rng):
        for s in range(20):
            F = sample_qc(2, 1, 0.0, seed=s)
            gp = StepFunction([0.4], cvec(rng, 2)[:, None])
            g = StepFunction([0.6], cvec(rng, 2)[:, None])
            # the dressing normalizes the exponential vectors, so the slice is a contraction
            assert op_norm(slice_cocycle(F, gp, g, 0.0, 1.0).matrix) <= 1 + 1e-10

    def test_quasicontractive_growth(self, rng):
        for s in range(20):
            F = sample_qc(2, 2, 0.7, seed=s)
            gp, g = StepFunction.constant(cvec(rng, 2)), StepFunction.constant(cvec(rng, 2))
            assert op_norm(slice_cocycle(F, gp, g, 0.0, 1.5).matrix) <= math.exp(0.7 * 1.5) + 1e-10


class TestTrotterLimit:
    def test_single(self):
        F = sample_qc(2, 1, 0.0, seed=1)
        z = StepFunction.zero(1)
        assert np.array_equal(trotter_limit_slice([F], z, z, 0, 1).matrix, slice_cocycle(F, z, z, 0, 1).matrix)

    def test_folded(self):
        F = sample_qc(2, 1, 0.0, seed=1)
        W = weyl_generator([0.4j], 2)
        gp = StepFunction([0.5], [[1.0], [0.0]])
        g = StepFunction.constant([0.3])
        a = trotter_limit_slice([W, F], gp, g, 0, 1).matrix
        b = slice_cocycle(series(W, F), gp, g, 0, 1).matrix
        assert np.array_equal(a, b)

    def test_concat(self):
        F1 = sample_qc(2, 1, 0.0, seed=2)
        F2 = sample_qc(2, 1, 0.0, seed=3)
        g = StepFunction.constant([0.3, -0.2j])
        a = trotter_limit_slice([iota(F1, 1), iota_prime(F2, 1)], g, g, 0, 1).matrix
        b = slice_cocycle(concat(F1, F2), g, g, 0, 1).matrix
        assert np.allclose(a, b, atol=1e-13)

    def test_rejects_non_qc(self):
        F = BlockGenerator([[0.0]], [[0.0]], [[0.0]], [[3.0]])
        z = StepFunction.zero(1)
        with pytest.raises(NotQuasicontractiveError):
            trotter_limit_slice([F, F], z, z, 0, 1)


class TestBounds:
    def test_single_step(self):
        F1, F2 = sample_qc(1, 1, 0.0, seed=4), sample_qc(1, 1, 0.0, seed=5)
        assert single_step_bound(F1, F2, 0.0) == 0.0
        b1 = beta0(F1)
        z = zero_generator(1, 1)
        assert single_step_bound(F1, z, 0.3) == pytest.approx(0.09 * math.exp(0.3 * b1) * op_norm(F1.K) ** 2)

    def test_single_step_scaling(self):
        W1, W2 = weyl_generator([1.0], 1), weyl_generator([0.5j], 1)
        assert single_step_bound(W1, W2, 0.4) == pytest.approx(4 * single_step_bound(W1, W2, 0.2), abs=1e-12)

    def test_mesh_bound(self):
        F1, F2 = sample_qc(2, 1, 0.1, seed=6), sample_qc(2, 1, -0.2, seed=7)
        z = StepFunction.zero(1)
        b = beta0(F1) + beta0(F2)
        C = trotter_constant(F1, F2)
        single = Partition([1.0])
        assert mesh_bound([F1, F2], z, z, single, 0.0, 1.0) == pytest.approx(math.exp(b) * C**2)
        vals = [mesh_bound([F1, F2], z, z, Partition.uniform(2.0**-k, 1.0), 0.0, 1.0) for k in range(2, 6)]
        assert np.allclose(np.array(vals[:-1]) / np.array(vals[1:]), 2.0)


def test_api_aliases():
    from qs_trotter import cocycle_sim, qform

    assert cocycle_sim.prop31_bound is cocycle_sim.single_step_bound
    assert cocycle_sim.lemma_bound is cocycle_sim.mesh_bound
    assert qform.qf_lemma64_residual is qform.qf_three_factor_residual

import math

import numpy as np
import pytest

from qs_trotter.cocycle_sim import Partition, StepFunction, slice_cocycle, trotter_limit_slice
from qs_trotter.ito_algebra import (
    BlockGenerator,
    delta_projection,
    sample_generator,
    sample_qc,
    series,
    weyl_generator,
    zero_generator,
)
from qs_trotter.numkit import op_norm
from qs_trotter.toy_fock import (
    MemoryGuardError,
    WalkConfig,
    auto_schedule,
    cell_pair_slice,
    fit_slope,
    richardson_levels,
    slot_vector,
    transfer_matrix,
    trotter_approximant_slice,
    trotter_report,
    uniform_partition,
    unsandwich,
    walk_cell,
    walk_cell_tensor,
    walk_convergence,
    walk_step,
)


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def unit_ball(rng, n):
    v = cvec(rng, n)
    return v * rng.uniform(0, 1) / np.linalg.norm(v)


def small(F, target=1.0):
    # rescale every block except the C - I corner shift to reach ||F|| = target
    s = target / F.norm()
    return BlockGenerator(s * F.K, s * F.M, s * F.L, np.eye(F.n_noise) + s * F.N)


def const(c):
    return StepFunction.constant(c)


class TestWalkStep:
    def test_zero(self):
        for h in (1e-3, 0.5, 2.0):
            assert np.array_equal(walk_step(zero_generator(2, 2), h), np.eye(6))

    def test_unsandwich_exact(self, rng):
        for _ in range(10):
            F = sample_generator(2, 2, rng)
            h = rng.uniform(1e-4, 1)
            rec = unsandwich(walk_step(F, h), h, 2)
            assert np.allclose(rec, F.matrix() + delta_projection(2, 2), atol=1e-12 * (1 + F.norm()) / h)

    def test_norm_expansion(self):
        for s in range(30):
            F = sample_qc(2, 2, 0.0, seed=s)
            for h in (1e-2, 1e-3, 1e-4):
                assert op_norm(walk_step(F, h)) <= 1 + 10 * h * (1 + F.norm() ** 2)

    def test_rejects_h(self):
        with pytest.raises(ValueError):
            walk_step(zero_generator(1, 1), 0.0)

    def test_slot_vector_unit(self, rng):
        v = slot_vector(cvec(rng, 3), 0.1)
        assert np.linalg.norm(v) == pytest.approx(1.0)


class TestConfig:
    def test_levels(self):
        assert richardson_levels(8) == (8, 12, 16)
        assert richardson_levels(5) == (5, 8, 10)

    def test_guard(self):
        cfg = WalkConfig(30, 1, 1)
        assert cfg.fock_size() == 2**30
        with pytest.raises(MemoryGuardError):
            cfg.check_tensor()
        WalkConfig(10, 2, 1).check_tensor()

    def test_tensor_path_guarded(self):
        with pytest.raises(MemoryGuardError):
            walk_cell_tensor([zero_generator(1, 1)], [0.0], [0.0], 0.1, 40)

    def test_transfer_path_is_not_guarded(self):
        F = sample_qc(1, 1, 0.0, seed=0)
        walk_cell([F], [0.1], [0.2], 0.25, 4096)

    def test_validation(self):
        with pytest.raises(ValueError):
            WalkConfig(0, 1, 1)
        with pytest.raises(ValueError):
            cell_pair_slice([zero_generator(1, 1)], [0], [0], 0.0, 4)


class TestTransferMatrix:
    def test_single_is_compression(self, rng):
        F = sample_generator(2, 1, rng, 0.5)
        cp, c, h = cvec(rng, 1), cvec(rng, 1), 0.01
        T = transfer_matrix([F], cp, c, h)
        up, u = slot_vector(cp, h), slot_vector(c, h)
        G4 = walk_step(F, h).reshape(2, 2, 2, 2)
        assert np.allclose(T, np.einsum("a,aibk,b->ik", up.conj(), G4, u))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_full_tensor(self, n, rng):
        F_list = [sample_generator(2, 1, rng, 0.6) for _ in range(n)]
        cp, c = cvec(rng, 1), cvec(rng, 1)
        for m in (1, 3, 5):
            a = walk_cell(F_list, cp, c, 0.3, m)
            b = walk_cell_tensor(F_list, cp, c, 0.3, m)
            assert np.allclose(a, b, atol=1e-13)

    def test_matches_full_tensor_two_noises(self, rng):
        F_list = [sample_generator(1, 2, rng, 0.6) for _ in range(2)]
        cp, c = cvec(rng, 2), cvec(rng, 2)
        assert np.allclose(walk_cell(F_list, cp, c, 0.2, 4), walk_cell_tensor(F_list, cp, c, 0.2, 4), atol=1e-13)


class TestWalkSlices:
    def test_richardson_accuracy(self):
        # ||F|| <= 1, ||c'||, ||c|| <= 1, delta <= 0.25: the m = 8 extrapolation is within 1e-4
        for s in range(40):
            rng = np.random.default_rng(s)
            d_h, d_k = 1 + s % 2, 1 + (s // 2) % 2
            F = small(sample_qc(d_h, d_k, 0.0, seed=s), 1.0)
            cp, c = unit_ball(rng, d_k), unit_ball(rng, d_k)
            res = cell_pair_slice([F], cp, c, 0.25, 8)
            exact = slice_cocycle(F, const(cp), const(c), 0.0, 0.25).matrix
            assert op_norm(res.matrix - exact) <= 1e-4
            assert res.truncation_level == 8 and not res.exact
            assert res.raw.shape == (3, d_h, d_h)

    def test_time_order(self):
        # a non-commuting pair on d_h = 2: list order must reproduce F1 o F2
        rng = np.random.default_rng(3)
        F1 = sample_qc(2, 1, 0.0, seed=10)
        cp, c = cvec(rng, 1) * 0.3, cvec(rng, 1) * 0.3
        W = weyl_generator([0.4 - 0.2j], 2)
        res = cell_pair_slice([W, F1], cp, c, 0.2, 64)
        good = slice_cocycle(series(W, F1), const(cp), const(c), 0, 0.2).matrix
        bad = slice_cocycle(series(F1, W), const(cp), const(c), 0, 0.2).matrix
        assert op_norm(res.matrix - good) <= max(res.truncation_estimate, 1e-9)
        assert op_norm(res.matrix - bad) > 100 * op_norm(res.matrix - good)

    def test_zero_pair(self, rng):
        cp, c = cvec(rng, 1), cvec(rng, 1)
        Z = zero_generator(2, 1)
        inner = np.exp(0.3 * (np.vdot(cp, c) - 0.5 * abs(cp[0]) ** 2 - 0.5 * abs(c[0]) ** 2))
        # discretized exponential vectors only overlap correctly in the limit
        res = cell_pair_slice([Z, Z], cp, c, 0.3, 64)
        assert op_norm(res.matrix - inner * np.eye(2)) <= 10 * res.truncation_estimate
        # the approximant drops identity factors and is exact
        P = uniform_partition(0.0, 0.3, 0.1)
        exact = trotter_approximant_slice([Z, Z], const(cp), const(c), P, 0.0, 0.3, 4)
        assert np.allclose(exact.matrix, inner * np.eye(2), atol=1e-14)

    def test_contraction_safety(self):
        for s in range(10):
            rng = np.random.default_rng(s)
            F1, F2 = sample_qc(2, 1, 0.0, seed=s), sample_qc(2, 1, 0.0, seed=s + 100)
            res = cell_pair_slice([F1, F2], cvec(rng, 1), cvec(rng, 1), 0.25, 16)
            assert op_norm(res.matrix) <= 1 + 1e-9 + res.truncation_estimate

    def test_walk_convergence_first_order(self):
        F = small(sample_qc(2, 1, 0.0, seed=1), 1.0)
        errs, slope = walk_convergence(F, [0.3], [-0.2j], 0.25, [8, 16, 32, 64])
        assert np.all(np.diff(errs) < 0)
        assert 0.8 <= slope <= 1.2


class TestApproximant:
    def setup_method(self):
        self.F1 = sample_qc(2, 1, 0.0, seed=21)
        self.F2 = sample_qc(2, 1, 0.0, seed=22)
        self.gp = StepFunction([0.5], [[0.3], [0.1j]])
        self.g = StepFunction([0.5], [[-0.2j], [0.4]])

    def test_cell_factorization(self):
        P = uniform_partition(0.0, 1.0, 0.25)
        whole = trotter_approximant_slice([self.F1, self.F2], self.gp, self.g, P, 0.0, 1.0, 16)
        prod = np.eye(2, dtype=complex)
        for a in (0.0, 0.25, 0.5, 0.75):
            prod = prod @ cell_pair_slice([self.F1, self.F2], self.gp(a), self.g(a), 0.25, 16).matrix
        assert np.array_equal(whole.matrix, prod)

    def test_single_entry(self):
        P = uniform_partition(0.0, 1.0, 0.25)
        res = trotter_approximant_slice([self.F1], self.gp, self.g, P, 0.0, 1.0, 8)
        exact = slice_cocycle(self.F1, self.gp, self.g, 0.0, 1.0).matrix
        assert op_norm(res.matrix - exact) <= 1e-12
        assert res.truncation_estimate == 0.0

    def test_break_alignment(self):
        P = uniform_partition(0.0, 1.0, 1 / 3)
        with pytest.raises(ValueError):
            trotter_approximant_slice([self.F1, self.F2], self.gp, self.g, P, 0.0, 1.0, 8)

    def test_weyl_factor_is_exact(self):
        W = weyl_generator([0.5 + 0.5j], 2)
        limit = trotter_limit_slice([W, self.F1], self.gp, self.g, 0.0, 1.0).matrix
        for mesh in (0.5, 0.25):
            P = uniform_partition(0.0, 1.0, mesh)
            res = trotter_approximant_slice([W, self.F1], self.gp, self.g, P, 0.0, 1.0, 64)
            assert op_norm(res.matrix - limit) <= res.truncation_estimate

    def test_mesh_halving(self):
        rep = trotter_report([self.F1, self.F2], self.gp, self.g, 0.0, 1.0, [0.25, 0.125, 0.0625])
        errs = [r.measured_error for r in rep.rows]
        assert 1.6 <= errs[0] / errs[1] <= 2.5
        assert 1.6 <= errs[1] / errs[2] <= 2.5


class TestReport:
    def test_zero_second_factor(self):
        F1 = sample_qc(1, 1, 0.0, seed=2)
        z = StepFunction.zero(1)
        rep = trotter_report([F1, zero_generator(1, 1)], z, z, 0.0, 1.0, [0.25, 0.125])
        assert all(r.measured_error <= 1e-14 for r in rep.rows)
        assert rep.bound_ok

    def test_rows(self):
        F1, F2 = sample_qc(2, 1, 0.0, seed=3), sample_qc(2, 1, 0.0, seed=4)
        z = StepFunction.zero(1)
        rep = trotter_report([F1, F2], z, z, 0.0, 1.0, [0.25, 0.125, 0.0625, 0.03125])
        assert not rep.inconclusive and rep.bound_ok
        assert 0.8 <= rep.slope <= 1.2
        for r in rep.rows:
            assert r.ratio == pytest.approx(r.measured_error / r.bound)
            assert r.truncation_estimate <= 0.1 * r.measured_error

    def test_inconclusive_when_budget_unreachable(self):
        # d_h = 1 has no Trotter error, so the budget can never be met
        F1, F2 = sample_qc(1, 1, 0.0, seed=5), sample_qc(1, 1, 0.0, seed=6)
        z = StepFunction.zero(1)
        rep = trotter_report([F1, F2], z, z, 0.0, 1.0, [0.5], m_schedule=[8, 16])
        assert rep.inconclusive
        assert rep.rows[0].m_used == 16

    def test_meshes_must_decrease(self):
        F = sample_qc(1, 1, 0.0, seed=5)
        z = StepFunction.zero(1)
        with pytest.raises(ValueError):
            trotter_report([F, F], z, z, 0.0, 1.0, [0.125, 0.25])

    def test_helpers(self):
        assert auto_schedule(16, 128) == [16, 32, 64, 128]
        assert fit_slope([1, 2, 4], [3, 6, 12]) == pytest.approx(1.0)
        assert math.isnan(fit_slope([1, 2], [0, 0]))
        with pytest.raises(ValueError):
            uniform_partition(0, 1, 0.3)
        assert isinstance(uniform_partition(0.5, 1.0, 0.25), Partition)


class TestVerdicts:
    def _rep(self, rows, slope):
        from qs_trotter.toy_fock import TrotterReport, TrotterRow

        return TrotterReport([TrotterRow(*r) for r in rows], slope)

    def test_pass(self):
        rep = self._rep([(0.5, 1e-3, 1e-2, 0.1, 1e-5, 16, False), (0.25, 5e-4, 5e-3, 0.1, 1e-6, 16, False)], 1.0)
        assert rep.verdicts((0.8, 1.2)) == {"bound": "pass", "slope": "pass"}
        assert rep.verdict() == "pass"

    def test_bound_fail_beats_inconclusive(self):
        rep = self._rep([(0.5, 1.0, 1e-2, 100.0, 1e-5, 16, True)], float("nan"))
        assert rep.verdict((0.8, 1.2)) == "fail"

    def test_inconclusive(self):
        rep = self._rep([(0.5, 1e-3, 1e-2, 0.1, 1e-3, 4096, True), (0.25, 5e-4, 5e-3, 0.1, 1e-6, 16, False)], float("nan"))
        assert rep.verdicts((0.8, 1.2)) == {"bound": "inconclusive", "slope": "inconclusive"}

    def test_slope_fail(self):
        rep = self._rep([(0.5, 1e-3, 1e-2, 0.1, 1e-6, 16, False), (0.25, 1e-3, 5e-3, 0.2, 1e-6, 16, False)], 0.0)
        assert rep.verdict((0.8, 1.2)) == "fail"
        assert rep.verdict() == "pass"

import numpy as np
import pytest

from simplexcode.encoder import (
    batch_encode,
    default_step_size,
    encode,
    lipschitz_constant,
    momentum_schedule,
)
from simplexcode.errors import DimensionMismatch, NonFiniteIterate
from simplexcode.simplex import PenalizedLossParams, is_feasible, penalized_loss


def instance(seed, d=5, m=8):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((d, m)), rng.standard_normal(d)


class TestMomentum:
    def test_first_weight_zero(self):
        assert momentum_schedule(5).gammas[0] == 0.0

    def test_eta_sequence(self):
        etas = momentum_schedule(5).etas
        expected = [1.0]
        for _ in range(5):
            expected.append((1 + np.sqrt(1 + 4 * expected[-1] ** 2)) / 2)
        np.testing.assert_allclose(etas, expected, rtol=1e-15)
        np.testing.assert_allclose(etas[:3], [1.0, 1.6180, 2.1935], atol=1e-4)

    def test_gammas_in_unit_interval(self):
        s = momentum_schedule(1000)
        assert np.all(s.gammas >= 0) and np.all(s.gammas < 1)
        assert np.all(np.diff(s.etas) > 0)
        assert len(s.gammas) == 1000

    def test_literal_recurrence(self):
        s = momentum_schedule(4, literal=True)
        assert s.etas[0] == 0.0
        assert s.etas[1] == pytest.approx(1.0)
        assert s.gammas[0] == pytest.approx(-1.0)


def test_lipschitz_constant():
    rng = np.random.default_rng(0)
    for shape in [(2, 8), (10, 4), (784, 30)]:
        A = rng.uniform(size=shape)
        assert lipschitz_constant(A) == pytest.approx(np.linalg.norm(A, 2) ** 2, rel=1e-8)
    assert default_step_size(np.eye(3)) == pytest.approx(0.99)


class TestEncode:
    def test_exact_atom(self):
        rng = np.random.default_rng(1)
        A = rng.uniform(size=(2, 8))
        traj = encode(A, A[:, 3], PenalizedLossParams(lam=1e-3, unroll_depth=100))
        np.testing.assert_allclose(traj.final, np.eye(8)[3], atol=1e-10)
        assert penalized_loss(A, A[:, 3], traj.final, 1e-3) < 1e-8

    def test_long_run(self):
        A, y = instance(2)
        traj = encode(A, y, PenalizedLossParams(lam=0.1, unroll_depth=10000))
        gap = penalized_loss(A, y, traj.iterates[500], 0.1) - penalized_loss(A, y, traj.final, 0.1)
        assert gap <= 1e-6

    def test_deterministic(self):
        A, y = instance(3)
        p = PenalizedLossParams(lam=0.05, unroll_depth=200)
        a, b = encode(A, y, p), encode(A.copy(), y.copy(), p)
        np.testing.assert_array_equal(a.iterates, b.iterates)
        np.testing.assert_array_equal(a.momentum_iterates, b.momentum_iterates)
        np.testing.assert_array_equal(a.active_sets, b.active_sets)

    def test_trajectory_shapes_and_init(self):
        A, y = instance(4)
        traj = encode(A, y, PenalizedLossParams(unroll_depth=7))
        assert traj.iterates.shape == (8, 8)
        assert traj.active_sets.shape == (7, 8)
        np.testing.assert_array_equal(traj.iterates[0], 0.0)
        np.testing.assert_array_equal(traj.momentum_iterates[0], 0.0)

    def test_iterates_feasible(self):
        for seed in range(10):
            A, y = instance(seed)
            traj = encode(A, y, PenalizedLossParams(lam=0.2, unroll_depth=300))
            for x in traj.iterates[1:]:
                assert is_feasible(x, 1e-10)
            np.testing.assert_array_equal(traj.active_sets, traj.iterates[1:] > 0)

    def test_final_not_worse_than_first_step(self):
        for seed in range(10):
            A, y = instance(seed)
            traj = encode(A, y, PenalizedLossParams(lam=0.2, unroll_depth=100))
            assert penalized_loss(A, y, traj.final, 0.2) <= penalized_loss(A, y, traj.iterates[1], 0.2)

    def test_restarts_agree(self):
        A, y = instance(5)
        rng = np.random.default_rng(0)
        p = PenalizedLossParams(lam=0.1, unroll_depth=5000)
        finals = [penalized_loss(A, y, encode(A, y, p).final, 0.1)]
        for _ in range(10):
            x0 = rng.dirichlet(np.ones(8))
            finals.append(penalized_loss(A, y, encode(A, y, p, x0=x0).final, 0.1))
        assert max(finals) - min(finals) <= 1e-7

    def test_monotone_tail(self):
        for seed in range(5):
            A, y = instance(seed)
            T = 2000
            traj = encode(A, y, PenalizedLossParams(lam=0.1, unroll_depth=T))
            losses = [penalized_loss(A, y, x, 0.1) for x in traj.iterates[T // 2:]]
            assert np.all(np.diff(losses) <= 1e-9)

    def test_bad_step_size(self):
        A, y = instance(6)
        with pytest.raises(NonFiniteIterate):
            encode(A * 1e150, y, PenalizedLossParams(lam=0.1, step_size=1e10, unroll_depth=50))

    def test_dimension_mismatch(self):
        A, _ = instance(7)
        with pytest.raises(DimensionMismatch):
            encode(A, np.zeros(3))


class TestBatchEncode:
    p = PenalizedLossParams(lam=0.05, unroll_depth=150)

    def test_single_column(self):
        A, y = instance(8)
        codes, _ = batch_encode(A, y[:, None], self.p)
        np.testing.assert_array_equal(codes[:, 0], encode(A, y, self.p).final)

    def test_bit_exact_per_column(self):
        rng = np.random.default_rng(9)
        A = rng.standard_normal((5, 8))
        Y = rng.standard_normal((5, 100))
        codes, _ = batch_encode(A, Y, self.p)
        for i in range(100):
            np.testing.assert_array_equal(codes[:, i], encode(A, Y[:, i], self.p).final)

    def test_bit_exact_large_dictionary(self):
        rng = np.random.default_rng(10)
        A = rng.uniform(size=(60, 40))
        Y = rng.uniform(size=(60, 300))
        codes, _ = batch_encode(A, Y, self.p)
        for i in [0, 137, 299]:
            np.testing.assert_array_equal(codes[:, i], encode(A, Y[:, i], self.p).final)

    def test_permutation(self):
        rng = np.random.default_rng(11)
        A = rng.standard_normal((3, 6))
        Y = rng.standard_normal((3, 40))
        perm = rng.permutation(40)
        a, _ = batch_encode(A, Y, self.p)
        b, _ = batch_encode(A, Y[:, perm], self.p)
        np.testing.assert_array_equal(a[:, perm], b)

    def test_trajectory(self):
        rng = np.random.default_rng(12)
        A = rng.standard_normal((3, 6))
        Y = rng.standard_normal((3, 5))
        codes, traj = batch_encode(A, Y, self.p, keep_trajectory=True)
        assert traj.iterates.shape == (151, 5, 6)
        np.testing.assert_array_equal(traj.final.T, codes)
        np.testing.assert_array_equal(traj.iterates[:, 2, :], encode(A, Y[:, 2], self.p).iterates)


def _cell_violations(lam, T, seeds=(0, 1, 2)):
    from simplexcode.datasets import gen_delaunay_model

    bad = 0
    for s in seeds:
        data, truth = gen_delaunay_model(12, 50, 2, seed=s)
        codes, _ = batch_encode(truth.landmarks, data.points, PenalizedLossParams(lam, None, T))
        for i in range(data.n):
            cell = set(truth.triangulation.cells[truth.cell_assignments[i]])
            bad += not set(np.flatnonzero(codes[:, i] > 1e-4).tolist()) <= cell
    return bad


class TestLocality:
    @pytest.mark.xfail(
        strict=True,
        reason="T=2000 is unconverged at small lam; at lam=1e-2 the exact penalized minimizer leaves the cell for a few points",
    )
    @pytest.mark.parametrize("lam", [1e-4, 1e-3, 1e-2])
    def test_support_in_cell_at_depth_2000(self, lam):
        assert _cell_violations(lam, 2000) == 0

    def test_support_in_cell_when_converged(self):
        assert _cell_violations(1e-3, 20000) == 0

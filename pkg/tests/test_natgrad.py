import numpy as np
import pytest

from rcnes.distribution import DistributionParams, sample_population
from rcnes.errors import NumericalError
from rcnes.natgrad import compute_st, grad_sigma, natgrad_vd, solve_coefficients
from rcnes.weights import WeightSet, rank_weights
from rcnes import oracle

from conftest import random_params


def _point_from_y(params, y):
    return params.m + params.sigma * (params.d_diag * y)


class TestComputeSt:
    def test_orthogonal_y_initial_values(self, rng):
        d = 6
        params = random_params(rng, d)
        vbar = params.v / np.linalg.norm(params.v)
        y = rng.normal(size=d)
        y -= (y @ vbar) * vbar  # project out the v direction
        ws = compute_st(_point_from_y(params, y), params)
        np.testing.assert_allclose(ws.s_initial, y * y - 1.0, atol=1e-10)
        np.testing.assert_allclose(
            ws.t_initial, -0.5 * ws.gamma_v * vbar, atol=1e-10
        )

    def test_step4_solve_residual(self, rng):
        for _ in range(50):
            d = int(rng.integers(2, 30))
            params = random_params(rng, d)
            x = params.m + params.sigma * rng.normal(size=d)
            ws = compute_st(x, params)
            h_full = np.diag(ws.h_diag) + ws.b * np.outer(ws.vbarbar, ws.vbarbar)
            resid = np.max(np.abs(h_full @ ws.s - ws.s_before_solve))
            assert resid <= 1e-10 * max(np.max(np.abs(ws.s_before_solve)), 1e-300)

    def test_zero_v_rejected_at_coefficient_level(self):
        with pytest.raises(ValueError):
            solve_coefficients(np.zeros(3))

    def test_v_overflow_guard(self, rng):
        params = DistributionParams(
            m=np.zeros(2), sigma=1.0, d_diag=np.ones(2),
            v=np.array([1e80, 1e80]),
        )
        with pytest.raises(NumericalError):
            compute_st(np.ones(2), params)

    def test_matches_dense_oracle(self, rng):
        worst = 0.0
        for _ in range(20):
            d = int(rng.integers(2, 9))
            params = random_params(rng, d)
            x = params.m + params.sigma * rng.normal(size=d)
            ws = compute_st(x, params)
            fast_v = ws.t / np.linalg.norm(params.v)
            fast_d = params.d_diag * ws.s
            gv, gd = oracle.dense_natgrad(x, params)
            err = np.linalg.norm(
                np.concatenate([fast_v - gv, fast_d - gd])
            ) / np.linalg.norm(np.concatenate([gv, gd]))
            worst = max(worst, err)
        assert worst < 1e-6


class TestSolveCoefficients:
    def test_h_diag_positive_random_suite(self, rng):
        for _ in range(1000):
            d = int(rng.integers(2, 51))
            v = rng.normal(size=d) * 10 ** rng.uniform(-3, 3)
            alpha_vd, b, h_diag = solve_coefficients(v)
            assert 0.0 < alpha_vd <= 1.0
            assert np.all(h_diag > 0)

    def test_sherman_morrison_well_posed(self, rng):
        for _ in range(1000):
            d = int(rng.integers(2, 51))
            v = rng.normal(size=d) * 10 ** rng.uniform(-3, 3)
            _, b, h_diag = solve_coefficients(v)
            vbar = v / np.linalg.norm(v)
            vbb = vbar * vbar
            assert 1.0 + b * (vbb @ (vbb / h_diag)) > 0

    def test_h_floor_is_gamma_vd(self, rng):
        # axis-aligned v maximizes vbarbar, the worst case for h_diag
        for scale in (0.1, 1.0, 10.0, 100.0):
            v = np.zeros(4)
            v[0] = scale
            _, _, h_diag = solve_coefficients(v)
            gamma_vd = (1.0 + scale**2) ** (-0.5)
            assert h_diag[0] >= gamma_vd - 1e-12


class TestNatgradVd:
    def _sorted_population(self, rng, params, lam):
        pop = sample_population(params, lam, rng)
        pop.set_fvals(rng.normal(size=lam))
        pop.sort()
        return pop

    def test_zero_weights_give_zero_sums(self, rng):
        params = random_params(rng, 5)
        pop = self._sorted_population(rng, params, 6)
        w = WeightSet(w=np.zeros(6), kind="rank")
        g = natgrad_vd(pop, w, params, pc_point=params.m + 0.1)
        np.testing.assert_array_equal(g.grad_v, np.zeros(5))
        np.testing.assert_array_equal(g.grad_d, np.zeros(5))

    def test_pair_decomposition(self, rng):
        params = random_params(rng, 4)
        pop = self._sorted_population(rng, params, 2)
        w = WeightSet(w=np.array([0.5, -0.5]), kind="rank")
        g = natgrad_vd(pop, w, params, pc_point=params.m + 0.1)
        terms = []
        for i in range(2):
            ws = compute_st(pop.x[i], params)
            terms.append(
                (ws.t / np.linalg.norm(params.v), params.d_diag * ws.s)
            )
        np.testing.assert_allclose(
            g.grad_v, 0.5 * (terms[0][0] - terms[1][0]), atol=1e-12
        )
        np.testing.assert_allclose(
            g.grad_d, 0.5 * (terms[0][1] - terms[1][1]), atol=1e-12
        )

    def test_weighted_sum_matches_dense_oracle(self, rng):
        d = 4
        params = random_params(rng, d)
        pop = self._sorted_population(rng, params, 4)
        w = rank_weights(4)
        pc_point = params.m + params.sigma * rng.normal(size=d) * 0.1
        g = natgrad_vd(pop, w, params, pc_point)
        dense_v = np.zeros(d)
        dense_d = np.zeros(d)
        for i in range(4):
            gv, gd = oracle.dense_natgrad(pop.x[i], params)
            dense_v += w.w[i] * gv
            dense_d += w.w[i] * gd
        r1v, r1d = oracle.dense_natgrad(pc_point, params)
        np.testing.assert_allclose(g.grad_v, dense_v, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(g.grad_d, dense_d, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(g.rank_one_v, r1v, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(g.rank_one_d, r1d, rtol=1e-6, atol=1e-8)

    def test_unsorted_population_rejected(self, rng):
        params = random_params(rng, 3)
        pop = sample_population(params, 4, rng)
        pop.set_fvals(rng.normal(size=4))
        with pytest.raises(ValueError):
            natgrad_vd(pop, rank_weights(4), params, params.m)


class TestGradSigma:
    def _pop(self, rng, params, lam):
        pop = sample_population(params, lam, rng)
        pop.set_fvals(rng.normal(size=lam))
        pop.sort()
        return pop

    def test_zero_when_norms_equal_d(self, rng):
        params = random_params(rng, 4)
        pop = self._pop(rng, params, 4)
        pop.z = np.ones((4, 4))  # ||z||^2 = d for every row
        assert grad_sigma(pop, rank_weights(4), 4) == 0.0

    def test_zero_weights(self, rng):
        params = random_params(rng, 3)
        pop = self._pop(rng, params, 4)
        assert grad_sigma(pop, WeightSet(np.zeros(4), "rank"), 3) == 0.0

    def test_antithetic_pair_cancels(self, rng):
        params = random_params(rng, 5)
        pop = sample_population(params, 2, rng)
        pop.set_fvals([0.0, 1.0])
        pop.sort()
        w = WeightSet(np.array([0.5, -0.5]), "rank")
        assert grad_sigma(pop, w, 5) == 0.0

    def test_matches_dense_trace(self, rng):
        for d in (2, 5, 8):
            params = random_params(rng, d)
            pop = self._pop(rng, params, 6)
            w = rank_weights(6)
            acc = np.zeros((d, d))
            for i in range(6):
                acc += w.w[i] * (np.outer(pop.z[i], pop.z[i]) - np.eye(d))
            dense = np.trace(acc) / d
            assert grad_sigma(pop, w, d) == pytest.approx(dense, abs=1e-12)

import numpy as np
import pytest

from rcnes import oracle
from rcnes.distribution import DistributionParams

from conftest import random_params


class TestSchurForms:
    def test_identity_small_case(self):
        v = np.array([1.0, 0.0])
        dd = np.ones(2)
        lhs = oracle.schur_lhs_dense(v, dd, alpha_vd=0.7)
        rhs = oracle.schur_rhs_dense(v, dd, alpha_vd=0.7)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_identity_random_suite(self, rng):
        worst = 0.0
        for _ in range(200):
            d = int(rng.integers(2, 21))
            v = rng.normal(size=d)
            dd = rng.uniform(0.3, 3.0, size=d)
            alpha = float(rng.uniform(0.01, 1.0))
            lhs = oracle.schur_lhs_dense(v, dd, alpha)
            rhs = oracle.schur_rhs_dense(v, dd, alpha)
            worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
        assert worst < 1e-10

    def test_alpha_zero_reduces_to_first_block(self, rng):
        d = 5
        v = rng.normal(size=d)
        dd = rng.uniform(0.5, 2.0, size=d)
        sq = v @ v
        gamma_v = 1.0 + sq
        d_inv = np.diag(1.0 / dd)
        v_mat = np.diag(v)
        block = (
            d_inv
            @ (2 * gamma_v * np.eye(d) + sq * v_mat @ v_mat
               - v_mat @ np.outer(v, v) @ v_mat)
            @ d_inv / gamma_v
        )
        np.testing.assert_allclose(
            oracle.schur_lhs_dense(v, dd, 0.0), block, atol=1e-12
        )

    def test_alpha_one_closed_form(self, rng):
        # alpha = 1 collapses b to 2 and H to 2I - 4 Vbar^2
        d = 4
        v = rng.normal(size=d)
        dd = rng.uniform(0.5, 2.0, size=d)
        vbar = v / np.linalg.norm(v)
        vbb = vbar * vbar
        h_expected = 2.0 * np.eye(d) - 4.0 * np.diag(vbb)
        d_inv = np.diag(1.0 / dd)
        expected = d_inv @ (h_expected + 2.0 * np.outer(vbb, vbb)) @ d_inv
        np.testing.assert_allclose(
            oracle.schur_rhs_dense(v, dd, 1.0), expected, atol=1e-12
        )

    def test_symmetry(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 12))
            v = rng.normal(size=d)
            dd = rng.uniform(0.5, 2.0, size=d)
            lhs = oracle.schur_lhs_dense(v, dd, 0.4)
            rhs = oracle.schur_rhs_dense(v, dd, 0.4)
            np.testing.assert_allclose(lhs, lhs.T, atol=1e-12)
            np.testing.assert_allclose(rhs, rhs.T, atol=1e-12)


class TestLogDensityGradients:
    def test_fd_matches_analytic(self, rng):
        for _ in range(10):
            d = int(rng.integers(2, 7))
            params = random_params(rng, d)
            x = params.m + params.sigma * rng.normal(size=d)
            gv_fd, gd_fd = oracle.grad_log_density_numeric(x, params)
            gv_an, gd_an = oracle.grad_log_density_analytic(x, params)
            scale = max(np.linalg.norm(gv_an), np.linalg.norm(gd_an), 1.0)
            assert np.linalg.norm(gv_fd - gv_an) / scale < 1e-6
            assert np.linalg.norm(gd_fd - gd_an) / scale < 1e-6

    def test_mean_gradient_vanishes_at_mean(self, rng):
        params = random_params(rng, 4)
        step = 1e-6
        for j in range(4):
            e = np.zeros(4)
            e[j] = step
            up = oracle.log_density(params.m + e, params)
            dn = oracle.log_density(params.m - e, params)
            assert abs((up - dn) / (2 * step)) < 1e-6

    def test_log_density_matches_scipy_normal(self, rng):
        from scipy.stats import multivariate_normal

        params = random_params(rng, 5)
        x = params.m + rng.normal(size=5)
        cov = params.sigma**2 * (
            np.diag(params.d_diag)
            @ (np.eye(5) + np.outer(params.v, params.v))
            @ np.diag(params.d_diag)
        )
        ref = multivariate_normal(mean=params.m, cov=cov).logpdf(x)
        assert oracle.log_density(x, params) == pytest.approx(ref, rel=1e-10)


class TestFisherBlocks:
    def test_blocks_symmetric(self, rng):
        params = random_params(rng, 3)
        blocks = oracle.fisher_blocks_numeric(params)
        np.testing.assert_allclose(blocks.i_vv, blocks.i_vv.T, atol=1e-9)
        np.testing.assert_allclose(blocks.i_dd, blocks.i_dd.T, atol=1e-9)

    def test_i_vv_positive_definite(self, rng):
        params = random_params(rng, 4)
        blocks = oracle.fisher_blocks_numeric(params)
        assert np.all(np.linalg.eigvalsh(blocks.i_vv) > 0)

    def test_sigma_invariance(self, rng):
        # the (v, D) Fisher block does not depend on sigma
        base = random_params(rng, 3)
        scaled = DistributionParams(
            m=base.m, sigma=base.sigma * 7.0, d_diag=base.d_diag, v=base.v
        )
        a = oracle.fisher_blocks_numeric(base)
        b = oracle.fisher_blocks_numeric(scaled)
        np.testing.assert_allclose(a.i_vv, b.i_vv, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(a.i_dd, b.i_dd, rtol=1e-6, atol=1e-9)

    def test_schur_complement_of_numeric_fisher_matches_closed_form(self, rng):
        # ties the numeric KL route to the algebraic closed forms
        d = 4
        params = random_params(rng, d)
        blocks = oracle.fisher_blocks_numeric(params)
        alpha = blocks.alpha_vd
        schur_numeric = blocks.i_dd - alpha**2 * (
            blocks.i_vd.T @ np.linalg.solve(blocks.i_vv, blocks.i_vd)
        )
        # closed form is in the theta_D parametrization directly
        closed = oracle.schur_rhs_dense(params.v, params.d_diag, alpha)
        np.testing.assert_allclose(schur_numeric, closed, rtol=1e-5, atol=1e-7)

"""Dense brute-force counterparts of the fast natural-gradient path.

Everything here materializes d x d matrices and is meant for verification at
small d only.  The Fisher information is obtained numerically as the Hessian
of the closed-form Gaussian KL divergence, so no analytic Fisher block
formulas are transcribed anywhere; agreement between the two Schur-complement
forms and between fast and dense natural gradients is therefore meaningful
evidence, not circular bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import DistributionParams


class IllConditionedError(RuntimeError):
    """Dense Fisher system too ill-conditioned to trust (cond > 1e12)."""


def _alpha_vd(v: np.ndarray) -> float:
    sq = float(v @ v)
    gamma_v = 1.0 + sq
    vbarbar = (v * v) / sq
    return min(
        1.0,
        np.sqrt(sq**2 + (2.0 - gamma_v ** (-0.5)) * gamma_v / vbarbar.max())
        / (2.0 + sq),
    )


def schur_lhs_dense(
    v: np.ndarray, d_diag: np.ndarray, alpha_vd: float
) -> np.ndarray:
    """Schur complement as the difference of its two expanded block terms."""
    v = np.asarray(v, dtype=float)
    sq = float(v @ v)
    gamma_v = 1.0 + sq
    vbar = v / np.sqrt(sq)
    d_inv = np.diag(1.0 / np.asarray(d_diag, dtype=float))
    v_mat = np.diag(v)
    vbar_mat = np.diag(vbar)
    eye = np.eye(v.shape[0])

    term_dd = (
        d_inv
        @ (2.0 * gamma_v * eye + sq * v_mat @ v_mat - v_mat @ np.outer(v, v) @ v_mat)
        @ d_inv
        / gamma_v
    )
    bracket = (2.0 + sq) ** 2 * eye - (2.0 + 2.0 * sq + sq**2) * np.outer(vbar, vbar)
    term_cross = (
        alpha_vd**2 / gamma_v * (d_inv @ vbar_mat @ bracket @ vbar_mat @ d_inv)
    )
    return term_dd - term_cross


def schur_rhs_dense(
    v: np.ndarray, d_diag: np.ndarray, alpha_vd: float
) -> np.ndarray:
    """Closed form D^-1 (H + b vbarbar vbarbar^T) D^-1."""
    v = np.asarray(v, dtype=float)
    sq = float(v @ v)
    gamma_v = 1.0 + sq
    vbar = v / np.sqrt(sq)
    vbarbar = vbar * vbar
    b = -(1.0 - alpha_vd**2) * sq**2 / gamma_v + 2.0 * alpha_vd**2
    h_mat = 2.0 * np.eye(v.shape[0]) - (b + 2.0 * alpha_vd**2) * np.diag(vbarbar)
    d_inv = np.diag(1.0 / np.asarray(d_diag, dtype=float))
    return d_inv @ (h_mat + b * np.outer(vbarbar, vbarbar)) @ d_inv


@dataclass
class DenseFisherBlocks:
    i_vv: np.ndarray
    i_vd: np.ndarray
    i_dd: np.ndarray
    alpha_vd: float


def _covariance(sigma: float, d_diag: np.ndarray, v: np.ndarray) -> np.ndarray:
    d_mat = np.diag(d_diag)
    return sigma**2 * (d_mat @ (np.eye(len(d_diag)) + np.outer(v, v)) @ d_mat)


def log_density(x: np.ndarray, params: DistributionParams) -> float:
    cov = _covariance(params.sigma, params.d_diag, params.v)
    r = np.asarray(x, dtype=float) - params.m
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise ValueError("covariance is not positive definite")
    quad = r @ np.linalg.solve(cov, r)
    return float(-0.5 * (params.d * np.log(2.0 * np.pi) + logdet + quad))


def _kl_to(params: DistributionParams, v1: np.ndarray, dd1: np.ndarray) -> float:
    """KL(N(m, C(theta)) || N(m, C(theta'))) with the mean held fixed."""
    cov0 = _covariance(params.sigma, params.d_diag, params.v)
    cov1 = _covariance(params.sigma, dd1, v1)
    sign0, logdet0 = np.linalg.slogdet(cov0)
    sign1, logdet1 = np.linalg.slogdet(cov1)
    if sign0 <= 0 or sign1 <= 0:
        raise ValueError("perturbed covariance lost positive definiteness")
    tr = np.trace(np.linalg.solve(cov1, cov0))
    return float(0.5 * (tr - params.d + logdet1 - logdet0))


def _kl_hessian(params: DistributionParams, step: float) -> np.ndarray:
    d = params.d
    n = 2 * d

    def kl_at(delta: np.ndarray) -> float:
        return _kl_to(params, params.v + delta[:d], params.d_diag + delta[d:])

    def hessian(h: float) -> np.ndarray:
        hess = np.empty((n, n))
        basis = np.eye(n) * h
        for i in range(n):
            hess[i, i] = (kl_at(basis[i]) + kl_at(-basis[i])) / h**2
        for i in range(n):
            for j in range(i + 1, n):
                val = (
                    kl_at(basis[i] + basis[j])
                    - kl_at(basis[i] - basis[j])
                    - kl_at(-basis[i] + basis[j])
                    + kl_at(-basis[i] - basis[j])
                ) / (4.0 * h * h)
                hess[i, j] = hess[j, i] = val
        return hess

    coarse = hessian(step)
    fine = hessian(step / 2.0)
    hess = (4.0 * fine - coarse) / 3.0  # Richardson: kills the O(h^2) term
    return 0.5 * (hess + hess.T)


def fisher_blocks_numeric(
    params: DistributionParams, step: float = 1e-3
) -> DenseFisherBlocks:
    """Fisher information over (v, diag D) as the KL Hessian at zero shift."""
    d = params.d
    hess = _kl_hessian(params, step)
    return DenseFisherBlocks(
        i_vv=hess[:d, :d],
        i_vd=hess[:d, d:],
        i_dd=hess[d:, d:],
        alpha_vd=_alpha_vd(params.v),
    )


def grad_log_density_numeric(
    x: np.ndarray, params: DistributionParams, step: float = 1e-6
) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradient of ln p(x) in (v, diag D)."""
    d = params.d
    grad = np.empty(2 * d)
    for i in range(2 * d):
        delta = np.zeros(2 * d)
        delta[i] = step
        up = DistributionParams(
            m=params.m,
            sigma=params.sigma,
            d_diag=params.d_diag + delta[d:],
            v=params.v + delta[:d],
        )
        dn = DistributionParams(
            m=params.m,
            sigma=params.sigma,
            d_diag=params.d_diag - delta[d:],
            v=params.v - delta[:d],
        )
        grad[i] = (log_density(x, up) - log_density(x, dn)) / (2.0 * step)
    return grad[:d], grad[d:]


def grad_log_density_analytic(
    x: np.ndarray, params: DistributionParams
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient of ln p(x) in (v, diag D) via the trace identities."""
    d = params.d
    sigma, dd, v = params.sigma, params.d_diag, params.v
    cov = _covariance(sigma, dd, v)
    cov_inv = np.linalg.inv(cov)
    r = np.asarray(x, dtype=float) - params.m
    cir = cov_inv @ r
    d_mat = np.diag(dd)
    a_mat = np.eye(d) + np.outer(v, v)

    grad_v = np.empty(d)
    grad_d = np.empty(d)
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        dcov_v = sigma**2 * (d_mat @ (np.outer(e, v) + np.outer(v, e)) @ d_mat)
        grad_v[j] = -0.5 * np.trace(cov_inv @ dcov_v) + 0.5 * cir @ dcov_v @ cir
        e_mat = np.outer(e, e)
        dcov_d = sigma**2 * (e_mat @ a_mat @ d_mat + d_mat @ a_mat @ e_mat)
        grad_d[j] = -0.5 * np.trace(cov_inv @ dcov_d) + 0.5 * cir @ dcov_d @ cir
    return grad_v, grad_d


def dense_natgrad(
    x: np.ndarray,
    params: DistributionParams,
    fisher_step: float = 1e-3,
    grad_step: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Natural gradient from the dense alpha-scaled Fisher system.

    Builds the (v, diag D) Fisher block numerically, scales its cross blocks
    by alpha_vd, and solves against the finite-difference log-density
    gradient.  Only trustworthy for d <= 8 or so.

    The Fisher step sits at the roundoff/truncation sweet spot: the KL is
    O(h^2) near zero, so much smaller steps drown the second difference in
    float64 rounding noise before truncation error matters.
    """
    d = params.d
    blocks = fisher_blocks_numeric(params, step=fisher_step)
    alpha = blocks.alpha_vd
    fisher = np.block(
        [
            [blocks.i_vv, alpha * blocks.i_vd],
            [alpha * blocks.i_vd.T, blocks.i_dd],
        ]
    )
    cond = np.linalg.cond(fisher)
    if cond > 1e12:
        raise IllConditionedError(f"dense Fisher condition number {cond:.3e}")
    gv, gd = grad_log_density_numeric(x, params, step=grad_step)
    sol = np.linalg.solve(fisher, np.concatenate([gv, gd]))
    return sol[:d], sol[d:]

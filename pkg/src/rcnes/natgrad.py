"""Linear-time natural gradients for the v / D / sigma parameters.

The v and D gradients come from a five-step procedure that applies the
inverse Fisher information of the restricted covariance model using only
elementwise vector operations plus one rank-one (Sherman-Morrison style)
correction, so each candidate costs O(d).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import DistributionParams, Population
from .errors import NumericalError
from .weights import WeightSet

# ||v||^2 beyond this would push exp/sqrt intermediates out of float range.
V_SQ_NORM_LIMIT = 1e150


@dataclass
class StWorkspace:
    """Intermediate quantities of the s/t procedure for one point.

    ``s_initial``/``t_initial`` hold the values after the first two steps,
    before the Fisher correction kicks in; they exist for verification.
    """

    s: np.ndarray
    t: np.ndarray
    vbar: np.ndarray
    vbarbar: np.ndarray
    gamma_v: float
    alpha_vd: float
    b: float
    h_diag: np.ndarray
    s_initial: np.ndarray
    t_initial: np.ndarray
    s_before_solve: np.ndarray  # right-hand side entering the step-4 solve


@dataclass
class NaturalGradient:
    """Weighted-sum and rank-one natural-gradient parts for v and D.

    The rank-one parts are kept separate so the caller can scale them by c1
    while the weighted sums get eta_b.
    """

    grad_v: np.ndarray
    grad_d: np.ndarray
    rank_one_v: np.ndarray
    rank_one_d: np.ndarray
    g_sigma: float = 0.0


def solve_coefficients(v: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Clamp factor alpha_vd, scalar b, and the diagonal of H for v.

    These define the step-4 system (H + b vbarbar vbarbar^T); the clamp on
    alpha_vd keeps every entry of h_diag at least (1 + ||v||^2)^(-1/2) > 0.
    """
    v = np.asarray(v, dtype=float)
    sq_norm_v = float(v @ v)
    if sq_norm_v == 0.0:
        raise ValueError("v must not be the zero vector")
    gamma_v = 1.0 + sq_norm_v
    vbar = v / np.sqrt(sq_norm_v)
    vbarbar = vbar * vbar
    gamma_vd = gamma_v ** (-0.5)
    alpha_vd = min(
        1.0,
        np.sqrt(sq_norm_v**2 + (2.0 - gamma_vd) * gamma_v / vbarbar.max())
        / (2.0 + sq_norm_v),
    )
    b = -(1.0 - alpha_vd**2) * sq_norm_v**2 / gamma_v + 2.0 * alpha_vd**2
    h_diag = 2.0 - (b + 2.0 * alpha_vd**2) * vbarbar
    return alpha_vd, b, h_diag


def _st_core(y: np.ndarray, v: np.ndarray):
    """Run the five s/t steps on an (n, d) batch of shaped draws.

    Returns (s, t, aux) where aux carries the scalars/vectors shared by the
    whole batch.  s and t match the per-point procedure row by row.

    Overflow here is not an error condition per se: callers check the
    outputs for finiteness and raise NumericalError, so numpy's warnings
    are suppressed for the duration.
    """
    sq_norm_v = float(v @ v)
    if not np.isfinite(sq_norm_v) or sq_norm_v > V_SQ_NORM_LIMIT:
        raise NumericalError(f"||v||^2 overflow ({sq_norm_v}); state is unstable")
    norm_v = np.sqrt(sq_norm_v)
    if norm_v == 0.0:
        raise ValueError("v must not be the zero vector")
    vbar = v / norm_v
    vbarbar = vbar * vbar
    gamma_v = 1.0 + sq_norm_v

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        # step 1
        yv = y @ vbar  # <y, vbar> per row
        s = y * y - (sq_norm_v / gamma_v) * yv[..., None] * (y * vbar) - 1.0
        # step 2
        t = yv[..., None] * y - 0.5 * (yv * yv + gamma_v)[..., None] * vbar
        s_initial = s.copy()
        t_initial = t.copy()

        # step 3
        alpha_vd, b, h_diag = solve_coefficients(v)
        s = s - (alpha_vd / gamma_v) * (
            (2.0 + sq_norm_v) * (vbar * t)
            - sq_norm_v * (t @ vbar)[..., None] * vbarbar
        )
        s_before_solve = s.copy()

        # step 4: solve (H + b vbarbar vbarbar^T) s_new = s with diagonal H
        hinv_vbb = vbarbar / h_diag
        denom = 1.0 + b * (vbarbar @ hinv_vbb)
        s = s / h_diag - (b / denom) * (s @ hinv_vbb)[..., None] * hinv_vbb

        # step 5
        t = t - alpha_vd * (
            (2.0 + sq_norm_v) * (vbar * s) - (s @ vbarbar)[..., None] * vbar
        )

    aux = (
        norm_v, vbar, vbarbar, gamma_v, alpha_vd, b, h_diag,
        s_initial, t_initial, s_before_solve,
    )
    return s, t, aux


def compute_st(x: np.ndarray, params: DistributionParams) -> StWorkspace:
    """Run the s/t procedure for a single point x in problem space."""
    x = np.asarray(x, dtype=float)
    y = (x - params.m) / (params.sigma * params.d_diag)
    s, t, aux = _st_core(y[None, :], params.v)
    (_, vbar, vbarbar, gamma_v, alpha_vd, b, h_diag, s0, t0, s_pre) = aux
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
        raise NumericalError("non-finite intermediate in s/t procedure")
    return StWorkspace(
        s=s[0],
        t=t[0],
        vbar=vbar,
        vbarbar=vbarbar,
        gamma_v=gamma_v,
        alpha_vd=alpha_vd,
        b=b,
        h_diag=h_diag,
        s_initial=s0[0],
        t_initial=t0[0],
        s_before_solve=s_pre[0],
    )


def natgrad_vd(
    population: Population,
    weights: WeightSet,
    params: DistributionParams,
    pc_point: np.ndarray,
) -> NaturalGradient:
    """Weighted natural gradients over a sorted population, plus the
    rank-one contribution evaluated at ``pc_point = m + sigma * p_c``.

    All per-candidate terms use the shaped draws y retained from sampling,
    so no candidate coordinates are re-derived.
    """
    if not population.sorted:
        raise ValueError("population must be sorted before gradient estimation")
    s, t, aux = _st_core(population.y, params.v)
    norm_v = aux[0]
    w = weights.w
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        grad_v = (t.T @ w) / norm_v
        grad_d = params.d_diag * (s.T @ w)

        y_pc = (np.asarray(pc_point, dtype=float) - params.m) / (
            params.sigma * params.d_diag
        )
        s_pc, t_pc, _ = _st_core(y_pc[None, :], params.v)
        rank_one_v = t_pc[0] / norm_v
        rank_one_d = params.d_diag * s_pc[0]

    for arr in (grad_v, grad_d, rank_one_v, rank_one_d):
        if not np.all(np.isfinite(arr)):
            raise NumericalError("non-finite natural gradient")
    return NaturalGradient(
        grad_v=grad_v, grad_d=grad_d, rank_one_v=rank_one_v, rank_one_d=rank_one_d
    )


def grad_sigma(population: Population, weights: WeightSet, d: int) -> float:
    """Trace-form step-size gradient: sum_i w_i (||z_i||^2 - d) / d."""
    if not population.sorted:
        raise ValueError("population must be sorted before gradient estimation")
    sq_norms = np.einsum("ij,ij->i", population.z, population.z)
    return float(weights.w @ (sq_norms - d) / d)

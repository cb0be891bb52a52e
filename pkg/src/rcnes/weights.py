"""Recombination weights: rank-based, distance-boosted, and their constants.

Both weight kinds sum to zero by construction, so recombination is invariant
to adding a constant to all objective values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WeightSet:
    w: np.ndarray
    kind: str  # "rank" or "distance"


@dataclass(frozen=True)
class WeightConstants:
    mu_eff: float
    alpha_dist: float


def _check_lambda(lam: int) -> None:
    if lam < 2 or lam % 2 != 0:
        raise ValueError(f"lambda must be an even integer >= 2, got {lam}")


def _rank_weights_raw(lam: int) -> np.ndarray:
    ranks = np.arange(1, lam + 1)
    return np.maximum(0.0, np.log(lam / 2 + 1) - np.log(ranks))


def rank_weights(lam: int) -> WeightSet:
    """Log-rank weights, normalized and shifted to sum to zero."""
    _check_lambda(lam)
    raw = _rank_weights_raw(lam)
    return WeightSet(w=raw / raw.sum() - 1.0 / lam, kind="rank")


def mu_eff(lam: int) -> float:
    """Variance-effective selection mass of the rank weights."""
    w = rank_weights(lam).w
    return float(1.0 / np.sum((w + 1.0 / lam) ** 2))


def distance_weights(z_sorted: np.ndarray, alpha: float) -> WeightSet:
    """Rank weights boosted by exp(alpha * ||z_i||), favoring far samples.

    ``z_sorted`` holds the standard-normal draws in rank order, one row per
    candidate.  The boost factors are computed relative to the largest norm,
    which leaves the normalized weights unchanged while avoiding overflow.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    z_sorted = np.asarray(z_sorted, dtype=float)
    lam = z_sorted.shape[0]
    _check_lambda(lam)
    norms = np.linalg.norm(z_sorted, axis=1)
    raw = _rank_weights_raw(lam) * np.exp(alpha * (norms - norms.max()))
    return WeightSet(w=raw / raw.sum() - 1.0 / lam, kind="distance")


def h_inv(d: int) -> float:
    """Positive root of (1 + x^2) exp(x^2 / 2) / 0.24 - 10 - d = 0.

    Newton iteration from x = 1 on the logarithm of the defining equation;
    the raw function grows doubly exponentially, so plain Newton on it
    overshoots wildly for large d, while the log form is gently convex and
    converges in a handful of steps for any d up to 10^6 and beyond.
    """
    target = np.log(10.0 + d)

    def residual(x: float) -> float:
        return (1.0 + x * x) * np.exp(x * x / 2.0) / 0.24 - 10.0 - d

    x = 1.0
    for _ in range(100):
        if abs(residual(x)) <= 1e-10:
            return x
        g = np.log1p(x * x) + 0.5 * x * x - np.log(0.24) - target
        gprime = 2.0 * x / (1.0 + x * x) + x
        x_new = x - g / gprime
        if x_new == x:  # machine resolution of the root
            break
        x = x_new
    # For huge d the absolute residual floor is a few ulps of d itself.
    if abs(residual(x)) <= max(1e-10, 8.0 * np.finfo(float).eps * (10.0 + d)):
        return x
    raise RuntimeError(f"h_inv Newton iteration failed to converge for d={d}")


def alpha_dist(d: int, lam: int) -> float:
    """Distance-weight exponent: h_inv(d) * min(1, sqrt(lam/d)) * sqrt(lam/d)."""
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    _check_lambda(lam)
    ratio = np.sqrt(lam / d)
    return h_inv(d) * min(1.0, ratio) * ratio


def weight_constants(d: int, lam: int) -> WeightConstants:
    return WeightConstants(mu_eff=mu_eff(lam), alpha_dist=alpha_dist(d, lam))

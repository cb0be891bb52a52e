"""Search distribution with diagonal-plus-rank-one covariance shaping.

The sampling model is ``x = m + sigma * D y`` where ``y`` stretches a standard
normal draw ``z`` along the unit direction of ``v``, so that
``Cov(x) = sigma^2 * D (I + v v^T) D`` without ever materializing a d x d
matrix.  All sampling work is O(d * lambda).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

MIN_V_NORM = 1e-8


@dataclass(frozen=True)
class DistributionParams:
    """Immutable snapshot of the search distribution.

    Attributes:
        m: mean vector, length d.
        sigma: global step size, > 0.
        d_diag: diagonal of the scaling matrix D, entries > 0.
        v: rank-one direction; its norm must stay positive.
    """

    m: np.ndarray
    sigma: float
    d_diag: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.m, dtype=float)
        d_diag = np.asarray(self.d_diag, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if m.ndim != 1:
            raise ValueError("m must be a 1-d vector")
        if d_diag.shape != m.shape or v.shape != m.shape:
            raise ValueError(
                f"dimension mismatch: m has length {m.shape[0]}, "
                f"d_diag {d_diag.shape[0]}, v {v.shape[0]}"
            )
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not np.all(d_diag > 0):
            raise ValueError("all entries of d_diag must be positive")
        if np.linalg.norm(v) == 0.0:
            raise ValueError("v must not be the zero vector")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "d_diag", d_diag)
        object.__setattr__(self, "v", v)

    @property
    def d(self) -> int:
        return self.m.shape[0]


@dataclass
class Candidate:
    """One sampled solution: the raw draw, its shaped form, and the point."""

    z: np.ndarray
    y: np.ndarray
    x: np.ndarray
    fval: Optional[float] = None


class Population:
    """A batch of lambda candidates stored as (lambda, d) arrays.

    Rows come in antithetic pairs: ``z[2i+1] == -z[2i]`` element-exact.
    """

    def __init__(self, z: np.ndarray, y: np.ndarray, x: np.ndarray):
        z = np.asarray(z, dtype=float)
        if z.ndim != 2 or z.shape[0] % 2 != 0:
            raise ValueError("population needs an even number of rows")
        self.z = z
        self.y = np.asarray(y, dtype=float)
        self.x = np.asarray(x, dtype=float)
        self.fvals: Optional[np.ndarray] = None
        self.sorted = False

    @property
    def lam(self) -> int:
        return self.z.shape[0]

    @property
    def candidates(self) -> list[Candidate]:
        fv = self.fvals if self.fvals is not None else [None] * self.lam
        return [
            Candidate(self.z[i], self.y[i], self.x[i], fv[i])
            for i in range(self.lam)
        ]

    def set_fvals(self, fvals: Sequence[float]) -> None:
        fvals = np.asarray(fvals, dtype=float)
        if fvals.shape != (self.lam,):
            raise ValueError(
                f"expected {self.lam} objective values, got shape {fvals.shape}"
            )
        if not np.all(np.isfinite(fvals)):
            raise ValueError("objective values must be finite")
        self.fvals = fvals
        self.sorted = False

    def sort(self) -> None:
        """Order candidates by objective value; ties keep sampling order."""
        if self.fvals is None:
            raise ValueError("cannot sort before objective values are set")
        order = np.argsort(self.fvals, kind="stable")
        self.z = self.z[order]
        self.y = self.y[order]
        self.x = self.x[order]
        self.fvals = self.fvals[order]
        self.sorted = True


def init_params(
    d: int,
    m0: Sequence[float],
    sigma0: float,
    d0: Optional[Sequence[float]] = None,
    v0: Optional[Sequence[float]] = None,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> DistributionParams:
    """Build initial distribution parameters.

    When ``v0`` is omitted, v is drawn with i.i.d. normal entries of standard
    deviation 1/sqrt(d), giving ||v|| near 1 so the initial shape stays
    mildly conditioned.  Supply either ``seed`` or an existing ``rng`` for
    that draw.
    """
    if d < 1:
        raise ValueError("d must be a positive integer")
    m0 = np.asarray(m0, dtype=float)
    if m0.shape != (d,):
        raise ValueError(f"m0 must have length {d}, got shape {m0.shape}")
    if d0 is None:
        d0 = np.ones(d)
    d0 = np.asarray(d0, dtype=float)
    if d0.shape != (d,):
        raise ValueError(f"d0 must have length {d}, got shape {d0.shape}")
    if v0 is not None:
        v = np.asarray(v0, dtype=float)
        if v.shape != (d,):
            raise ValueError(f"v0 must have length {d}, got shape {v.shape}")
        if np.linalg.norm(v) == 0.0:
            raise ValueError("v0 must not be the zero vector")
    else:
        if rng is None:
            rng = np.random.default_rng(seed)
        v = rng.standard_normal(d) / np.sqrt(d)
        while np.linalg.norm(v) < MIN_V_NORM:  # pragma: no cover
            v = rng.standard_normal(d) / np.sqrt(d)
    return DistributionParams(m=m0, sigma=float(sigma0), d_diag=d0, v=v)


def transform_z_to_y(z: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Stretch draws along v: y = z + (sqrt(1+||v||^2) - 1) <z, vbar> vbar.

    ``z`` may be a single vector or an (n, d) batch.
    """
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    vnorm = np.linalg.norm(v)
    if vnorm == 0.0:
        raise ValueError("v must not be the zero vector")
    vbar = v / vnorm
    coeff = np.sqrt(1.0 + vnorm**2) - 1.0
    proj = z @ vbar
    return z + coeff * np.multiply.outer(proj, vbar)


def sample_population(
    params: DistributionParams, lam: int, rng: np.random.Generator
) -> Population:
    """Draw lambda candidates in antithetic pairs (z, -z)."""
    if lam < 2 or lam % 2 != 0:
        raise ValueError(f"lambda must be a positive even integer, got {lam}")
    half = rng.standard_normal((lam // 2, params.d))
    z = np.empty((lam, params.d))
    z[0::2] = half
    z[1::2] = -half
    y = transform_z_to_y(z, params.v)
    x = params.m + params.sigma * (y * params.d_diag)
    return Population(z=z, y=y, x=x)


def covariance_dense(params: DistributionParams) -> np.ndarray:
    """Materialize sigma^2 * D (I + v v^T) D.  Test helper, O(d^2)."""
    d_mat = np.diag(params.d_diag)
    inner = np.eye(params.d) + np.outer(params.v, params.v)
    return params.sigma**2 * (d_mat @ inner @ d_mat)

"""Standard separable and non-separable test objectives.

Every function accepts an array whose last axis is the coordinate axis, so
the same code evaluates a single point (d,) or a population batch (n, d).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


def sphere(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def ktablet(x: np.ndarray, k: int) -> np.ndarray:
    """First k coordinates unscaled, the rest multiplied by 100."""
    x = np.asarray(x, dtype=float)
    head = np.sum(x[..., :k] * x[..., :k], axis=-1)
    tail = np.sum((100.0 * x[..., k:]) ** 2, axis=-1)
    return head + tail


def ellipsoid(x: np.ndarray) -> np.ndarray:
    """Axis scaling 1000^((i-1)/(d-1)); condition number 10^6.

    At d = 1 the exponent is taken as zero, matching the d -> 1 limit.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if d == 1:
        return np.sum(x * x, axis=-1)
    scale = 1000.0 ** (np.arange(d) / (d - 1))
    return np.sum((scale * x) ** 2, axis=-1)


def rosenbrock(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    a = x[..., 1:]
    b = x[..., :-1]
    return np.sum(100.0 * (a - b * b) ** 2 + (b - 1.0) ** 2, axis=-1)


def rastrigin(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return 10.0 * d + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x), axis=-1)


BENCHMARK_NAMES = ("sphere", "ktablet", "ellipsoid", "rosenbrock", "rastrigin")


@dataclass(frozen=True)
class BenchmarkSpec:
    """A benchmark function bound to a dimension plus its start preset."""

    name: str
    d: int
    init_m: np.ndarray
    init_sigma: float
    k: Optional[int] = None  # k-Tablet split point


def preset(name: str, d: int) -> BenchmarkSpec:
    """Benchmark with its standard initial distribution.

    Rosenbrock starts at the origin with sigma 0.5; the others start at
    (3, ..., 3) with sigma 2.0.  The k-Tablet split is k = floor(d / 4).
    """
    if name not in BENCHMARK_NAMES:
        raise ValueError(f"unknown benchmark {name!r}; choose from {BENCHMARK_NAMES}")
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    if name == "rosenbrock":
        init_m, init_sigma = np.zeros(d), 0.5
    else:
        init_m, init_sigma = np.full(d, 3.0), 2.0
    k = d // 4 if name == "ktablet" else None
    return BenchmarkSpec(name=name, d=d, init_m=init_m, init_sigma=init_sigma, k=k)


def evaluate(spec: BenchmarkSpec, x: np.ndarray) -> float:
    """Evaluate one point under the spec; raises on dimension mismatch."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.d,):
        raise ValueError(f"expected a point of dimension {spec.d}, got {x.shape}")
    return float(make_objective(spec)(x))


def make_objective(spec: BenchmarkSpec):
    """Batch-capable callable for the spec (last axis = coordinates)."""
    if spec.name == "sphere":
        return sphere
    if spec.name == "ktablet":
        k = spec.k
        return lambda x: ktablet(x, k)
    if spec.name == "ellipsoid":
        return ellipsoid
    if spec.name == "rosenbrock":
        return rosenbrock
    return rastrigin


# Population-size grids for the multimodal runs, per dimension.
_RASTRIGIN_FACTORS = {
    80: (20, 22, 24, 26, 28),
    200: (12, 14, 16, 18, 20),
    600: (6, 7, 8, 9, 10),
    1000: (4, 4.5, 5, 5.5, 6),
}


def rastrigin_lambdas(d: int) -> list[int]:
    """Rastrigin population-size grid; even by construction."""
    if d not in _RASTRIGIN_FACTORS:
        raise ValueError(
            f"no rastrigin population grid for d={d}; supply lambdas explicitly"
        )
    lams = []
    for factor in _RASTRIGIN_FACTORS[d]:
        lam = int(round(factor * d))
        if lam % 2 != 0:
            lam += 1
        lams.append(lam)
    return lams

"""Ask/tell optimizer orchestrating one full adaptation iteration per tell.

The iteration order is: sort, step-size path, phase detection, weight and
eta_sigma selection, covariance path, mean, v/D (with determinant
normalization), sigma.  All gradient terms are evaluated at the pre-update
parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import adaptation, natgrad, weights as weights_mod
from .adaptation import EvolutionState, Phase
from .distribution import DistributionParams, init_params, sample_population
from .errors import AskTellOrderError, NumericalError

SIGMA_MAX = 1e100
SIGMA_MIN = 1e-300


def default_lambda(d: int) -> int:
    """Default population size 4 + floor(3 ln d), rounded up to even."""
    if d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    lam = 4 + int(math.floor(3.0 * math.log(d)))
    return lam if lam % 2 == 0 else lam + 1


@dataclass(frozen=True)
class StrategyConfig:
    """Optimizer configuration.

    ``m0`` may be a scalar (broadcast) or a length-d vector; ``lam`` defaults
    to :func:`default_lambda`.  ``max_evals=None`` disables the budget check,
    which is only sensible for manual ask/tell loops.
    """

    d: int
    lam: Optional[int] = None
    m0: float | Sequence[float] = 0.0
    sigma0: float = 1.0
    d0: Optional[Sequence[float]] = None
    v0: Optional[Sequence[float]] = None
    target_fval: float = -math.inf
    max_evals: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        lam = self.lam if self.lam is not None else default_lambda(self.d)
        if lam < 2 or lam % 2 != 0:
            raise ValueError(f"lambda must be an even integer >= 2, got {lam}")
        object.__setattr__(self, "lam", lam)
        if self.max_evals is not None and self.max_evals < lam:
            raise ValueError("max_evals must be at least lambda")
        m0 = np.asarray(self.m0, dtype=float)
        if m0.ndim == 0:
            m0 = np.full(self.d, float(m0))
        object.__setattr__(self, "m0", m0)


@dataclass
class OptimizeResult:
    best_x: np.ndarray
    best_fval: float
    evals_used: int
    reached_target: bool
    termination_reason: str  # "target" | "budget" | "numerical"


class Optimizer:
    """Restricted-covariance natural evolution strategy, ask/tell style.

    One instance owns a single RNG stream seeded from the config, so a fixed
    config reproduces the full trajectory bit for bit.  Instances are not
    thread-safe; candidates from a single ask may be evaluated in parallel
    and told back in sampling order.
    """

    def __init__(self, config: StrategyConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.params = init_params(
            d=config.d,
            m0=config.m0,
            sigma0=config.sigma0,
            d0=config.d0,
            v0=config.v0,
            rng=self.rng,
        )
        self.state = EvolutionState.initial(config.d)
        self.rates = adaptation.learning_rates(config.d, config.lam)
        self.mu_eff = weights_mod.mu_eff(config.lam)
        self.alpha_dist = weights_mod.alpha_dist(config.d, config.lam)
        self.upsilon = adaptation.expected_norm(config.d)
        self._rank_weights = weights_mod.rank_weights(config.lam)
        self._pending = None
        self._failed = False
        self.evals_used = 0
        self.best_fval = math.inf
        self.best_x: Optional[np.ndarray] = None
        self.d_clamp_count = 0

    @property
    def lam(self) -> int:
        return self.config.lam

    def ask(self) -> np.ndarray:
        """Sample a fresh population and return its lambda points."""
        if self._failed:
            raise NumericalError("optimizer state is no longer usable")
        if self._pending is not None:
            raise AskTellOrderError("ask called twice without an intervening tell")
        self._pending = sample_population(self.params, self.lam, self.rng)
        return self._pending.x.copy()

    def tell(self, fvals: Sequence[float]) -> None:
        """Consume objective values for the last ask and adapt all state."""
        if self._pending is None:
            raise AskTellOrderError("tell called without a pending ask")
        pop = self._pending
        pop.set_fvals(fvals)  # validates length and finiteness
        self._pending = None
        pop.sort()
        self.evals_used += self.lam
        if pop.fvals[0] < self.best_fval:
            self.best_fval = float(pop.fvals[0])
            self.best_x = pop.x[0].copy()

        params, rates = self.params, self.rates
        try:
            p_sigma = adaptation.update_p_sigma(
                self.state.p_sigma, pop.z, self._rank_weights.w,
                rates.c_sigma, self.mu_eff,
            )
            phase = adaptation.detect_phase(
                float(np.linalg.norm(p_sigma)), self.upsilon
            )
            if phase is Phase.MOVEMENT:
                w = weights_mod.distance_weights(pop.z, self.alpha_dist)
            else:
                w = self._rank_weights
            eta_sigma = rates.eta_sigma(phase)

            p_c = adaptation.update_p_c(
                self.state.p_c, pop, w, params, rates.c_c, self.mu_eff
            )
            m_new = adaptation.update_mean(params, pop, w, rates.eta_m)
            grad = natgrad.natgrad_vd(
                pop, w, params, pc_point=params.m + params.sigma * p_c
            )
            v_new, d_new, clamped = adaptation.update_v_d(
                params, grad, rates.eta_b, rates.c1
            )
            self.d_clamp_count += clamped
            d_new, _ = adaptation.normalize_d(d_new, v_new)
            g_sigma = natgrad.grad_sigma(pop, w, self.config.d)
            sigma_new = adaptation.update_sigma(params.sigma, g_sigma, eta_sigma)
        except NumericalError:
            self._failed = True
            raise

        self.params = DistributionParams(
            m=m_new, sigma=sigma_new, d_diag=d_new, v=v_new
        )
        self.state = EvolutionState(
            p_sigma=p_sigma, p_c=p_c, t=self.state.t + 1, phase=phase
        )
        if not self._state_healthy():
            self._failed = True

    def _state_healthy(self) -> bool:
        p = self.params
        if not (SIGMA_MIN < p.sigma < SIGMA_MAX):
            return False
        return bool(
            np.all(np.isfinite(p.m))
            and np.all(np.isfinite(p.d_diag))
            and np.all(np.isfinite(p.v))
        )

    def snapshot(self) -> dict:
        """Cheap state summary for logging; contains no d x d data."""
        p = self.params
        return {
            "t": self.state.t,
            "phase": self.state.phase.value,
            "evals_used": self.evals_used,
            "sigma": p.sigma,
            "p_sigma_norm": float(np.linalg.norm(self.state.p_sigma)),
            "v_norm": float(np.linalg.norm(p.v)),
            "d_min": float(p.d_diag.min()),
            "d_max": float(p.d_diag.max()),
            "best_fval": self.best_fval,
            "d_clamp_count": self.d_clamp_count,
            "healthy": not self._failed,
        }

    def optimize(
        self,
        f: Callable[[np.ndarray], float],
        batched: bool = False,
    ) -> OptimizeResult:
        """Loop ask/evaluate/tell until target, budget, or numerical failure.

        With ``batched=True`` the objective receives the full (lambda, d)
        array and must return lambda values.
        """
        cfg = self.config
        while True:
            try:
                xs = self.ask()
                if batched:
                    fvals = np.asarray(f(xs), dtype=float)
                else:
                    fvals = np.array([f(x) for x in xs], dtype=float)
                self.tell(fvals)
            except NumericalError:
                reason = "numerical"
                break
            if self.best_fval <= cfg.target_fval:
                reason = "target"
                break
            if cfg.max_evals is not None and self.evals_used >= cfg.max_evals:
                reason = "budget"
                break
            if self._failed:
                reason = "numerical"
                break
        return OptimizeResult(
            best_x=self.best_x.copy() if self.best_x is not None else None,
            best_fval=self.best_fval,
            evals_used=self.evals_used,
            reached_target=self.best_fval <= cfg.target_fval,
            termination_reason=reason,
        )

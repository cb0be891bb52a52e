"""rcnes: linear-time natural evolution strategy with a diagonal-plus-rank-one
covariance model, for high-dimensional black-box optimization."""

from .adaptation import EvolutionState, LearningRates, Phase, expected_norm
from .benchmarks import BENCHMARK_NAMES, BenchmarkSpec, evaluate, preset
from .distribution import (
    Candidate,
    DistributionParams,
    Population,
    covariance_dense,
    init_params,
    sample_population,
    transform_z_to_y,
)
from .errors import AskTellOrderError, NumericalError
from .experiments import (
    ExperimentGrid,
    MetricRow,
    RunRecord,
    auto_budget,
    emit_plot,
    run_experiment,
    run_trial,
    success_metric,
    timing_bench,
    write_csv,
)
from .strategy import Optimizer, OptimizeResult, StrategyConfig, default_lambda
from .weights import (
    WeightConstants,
    WeightSet,
    alpha_dist,
    distance_weights,
    h_inv,
    mu_eff,
    rank_weights,
)

__version__ = "0.1.0"

__all__ = [
    "AskTellOrderError",
    "BENCHMARK_NAMES",
    "BenchmarkSpec",
    "Candidate",
    "DistributionParams",
    "EvolutionState",
    "ExperimentGrid",
    "LearningRates",
    "MetricRow",
    "NumericalError",
    "OptimizeResult",
    "Optimizer",
    "Phase",
    "Population",
    "RunRecord",
    "StrategyConfig",
    "WeightConstants",
    "WeightSet",
    "alpha_dist",
    "auto_budget",
    "covariance_dense",
    "default_lambda",
    "distance_weights",
    "emit_plot",
    "evaluate",
    "expected_norm",
    "h_inv",
    "init_params",
    "mu_eff",
    "preset",
    "rank_weights",
    "run_experiment",
    "run_trial",
    "sample_population",
    "success_metric",
    "timing_bench",
    "transform_z_to_y",
    "write_csv",
]

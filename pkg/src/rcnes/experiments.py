"""Multi-trial benchmark harness: grids, success metrics, CSV and SVG output.

A run record is one (function, d, lambda, trial) cell.  Records are appended
to disk as they finish so an interrupted grid resumes without redoing or
duplicating completed cells.  The headline metric is the mean evaluation
count over successful trials divided by the success rate (lower is better);
it is undefined when nothing succeeded.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
from xml.etree import ElementTree as ET

import numpy as np

from .benchmarks import make_objective, preset
from .strategy import Optimizer, StrategyConfig


def auto_budget(d: int) -> int:
    """Default evaluation budget: 5d * 10^4."""
    return 5 * d * 10**4


@dataclass(frozen=True)
class ExperimentGrid:
    function: str
    d: int
    lambdas: tuple[int, ...]
    trials: int = 10
    target_fval: float = 1e-10
    max_evals: Optional[int] = None  # None -> auto_budget(d)
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        lambdas = tuple(int(l) for l in self.lambdas)
        if any(l < 2 or l % 2 for l in lambdas):
            raise ValueError("all lambda values must be even and >= 2")
        object.__setattr__(self, "lambdas", lambdas)

    @property
    def budget(self) -> int:
        return self.max_evals if self.max_evals is not None else auto_budget(self.d)


@dataclass
class RunRecord:
    function: str
    d: int
    lam: int
    trial: int
    seed: int
    evals_used: int
    best_fval: float
    success: bool
    wall_time: float


@dataclass
class MetricRow:
    function: str
    d: int
    lam: int
    trials: int
    success_rate: float
    mean_evals_success: Optional[float]  # None when no trial succeeded
    sp_metric: Optional[float]


def run_trial(
    function: str,
    d: int,
    lam: int,
    seed: int,
    target_fval: float = 1e-10,
    max_evals: Optional[int] = None,
    trial: int = 0,
) -> RunRecord:
    """One seeded optimization run of a named benchmark."""
    spec = preset(function, d)
    budget = max_evals if max_evals is not None else auto_budget(d)
    config = StrategyConfig(
        d=d,
        lam=lam,
        m0=spec.init_m,
        sigma0=spec.init_sigma,
        target_fval=target_fval,
        max_evals=budget,
        seed=seed,
    )
    objective = make_objective(spec)
    start = time.perf_counter()
    result = Optimizer(config).optimize(objective, batched=True)
    elapsed = time.perf_counter() - start
    return RunRecord(
        function=function,
        d=d,
        lam=lam,
        trial=trial,
        seed=seed,
        evals_used=result.evals_used,
        best_fval=result.best_fval,
        success=result.reached_target,
        wall_time=elapsed,
    )


RECORD_FIELDS = (
    "function",
    "d",
    "lambda",
    "trial",
    "seed",
    "evals_used",
    "best_fval",
    "success",
    "wall_time",
)


def append_record(record: RunRecord, path: Path) -> None:
    path = Path(path)
    new_file = not path.exists()
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(RECORD_FIELDS)
        writer.writerow(
            [
                record.function,
                record.d,
                record.lam,
                record.trial,
                record.seed,
                record.evals_used,
                repr(record.best_fval),
                int(record.success),
                repr(record.wall_time),
            ]
        )


def read_records(path: Path) -> list[RunRecord]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                RunRecord(
                    function=row["function"],
                    d=int(row["d"]),
                    lam=int(row["lambda"]),
                    trial=int(row["trial"]),
                    seed=int(row["seed"]),
                    evals_used=int(row["evals_used"]),
                    best_fval=float(row["best_fval"]),
                    success=bool(int(row["success"])),
                    wall_time=float(row["wall_time"]),
                )
            )
    return records


def run_experiment(
    grid: ExperimentGrid, records_path: Optional[Path] = None
) -> list[RunRecord]:
    """Run trials x lambdas cells; seed of a trial is base_seed + trial index.

    When ``records_path`` is given, finished cells found there are kept and
    skipped, and fresh results are appended one by one.
    """
    done: dict[tuple[int, int], RunRecord] = {}
    if records_path is not None:
        for rec in read_records(records_path):
            if rec.function == grid.function and rec.d == grid.d:
                done[(rec.lam, rec.trial)] = rec
    records = []
    for lam in grid.lambdas:
        for trial in range(grid.trials):
            if (lam, trial) in done:
                records.append(done[(lam, trial)])
                continue
            rec = run_trial(
                function=grid.function,
                d=grid.d,
                lam=lam,
                seed=grid.base_seed + trial,
                target_fval=grid.target_fval,
                max_evals=grid.budget,
                trial=trial,
            )
            if records_path is not None:
                append_record(rec, records_path)
            records.append(rec)
    records.sort(key=lambda r: (r.lam, r.trial))
    return records


def success_metric(records: list[RunRecord]) -> list[MetricRow]:
    """Aggregate per lambda: success rate and evals/success-rate metric."""
    rows = []
    by_lam: dict[int, list[RunRecord]] = {}
    for rec in records:
        by_lam.setdefault(rec.lam, []).append(rec)
    for lam in sorted(by_lam):
        group = by_lam[lam]
        wins = [r for r in group if r.success]
        rate = len(wins) / len(group)
        if wins:
            mean_evals = float(np.mean([r.evals_used for r in wins]))
            sp = mean_evals / rate
        else:
            mean_evals = sp = None
        rows.append(
            MetricRow(
                function=group[0].function,
                d=group[0].d,
                lam=lam,
                trials=len(group),
                success_rate=rate,
                mean_evals_success=mean_evals,
                sp_metric=sp,
            )
        )
    return rows


METRIC_HEADER = "function,d,lambda,trials,success_rate,mean_evals_success,sp_metric"


def write_csv(rows: list[MetricRow], path: Path) -> None:
    """Write metric rows; absent metrics become empty fields."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(METRIC_HEADER + "\n")
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(
                [
                    row.function,
                    row.d,
                    row.lam,
                    row.trials,
                    repr(row.success_rate),
                    "" if row.mean_evals_success is None else repr(row.mean_evals_success),
                    "" if row.sp_metric is None else repr(row.sp_metric),
                ]
            )


def read_metric_csv(path: Path) -> list[MetricRow]:
    rows = []
    with Path(path).open(newline="") as fh:
        for raw in csv.DictReader(fh):
            rows.append(
                MetricRow(
                    function=raw["function"],
                    d=int(raw["d"]),
                    lam=int(raw["lambda"]),
                    trials=int(raw["trials"]),
                    success_rate=float(raw["success_rate"]),
                    mean_evals_success=(
                        float(raw["mean_evals_success"])
                        if raw["mean_evals_success"]
                        else None
                    ),
                    sp_metric=float(raw["sp_metric"]) if raw["sp_metric"] else None,
                )
            )
    return rows


def emit_plot(rows: list[MetricRow], path: Path) -> None:
    """Standalone SVG: lambda on x, the success metric on a log y axis.

    Rows without a metric (zero successes) get a cross marker pinned to the
    bottom edge instead of a point.
    """
    if not rows:
        raise ValueError("no metric rows to plot")
    width, height, margin = 640, 420, 60
    lams = [r.lam for r in rows]
    values = [r.sp_metric for r in rows if r.sp_metric is not None]
    lam_lo, lam_hi = min(lams), max(lams)
    lam_span = max(lam_hi - lam_lo, 1)
    if values:
        log_lo = np.floor(np.log10(min(values)))
        log_hi = np.ceil(np.log10(max(values)))
        if log_hi == log_lo:
            log_hi += 1.0
    else:
        log_lo, log_hi = 0.0, 1.0

    def x_px(lam: float) -> float:
        return margin + (lam - lam_lo) / lam_span * (width - 2 * margin)

    def y_px(value: float) -> float:
        frac = (np.log10(value) - log_lo) / (log_hi - log_lo)
        return height - margin - frac * (height - 2 * margin)

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(width),
        height=str(height),
        viewBox=f"0 0 {width} {height}",
    )
    title = rows[0].function
    ET.SubElement(svg, "title").text = f"{title} d={rows[0].d}"
    axis_style = {"stroke": "black", "stroke-width": "1"}
    ET.SubElement(
        svg, "line",
        x1=str(margin), y1=str(height - margin),
        x2=str(width - margin), y2=str(height - margin), **axis_style,
    )
    ET.SubElement(
        svg, "line",
        x1=str(margin), y1=str(margin),
        x2=str(margin), y2=str(height - margin), **axis_style,
    )
    for exp in range(int(log_lo), int(log_hi) + 1):
        y = y_px(10.0**exp)
        label = ET.SubElement(
            svg, "text", x=str(margin - 8), y=f"{y:.1f}",
            **{"text-anchor": "end", "font-size": "11"},
        )
        label.text = f"1e{exp}"
    for row in rows:
        x = x_px(row.lam)
        tick = ET.SubElement(
            svg, "text", x=f"{x:.1f}", y=str(height - margin + 16),
            **{"text-anchor": "middle", "font-size": "11"},
        )
        tick.text = str(row.lam)
        if row.sp_metric is not None:
            ET.SubElement(
                svg, "circle",
                cx=f"{x:.1f}", cy=f"{y_px(row.sp_metric):.1f}", r="4",
                fill="crimson", **{"class": "point"},
            )
        else:
            y = height - margin
            ET.SubElement(
                svg, "path",
                d=f"M {x - 5:.1f} {y - 5} L {x + 5:.1f} {y + 5} "
                f"M {x - 5:.1f} {y + 5} L {x + 5:.1f} {y - 5}",
                stroke="gray", fill="none", **{"class": "failure", "stroke-width": "2"},
            )
    ET.ElementTree(svg).write(path, xml_declaration=True, encoding="unicode")


@dataclass
class TimingRow:
    d: int
    lam: int
    iterations: int
    repeats: int
    mean_seconds: float
    std_seconds: float


def timing_bench(
    d_list: list[int],
    lam: int = 20,
    iterations: int = 1000,
    repeats: int = 30,
    seed: int = 0,
) -> list[TimingRow]:
    """Wall time of bare strategy iterations on a constant objective.

    The constant objective makes evaluation free, so the numbers measure
    optimizer overhead only.
    """
    rows = []
    for d in d_list:
        times = []
        for rep in range(repeats):
            opt = Optimizer(StrategyConfig(d=d, lam=lam, seed=seed + rep))
            zeros = np.zeros(lam)
            start = time.perf_counter()
            for _ in range(iterations):
                opt.ask()
                opt.tell(zeros)
            times.append(time.perf_counter() - start)
        rows.append(
            TimingRow(
                d=d,
                lam=lam,
                iterations=iterations,
                repeats=repeats,
                mean_seconds=float(np.mean(times)),
                std_seconds=float(np.std(times)),
            )
        )
    return rows


TIMING_HEADER = "d,lambda,iterations,repeats,mean_seconds,std_seconds"


def write_timing_csv(rows: list[TimingRow], path: Path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(TIMING_HEADER + "\n")
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(
                [
                    row.d,
                    row.lam,
                    row.iterations,
                    row.repeats,
                    repr(row.mean_seconds),
                    repr(row.std_seconds),
                ]
            )

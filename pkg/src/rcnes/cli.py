"""Command-line client for benchmark experiment runs.

`run` and `time` talk to the HTTP service: a remote one when --server is
given, otherwise an in-process instance of the same app, so results are
identical either way.  `plot` is a local file transformation and `serve`
starts the service.

The output directory resolves as: RCNES_OUT_DIR env var if set, else --out,
else the current directory.  A config file of flat key=value lines can
pre-fill any long option of `run`.
"""

from __future__ import annotations

import os
from pathlib import Path

import click
import httpx

from .benchmarks import BENCHMARK_NAMES, rastrigin_lambdas
from .experiments import (
    auto_budget,
    RunRecord,
    append_record,
    emit_plot,
    read_metric_csv,
    read_records,
    success_metric,
    write_csv,
    write_timing_csv,
    TimingRow,
)
from .strategy import default_lambda

OUT_DIR_ENV = "RCNES_OUT_DIR"


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        # starlette's httpx->httpx2 transition notice; not actionable here
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.ClickException(f"bad config line (want key=value): {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _resolve_out_dir(out: str | None) -> Path:
    env = os.environ.get(OUT_DIR_ENV)
    path = Path(env or out or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_lambdas(spec: str, function: str, d: int) -> list[int]:
    if spec == "auto":
        if function == "rastrigin":
            try:
                return rastrigin_lambdas(d)
            except ValueError as exc:
                raise click.ClickException(str(exc))
        base = default_lambda(d)
        return [k * base for k in range(1, 6)]
    try:
        lams = [int(tok) for tok in spec.split(",") if tok]
    except ValueError:
        raise click.ClickException(f"bad --lambdas value: {spec!r}")
    if not lams or any(l < 2 or l % 2 for l in lams):
        raise click.ClickException("lambda values must be even integers >= 2")
    return lams


@click.group()
def main() -> None:
    """Benchmark runner for the restricted-covariance NES service."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--function", type=click.Choice(BENCHMARK_NAMES), default=None)
@click.option("--dim", type=int, default=None)
@click.option("--lambdas", default=None, help="comma list of even ints, or 'auto'")
@click.option("--trials", type=int, default=None)
@click.option("--target", type=float, default=None)
@click.option("--max-evals", default=None, help="integer or 'auto' (= 5d*10^4)")
@click.option("--seed", type=int, default=None)
@click.option("--out", default=None, help="output directory")
@click.option("--server", default=None, help="base URL of a running service")
@click.option("--config", "config_path", default=None, help="flat key=value file")
def run(function, dim, lambdas, trials, target, max_evals, seed, out, server,
        config_path) -> None:
    """Run a multi-trial grid and write records.csv plus metrics.csv.

    Completed (lambda, trial) cells found in records.csv are skipped, so an
    interrupted grid can simply be re-run.
    """
    cfg = _load_config(config_path)
    function = function or cfg.get("function")
    if function not in BENCHMARK_NAMES:
        raise click.ClickException("--function is required (or set it in --config)")
    dim = dim if dim is not None else int(cfg.get("dim", 0))
    if dim < 1:
        raise click.ClickException("--dim is required and must be positive")
    lambdas = lambdas or cfg.get("lambdas", "auto")
    trials = trials if trials is not None else int(cfg.get("trials", 10))
    target = target if target is not None else float(cfg.get("target", 1e-10))
    max_evals = max_evals or cfg.get("max_evals", "auto")
    seed = seed if seed is not None else int(cfg.get("seed", 0))
    out = out or cfg.get("out")
    server = server or cfg.get("server")

    budget = auto_budget(dim) if max_evals == "auto" else int(max_evals)
    lams = _resolve_lambdas(lambdas, function, dim)
    out_dir = _resolve_out_dir(out)
    records_path = out_dir / "records.csv"

    done = {
        (r.lam, r.trial)
        for r in read_records(records_path)
        if r.function == function and r.d == dim
    }
    client = make_client(server)
    records: list[RunRecord] = [
        r
        for r in read_records(records_path)
        if r.function == function and r.d == dim
    ]
    for lam in lams:
        for trial in range(trials):
            if (lam, trial) in done:
                continue
            resp = client.post(
                "/benchmarks/trial",
                json={
                    "function": function,
                    "d": dim,
                    "lam": lam,
                    "seed": seed + trial,
                    "trial": trial,
                    "target_fval": target,
                    "max_evals": budget,
                },
            )
            if resp.status_code != 200:
                raise click.ClickException(
                    f"trial lam={lam} trial={trial} failed: {resp.text}"
                )
            payload = resp.json()
            rec = RunRecord(
                function=payload["function"],
                d=payload["d"],
                lam=payload["lam"],
                trial=payload["trial"],
                seed=payload["seed"],
                evals_used=payload["evals_used"],
                best_fval=payload["best_fval"],
                success=payload["success"],
                wall_time=payload["wall_time"],
            )
            append_record(rec, records_path)
            records.append(rec)
            status = "ok" if rec.success else "miss"
            click.echo(
                f"{function} d={dim} lam={lam} trial={trial}: {status} "
                f"evals={rec.evals_used} best={rec.best_fval:.3e}"
            )
    records = [r for r in records if r.lam in set(lams)]
    records.sort(key=lambda r: (r.lam, r.trial))
    rows = success_metric(records)
    metrics_path = out_dir / "metrics.csv"
    write_csv(rows, metrics_path)
    click.echo(f"wrote {metrics_path}")
    for row in rows:
        metric = "---" if row.sp_metric is None else f"{row.sp_metric:.1f}"
        click.echo(
            f"  lam={row.lam}: success_rate={row.success_rate:.2f} metric={metric}"
        )


def _parse_dims(spec: str) -> list[int]:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise click.ClickException("--dims range must be start:stop:step")
        start, stop, step = (int(p) for p in parts)
        return list(range(start, stop + 1, step))
    return [int(tok) for tok in spec.split(",") if tok]


@main.command(name="time")
@click.option("--dims", default="10:100:10", show_default=True)
@click.option("--lambda", "lam", type=int, default=20, show_default=True)
@click.option("--iters", type=int, default=1000, show_default=True)
@click.option("--repeats", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="timing.csv", show_default=True)
@click.option("--server", default=None)
def time_cmd(dims, lam, iters, repeats, seed, out, server) -> None:
    """Measure wall time per dimension on a constant objective."""
    client = make_client(server)
    resp = client.post(
        "/benchmarks/timing",
        json={
            "dims": _parse_dims(dims),
            "lam": lam,
            "iterations": iters,
            "repeats": repeats,
            "seed": seed,
        },
    )
    if resp.status_code != 200:
        raise click.ClickException(f"timing request failed: {resp.text}")
    rows = [TimingRow(**row) for row in resp.json()["rows"]]
    write_timing_csv(rows, Path(out))
    click.echo(f"wrote {out}")
    for row in rows:
        click.echo(
            f"  d={row.d}: {row.mean_seconds:.4f}s +/- {row.std_seconds:.4f}s"
        )


@main.command()
@click.option("--in", "in_path", required=True, help="metrics CSV from `run`")
@click.option("--out", "out_path", required=True, help="SVG file to write")
def plot(in_path: str, out_path: str) -> None:
    """Render a metrics CSV as an SVG (lambda vs. metric, log y)."""
    rows = read_metric_csv(Path(in_path))
    if not rows:
        raise click.ClickException(f"no rows in {in_path}")
    emit_plot(rows, Path(out_path))
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()

from xml.etree import ElementTree as ET

import pytest

from rcnes.experiments import (
    ExperimentGrid,
    MetricRow,
    RunRecord,
    append_record,
    auto_budget,
    emit_plot,
    read_metric_csv,
    read_records,
    run_experiment,
    run_trial,
    success_metric,
    timing_bench,
    write_csv,
    write_timing_csv,
)


def _record(lam, trial, evals, success, function="sphere", d=10):
    return RunRecord(
        function=function, d=d, lam=lam, trial=trial, seed=trial,
        evals_used=evals, best_fval=1e-12 if success else 1e-3,
        success=success, wall_time=0.01,
    )


SMALL_GRID = ExperimentGrid(
    function="sphere", d=6, lambdas=(8, 12), trials=2,
    target_fval=1e-10, max_evals=30_000, base_seed=11,
)


class TestRunExperiment:
    def test_budget_default(self):
        assert auto_budget(80) == 4_000_000
        assert ExperimentGrid("sphere", 80, (18,)).budget == 4_000_000

    def test_record_count(self, tmp_path):
        records = run_experiment(SMALL_GRID)
        assert len(records) == 4  # 2 lambdas x 2 trials
        assert {(r.lam, r.trial) for r in records} == {
            (8, 0), (8, 1), (12, 0), (12, 1)
        }

    def test_deterministic_rerun(self):
        a = run_experiment(SMALL_GRID)
        b = run_experiment(SMALL_GRID)
        assert [(r.evals_used, r.best_fval) for r in a] == [
            (r.evals_used, r.best_fval) for r in b
        ]

    def test_trial_seeding_rule(self):
        records = run_experiment(SMALL_GRID)
        for rec in records:
            assert rec.seed == SMALL_GRID.base_seed + rec.trial

    def test_resume_skips_done_cells(self, tmp_path):
        path = tmp_path / "records.csv"
        full = run_experiment(SMALL_GRID, records_path=path)
        assert len(read_records(path)) == 4
        # a second pass must not duplicate rows or recompute anything
        again = run_experiment(SMALL_GRID, records_path=path)
        assert len(read_records(path)) == 4
        assert [(r.lam, r.trial, r.evals_used) for r in again] == [
            (r.lam, r.trial, r.evals_used) for r in full
        ]

    def test_partial_resume(self, tmp_path):
        path = tmp_path / "records.csv"
        seeded = run_trial("sphere", 6, 8, seed=11, max_evals=30_000, trial=0)
        append_record(seeded, path)
        records = run_experiment(SMALL_GRID, records_path=path)
        assert len(records) == 4
        assert len(read_records(path)) == 4

    def test_sphere_default_lambda_succeeds(self):
        rec = run_trial("sphere", 10, 10, seed=0)
        assert rec.success
        assert rec.evals_used <= auto_budget(10)


class TestSuccessMetric:
    def test_partial_success_arithmetic(self):
        records = [_record(16, t, 5000, t < 8) for t in range(10)]
        row = success_metric(records)[0]
        assert row.success_rate == pytest.approx(0.8)
        assert row.mean_evals_success == pytest.approx(5000.0)
        assert row.sp_metric == pytest.approx(6250.0)

    def test_full_success_equals_mean(self):
        records = [_record(16, t, 4000 + 100 * t, True) for t in range(4)]
        row = success_metric(records)[0]
        assert row.success_rate == 1.0
        assert row.sp_metric == row.mean_evals_success

    def test_zero_success_absent_metric(self):
        records = [_record(16, t, 9999, False) for t in range(5)]
        row = success_metric(records)[0]
        assert row.success_rate == 0.0
        assert row.mean_evals_success is None
        assert row.sp_metric is None

    def test_metric_identity(self):
        records = [_record(8, t, 3000 + t, t % 3 != 0) for t in range(9)]
        for row in success_metric(records):
            if row.sp_metric is not None:
                assert row.sp_metric * row.success_rate == pytest.approx(
                    row.mean_evals_success, abs=1e-9
                )


class TestCsv:
    def test_round_trip(self, tmp_path):
        rows = [
            MetricRow("sphere", 10, 10, 10, 0.9, 4321.5, 4801.666666666667),
            MetricRow("sphere", 10, 20, 10, 0.0, None, None),
        ]
        path = tmp_path / "metrics.csv"
        write_csv(rows, path)
        text = path.read_text().splitlines()
        assert text[0] == (
            "function,d,lambda,trials,success_rate,mean_evals_success,sp_metric"
        )
        assert text[2].endswith(",,")  # absent metrics -> empty fields
        back = read_metric_csv(path)
        assert back[0].sp_metric == pytest.approx(rows[0].sp_metric, abs=1e-9)
        assert back[0].success_rate == pytest.approx(0.9, abs=1e-12)
        assert back[1].sp_metric is None

    def test_records_round_trip(self, tmp_path):
        path = tmp_path / "records.csv"
        rec = _record(8, 3, 1234, True)
        append_record(rec, path)
        back = read_records(path)[0]
        assert (back.lam, back.trial, back.evals_used, back.success) == (
            8, 3, 1234, True
        )
        assert back.best_fval == rec.best_fval


class TestPlot:
    def test_points_and_failures(self, tmp_path):
        rows = [
            MetricRow("sphere", 10, 10 + 2 * i, 10, 1.0, 4000.0 + i, 4000.0 + i)
            for i in range(5)
        ]
        rows.append(MetricRow("sphere", 10, 22, 10, 0.0, None, None))
        path = tmp_path / "plot.svg"
        emit_plot(rows, path)
        tree = ET.parse(path)  # well-formed XML or this raises
        ns = "{http://www.w3.org/2000/svg}"
        circles = tree.getroot().findall(f".//{ns}circle")
        failures = [
            el for el in tree.getroot().iter(f"{ns}path")
            if el.get("class") == "failure"
        ]
        assert len(circles) == 5
        assert len(failures) == 1

    def test_empty_input_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot([], tmp_path / "plot.svg")

    def test_all_failures_still_renders(self, tmp_path):
        rows = [MetricRow("sphere", 10, 10, 4, 0.0, None, None)]
        path = tmp_path / "plot.svg"
        emit_plot(rows, path)
        ET.parse(path)


class TestTiming:
    def test_rows_and_variance(self, tmp_path):
        rows = timing_bench([4, 8], lam=4, iterations=20, repeats=3)
        assert [r.d for r in rows] == [4, 8]
        for row in rows:
            assert row.mean_seconds > 0
            assert row.std_seconds >= 0
            assert row.repeats == 3
        path = tmp_path / "timing.csv"
        write_timing_csv(rows, path)
        header = path.read_text().splitlines()[0]
        assert header == "d,lambda,iterations,repeats,mean_seconds,std_seconds"

"""
test_runner.py — Experiment registry, run context and the runner's report files.
"""

import csv
import json

import pytest

from cbrw.errors import BudgetExceeded, LawError
from cbrw.experiments import (
    EXPERIMENT_KINDS,
    RunContext,
    Status,
    get_experiment_registry,
    parse_config,
    run_experiment,
)
from cbrw.experiments.runner import DETERMINISM_CRITERION, Experiment
from cbrw.experiments.suites.reduction import COLUMNS as REDUCTION_COLUMNS
from cbrw.snakes import stream_seed


@pytest.fixture
def qr_config():
    return parse_config(
        {
            "experiment": {"kind": "qr", "name": "ctx", "budget_seconds": 5},
            "solver": {"box_radius": 3},
            "monte_carlo": {"seed": 11, "max_tree_size": 1000, "far_radius": 12.0},
            "params": {"ratio_norm": 2.5},
            "criteria": {"q_agreement": 0.01},
        }
    )


@pytest.fixture
def ctx(qr_config, tmp_path):
    return RunContext(qr_config, 11, 1, tmp_path, ["x", "value"])


class TestRegistry:
    def test_every_kind_registered(self):
        """Importing the suites registers one experiment per kind."""
        registry = get_experiment_registry()
        assert sorted(registry.list()) == sorted(EXPERIMENT_KINDS)

    def test_metadata(self):
        exp = get_experiment_registry().get("reduction")
        assert exp.columns == REDUCTION_COLUMNS
        assert exp.criteria == (1,)
        assert exp.description.startswith("mu = delta_1")
        assert get_experiment_registry().get("mt9") is None


class TestRunContext:
    def test_laws_and_sets(self, ctx):
        assert ctx.d == 5
        assert ctx.mu.name == "binary"
        assert len(ctx.K) == 1
        assert ctx.box().radius == 3
        assert ctx.box(2).radius == 2

    def test_caps_from_config(self, ctx):
        assert ctx.caps.max_tree_size == 1000
        assert ctx.caps.far_radius == 12.0

    def test_params_and_tolerances(self, ctx):
        assert ctx.param("ratio_norm", 16.0) == 2.5
        assert ctx.param("q_range", [8.0, 32.0]) == [8.0, 32.0]
        assert ctx.tolerance("q_agreement", 0.05) == 0.01
        assert ctx.tolerance("q_slope", 0.35) == 0.35

    def test_streams(self, ctx):
        """Sampling steps draw from seeds derived from the base seed."""
        assert ctx.stream(0) == stream_seed(11, 1000)
        assert ctx.stream(0) != ctx.stream(1)
        assert ctx.rng(3).random() == ctx.rng(3).random()

    def test_rows_and_checks(self, ctx):
        ctx.add_row(x=1, value=0.5)
        with pytest.raises(KeyError):
            ctx.add_row(y=2)
        criterion = ctx.check(4, "ratio", False, 1.2, 0.05)
        assert criterion.status is Status.FAIL
        assert ctx.criteria == [criterion]
        assert ctx.results.column("value") == [0.5]

    def test_budget(self, ctx):
        """Twice the declared budget is the hard stop."""
        ctx.check_budget()
        ctx.started -= 11.0
        with pytest.raises(BudgetExceeded):
            ctx.check_budget()


def _fake(func, name="qr"):
    return Experiment(name, "stand-in", func, ["x", "value"], (1,))


class TestRunExperiment:
    """Report files are always written."""

    def test_files_and_status(self, qr_config, tmp_path, monkeypatch):
        def body(ctx):
            ctx.add_row(x=1, value=0.125)
            ctx.check(1, "always", True, 0.0, 1.0)

        registry = get_experiment_registry()
        monkeypatch.setattr(registry, "get", lambda name: _fake(body))
        report = run_experiment(qr_config, out=tmp_path, replay_check=True)
        assert report.passed and report.exit_code == 0
        out = tmp_path / "ctx"
        assert report.out_dir == out
        run = json.loads((out / "run.json").read_text())
        assert run["seed"] == 11 and run["threads"] == 1
        assert (out / "results.csv").read_text() == "x,value\n1,0.125\n"
        summary = json.loads((out / "summary.json").read_text())
        assert summary["status"] == "pass"
        assert [c["id"] for c in summary["criteria"]] == [1, DETERMINISM_CRITERION]

    def test_seed_override(self, qr_config, tmp_path, monkeypatch):
        seen = []
        registry = get_experiment_registry()
        monkeypatch.setattr(registry, "get", lambda name: _fake(lambda ctx: seen.append(ctx.seed)))
        run_experiment(qr_config, seed=99, out=tmp_path)
        assert seen == [99]

    def test_failed_criterion(self, qr_config, tmp_path, monkeypatch):
        registry = get_experiment_registry()
        monkeypatch.setattr(registry, "get", lambda name: _fake(lambda ctx: ctx.check(1, "never", False)))
        report = run_experiment(qr_config, out=tmp_path)
        assert report.status is Status.FAIL
        assert report.exit_code == 1

    def test_budget_status(self, qr_config, tmp_path, monkeypatch):
        def body(ctx):
            ctx.add_row(x=1, value=1.0)
            raise BudgetExceeded(20.0, 5.0)

        registry = get_experiment_registry()
        monkeypatch.setattr(registry, "get", lambda name: _fake(body))
        report = run_experiment(qr_config, out=tmp_path)
        assert report.status is Status.BUDGET
        assert "budget" in report.error
        assert (tmp_path / "ctx" / "results.csv").read_text().endswith("1,1\n")

    def test_error_flushes_outputs(self, qr_config, tmp_path, monkeypatch):
        """A library error propagates after summary.json is written."""

        def body(ctx):
            ctx.add_row(x=1, value=0.5)
            raise LawError("bad law")

        registry = get_experiment_registry()
        monkeypatch.setattr(registry, "get", lambda name: _fake(body))
        with pytest.raises(LawError):
            run_experiment(qr_config, out=tmp_path)
        summary = json.loads((tmp_path / "ctx" / "summary.json").read_text())
        assert summary["status"] == "error"
        assert "LawError" in summary["error"]


@pytest.mark.integration
@pytest.mark.slow
class TestReductionRun:
    """The degenerate-law experiment end to end on a small box."""

    def test_reduction(self, tmp_path):
        config = parse_config(
            {
                "experiment": {"kind": "reduction", "name": "reduction-small"},
                "laws": {"offspring": "delta1"},
                "solver": {"box_radius": 3, "method": "direct"},
                "params": {"sets": [[[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]], [[0, 0, 0, 0, 0], [0, 2, 0, 0, 0]]]},
            }
        )
        report = run_experiment(config, out=tmp_path, replay_check=True)
        assert report.passed, report.criteria
        with open(tmp_path / "reduction-small" / "results.csv") as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == REDUCTION_COLUMNS
        assert [int(row["size"]) for row in rows] == [2, 2]
        assert all(float(row["rel_err"]) < 0.02 for row in rows)

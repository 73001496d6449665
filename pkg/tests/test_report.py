"""
test_report.py — Result tables, criteria, summaries and power-law fits.
"""

import json

import numpy as np
import pytest

from cbrw.experiments import Criterion, FitError, ResultsTable, Status, fit_power_law
from cbrw.experiments.report import format_cell, package_versions, summarize, write_json


class TestFormatCell:
    def test_floats_round_trip(self):
        """17 significant digits reproduce the double exactly."""
        value = 0.1 + 0.2
        assert float(format_cell(value)) == value
        assert format_cell(np.float64(1.5)) == "1.5"

    def test_other_types(self):
        assert format_cell(None) == ""
        assert format_cell(True) == "true"
        assert format_cell(np.bool_(False)) == "false"
        assert format_cell(np.int64(7)) == "7"
        assert format_cell((1, 0, -2)) == "1 0 -2"
        assert format_cell("0,1") == "0,1"


class TestResultsTable:
    def test_write_csv(self, tmp_path):
        """Columns keep their order; missing cells are empty."""
        table = ResultsTable(["x", "p", "ok"])
        table.add(x=(1, 0), p=0.25, ok=True)
        table.add(x=(2, 0), p=None)
        path = tmp_path / "results.csv"
        table.write_csv(path)
        assert path.read_text() == "x,p,ok\n1 0,0.25,true\n2 0,,\n"
        assert table.column("p") == [0.25, None]

    def test_unknown_column(self):
        table = ResultsTable(["x"])
        with pytest.raises(KeyError):
            table.add(y=1)


class TestCriteria:
    def test_status(self):
        assert Criterion(1, "slope", True).status is Status.PASS
        assert Criterion(2, "plateau", False).status is Status.FAIL

    def test_to_json_converts_numpy(self):
        data = Criterion(3, "z", True, np.array([1.0, 2.0]), np.float64(0.5)).to_json()
        assert data["value"] == [1.0, 2.0]
        assert data["tolerance"] == 0.5
        assert data["status"] == "pass"

    def test_summary(self):
        """A run passes only with PASS status and every criterion passed."""
        good = [Criterion(1, "a", True)]
        assert summarize(good, Status.PASS, "desk")["passed"]
        assert not summarize(good + [Criterion(2, "b", False)], Status.PASS, "desk")["passed"]
        budget = summarize(good, Status.BUDGET, "acceptance", "budget exceeded")
        assert not budget["passed"]
        assert budget["scale"] == "acceptance"
        assert budget["error"] == "budget exceeded"

    def test_write_json(self, tmp_path):
        path = tmp_path / "summary.json"
        write_json(path, {"value": np.int64(3), "points": {(0, 1): np.array([2])}})
        assert json.loads(path.read_text()) == {"points": {"(0, 1)": [2]}, "value": 3}

    def test_package_versions(self):
        versions = package_versions()
        assert set(versions) >= {"numpy", "scipy", "numba", "pyyaml"}
        assert versions["numpy"] != "missing"


class TestFitPowerLaw:
    """Least squares in log-log coordinates."""

    def test_exact_power_law(self):
        pairs = [(r, 3.0 * r**-3) for r in (2.0, 4.0, 8.0, 16.0)]
        fit = fit_power_law(pairs)
        assert fit.slope == pytest.approx(-3.0)
        assert fit.prefactor == pytest.approx(3.0)
        assert fit.r2 == pytest.approx(1.0)
        assert fit.n_points == 4
        assert fit.slope_within(-3.1, 0.2)
        assert not fit.slope_within(-2.0, 0.5)

    def test_noisy_data(self):
        rng = np.random.default_rng(0)
        scales = np.linspace(4.0, 32.0, 12)
        values = scales**-2.0 * np.exp(rng.normal(0.0, 0.01, scales.size))
        fit = fit_power_law(zip(scales, values))
        assert fit.slope == pytest.approx(-2.0, abs=0.05)
        assert fit.stderr > 0.0
        assert set(fit.to_json()) == {"slope", "intercept", "stderr", "r2", "n_points"}

    @pytest.mark.parametrize(
        "pairs",
        [
            [],
            [(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)],
            [(0.0, 1.0), (2.0, 0.5), (3.0, 0.3), (4.0, 0.2)],
            [(1.0, 1.0), (2.0, 0.0), (3.0, 0.3), (4.0, 0.2)],
            [(2.0, 1.0), (2.0, 0.5), (2.0, 0.3), (2.0, 0.2)],
        ],
    )
    def test_invalid(self, pairs):
        with pytest.raises(FitError):
            fit_power_law(pairs)

"""
test_suites.py — Every experiment suite runs end to end on a tiny box.

Runs are too small for the criteria to pass; they check that each suite
finishes, reports every criterion it registers, and writes its columns.
"""

import csv
import json

import pytest

from cbrw.experiments import get_experiment_registry, parse_config, run_experiment

FAST_MC = {"n_samples": 200, "seed": 7, "max_tree_size": 100_000}

SMOKE_CONFIGS = {
    "mt1": {
        "target": {"kind": "points", "points": [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]]},
        "solver": {"box_radius": 4},
        "sites": [[3, 0, 0, 0, 0], [0, 3, 0, 0, 0]],
        "params": {"fit_range": [1.0, 4.0], "plateau_range": [3.0, 4.0]},
    },
    "qr": {
        "solver": {"box_radius": 5},
        "params": {"ratio_norm": 3.0, "q_range": [1.0, 4.0]},
    },
    "mt2": {
        "params": {
            "set_ball_radius": 1.0,
            "pairs": 1,
            "max_set_size": 3,
            "set_margin": 2,
            "radii": [1, 1.5, 2, 2.5],
            "ball_margin": 2,
            "slabs": False,
        },
    },
    "bd-finite": {
        "params": {
            "set_ball_radius": 1.0,
            "sets": 1,
            "sites_per_set": 2,
            "max_set_size": 2,
            "site_reach": 2,
            "margin": 2,
        },
    },
    "mt5": {
        "params": {"ball_radii": [1], "sets": 2, "set_ball_radius": 1.0, "margin": 2},
    },
    "halfline": {
        "laws": {"dimension": 1, "offspring": "binary", "jump": "pm1"},
        "params": {
            "xmax": 64,
            "generations": 5000,
            "sup_range": [4, 32],
            "flat_range": [8, 32],
            "x_check": 128,
        },
    },
    "entering": {
        "monte_carlo": {**FAST_MC, "n_samples": 20_000},
        "params": {
            "entering_set": [[0], [1]],
            "norms": [3, 4],
            "min_accepted": 10,
            "hm_samples": 2000,
            "margin": 3,
        },
    },
    "reduction": {
        "laws": {"offspring": "delta1"},
        "solver": {"box_radius": 3},
        "params": {"sets": [[[0, 0, 0, 0, 0]], [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]]]},
    },
    "green-ratio": {
        "solver": {"box_radius": 4},
        "params": {"identity_radius": 2, "far_norm": 2.0},
    },
}


def smoke_config(kind: str):
    raw = {
        "experiment": {"kind": kind, "name": f"smoke-{kind}", "budget_seconds": 900},
        "monte_carlo": dict(FAST_MC),
    }
    raw.update(SMOKE_CONFIGS[kind])
    raw.setdefault("solver", {})
    raw["solver"] = {"bracket": False, **raw["solver"]}
    return parse_config(raw)


def read_rows(path):
    with open(path) as f:
        reader = csv.DictReader(f)
        return reader.fieldnames, list(reader)


def test_every_suite_has_a_smoke_config():
    assert sorted(SMOKE_CONFIGS) == sorted(get_experiment_registry().list())


@pytest.mark.slow
@pytest.mark.integration
@pytest.mark.parametrize("kind", sorted(SMOKE_CONFIGS))
def test_suite_reports_its_criteria(kind, tmp_path):
    exp = get_experiment_registry().get(kind)
    report = run_experiment(smoke_config(kind), out=tmp_path, threads=1)

    assert report.error is None
    summary = json.loads((tmp_path / f"smoke-{kind}" / "summary.json").read_text())
    assert {c["id"] for c in summary["criteria"]} == set(exp.criteria)
    assert summary["status"] in ("pass", "fail")

    header, rows = read_rows(tmp_path / f"smoke-{kind}" / "results.csv")
    assert header == list(exp.columns)
    assert rows


@pytest.mark.slow
@pytest.mark.integration
def test_green_ratio_rows(tmp_path):
    """Pair ratios divide the killed column by the free Green function."""
    run_experiment(smoke_config("green-ratio"), out=tmp_path, threads=1)
    _, rows = read_rows(tmp_path / "smoke-green-ratio" / "results.csv")
    parts = {row["part"] for row in rows}
    assert {"identity", "calibration", "column", "ratio"} <= parts
    for row in rows:
        if row["part"] == "ratio":
            expected = float(row["green_killed"]) / float(row["green_plain"])
            assert float(row["ratio"]) == pytest.approx(expected, rel=1e-6)
            assert float(row["green_killed"]) <= float(row["green_box"]) * (1 + 1e-9)
        if row["part"] == "column":
            assert float(row["ratio"]) <= 1.0 + 1e-4

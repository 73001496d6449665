"""
Experiment outputs: run.json (config echo, environment, seeds), results.csv
(one row per measurement) and summary.json (one entry per criterion).

Floats in results.csv are written with 17 significant digits so a replay
with the same seed can be compared byte-for-byte.
"""

from __future__ import annotations

import csv
import json
import platform
import sys
from dataclasses import dataclass, field
from enum import Enum
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import numpy as np

FLOAT_FORMAT = "{:.17g}"
STACK = ("numpy", "scipy", "numba", "sympy", "pyyaml", "pyhumps", "termcolor")


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    BUDGET = "budget"
    ERROR = "error"


@dataclass
class Criterion:
    id: int
    name: str
    passed: bool
    value: Any = None
    tolerance: Any = None
    detail: str = ""

    @property
    def status(self) -> Status:
        return Status.PASS if self.passed else Status.FAIL

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "status": self.status.value,
            "value": _jsonable(self.value),
            "tolerance": _jsonable(self.tolerance),
            "detail": self.detail,
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT.format(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return " ".join(format_cell(v) for v in value)
    return str(value)


@dataclass
class ResultsTable:
    """Rows of one experiment with a fixed column order."""

    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)

    def add(self, **row: Any) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown result columns {sorted(unknown)}")
        self.rows.append(row)

    def column(self, name: str) -> list[Any]:
        return [row.get(name) for row in self.rows]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([format_cell(row.get(c)) for c in self.columns])


def package_versions() -> dict[str, str]:
    out = {}
    for name in STACK:
        try:
            out[name] = version(name)
        except PackageNotFoundError:
            out[name] = "missing"
    return out


def environment() -> dict[str, Any]:
    return {
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "packages": package_versions(),
    }


def write_json(path: str | Path, data: dict[str, Any]) -> None:
    with open(path, "w") as f:
        json.dump(_jsonable(data), f, indent=2, sort_keys=True)
        f.write("\n")


def summarize(criteria: list[Criterion], status: Status, scale: str, error: str | None = None) -> dict[str, Any]:
    return {
        "status": status.value,
        "scale": scale,
        "passed": all(c.passed for c in criteria) and status is Status.PASS,
        "criteria": [c.to_json() for c in criteria],
        "error": error,
    }

"""
Experiment registry and runner.

Experiments register with the @experiment decorator and receive a RunContext
holding the parsed config, seeds, thread count, budget clock and the result
table. The runner writes run.json before starting and always flushes
results.csv and summary.json, also when the experiment fails part-way.
"""

from __future__ import annotations

import filecmp
import logging
import tempfile
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np

from cbrw.errors import BudgetExceeded, CbrwError
from cbrw.experiments.config import ExperimentConfig
from cbrw.experiments.report import (
    Criterion,
    ResultsTable,
    Status,
    environment,
    summarize,
    write_json,
)
from cbrw.lattice import Box, SetK, origin
from cbrw.laws import JumpLaw, OffspringLaw
from cbrw.snakes import Caps, resolve_threads, stream_seed

logger = logging.getLogger(__name__)

DETERMINISM_CRITERION = 15


@dataclass
class Experiment:
    """Experiment metadata and implementation."""

    name: str
    description: str
    func: Callable[[RunContext], None]
    columns: list[str]
    criteria: tuple[int, ...] = ()


class ExperimentRegistry:
    """Registry of available experiments."""

    def __init__(self) -> None:
        self._experiments: dict[str, Experiment] = {}

    def register(self, exp: Experiment) -> None:
        self._experiments[exp.name] = exp

    def get(self, name: str) -> Experiment | None:
        return self._experiments.get(name)

    def list(self) -> list[str]:
        return list(self._experiments.keys())

    def all(self) -> dict[str, Experiment]:
        return dict(self._experiments)


_registry: ExperimentRegistry | None = None


def get_experiment_registry() -> ExperimentRegistry:
    """Get the global experiment registry (suites are imported on first use)."""
    global _registry
    if _registry is None:
        _registry = ExperimentRegistry()
        import cbrw.experiments.suites  # noqa: F401
    return _registry


def experiment(
    name: str,
    columns: list[str],
    criteria: tuple[int, ...] = (),
) -> Callable[[Callable[[RunContext], None]], Callable[[RunContext], None]]:
    """Decorator to register a function as an experiment."""

    def register(func: Callable[[RunContext], None]) -> Callable[[RunContext], None]:
        description = (func.__doc__ or "").strip().splitlines()
        exp = Experiment(name, description[0] if description else "", func, list(columns), tuple(criteria))
        registry = _registry if _registry is not None else get_experiment_registry()
        registry.register(exp)
        func._experiment = exp  # type: ignore[attr-defined]
        return func

    return register


class RunContext:
    """Everything one experiment run needs, plus what it produced."""

    def __init__(
        self,
        config: ExperimentConfig,
        seed: int,
        threads: int,
        out_dir: Path,
        columns: list[str],
    ):
        self.config = config
        self.seed = int(seed)
        self.threads = threads
        self.out_dir = out_dir
        self.results = ResultsTable(columns)
        self.criteria: list[Criterion] = []
        self.extra: dict[str, Any] = {}
        self.started = time.monotonic()

    # -- laws and sets ------------------------------------------------------

    @cached_property
    def mu(self) -> OffspringLaw:
        return self.config.laws.offspring_law()

    @cached_property
    def theta(self) -> JumpLaw:
        return self.config.laws.jump_law()

    @cached_property
    def K(self) -> SetK:
        return self.config.target.build(self.config.laws.dimension, self.theta.Q)

    @property
    def d(self) -> int:
        return self.config.laws.dimension

    def box(self, radius: int | None = None) -> Box:
        return Box(origin(self.d), self.config.solver.box_radius if radius is None else radius)

    @cached_property
    def caps(self) -> Caps:
        mc = self.config.monte_carlo
        return Caps(
            max_tree_size=mc.max_tree_size,
            max_spine_steps=mc.max_spine_steps,
            far_radius=mc.far_radius,
        )

    def param(self, name: str, default: Any) -> Any:
        return self.config.params.get(name, default)

    def stream(self, i: int) -> int:
        """Seed for the i-th independent sampling step of this run."""
        return stream_seed(self.seed, 1000 + i)

    def rng(self, i: int) -> np.random.Generator:
        return np.random.default_rng(self.stream(i))

    # -- budget -------------------------------------------------------------

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self.started

    def check_budget(self) -> None:
        budget = self.config.experiment.budget_seconds
        if self.elapsed > 2 * budget:
            raise BudgetExceeded(self.elapsed, budget)

    # -- outputs ------------------------------------------------------------

    def add_row(self, **row: Any) -> None:
        self.results.add(**row)

    def tolerance(self, name: str, default: float) -> float:
        return self.config.criteria.get(name, default)

    def check(
        self,
        id: int,
        name: str,
        passed: bool,
        value: Any = None,
        tolerance: Any = None,
        detail: str = "",
    ) -> Criterion:
        criterion = Criterion(id, name, bool(passed), value, tolerance, detail)
        self.criteria.append(criterion)
        log = logger.info if criterion.passed else logger.warning
        log(f"criterion {id} {name}: {criterion.status.value.upper()} (value {value}, tolerance {tolerance})")
        return criterion


@dataclass
class RunReport:
    name: str
    status: Status
    criteria: list[Criterion]
    out_dir: Path
    elapsed: float
    error: str | None = None
    files: list[Path] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS and all(c.passed for c in self.criteria)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def _execute(config: ExperimentConfig, exp: Experiment, seed: int, threads: int, out_dir: Path) -> RunContext:
    """Run once into out_dir; re-raises module errors after flushing outputs."""
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(
        out_dir / "run.json",
        {"config": config.to_json(), "environment": environment(), "seed": seed, "threads": threads},
    )
    ctx = RunContext(config, seed, threads, out_dir, exp.columns)
    status = Status.PASS
    error: str | None = None
    try:
        exp.func(ctx)
    except BudgetExceeded as e:
        status, error = Status.BUDGET, str(e)
        logger.warning(f"{config.name}: {e}")
    except CbrwError as e:
        status, error = Status.ERROR, f"{type(e).__name__}: {e}"
        raise
    finally:
        if status is Status.PASS and not all(c.passed for c in ctx.criteria):
            status = Status.FAIL
        ctx.results.write_csv(out_dir / "results.csv")
        ctx.extra["status"] = status
        ctx.extra["error"] = error
        write_json(out_dir / "summary.json", summarize(ctx.criteria, status, config.experiment.scale, error))
    return ctx


def run_experiment(
    config: ExperimentConfig,
    seed: int | None = None,
    out: str | Path | None = None,
    threads: int | None = None,
    replay_check: bool = False,
) -> RunReport:
    """Run the experiment named by config.kind and write its report files."""
    exp = get_experiment_registry().get(config.kind)
    if exp is None:
        raise CbrwError(f"no experiment registered for kind '{config.kind}'")
    seed = config.monte_carlo.seed if seed is None else int(seed)
    threads = resolve_threads(threads if threads is not None else config.monte_carlo.threads)
    out_dir = Path(out if out is not None else config.experiment.output_dir) / config.name
    logger.info(f"running {config.name} ({exp.name}) seed={seed} threads={threads} -> {out_dir}")

    ctx = _execute(config, exp, seed, threads, out_dir)
    status: Status = ctx.extra["status"]

    if replay_check and status is not Status.BUDGET:
        with tempfile.TemporaryDirectory(prefix="cbrw-replay-") as tmp:
            replay = _execute(config, exp, seed, threads, Path(tmp))
            same = filecmp.cmp(out_dir / "results.csv", Path(tmp) / "results.csv", shallow=False)
        ctx.check(DETERMINISM_CRITERION, "replay reproduces results.csv", same, detail=f"replay {replay.elapsed:.1f}s")
        if not same and status is Status.PASS:
            status = Status.FAIL
        write_json(out_dir / "summary.json", summarize(ctx.criteria, status, config.experiment.scale, ctx.extra["error"]))

    report = RunReport(
        name=config.name,
        status=status,
        criteria=ctx.criteria,
        out_dir=out_dir,
        elapsed=ctx.elapsed,
        error=ctx.extra["error"],
        files=[out_dir / "run.json", out_dir / "results.csv", out_dir / "summary.json"],
    )
    logger.info(f"{config.name}: {status.value} in {report.elapsed:.1f}s")
    return report

"""
Experiment configuration loader.

Loads and validates experiment YAML files (JSON is accepted unchanged).
Keys are normalised to snake_case, so boxRadius, box-radius and box_radius
name the same setting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import humps
import numpy as np
import yaml

from cbrw.errors import CbrwError, LatticeError, LawError
from cbrw.lattice import BallKind, SetK, ball
from cbrw.laws import JumpLaw, OffspringLaw, get_jump_law, get_offspring_law

EXPERIMENT_KINDS = (
    "mt1",
    "qr",
    "mt2",
    "bd-finite",
    "mt5",
    "halfline",
    "entering",
    "reduction",
    "green-ratio",
)
HALFLINE_KINDS = ("halfline",)
TARGET_KINDS = ("origin", "points", "ball", "slab")
SCALES = ("desk", "acceptance")
ACCEPTANCE_SAMPLES = 1_000_000


class ConfigError(CbrwError):
    """Configuration validation error."""


@dataclass
class ExperimentMeta:
    name: str
    kind: str
    description: str = ""
    budget_seconds: float = 600.0
    output_dir: str = "runs"
    scale: str = "desk"  # desk | acceptance, echoed in summary.json


@dataclass
class LawSpec:
    dimension: int = 5
    offspring: Any = "binary"
    jump: Any = "srw"

    def offspring_law(self) -> OffspringLaw:
        return get_offspring_law(self.offspring)

    def jump_law(self) -> JumpLaw:
        return get_jump_law(self.jump, self.dimension)


@dataclass
class TargetSpec:
    kind: str = "origin"
    points: list[list[int]] = field(default_factory=list)
    radius: float = 0.0
    m: int | None = None

    def build(self, d: int, Q: np.ndarray | None = None) -> SetK:
        if self.kind == "origin":
            return SetK.single([0] * d)
        if self.kind == "points":
            return SetK.of(self.points)
        if self.kind == "slab":
            return ball(BallKind.SLAB, self.radius, m=self.m, d=d)
        return ball(BallKind.THETA_NORM, self.radius, d=d, Q=Q)


@dataclass
class SolverSettings:
    box_radius: int = 8
    tol: float = 1e-10
    method: str = "sweep"  # linear solves: sweep | direct | krylov
    nonlinear: str = "picard"  # picard | newton-krylov
    bracket: bool = True


@dataclass
class MonteCarloSettings:
    n_samples: int = 20_000
    seed: int = 20240501
    threads: int | None = None
    max_tree_size: int = 10_000_000
    max_spine_steps: int = 1_000_000
    far_radius: float | None = None


@dataclass
class Criteria:
    """Tolerance overrides by name; defaults live with each experiment."""

    tolerances: dict[str, float] = field(default_factory=dict)

    def get(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


@dataclass
class ExperimentConfig:
    experiment: ExperimentMeta
    laws: LawSpec = field(default_factory=LawSpec)
    target: TargetSpec = field(default_factory=TargetSpec)
    solver: SolverSettings = field(default_factory=SolverSettings)
    monte_carlo: MonteCarloSettings = field(default_factory=MonteCarloSettings)
    sites: list[list[int]] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)
    criteria: Criteria = field(default_factory=Criteria)

    @property
    def name(self) -> str:
        return self.experiment.name

    @property
    def kind(self) -> str:
        return self.experiment.kind

    def to_json(self) -> dict[str, Any]:
        return {
            "experiment": vars(self.experiment),
            "laws": vars(self.laws),
            "target": vars(self.target),
            "solver": vars(self.solver),
            "monte_carlo": vars(self.monte_carlo),
            "sites": self.sites,
            "params": self.params,
            "criteria": self.criteria.tolerances,
        }


def normalize_keys(raw: Any) -> Any:
    """snake_case every string key of nested mappings; other keys are left alone."""
    if isinstance(raw, dict):
        out = {}
        for key, value in raw.items():
            if isinstance(key, str):
                key = humps.decamelize(humps.dekebabize(key))
            out[key] = normalize_keys(value)
        return out
    if isinstance(raw, list):
        return [normalize_keys(v) for v in raw]
    return raw


def _section(raw: dict[str, Any], name: str) -> dict[str, Any]:
    value = raw.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a mapping, got {type(value).__name__}")
    return value


def _build(cls: type, raw: dict[str, Any], path: str) -> Any:
    known = set(cls.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    try:
        return cls(**raw)
    except TypeError as e:
        raise ConfigError(f"{path}: {e}") from e


def _number(value: Any, path: str) -> float:
    """YAML 1.1 reads 1e-10 (no dot) as a string; accept it as a number."""
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a number, got {value!r}") from None


def _point_list(value: Any, path: str, d: int) -> list[list[int]]:
    if not isinstance(value, list):
        raise ConfigError(f"{path} must be a list of points")
    points = []
    for i, p in enumerate(value):
        if not isinstance(p, list) or len(p) != d or not all(isinstance(c, int) for c in p):
            raise ConfigError(f"{path}[{i}] must be a list of {d} integers")
        points.append(list(p))
    return points


def parse_config(raw: Any) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from a decoded document."""
    if not isinstance(raw, dict):
        raise ConfigError(f"Config must be a YAML mapping, got {type(raw).__name__}")
    raw = normalize_keys(raw)

    meta_raw = _section(raw, "experiment")
    if not meta_raw.get("kind"):
        raise ConfigError("experiment.kind is required")
    if meta_raw["kind"] not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment.kind '{meta_raw['kind']}' unknown; expected one of {EXPERIMENT_KINDS}")
    meta_raw.setdefault("name", meta_raw["kind"])
    meta = _build(ExperimentMeta, meta_raw, "experiment")
    meta.budget_seconds = _number(meta.budget_seconds, "experiment.budget_seconds")
    if meta.budget_seconds <= 0:
        raise ConfigError("experiment.budget_seconds must be positive")
    if meta.scale not in SCALES:
        raise ConfigError(f"experiment.scale '{meta.scale}' unknown; expected one of {SCALES}")

    laws = _build(LawSpec, _section(raw, "laws"), "laws")
    d = laws.dimension
    if meta.kind in HALFLINE_KINDS:
        if d != 1:
            raise ConfigError(f"laws.dimension must be 1 for {meta.kind}, got {d}")
    elif d < 5:
        raise ConfigError(f"laws.dimension must be at least 5, got {d}")
    try:
        laws.offspring_law()
    except LawError as e:
        raise ConfigError(f"laws.offspring: {e}") from e
    try:
        theta = laws.jump_law()
    except LawError as e:
        raise ConfigError(f"laws.jump: {e}") from e

    target = _build(TargetSpec, _section(raw, "target"), "target")
    target.radius = _number(target.radius, "target.radius")
    if target.kind not in TARGET_KINDS:
        raise ConfigError(f"target.kind '{target.kind}' unknown; expected one of {TARGET_KINDS}")
    if target.kind == "points":
        target.points = _point_list(target.points, "target.points", d)
    if meta.kind not in HALFLINE_KINDS:
        try:
            target.build(d, theta.Q)
        except LatticeError as e:
            raise ConfigError(f"target: {e}") from e

    solver = _build(SolverSettings, _section(raw, "solver"), "solver")
    solver.tol = _number(solver.tol, "solver.tol")
    if solver.tol <= 0:
        raise ConfigError("solver.tol must be positive")
    if solver.box_radius < 1:
        raise ConfigError("solver.box_radius must be at least 1")
    if solver.method not in ("sweep", "direct", "krylov"):
        raise ConfigError(f"solver.method '{solver.method}' unknown")
    if solver.nonlinear not in ("picard", "newton-krylov"):
        raise ConfigError(f"solver.nonlinear '{solver.nonlinear}' unknown")

    mc = _build(MonteCarloSettings, _section(raw, "monte_carlo"), "monte_carlo")
    if mc.n_samples < 1:
        raise ConfigError("monte_carlo.n_samples must be at least 1")
    if mc.seed < 0:
        raise ConfigError("monte_carlo.seed must be nonnegative")

    sites = _point_list(raw.get("sites") or [], "sites", d)
    params = _section(raw, "params")
    criteria_raw = _section(raw, "criteria")
    try:
        criteria = Criteria({str(k): float(v) for k, v in criteria_raw.items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"criteria: tolerances must be numbers ({e})") from e
    return ExperimentConfig(meta, laws, target, solver, mc, sites, params, criteria)


def load_config(path: str | Path) -> ExperimentConfig:
    """Load and validate an experiment configuration from a YAML file."""
    with open(path) as f:
        raw = yaml.safe_load(f)
    return parse_config(raw)


def validate_config(config: ExperimentConfig) -> list[str]:
    """
    Check a parsed config for settings that will run but mislead.

    Returns list of warning messages (empty if nothing stands out).
    """
    warnings = []
    radius = config.solver.box_radius
    if config.kind not in HALFLINE_KINDS:
        theta = config.laws.jump_law()
        K = config.target.build(config.laws.dimension, theta.Q)
        reach = int(np.max(np.abs(K.array)))
        if reach + 2 > radius:
            warnings.append(f"target reaches {reach}, leaving under 2 sites of margin in box radius {radius}")
        for site in config.sites:
            if max(abs(c) for c in site) > radius:
                warnings.append(f"site {site} lies outside the solver box of radius {radius}")
        cells = (2 * radius + 1) ** config.laws.dimension
        if cells > 50_000_000:
            warnings.append(f"box has {cells:,} sites; each field needs {cells * 8 / 2**30:.1f} GiB")
    if config.monte_carlo.n_samples < ACCEPTANCE_SAMPLES and config.kind in ("mt1", "entering"):
        warnings.append(
            f"monte_carlo.n_samples = {config.monte_carlo.n_samples} is below the acceptance scale "
            f"({ACCEPTANCE_SAMPLES:,})"
        )
    if config.laws.offspring == "delta1" and config.kind not in ("reduction", "entering", "green-ratio"):
        warnings.append("degenerate offspring law: branching quantities reduce to random-walk ones")
    return warnings

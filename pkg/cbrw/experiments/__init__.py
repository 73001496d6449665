"""Reproducible experiments: configs, the runner, reports and power-law fits."""

from cbrw.experiments.config import (
    EXPERIMENT_KINDS,
    ConfigError,
    ExperimentConfig,
    load_config,
    parse_config,
    validate_config,
)
from cbrw.experiments.fitting import FitError, FitResult, fit_power_law
from cbrw.experiments.report import Criterion, ResultsTable, Status
from cbrw.experiments.runner import (
    RunContext,
    RunReport,
    experiment,
    get_experiment_registry,
    run_experiment,
)
from cbrw.experiments.template import create_experiment_template, default_config

__all__ = [
    "EXPERIMENT_KINDS",
    "ConfigError",
    "Criterion",
    "ExperimentConfig",
    "FitError",
    "FitResult",
    "ResultsTable",
    "RunContext",
    "RunReport",
    "Status",
    "create_experiment_template",
    "default_config",
    "experiment",
    "fit_power_law",
    "get_experiment_registry",
    "load_config",
    "parse_config",
    "run_experiment",
    "validate_config",
]

"""
cbrw CLI entry point.

Usage:
    cbrw <kind> [--config PATH] [--seed N] [--out DIR] [--threads N]
                                        Run one experiment (mt1, qr, mt2, ...)
    cbrw all [--seed N] [--out DIR]     Run every experiment with its defaults
    cbrw init <kind> [-o PATH] [--scale acceptance]
                                        Write a starter config
    cbrw check <config.yaml>            Validate a config and print warnings
    cbrw list                           Show registered experiments
    cbrw version                        Show version and numerical stack
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from termcolor import colored

from cbrw.errors import CbrwError
from cbrw.experiments.config import (
    EXPERIMENT_KINDS,
    SCALES,
    ConfigError,
    ExperimentConfig,
    load_config,
    validate_config,
)
from cbrw.experiments.report import Status

if TYPE_CHECKING:
    from cbrw.experiments.runner import RunReport

STATUS_COLORS = {
    Status.PASS: "green",
    Status.FAIL: "red",
    Status.BUDGET: "yellow",
    Status.ERROR: "red",
}


def _config_for(kind: str, path: str | None, scale: str = "desk") -> ExperimentConfig:
    from cbrw.experiments.template import default_config

    if path is None:
        return default_config(kind, scale=scale)
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")
    config = load_config(config_path)
    if config.kind != kind:
        raise ConfigError(f"{config_path} configures '{config.kind}', not '{kind}'")
    return config


def _print_report(report: RunReport) -> None:
    label = colored(report.status.value.upper(), STATUS_COLORS[report.status], attrs=["bold"])
    print(f"{report.name}: {label} ({report.elapsed:.1f}s) -> {report.out_dir}")
    for c in report.criteria:
        mark = colored("PASS", "green") if c.passed else colored("FAIL", "red")
        print(f"  [{mark}] {c.id:>2} {c.name}: {c.value} (tolerance {c.tolerance})")
    if report.error:
        print(f"  {colored(report.error, 'red')}")


def cmd_run(args: argparse.Namespace) -> int:
    """Run one experiment."""
    from cbrw.experiments.runner import run_experiment

    try:
        config = _config_for(args.kind, args.config, args.scale)
        for warning in validate_config(config):
            print(colored(f"Warning: {warning}", "yellow"), file=sys.stderr)
        report = run_experiment(config, seed=args.seed, out=args.out, threads=args.threads,
                                replay_check=args.replay_check)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return 2
    except CbrwError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    _print_report(report)
    return report.exit_code


def cmd_all(args: argparse.Namespace) -> int:
    """Run every experiment kind with its built-in defaults."""
    from cbrw.experiments.runner import run_experiment
    from cbrw.experiments.template import default_config

    failed = []
    for kind in EXPERIMENT_KINDS:
        try:
            config = default_config(kind, scale=args.scale)
            report = run_experiment(config, seed=args.seed, out=args.out, threads=args.threads,
                                    replay_check=args.replay_check)
        except CbrwError as e:
            print(f"{kind}: {colored('ERROR', 'red', attrs=['bold'])} {e}", file=sys.stderr)
            failed.append(kind)
            continue
        _print_report(report)
        if not report.passed:
            failed.append(kind)
    print()
    if failed:
        print(colored(f"{len(failed)} of {len(EXPERIMENT_KINDS)} experiments did not pass: {', '.join(failed)}", "red"))
        return 1
    print(colored(f"all {len(EXPERIMENT_KINDS)} experiments passed", "green"))
    return 0


def cmd_init(args: argparse.Namespace) -> int:
    """Write a starter config for one experiment kind."""
    from cbrw.experiments.template import create_experiment_template

    name = args.name or args.kind
    output = Path(args.output or f"{name}.yaml")
    if output.exists() and not args.force:
        print(f"Error: {output} already exists. Use --force to overwrite.", file=sys.stderr)
        return 1
    output.write_text(create_experiment_template(args.kind, name, args.scale))
    print(f"Created {output}")
    print("\nNext steps:")
    if args.scale == "desk":
        print(f"  1. Edit {output} (acceptance values are in the comments, or use --scale acceptance)")
    else:
        print(f"  1. Review {output}")
    print(f"  2. Check it: cbrw check {output}")
    print(f"  3. Run: cbrw {args.kind} --config {output}")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    """Validate a config without running it."""
    config_path = Path(args.config)
    if not config_path.exists():
        print(f"Error: Config file not found: {config_path}", file=sys.stderr)
        return 1
    try:
        config = load_config(config_path)
        warnings = validate_config(config)
    except ConfigError as e:
        print(f"Config error: {e}", file=sys.stderr)
        return 1
    except CbrwError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    print(f"Config valid: {config.name} ({config.kind})")
    print(f"  Laws: d={config.laws.dimension}, offspring={config.laws.offspring}, jump={config.laws.jump}")
    print(f"  Solver box radius: {config.solver.box_radius}")
    print(f"  Monte Carlo samples: {config.monte_carlo.n_samples}")
    if warnings:
        print("\nWarnings:")
        for warning in warnings:
            print(colored(f"  {warning}", "yellow"))
    return 0


def cmd_list(args: argparse.Namespace) -> int:
    """Show registered experiments and the criteria they check."""
    from cbrw.experiments.runner import get_experiment_registry

    for name, exp in get_experiment_registry().all().items():
        criteria = ", ".join(str(c) for c in exp.criteria)
        print(f"  {colored(name, 'cyan'):<24} [{criteria}] {exp.description}")
    return 0


def cmd_version(args: argparse.Namespace) -> int:
    """Show version and numerical stack."""
    from cbrw import __version__
    from cbrw.experiments.report import package_versions

    print(f"cbrw {__version__}")
    print()
    print("Numerical stack:")
    for package, version in package_versions().items():
        print(f"  {package}: {version}")
    return 0


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="Base seed (default: monte_carlo.seed)")
    parser.add_argument("--out", help="Output directory (default: experiment.output_dir)")
    parser.add_argument("--threads", type=int, help="Sampling threads (default: CBRW_THREADS, then 1)")
    parser.add_argument("--replay-check", action="store_true", help="Rerun and compare results.csv")
    parser.add_argument("--scale", choices=SCALES, default="desk", help="Template scale without --config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbrw",
        description="Critical branching random walk: visiting probabilities and branching capacity",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for kind in EXPERIMENT_KINDS:
        run_parser = subparsers.add_parser(kind, help=f"Run the {kind} experiment")
        run_parser.add_argument("--config", help="Experiment config (default: built-in template)")
        _add_run_flags(run_parser)
        run_parser.set_defaults(func=cmd_run, kind=kind)

    # all
    all_parser = subparsers.add_parser("all", help="Run every experiment with its defaults")
    _add_run_flags(all_parser)
    all_parser.set_defaults(func=cmd_all)

    # init
    init_parser = subparsers.add_parser("init", help="Create a starter config")
    init_parser.add_argument("kind", choices=EXPERIMENT_KINDS, help="Experiment kind")
    init_parser.add_argument("name", nargs="?", help="Experiment name")
    init_parser.add_argument("-o", "--output", help="Output file path")
    init_parser.add_argument("--scale", choices=SCALES, default="desk", help="Template scale")
    init_parser.add_argument("-f", "--force", action="store_true", help="Overwrite existing")
    init_parser.set_defaults(func=cmd_init)

    # check
    check_parser = subparsers.add_parser("check", help="Validate config")
    check_parser.add_argument("config", help="Config file")
    check_parser.set_defaults(func=cmd_check)

    # list
    list_parser = subparsers.add_parser("list", help="Show registered experiments")
    list_parser.set_defaults(func=cmd_list)

    # version
    version_parser = subparsers.add_parser("version", help="Show version info")
    version_parser.set_defaults(func=cmd_version)
    return parser


def main(argv: list[str] | None = None) -> int:
    """CLI entry point."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger("cbrw").setLevel(logging.DEBUG if args.verbose else logging.INFO)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

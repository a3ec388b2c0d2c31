"""
Property-check commands: bellman, schur and carleson.

Each command runs one or more seeded suites, prints a summary table and exits
1 if any trial violated its inequality.
"""

from typing import List, Optional, Sequence, Tuple

import click

from ..core.carleson import EMBEDDING_CONSTANT
from ..core.fuzz import MODULE_CHECKS
from ..core.models import ExperimentConfig, Subcommand
from ..core.suite import Suite
from .common import (
    check_dimension,
    command_errors,
    console,
    finish,
    orchestrator,
    print_ratio_by_dim,
    print_reports,
    run_with_progress,
    write_artifacts,
)


def _selected(module: str, check: Optional[str]) -> List[Suite]:
    checks = MODULE_CHECKS[module]
    names: Sequence[str] = [check] if check else list(checks)
    suites: List[Suite] = []
    for name in names:
        for suite in checks[name]:
            if suite not in suites:
                suites.append(suite)
    return suites


def _common_options(func):
    for option in reversed(
        (
            click.option("--trials", type=int, default=100, show_default=True, help="Number of trials"),
            click.option("--seed", type=int, default=0, show_default=True, help="Master seed"),
            click.option("--tol", type=float, default=None, help="Inequality tolerance"),
            click.option("--workers", type=int, default=None, help="Worker processes"),
            click.option("--csv", "csv_path", type=str, help="Write trial rows as CSV"),
            click.option("--json", "json_path", type=str, help="Write failures as JSON"),
        )
    ):
        func = option(func)
    return func


@click.command()
@click.option(
    "--check",
    type=click.Choice(list(MODULE_CHECKS["bellman"])),
    default=None,
    help="Single check to run (default: all)",
)
@click.option("--d", "d", type=int, default=3, show_default=True, help="Largest matrix dimension")
@click.option("--k", "k", type=int, default=3, show_default=True, help="Largest dynamics depth")
@click.option("--target-x", type=float, default=4.0, show_default=True, help="Target characteristic")
@_common_options
@click.pass_context
def bellman(ctx, check, d, k, target_x, trials, seed, tol, workers, csv_path, json_path):
    """Bellman domain segments, modified dynamics, Carleson concavity and resolvent checks."""
    with command_errors(ctx):
        config = ExperimentConfig(
            subcommand=Subcommand.BELLMAN,
            check=check,
            d=d,
            k=k,
            target_x=target_x,
            trials=trials,
            seed=seed,
            tol=tol if tol is not None else 1e-9,
            workers=workers or 1,
            csv_path=csv_path,
            json_path=json_path,
        )
        lab = orchestrator(ctx)
        check_dimension(config.d, lab.config.limits.max_dim)
        suites = _selected("bellman", config.check)
        overrides = {"max_d": config.d, "max_k": config.k, "target_x": config.target_x, "tol": tol}
        reports = run_with_progress(lab, suites, config.seed, config.trials, overrides, workers)
        passed = print_reports(reports, title="Bellman checks")
        write_artifacts(suites, reports, config.csv_path, config.json_path)
        finish(passed)


@click.command()
@click.option(
    "--check",
    type=click.Choice(list(MODULE_CHECKS["schur"])),
    default=None,
    help="Single check to run (default: all)",
)
@click.option("--k", "k", type=int, default=None, help="Largest complexity k (2^k rows)")
@_common_options
@click.pass_context
def schur(ctx, check, k, trials, seed, tol, workers, csv_path, json_path):
    """Schur multiplier bounds, alpha searches and lambda norm equivalence."""
    with command_errors(ctx):
        config = ExperimentConfig(
            subcommand=Subcommand.SCHUR,
            check=check,
            k=k or 1,
            trials=trials,
            seed=seed,
            tol=tol if tol is not None else 1e-9,
            workers=workers or 1,
            csv_path=csv_path,
            json_path=json_path,
        )
        suites = _selected("schur", config.check)
        overrides = {"k_max": k, "tol": tol}
        reports = run_with_progress(
            orchestrator(ctx), suites, config.seed, config.trials, overrides, workers
        )
        passed = print_reports(reports, title="Schur checks")
        write_artifacts(suites, reports, config.csv_path, config.json_path)
        finish(passed)


def _dims(values: Tuple[int, ...]) -> Optional[Tuple[int, ...]]:
    return tuple(values) if values else None


@click.command()
@click.option(
    "--check",
    type=click.Choice(list(MODULE_CHECKS["carleson"])),
    default="embedding",
    show_default=True,
    help="Check to run",
)
@click.option("--d", "dims", type=int, multiple=True, help="Matrix dimension (repeatable)")
@click.option("--depth", type=int, default=4, show_default=True, help="Tree depth")
@click.option("--target-x", type=float, default=4.0, show_default=True, help="Target characteristic")
@_common_options
@click.pass_context
def carleson(ctx, check, dims, depth, target_x, trials, seed, tol, workers, csv_path, json_path):
    """Matrix Carleson embedding on boundary-normalized sequences."""
    with command_errors(ctx):
        config = ExperimentConfig(
            subcommand=Subcommand.CARLESON,
            check=check,
            d=max(dims) if dims else 1,
            depth=depth,
            target_x=target_x,
            trials=trials,
            seed=seed,
            tol=tol if tol is not None else 1e-9,
            workers=workers or 1,
            csv_path=csv_path,
            json_path=json_path,
        )
        lab = orchestrator(ctx)
        check_dimension(config.d, lab.config.limits.max_dim)
        suites = _selected("carleson", config.check)
        overrides = {
            "dims": _dims(dims),
            "depth": config.depth,
            "target_x": config.target_x,
            "tol": tol,
        }
        reports = run_with_progress(lab, suites, config.seed, config.trials, overrides, workers)
        passed = print_reports(reports, title="Carleson embedding")
        for report in reports.values():
            if report.max_ratio_by_dim and report.suite.endswith("embedding"):
                print_ratio_by_dim(report, EMBEDDING_CONSTANT)
                console.print("[dim]Ratios are lhs / ||f||^2; the bound does not depend on d.[/dim]")
        write_artifacts(suites, reports, config.csv_path, config.json_path)
        finish(passed)

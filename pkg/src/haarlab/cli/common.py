"""
Shared console, logging and error handling for the haarlab commands.
"""

import logging
import sys
import traceback
from contextlib import contextmanager
from typing import Any, Dict, Iterable, List, Optional, Sequence

import click
import pydantic
from rich.console import Console
from rich.markup import escape
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

from ..core.exceptions import (
    ConfigurationError,
    DimensionTooLargeError,
    HaarLabError,
    ReportIOError,
    ValidationError,
)
from ..core.fuzz import FuzzOrchestrator
from ..core.models import Counterexample, FuzzReport, LoggingConfig
from ..core.reporting import write_csv, write_failures, write_json
from ..core.suite import Suite

console = Console()

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130

# Errors caused by the invocation rather than by the mathematics.
USAGE_ERRORS = (ConfigurationError, ValidationError, ReportIOError)


def setup_logging(verbose: bool = False, level: Optional[str] = None):
    """Setup logging configuration."""
    config = LoggingConfig()
    if verbose:
        log_level = logging.DEBUG
    else:
        log_level = getattr(logging, (level or config.console_level.value).upper(), logging.INFO)
    logging.basicConfig(
        level=log_level,
        format=config.format,
        datefmt=config.date_format,
        handlers=[logging.StreamHandler(sys.stderr)],
    )


@contextmanager
def command_errors(ctx: click.Context):
    """Print library errors the way every command does and exit with their code."""
    verbose = bool((ctx.obj or {}).get("verbose"))
    try:
        yield
    except USAGE_ERRORS as e:
        console.print(f"[red]❌ Error: {escape(e.message)}[/red]")
        if verbose:
            console.print(f"[red]Details: {escape(str(e.details))}[/red]")
        sys.exit(EXIT_CONFIG)
    except pydantic.ValidationError as e:
        console.print(f"[red]❌ Invalid options: {escape(str(e))}[/red]")
        sys.exit(EXIT_CONFIG)
    except HaarLabError as e:
        console.print(f"[red]❌ Error: {escape(e.message)}[/red]")
        if verbose:
            console.print(f"[red]Details: {escape(str(e.details))}[/red]")
        sys.exit(EXIT_VIOLATION)
    except Exception as e:
        console.print(f"[red]❌ Unexpected error: {escape(str(e))}[/red]")
        if verbose:
            console.print(escape(traceback.format_exc()))
        sys.exit(EXIT_VIOLATION)


def check_dimension(d: int, max_dim: int) -> None:
    if d > max_dim:
        raise DimensionTooLargeError(f"d = {d} exceeds the configured limit {max_dim}", d, max_dim)


def orchestrator(ctx: click.Context) -> FuzzOrchestrator:
    obj = ctx.obj or {}
    return FuzzOrchestrator.from_config_file(
        config_path=obj.get("config_path"), profile=obj.get("profile")
    )


def run_with_progress(
    lab: FuzzOrchestrator,
    suites: Sequence[Suite],
    seed: int,
    trials: int,
    overrides: Optional[Dict[str, Any]] = None,
    workers: Optional[int] = None,
) -> Dict[str, FuzzReport]:
    """Run suites in order behind a rich progress bar."""
    reports: Dict[str, FuzzReport] = {}
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        for suite in suites:
            task = progress.add_task(f"{suite.name}...", total=max(trials, 1))

            def advance(_trial: int, task=task) -> None:
                progress.advance(task)

            reports[suite.name] = lab.run_suite(
                suite, seed, trials, overrides, workers, advance
            )
            progress.remove_task(task)
    return reports


def csv_header(suites: Iterable[Suite]) -> List[str]:
    """Union of the suites' headers in first-seen order."""
    header: List[str] = []
    for suite in suites:
        for column in suite.header:
            if column not in header:
                header.append(column)
    return header


def write_artifacts(
    suites: Sequence[Suite],
    reports: Dict[str, FuzzReport],
    csv_path: Optional[str],
    json_path: Optional[str],
) -> None:
    """CSV rows of every suite, and the failures of every suite as JSON."""
    if csv_path:
        rows = [row for suite in suites for row in reports[suite.name].rows]
        target = write_csv(csv_path, csv_header(suites), rows)
        console.print(f"[blue]📄 Wrote {len(rows)} rows to {target}[/blue]")
    if json_path:
        failures: List[Counterexample] = [
            failure for suite in suites for failure in reports[suite.name].failures
        ]
        target = write_failures(json_path, failures)
        console.print(f"[blue]📄 Wrote {len(failures)} counterexamples to {target}[/blue]")


def write_summary_json(json_path: str, summary: Any) -> None:
    target = write_json(json_path, summary)
    console.print(f"[blue]📄 Wrote summary to {target}[/blue]")


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{value:.6g}"


def print_reports(reports: Dict[str, FuzzReport], title: str = "Results") -> bool:
    """Summary table of suite reports; True when every suite passed."""
    table = Table(title=title, show_header=True)
    table.add_column("Suite", style="cyan")
    table.add_column("Trials", style="white", justify="right")
    table.add_column("Violations", style="red", justify="right")
    table.add_column("Errors", style="red", justify="right")
    table.add_column("Max ratio", style="yellow", justify="right")
    table.add_column("Status", style="green")

    for name, report in reports.items():
        table.add_row(
            name,
            str(report.trials),
            str(report.violations),
            str(report.errors),
            _fmt(report.max_ratio),
            "✅ Pass" if report.passed else "❌ Fail",
        )
    console.print(table)

    passed = all(report.passed for report in reports.values())
    if passed:
        console.print("\n[bold green]✅ No invariant violations[/bold green]")
    else:
        console.print("\n[bold red]❌ Invariant violations found[/bold red]")
    return passed


def print_ratio_by_dim(report: FuzzReport, bound: float) -> None:
    """Largest observed ratio per dimension next to the dimension-free bound."""
    if not report.max_ratio_by_dim:
        return
    table = Table(title=f"{report.suite}: max ratio by dimension", show_header=True)
    table.add_column("d", style="cyan", justify="right")
    table.add_column("Max ratio", style="yellow", justify="right")
    table.add_column("Bound", style="white", justify="right")
    for dim in sorted(report.max_ratio_by_dim, key=int):
        table.add_row(dim, _fmt(report.max_ratio_by_dim[dim]), _fmt(bound))
    console.print(table)


def finish(passed: bool) -> None:
    sys.exit(EXIT_OK if passed else EXIT_VIOLATION)

"""
Fuzz and replay commands.

``fuzz`` runs every registered suite (or a selection) with one master seed;
``replay`` re-evaluates a counterexample file written by any command's --json
or by ``fuzz --failures``. Both are also reachable through the standalone
``haarlab-fuzz`` entry point.
"""

import sys
from typing import Dict, List

import click
from rich.markup import escape
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

from ..__version__ import __version__
from ..core.fuzz import SUITES, resolve_suites
from ..core.models import ExperimentConfig, Subcommand
from ..core.reporting import write_csv, write_failures
from ..core.suite import ReplayResult
from .common import (
    EXIT_INTERRUPTED,
    EXIT_OK,
    command_errors,
    console,
    csv_header,
    finish,
    orchestrator,
    print_reports,
    setup_logging,
    write_summary_json,
)


def _fmt(value: float) -> str:
    return f"{value:.12g}"


@click.command()
@click.option("--trials", type=int, default=100, show_default=True, help="Trials per suite")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed")
@click.option(
    "--suite",
    "suite_names",
    multiple=True,
    help="Suite or module name (repeatable, default: every non-exploratory suite)",
)
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option("--csv", "csv_path", type=str, help="Write all trial rows as CSV")
@click.option("--json", "json_path", type=str, help="Write the run summary as JSON")
@click.option("--failures", "failures_path", type=str, help="Write counterexamples as JSON")
@click.option("--list", "list_only", is_flag=True, help="List registered suites and exit")
@click.pass_context
def fuzz(ctx, trials, seed, suite_names, workers, csv_path, json_path, failures_path, list_only):
    """Run seeded property suites and report invariant violations."""
    with command_errors(ctx):
        if list_only:
            table = Table(title="Registered suites", show_header=True)
            table.add_column("Suite", style="cyan")
            table.add_column("Module", style="white")
            table.add_column("Stream", style="white", justify="right")
            table.add_column("Description", style="dim")
            for suite in SUITES.values():
                table.add_row(suite.name, suite.module, str(suite.stream), suite.description)
            console.print(table)
            sys.exit(EXIT_OK)

        config = ExperimentConfig(
            subcommand=Subcommand.FUZZ,
            trials=trials,
            seed=seed,
            workers=workers or 1,
            csv_path=csv_path,
            json_path=json_path,
        )
        selected = resolve_suites(suite_names or None)
        lab = orchestrator(ctx)

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TimeElapsedColumn(),
            console=console,
            transient=True,
        ) as progress:
            tasks = {
                suite.name: progress.add_task(f"{suite.name}...", total=max(config.trials, 1))
                for suite in selected
            }

            def advance(name: str, _trial: int) -> None:
                progress.advance(tasks[name])

            summary = lab.run(
                config.seed,
                config.trials,
                suites=[suite.name for suite in selected],
                workers=workers,
                progress_callback=advance,
            )

        passed = print_reports(summary.suites, title=f"Fuzz run (seed {config.seed})")

        if config.csv_path:
            rows = [row for suite in selected for row in summary.suites[suite.name].rows]
            target = write_csv(config.csv_path, csv_header(selected), rows)
            console.print(f"[blue]📄 Wrote {len(rows)} rows to {target}[/blue]")
        if config.json_path:
            write_summary_json(config.json_path, summary)
        if failures_path:
            failures = [f for report in summary.suites.values() for f in report.failures]
            target = write_failures(failures_path, failures)
            console.print(f"[blue]📄 Wrote {len(failures)} counterexamples to {target}[/blue]")

        finish(passed)


def _print_replay(results: List[ReplayResult]) -> None:
    table = Table(title="Replay", show_header=True)
    table.add_column("Suite", style="cyan")
    table.add_column("Trial", style="white", justify="right")
    table.add_column("Recorded", style="yellow", justify="right")
    table.add_column("Replayed", style="yellow", justify="right")
    table.add_column("Status", style="green")
    for result in results:
        example = result.counterexample
        if result.error is not None:
            replayed = escape(str(result.error.get("error_code", "error")))
        else:
            replayed = _fmt(result.observed)
        table.add_row(
            example.suite,
            str(example.trial),
            _fmt(example.observed),
            replayed,
            "✅ Reproduced" if result.reproduced else "❌ Differs",
        )
    console.print(table)


@click.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def replay(ctx, path):
    """Re-evaluate the counterexamples stored in PATH."""
    with command_errors(ctx):
        results = orchestrator(ctx).replay_file(path)
        if not results:
            console.print("[yellow]⚠️  No counterexamples in file[/yellow]")
            sys.exit(EXIT_OK)
        _print_replay(results)

        reproduced = sum(result.reproduced for result in results)
        counts: Dict[str, int] = {}
        for result in results:
            if not result.reproduced:
                counts[result.counterexample.suite] = counts.get(result.counterexample.suite, 0) + 1
        if counts:
            console.print(
                f"\n[bold red]❌ {len(results) - reproduced} of {len(results)} "
                f"counterexamples did not reproduce[/bold red]"
            )
            for name, count in sorted(counts.items()):
                console.print(f"  • {name}: {count}")
        else:
            console.print(f"\n[bold green]✅ All {len(results)} counterexamples reproduced[/bold green]")
        finish(not counts)


@click.group()
@click.version_option(version=__version__, prog_name="haarlab-fuzz")
@click.option("--config", type=str, help="Path to configuration file")
@click.option("--profile", type=str, help="Configuration profile to use")
@click.option("--verbose", is_flag=True, help="Enable verbose output")
@click.pass_context
def fuzz_cli(ctx, config, profile, verbose):
    """haarlab-fuzz - seeded property fuzzing for haarlab."""
    setup_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config
    ctx.obj["profile"] = profile
    ctx.obj["verbose"] = verbose


fuzz_cli.add_command(fuzz, name="run")
fuzz_cli.add_command(replay)


def main():
    """Entry point for haarlab-fuzz."""
    try:
        fuzz_cli()
    except KeyboardInterrupt:
        console.print("\n[yellow]⚠️  Interrupted by user[/yellow]")
        sys.exit(EXIT_INTERRUPTED)


__all__ = ["fuzz", "replay", "fuzz_cli", "main"]

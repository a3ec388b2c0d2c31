"""
Main CLI entry point for haarlab.

This module provides the ``haarlab`` command group: the A2 and norm-scan
experiments, the cube transfer, and configuration management. The per-module
checks and the fuzz commands are registered from their own modules.
"""

import os
import sys

import click
from rich.panel import Panel
from rich.table import Table

from ..__version__ import RNG_ALGORITHM, __version__
from ..core.config_manager import ConfigManager
from ..core.dyadic import check_dense_budget
from ..core.exceptions import ConfigurationError
from ..core.experiments import NORM_SCAN_SUITE, bucket_table
from ..core.models import ExperimentConfig, OperatorKind, Subcommand, SymbolClass
from ..core.operators import weighted_norm
from ..core.reporting import write_csv, write_json
from ..core.rng import substream
from ..core.serialization import load_shift, load_weight
from ..core.transfer import (
    AVERAGES_SUITE,
    INFLATION_SUITE,
    almost_child_check,
    build_map,
    inflation_check,
    load_cube_weight,
)
from ..core.weights import a2_characteristic, random_a2_weight_from_rng
from .checks import bellman, carleson, schur
from .common import (
    EXIT_CONFIG,
    EXIT_INTERRUPTED,
    check_dimension,
    command_errors,
    console,
    finish,
    orchestrator,
    print_reports,
    run_with_progress,
    setup_logging,
    write_artifacts,
)
from .fuzz import fuzz, replay

# Stream of the weight drawn by `a2` when no --weight file is given.
A2_STREAM = 2


@click.group(invoke_without_command=True)
@click.option("--version", is_flag=True, help="Show version and exit")
@click.option("--config", type=str, help="Path to configuration file")
@click.option("--profile", type=str, help="Configuration profile to use")
@click.option("--verbose", is_flag=True, help="Enable verbose output")
@click.pass_context
def cli(ctx, version, config, profile, verbose):
    """haarlab - matrix-weighted dyadic harmonic analysis lab.

    Seeded experiments and property checks for matrix A2 weights, martingale
    transforms, Haar shifts, Bellman functions, Carleson embeddings and Schur
    multipliers. Exit codes: 0 pass, 1 invariant violation, 2 config error.
    """
    if version:
        console.print(f"haarlab version {__version__} (RNG {RNG_ALGORITHM})")
        sys.exit(0)

    setup_logging(verbose)

    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config
    ctx.obj["profile"] = profile
    ctx.obj["verbose"] = verbose

    if ctx.invoked_subcommand is None:
        console.print(ctx.get_help())


@cli.command()
@click.option("--weight", "weight_path", type=str, help="Weight JSON file")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for a random weight")
@click.option("--d", "d", type=int, default=2, show_default=True, help="Matrix dimension")
@click.option("--depth", type=int, default=4, show_default=True, help="Tree depth")
@click.option("--target-x", type=float, default=4.0, show_default=True, help="Target characteristic")
@click.option("--csv", "csv_path", type=str, help="Write per-level maxima as CSV")
@click.option("--json", "json_path", type=str, help="Write the A2 report as JSON")
@click.pass_context
def a2(ctx, weight_path, seed, d, depth, target_x, csv_path, json_path):
    """Dyadic A2 characteristic of a weight file or a seeded random weight."""
    with command_errors(ctx):
        config = ExperimentConfig(
            subcommand=Subcommand.A2,
            seed=seed,
            d=d,
            depth=depth,
            target_x=target_x,
            weight_path=weight_path,
            csv_path=csv_path,
            json_path=json_path,
        )
        lab = orchestrator(ctx).config
        if config.weight_path:
            weight = load_weight(config.weight_path)
        else:
            check_dimension(config.d, lab.limits.max_dim)
            weight = random_a2_weight_from_rng(
                substream(config.seed, 0, A2_STREAM), config.d, config.depth, config.target_x
            )
        report = a2_characteristic(weight)

        table = Table(title="A2 characteristic per level", show_header=True)
        table.add_column("Level", style="cyan", justify="right")
        table.add_column("Max characteristic", style="yellow", justify="right")
        for level, value in enumerate(report.per_level_maxima):
            table.add_row(str(level), f"{value:.9g}")
        console.print(table)
        console.print(
            Panel(
                f"[bold]\\[W]_A2 = {report.characteristic:.9g}[/bold]\n"
                f"Witness: {report.witness!r}  (d = {weight.dim}, depth = {weight.depth})",
                title="A2",
                border_style="blue",
            )
        )

        if config.csv_path:
            rows = [
                {"level": level, "max_characteristic": value}
                for level, value in enumerate(report.per_level_maxima)
            ]
            write_csv(config.csv_path, ["level", "max_characteristic"], rows)
        if config.json_path:
            write_json(config.json_path, report)
        finish(True)


@cli.command(name="norm-scan")
@click.option(
    "--op",
    type=click.Choice([kind.value for kind in OperatorKind]),
    default=OperatorKind.MARTINGALE.value,
    show_default=True,
    help="Operator family",
)
@click.option(
    "--symbol-class",
    type=click.Choice([cls.value for cls in SymbolClass]),
    default=SymbolClass.SIGNS.value,
    show_default=True,
    help="Martingale symbol family",
)
@click.option("--trials", type=int, default=100, show_default=True, help="Number of trials")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed")
@click.option("--d", "d", type=int, default=1, show_default=True, help="Matrix dimension")
@click.option("--depth", type=int, default=6, show_default=True, help="Tree depth")
@click.option("--m", "m", type=int, default=0, show_default=True, help="Shift parameter m")
@click.option("--n", "n", type=int, default=1, show_default=True, help="Shift parameter n")
@click.option(
    "--k",
    "k",
    type=int,
    default=None,
    help="Complexity max(m,n)+1; --op shift uses m = n = k-1",
)
@click.option("--weight", "weight_path", type=str, help="Weight JSON for a single evaluation")
@click.option("--spec", "spec_path", type=str, help="Haar shift JSON for a single evaluation")
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option("--csv", "csv_path", type=str, help="Write trial rows as CSV")
@click.option("--json", "json_path", type=str, help="Write failures as JSON")
@click.pass_context
def norm_scan(
    ctx,
    op,
    symbol_class,
    trials,
    seed,
    d,
    depth,
    m,
    n,
    k,
    weight_path,
    spec_path,
    workers,
    csv_path,
    json_path,
):
    """Weighted operator norms bucketed by A2 characteristic (report only)."""
    if k is not None and OperatorKind(op) is OperatorKind.MARTINGALE and k != 1:
        raise click.BadParameter("martingale transforms have complexity 1", param_hint="--k")
    if k is not None and OperatorKind(op) is OperatorKind.SHIFT:
        m = n = k - 1
    with command_errors(ctx):
        config = ExperimentConfig(
            subcommand=Subcommand.NORM_SCAN,
            op=op,
            symbol_class=symbol_class,
            trials=trials,
            seed=seed,
            d=d,
            depth=depth,
            m=m,
            n=n,
            k=k if k is not None else max(m, n) + 1,
            weight_path=weight_path,
            spec_path=spec_path,
            workers=workers or 1,
            csv_path=csv_path,
            json_path=json_path,
        )
        lab = orchestrator(ctx)
        limits = lab.config.limits

        if config.weight_path and config.spec_path:
            weight = load_weight(config.weight_path)
            norm = weighted_norm(
                load_shift(config.spec_path),
                weight,
                limits.max_dense,
                lab.config.sampling.power_iterations,
            )
            x = a2_characteristic(weight).characteristic
            console.print(
                Panel(
                    f"||S||_L2(W) = {norm:.9g}\n\\[W]_A2 = {x:.9g}",
                    title="Weighted norm",
                    border_style="blue",
                )
            )
            finish(True)

        check_dimension(config.d, limits.max_dim)
        check_dense_budget(config.depth, config.d, limits.max_dense)
        overrides = {
            "op": config.op.value,
            "symbol_class": config.symbol_class.value,
            "d": config.d,
            "depth": config.depth,
            "m": config.m,
            "n": config.n,
        }
        reports = run_with_progress(
            lab, [NORM_SCAN_SUITE], config.seed, config.trials, overrides, workers
        )
        report = reports[NORM_SCAN_SUITE.name]

        table = Table(title="Norms by characteristic bucket", show_header=True)
        table.add_column("\\[W]_A2 bucket", style="cyan")
        table.add_column("Trials", style="white", justify="right")
        table.add_column("Max norm", style="yellow", justify="right")
        table.add_column("Max norm / X", style="magenta", justify="right")
        for bucket in bucket_table(report.rows):
            table.add_row(
                f"\\[{bucket['bucket_lo']:g}, {bucket['bucket_hi']:g})",
                str(bucket["trials"]),
                f"{bucket['max_norm']:.6g}",
                f"{bucket['max_norm_over_x']:.6g}",
            )
        console.print(table)

        write_artifacts([NORM_SCAN_SUITE], reports, config.csv_path, config.json_path)
        finish(report.errors == 0)


@cli.command()
@click.option("--p", "p", type=int, default=2, show_default=True, help="Cube dimension")
@click.option("--depth", type=int, default=3, show_default=True, help="Cube depth")
@click.option("--d", "d", type=int, default=3, show_default=True, help="Largest matrix dimension")
@click.option("--trials", type=int, default=100, show_default=True, help="Number of trials")
@click.option("--seed", type=int, default=0, show_default=True, help="Master seed")
@click.option("--weight", "weight_path", type=str, help="Cube weight JSON for a single check")
@click.option("--tol", type=float, default=None, help="Inequality tolerance")
@click.option("--workers", type=int, default=None, help="Worker processes")
@click.option("--csv", "csv_path", type=str, help="Write trial rows as CSV")
@click.option("--json", "json_path", type=str, help="Write failures as JSON")
@click.pass_context
def transfer(ctx, p, depth, d, trials, seed, weight_path, tol, workers, csv_path, json_path):
    """Cube-to-interval transfer: characteristic inflation and exact averages."""
    with command_errors(ctx):
        config = ExperimentConfig(
            subcommand=Subcommand.TRANSFER,
            p=p,
            depth=depth,
            d=d,
            trials=trials,
            seed=seed,
            tol=tol if tol is not None else 1e-9,
            weight_path=weight_path,
            workers=workers or 1,
            csv_path=csv_path,
            json_path=json_path,
        )
        lab = orchestrator(ctx)
        limits = lab.config.limits

        if config.weight_path:
            w = load_cube_weight(config.weight_path)
            cmap = build_map(w.p, w.depth, limits.transfer_max_p, limits.transfer_max_leaf_bits)
            report = inflation_check(cmap, w)
            almost = almost_child_check(cmap, w, config.tol)
            passed = report.holds(config.tol) and almost.passed

            table = Table(show_header=False, box=None)
            table.add_column("Field", style="cyan")
            table.add_column("Value", style="white")
            table.add_row("Cube characteristic", f"{report.cube_x:.9g}")
            table.add_row("Line characteristic", f"{report.line_x:.9g}")
            table.add_row("Bound 2^(2(p-1)) X", f"{report.bound:.9g}")
            table.add_row("Almost children checked", str(almost.checked))
            table.add_row("Almost children", "✅ OK" if almost.passed else "❌ Failed")
            console.print(table)
            finish(passed)

        check_dimension(config.d, limits.max_dim)
        build_map(config.p, config.depth, limits.transfer_max_p, limits.transfer_max_leaf_bits)
        overrides = {
            "p_values": (config.p,),
            "max_d": config.d,
            "depth": config.depth,
            "tol": tol,
        }
        suites = [INFLATION_SUITE, AVERAGES_SUITE]
        reports = run_with_progress(lab, suites, config.seed, config.trials, overrides, workers)
        passed = print_reports(reports, title=f"Transfer p = {config.p}")
        write_artifacts(suites, reports, config.csv_path, config.json_path)
        finish(passed)


@cli.group()
def config():
    """Create and validate configuration files."""


@config.command()
@click.option(
    "--template",
    type=click.Choice(["basic", "ci", "thorough"]),
    default="basic",
    show_default=True,
    help="Configuration template",
)
@click.option("--output", type=str, default="haarlab.yaml", show_default=True, help="Output path")
@click.option("--force", is_flag=True, help="Overwrite an existing file")
@click.pass_context
def init(ctx, template, output, force):
    """Write a configuration template."""
    with command_errors(ctx):
        if os.path.exists(os.path.expanduser(output)) and not force:
            console.print(f"[yellow]⚠️  {output} already exists (use --force to overwrite)[/yellow]")
            sys.exit(EXIT_CONFIG)
        path = ConfigManager(None).create_default_config(output, template)
        console.print(f"[green]✅ Created {template} configuration: {path}[/green]")


@config.command()
@click.argument("path", required=False)
@click.pass_context
def validate(ctx, path):
    """Validate a configuration file (default: the auto-detected one)."""
    with command_errors(ctx):
        target = path or (ctx.obj or {}).get("config_path")
        try:
            manager = ConfigManager(target)
        except ConfigurationError as e:
            issues = e.validation_errors or [e.message]
        else:
            if manager.config_path is None:
                console.print("[yellow]No configuration file found; defaults apply[/yellow]")
                sys.exit(0)
            issues = manager.validate_config()
        if issues:
            console.print("[red]❌ Configuration has issues:[/red]")
            for issue in issues:
                console.print(f"  [red]• {issue}[/red]")
            sys.exit(EXIT_CONFIG)
        console.print("[green]✅ Configuration is valid[/green]")


cli.add_command(bellman)
cli.add_command(schur)
cli.add_command(carleson)
cli.add_command(fuzz)
cli.add_command(replay)


def main():
    """Main entry point for CLI."""
    try:
        cli()
    except KeyboardInterrupt:
        console.print("\n[yellow]⚠️  Operation cancelled by user[/yellow]")
        sys.exit(EXIT_INTERRUPTED)


if __name__ == "__main__":
    main()

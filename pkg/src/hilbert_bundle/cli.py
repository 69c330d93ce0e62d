"""Command-line interface.

``run`` and ``verify`` call the same functions the HTTP service wraps, so
results are identical whichever entry point is used.  Exit status is 0
exactly when every requested check passes.
"""

from __future__ import annotations

import sys

import click

from .checks import run_scenario
from .report import Report, report_to_csv, report_to_json
from .scenario import ScenarioError, load_scenario
from .verify import SUITES, verify_suite

__all__ = ["main"]


def _print_checks(report: Report) -> None:
    for entry in report.checks:
        status = "PASS" if entry.passed else "FAIL"
        click.echo(
            f"{status}  {entry.name:<22} residual={entry.residual:.3e} "
            f"tolerance={entry.tolerance:.1e}"
        )


def _finish(report: Report) -> None:
    failed = [e.name for e in report.checks if not e.passed]
    if failed:
        click.echo(f"{len(failed)} check(s) failed: {', '.join(failed)}", err=True)
        sys.exit(1)
    sys.exit(0)


@click.group()
def main() -> None:
    """Fibre-bundle quantum dynamics: scenario runner and verifier."""


@main.command("run")
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Path to a JSON scenario file.")
@click.option("--steps", type=int, default=None, help="Override the step count.")
@click.option("--hbar", type=float, default=None, help="Override the action constant.")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None,
              help="Write the report (JSON) or trajectory (CSV) here.")
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]),
              default=None, help="Output format; defaults to the scenario's choice.")
def run_command(scenario_path, steps, hbar, output_path, output_format):
    """Run all checks of a scenario and emit the report."""
    try:
        model = load_scenario(scenario_path)
        overrides = {}
        if steps is not None:
            overrides["steps"] = steps
        if hbar is not None:
            overrides["hbar"] = hbar
        if overrides:
            model = model.model_copy(update=overrides)
        report = run_scenario(model)
    except ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    fmt = output_format
    dest = output_path
    if model.output is not None:
        fmt = fmt or model.output.format
        dest = dest or model.output.path
    fmt = fmt or "json"

    if fmt == "csv":
        names = [obs.name for obs in model.observables]
        payload = report_to_csv(report, names)
    else:
        payload = report_to_json(report)

    if dest:
        with open(dest, "w") as fh:
            fh.write(payload)
        click.echo(f"wrote {fmt} output to {dest}")
    elif fmt == "csv":
        click.echo(payload, nl=False)

    _print_checks(report)
    _finish(report)


@main.command("verify")
@click.option("--suite", required=True, type=click.Choice(sorted(SUITES)),
              help="Verification suite to run.")
@click.option("--seed", required=True, type=int, help="RNG seed (reproducible).")
@click.option("--dims", default="2..6", show_default=True,
              help="Fibre dimensions, e.g. '2..6' or '2,3,5'.")
@click.option("--instances", default=3, show_default=True, type=int,
              help="Random instances per dimension.")
def verify_command(suite, seed, dims, instances):
    """Run a randomized verification suite."""
    try:
        report = verify_suite(suite, seed, dims=dims, instances=instances)
    except ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    _print_checks(report)
    _finish(report)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve_command(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()

from __future__ import annotations
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import typer

from riskscale.cli.common import (
    OUT_OPTION,
    OutputFormat,
    emit_csv,
    emit_json,
    guard,
    print_table,
    styled_table,
)
from riskscale.core.repro import ReproReport, ReproTarget, load_targets, run_target
from riskscale.utils.errors import ConfigError, ReproFailure
from riskscale.utils.table import format_number

RESULT_HEADERS = ["target", "case", "key", "expected", "actual", "error", "tol", "status"]
STATUS_STYLE = {"pass": "green", "fail": "bold red", "skip": "yellow"}


def _with_tol(target: ReproTarget, tol: float) -> ReproTarget:
    cases = [replace(c, cells=[replace(cell, tol=tol) for cell in c.cells]) for c in target.cases]
    return replace(target, cases=cases)


def repro(
    targets: Optional[List[str]] = typer.Argument(None, help="Target ids, or 'all'"),
    list_: bool = typer.Option(False, "--list", help="List the available targets and exit"),
    eps: Optional[float] = typer.Option(None, "--eps", help="Run only the cases of this epsilon"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Override every cell tolerance"),
    manifest: Optional[Path] = typer.Option(
        None, "--manifest", help="Manifest file (default: $RISKSCALE_TARGETS or the bundled one)"
    ),
    format: OutputFormat = typer.Option(
        OutputFormat.table, "--format", "-f", help="table (default), csv or json"
    ),
    out: Optional[Path] = OUT_OPTION,
):
    """
    Recompute published table cells and report pass/fail per cell.

    Exit code 3 when any cell fails.

    Example:
    - riskscale repro hyperexp3-barriers
    - riskscale repro eps-family-1 --eps 1000
    """
    with guard():
        available = load_targets(manifest)
        if list_:
            table = styled_table("Reproduction targets")
            table.add_column("ID", style="cyan", no_wrap=True)
            table.add_column("Kind", no_wrap=True)
            table.add_column("Cells", justify="right")
            table.add_column("Description", overflow="fold")
            for tid, target in available.items():
                cells = sum(len(c.cells) for c in target.cases)
                table.add_row(tid, target.kind, str(cells), target.description)
            print_table(table)
            return
        if not targets:
            raise ConfigError("name at least one target (or 'all'); see --list")
        ids = list(available) if "all" in targets else list(targets)
        unknown = [t for t in ids if t not in available]
        if unknown:
            raise ConfigError(f"unknown target(s): {', '.join(unknown)}")
        if tol is not None and not tol > 0:
            raise ConfigError(f"--tol must be positive, got {tol!r}")

        reports: List[ReproReport] = []
        for tid in ids:
            target = available[tid] if tol is None else _with_tol(available[tid], tol)
            reports.append(run_target(target, eps=eps))

        results = [r for report in reports for r in report.results]
        passed = sum(rep.passed for rep in reports)
        failed = sum(rep.failed for rep in reports)
        skipped = sum(rep.skipped for rep in reports)
        summary = f"{passed} passed, {failed} failed, {skipped} skipped"

        if format is OutputFormat.json:
            emit_json(
                {
                    "results": [
                        {
                            "target": r.target,
                            "case": r.case,
                            "key": r.key,
                            "expected": r.expected,
                            "actual": r.actual,
                            "tol": r.tol,
                            "status": r.status,
                        }
                        for r in results
                    ],
                    "passed": passed,
                    "failed": failed,
                    "skipped": skipped,
                },
                out,
            )
        elif format is OutputFormat.csv or out is not None:
            rows = [
                [r.target, r.case, r.key, r.expected, r.actual, None if r.actual is None else r.error, r.tol, r.status]
                for r in results
            ]
            emit_csv(RESULT_HEADERS, rows, out, [summary])
        else:
            table = styled_table("Reproduction")
            table.add_column("Target", style="cyan", no_wrap=True)
            table.add_column("Case", no_wrap=True)
            table.add_column("Key", no_wrap=True)
            for name in ("Expected", "Actual", "Error", "Tol"):
                table.add_column(name, justify="right")
            table.add_column("Status", no_wrap=True)
            for r in results:
                table.add_row(
                    r.target,
                    r.case,
                    r.key,
                    format_number(r.expected),
                    "" if r.actual is None else format_number(r.actual),
                    "" if r.actual is None else format_number(r.error, 3),
                    format_number(r.tol, 3),
                    f"[{STATUS_STYLE[r.status]}]{r.status}[/]",
                )
            print_table(table)
            typer.echo(summary)

        if failed:
            raise ReproFailure(f"{failed} reproduction cell(s) failed")

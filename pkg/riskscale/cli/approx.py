from __future__ import annotations
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional

import typer

from riskscale.cli.common import (
    CONFIG_OPTION,
    OUT_OPTION,
    Q_OPTION,
    OutputFormat,
    emit_csv,
    emit_json,
    guard,
    load_model,
    parse_samples,
    print_table,
    styled_table,
)
from riskscale.core.approx import ApproxKind, compare_approximations, ruin_probability
from riskscale.core.claims import Exponential
from riskscale.utils.table import format_number

APPROX_HEADERS = ["method", "phi", "b_def", "phi_error_pct", "b_def_error_pct"]


def ruin(
    config: Path = CONFIG_OPTION,
    samples: str = typer.Option("0:10:1", "--samples", help="Initial capital grid lo:hi:step"),
    kind: Optional[List[ApproxKind]] = typer.Option(
        None, "--kind", "-k", help="Surrogate(s) to evaluate (default: all)"
    ),
    format: OutputFormat = typer.Option(OutputFormat.csv, "--format", "-f", help="csv or json"),
    out: Optional[Path] = OUT_OPTION,
):
    """
    Ruin probabilities Ψ(x) of the exponential surrogates of a model.

    Exponential claims also get an `exact` column.
    """
    with guard():
        model = load_model(config)
        xs = parse_samples(samples)
        kinds = list(kind) if kind else list(ApproxKind)
        columns = {k.value: ruin_probability(model, xs, k) for k in kinds}
        if isinstance(model.claims, Exponential):
            columns = {"exact": ruin_probability(model, xs), **columns}
        headers = ["x", *columns]
        rows = [[float(x), *(float(col[i]) for col in columns.values())] for i, x in enumerate(xs)]
        if format is OutputFormat.json:
            emit_json([dict(zip(headers, row)) for row in rows], out)
            return
        emit_csv(headers, rows, out, [f"loading={format_number(model.loading)}"])


def approx(
    config: Path = CONFIG_OPTION,
    q: float = Q_OPTION,
    format: OutputFormat = typer.Option(
        OutputFormat.table, "--format", "-f", help="table (default), csv or json"
    ),
    out: Optional[Path] = OUT_OPTION,
):
    """
    Compare Φ_q and the de Finetti barrier of a model with its naive,
    Renyi and De Vylder exponential surrogates (errors in percent).
    """
    with guard():
        model = load_model(config)
        rows = compare_approximations(model, q)

    if format is OutputFormat.json:
        emit_json([asdict(r) for r in rows], out)
        return
    if format is OutputFormat.csv or out is not None:
        emit_csv(APPROX_HEADERS, [[getattr(r, h) for h in APPROX_HEADERS] for r in rows], out)
        return

    table = styled_table(f"Exponential approximations (q={format_number(q)})")
    table.add_column("Method", style="cyan", no_wrap=True)
    for name in ("Φ_q", "b_DeF", "Φ_q err %", "b_DeF err %"):
        table.add_column(name, justify="right")
    for r in rows:
        table.add_row(
            r.method,
            format_number(r.phi),
            format_number(r.b_def),
            format_number(r.phi_error_pct, 4),
            format_number(r.b_def_error_pct, 4),
        )
    print_table(table)


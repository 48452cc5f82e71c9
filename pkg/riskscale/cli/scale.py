from __future__ import annotations
from pathlib import Path
from typing import Optional

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
)
from riskscale.core.scale import build_scale_basis
from riskscale.utils.table import format_number

SAMPLE_HEADERS = ["x", "W", "W'", "W''", "Z", "C"]


def _complex(z: complex) -> str:
    if z.imag == 0:
        return format_number(z.real)
    sign = "+" if z.imag > 0 else "-"
    return f"{format_number(z.real)}{sign}{format_number(abs(z.imag))}j"


def scale(
    config: Path = CONFIG_OPTION,
    q: float = Q_OPTION,
    samples: Optional[str] = typer.Option(
        None, "--samples", help="Sample grid lo:hi:step for the (x, W, W', W'', Z, C) table"
    ),
    format: OutputFormat = typer.Option(OutputFormat.csv, "--format", "-f", help="csv or json"),
    out: Optional[Path] = OUT_OPTION,
):
    """
    Scale functions of a model: roots γ_j and coefficients A_j of
    W_q(x) = Σ A_j e^{γ_j x}, plus an optional sampled table.

    Example:
    - riskscale scale --config hyperexp2.json --q 0.1 --samples 0:10:0.01
    """
    with guard():
        model = load_model(config)
        basis = build_scale_basis(model, q)
        xs = parse_samples(samples) if samples else None
        table = []
        if xs is not None:
            columns = [
                xs,
                basis.w_q(xs),
                basis.w_q(xs, 1),
                basis.w_q(xs, 2),
                basis.z_q(xs),
                basis.c_q(xs),
            ]
            table = [list(map(float, row)) for row in zip(*columns)]

        if format is OutputFormat.json:
            emit_json(
                {
                    "q": basis.q,
                    "phi": basis.phi,
                    "terms": [
                        {
                            "root": [root.real, root.imag],
                            "coefficient": [coef.real, coef.imag],
                        }
                        for root, coef in zip(basis.roots, basis.coefficients)
                    ],
                    "samples": [dict(zip(SAMPLE_HEADERS, row)) for row in table],
                },
                out,
            )
            return

        comments = [f"q={format_number(basis.q)} phi={format_number(basis.phi)}"]
        for root, coef in zip(basis.roots, basis.coefficients):
            comments.append(f"root={_complex(root)} coefficient={_complex(coef)}")
        emit_csv(SAMPLE_HEADERS, table, out, comments)

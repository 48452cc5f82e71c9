from __future__ import annotations
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
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
from riskscale.core.claims import Exponential
from riskscale.core.policy_exponential import benchmark_policies, k_critical_curve, penalty_lower_bound, q_limit
from riskscale.core.policy_matrix import solve_policy
from riskscale.core.value_function import build_value_function, hjb_residual
from riskscale.io.csvio import render_csv
from riskscale.io.fs import write_text
from riskscale.models.policy import METHOD_ALIASES, PolicyParams
from riskscale.utils.errors import ConfigError
from riskscale.utils.table import format_number, kv_aligned


class MethodChoice(str, Enum):
    exact_exponential = "exact-exponential"
    matrix = "matrix"
    expo_pure = "expo-pure"
    expo_ci = "expo-ci"


def policy(
    config: Path = CONFIG_OPTION,
    q: float = Q_OPTION,
    k: float = typer.Option(1.5, "--k", help="Proportional injection cost k >= 1"),
    P: float = typer.Option(0.0, "--P", help="Bankruptcy penalty P (> -c/q)"),
    method: Optional[MethodChoice] = typer.Option(
        None,
        "--method",
        "-m",
        help="Engine (default: exact-exponential for exponential claims, matrix otherwise)",
    ),
    benchmarks: bool = typer.Option(
        False, "--benchmarks", help="Compare with the de Finetti and SLG policies (exponential claims)"
    ),
    hjb: bool = typer.Option(False, "--hjb", help="Report the HJB residual (exponential claims)"),
    value_samples: Optional[str] = typer.Option(
        None, "--value-samples", help="Grid lo:hi:step for the value function table"
    ),
    value_out: Optional[Path] = typer.Option(
        None, "--value-out", help="CSV file for the (x, V, V') table; needs --value-samples"
    ),
    format: OutputFormat = typer.Option(
        OutputFormat.table, "--format", "-f", help="table (default), csv or json"
    ),
    out: Optional[Path] = OUT_OPTION,
):
    """
    Optimal (-a, 0, b) policy: inject capital up to a deficit a at cost k,
    pay dividends above b, and pay P at bankruptcy below -a.

    Example:
    - riskscale policy --config hyperexp2.json --q 0.1 --k 1.5 --P 0 --method matrix
    """
    with guard():
        if (value_samples is None) != (value_out is None):
            raise ConfigError("--value-samples and --value-out go together")
        model = load_model(config)
        params = PolicyParams(q=q, k=k, P=P)
        if method is None:
            method = MethodChoice.exact_exponential if isinstance(model.claims, Exponential) else MethodChoice.matrix
        solution = solve_policy(model, params, METHOD_ALIASES[method.value])
        payload: Dict[str, Any] = solution.to_dict()

        if benchmarks:
            report = benchmark_policies(model, params)
            payload["benchmarks"] = {
                "de_finetti": {"a": report.de_finetti.a, "b": report.de_finetti.b, "J0": report.de_finetti.J0},
                "slg": {"a": report.slg.a, "b": report.slg.b, "J0": report.slg.J0},
                "improvement_pct": report.improvement_pct,
            }
        if hjb:
            payload["hjb_residual"] = hjb_residual(model, params, solution)

        if value_samples is not None:
            xs = parse_samples(value_samples)
            vf = build_value_function(model, solution, params)
            values, slopes = vf.value(xs), vf.derivative(xs)
            write_text(value_out, render_csv(["x", "V", "V'"], zip(xs, values, slopes)))
            typer.secho(f"[ok] Wrote {value_out}", fg=typer.colors.GREEN, err=True)

    if format is OutputFormat.json:
        emit_json(payload, out)
        return
    if format is OutputFormat.csv or out is not None:
        comments = [
            f"{key}={payload[key] if isinstance(payload[key], str) else format_number(payload[key])}"
            for key in ("method", "regime", "a_star", "b_star", "J0")
        ]
        rows = [[c.source, c.a, c.b, c.J0] for c in solution.candidates]
        emit_csv(["source", "a", "b", "J0"], rows, out, comments)
        return

    pairs = [
        ("method", solution.method.value),
        ("regime", solution.regime.value),
        ("a*", format_number(solution.a_star)),
        ("b*", format_number(solution.b_star)),
        ("J0", format_number(solution.J0)),
    ]
    if "benchmarks" in payload:
        bench = payload["benchmarks"]
        pairs += [
            ("J_DeF", format_number(bench["de_finetti"]["J0"])),
            ("J_SLG", format_number(bench["slg"]["J0"])),
            ("gain %", format_number(bench["improvement_pct"], 6)),
        ]
    if "hjb_residual" in payload:
        pairs.append(("HJB", format_number(payload["hjb_residual"], 3)))
    for line in kv_aligned(pairs, width=max(len(k) for k, _ in pairs)):
        typer.echo(line)

    table = styled_table("Candidates")
    table.add_column("Source", style="cyan", no_wrap=True)
    for name in ("a", "b", "J0"):
        table.add_column(name, justify="right")
    for c in solution.candidates:
        table.add_row(c.source, format_number(c.a), format_number(c.b), format_number(c.J0))
    print_table(table)


def kc(
    config: Path = CONFIG_OPTION,
    q: float = Q_OPTION,
    P: Optional[List[float]] = typer.Option(None, "--P", help="Penalty value(s); repeat the flag for several"),
    samples: Optional[str] = typer.Option(None, "--samples", help="Penalty grid lo:hi:step"),
    format: OutputFormat = typer.Option(OutputFormat.csv, "--format", "-f", help="csv or json"),
    out: Optional[Path] = OUT_OPTION,
):
    """
    Critical injection cost k_c(P) for exponential claims, with the discount
    limit q_l(P) above which k_c stops existing. Empty k_c cells mark P <= P_l.
    """
    with guard():
        penalties = list(P or [])
        if samples:
            penalties.extend(float(p) for p in parse_samples(samples))
        if not penalties:
            raise ConfigError("give at least one --P value or a --samples grid")
        model = load_model(config)
        curve = k_critical_curve(model, q, penalties)
        limits = [q_limit(model, p) for p, _ in curve]
        p_lower = penalty_lower_bound(model, q)

    if format is OutputFormat.json:
        emit_json(
            {
                "q": q,
                "p_lower": p_lower,
                "rows": [
                    {"P": p, "kc": k_c, "q_limit": None if np.isnan(ql) else ql}
                    for (p, k_c), ql in zip(curve, limits)
                ],
            },
            out,
        )
        return
    rows = [[p, k_c, ql] for (p, k_c), ql in zip(curve, limits)]
    emit_csv(["P", "kc", "q_limit"], rows, out, [f"q={format_number(q)} p_lower={format_number(p_lower)}"])

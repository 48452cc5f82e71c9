from __future__ import annotations
import json
import logging
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

import numpy as np
import typer
from rich import box
from rich.console import Console
from rich.table import Table

from riskscale.core.claims import RiskModel
from riskscale.core.model_config import load_model_config
from riskscale.io.csvio import render_csv
from riskscale.io.fs import write_text
from riskscale.utils.errors import ConfigError, NumericError, RiskScaleError

logger = logging.getLogger("riskscale.cli")

# Upper bound on --samples grids
MAX_SAMPLES = 1_000_000


class OutputFormat(str, Enum):
    table = "table"
    csv = "csv"
    json = "json"


CONFIG_OPTION = typer.Option(..., "--config", "-c", exists=True, dir_okay=False, help="Model config (JSON or YAML)")
Q_OPTION = typer.Option(..., "--q", help="Discount rate q > 0")
OUT_OPTION = typer.Option(None, "--out", "-o", help="Write the output to this file instead of stdout")


@contextmanager
def guard() -> Iterator[None]:
    """Map riskscale errors to `Error: ...` on stderr and their exit code."""
    try:
        yield
    except RiskScaleError as e:
        typer.secho(f"Error: {e}", err=True, fg=typer.colors.RED)
        raise typer.Exit(code=e.exit_code)
    except (FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError) as e:
        typer.secho(f"Error: numerical failure: {e}", err=True, fg=typer.colors.RED)
        raise typer.Exit(code=NumericError.exit_code)
    except ValueError as e:
        typer.secho(f"Error: {e}", err=True, fg=typer.colors.RED)
        raise typer.Exit(code=2)


def load_model(config: Path) -> RiskModel:
    model = load_model_config(config).build()
    logger.debug(
        "[cli] model c=%.9g lam=%.9g m1=%.9g loading=%.9g",
        model.c, model.lam, model.mean_claim, model.loading,
    )
    return model


def parse_samples(spec: str) -> np.ndarray:
    """Grid from "lo:hi:step", both ends included."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--samples must look like lo:hi:step, got {spec!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as e:
        raise ConfigError(f"--samples must look like lo:hi:step, got {spec!r}") from e
    if not step > 0 or hi < lo:
        raise ConfigError(f"--samples needs step > 0 and hi >= lo, got {spec!r}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    if count > MAX_SAMPLES:
        raise ConfigError(f"--samples asks for {count} points (limit {MAX_SAMPLES})")
    return lo + step * np.arange(count)


def emit(text: str, out: Optional[Path]) -> None:
    """Print `text` or write it to `out`."""
    if out is None:
        typer.echo(text, nl=not text.endswith("\n"))
        return
    write_text(out, text)
    typer.secho(f"[ok] Wrote {out}", fg=typer.colors.GREEN, err=True)


def emit_json(payload: Any, out: Optional[Path]) -> None:
    emit(json.dumps(payload, indent=2, default=_jsonable) + "\n", out)


def emit_csv(
    headers: Sequence[str],
    rows: Sequence[Sequence[object]],
    out: Optional[Path],
    comments: Sequence[str] = (),
) -> None:
    emit(render_csv(headers, rows, comments), out)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Enum):
        return value.value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def styled_table(title: str) -> Table:
    return Table(
        title=title,
        box=box.MINIMAL_DOUBLE_HEAD,
        header_style="bold cyan",
        row_styles=["", "dim"],
    )


def print_table(table: Table) -> None:
    Console().print(table)

from __future__ import annotations
import logging
import sys
from typing import Optional, Sequence

import typer

from riskscale.cli import approx as approx_cli
from riskscale.cli import lambert as lambert_cli
from riskscale.cli import policy as policy_cli
from riskscale.cli import repro as repro_cli
from riskscale.cli import scale as scale_cli

if not logging.getLogger().handlers:
    logging.basicConfig(level=logging.INFO, format="%(message)s")

app = typer.Typer(
    no_args_is_help=True,
    add_completion=True,
    help=(
        "riskscale: scale functions and dividend/capital-injection policies\n\n"
        "Computes q-scale functions of Cramér-Lundberg risk processes with\n"
        "rational-transform claims, compares them with exponential surrogates,\n"
        "and finds optimal (-a, 0, b) policies: inject capital up to a deficit a,\n"
        "pay dividends above b, and pay a penalty P at bankruptcy.\n\n"
        "Models are read from a JSON or YAML config (see docs/reference/file-formats.md).\n"
        "`repro` recomputes the published tables and checks every cell."
    ),
)
app.command("scale", short_help="Roots, coefficients and samples of W_q, Z_q and C.")(scale_cli.scale)
app.command("ruin", short_help="Ruin probabilities of the exponential surrogates.")(approx_cli.ruin)
app.command("approx", short_help="Exact vs surrogate Φ_q and de Finetti barriers.")(approx_cli.approx)
app.command("policy", short_help="Optimal (-a, 0, b) dividend/injection policy.")(policy_cli.policy)
app.command("kc", short_help="Critical injection cost k_c(P) and q_l (exponential claims).")(policy_cli.kc)
app.command("lambert", short_help="Real Lambert-W branches with residuals.")(lambert_cli.lambert)
app.command("repro", short_help="Reproduce the published tables cell by cell.")(repro_cli.repro)


@app.callback(invoke_without_command=True)
def _global_options(
    version: bool = typer.Option(
        False,
        "--version",
        "-V",
        help="Show riskscale version and exit",
        is_eager=True,
        rich_help_panel="Global Options",
    ),
    verbose: bool = typer.Option(
        False,
        "--verbose",
        "-v",
        help="Debug logging on stderr",
        rich_help_panel="Global Options",
    ),
):
    if version:
        from riskscale import __version__

        typer.echo(f"riskscale {__version__}")
        raise typer.Exit()
    if verbose:
        logging.getLogger("riskscale").setLevel(logging.DEBUG)


@app.command("version")
def version_cmd():
    """Show riskscale version and exit."""
    from riskscale import __version__

    typer.echo(f"riskscale {__version__}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI on `argv` and return its exit code instead of exiting."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        app(args=args, prog_name="riskscale")
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(run())

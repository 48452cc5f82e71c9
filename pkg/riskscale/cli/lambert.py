from __future__ import annotations
import math
from typing import Optional

import typer

from riskscale.cli.common import guard
from riskscale.core.lambertw import LambertBranch, lambert_w, lambert_w0_exp
from riskscale.utils.table import format_number, kv_aligned


def lambert(
    z: Optional[float] = typer.Argument(None, help="Argument z of w e^w = z"),
    branch: LambertBranch = typer.Option(LambertBranch.principal, "--branch", "-b", help="principal or lower"),
    exp_arg: Optional[float] = typer.Option(
        None, "--exp", help="Evaluate the principal branch at e^T for this T instead of z"
    ),
):
    """
    Evaluate a real Lambert-W branch and print w with the residual w e^w - z.
    """
    with guard():
        if (z is None) == (exp_arg is None):
            raise ValueError("give either z or --exp T")
        if exp_arg is not None:
            w = lambert_w0_exp(exp_arg)
            # residual of log(w) + w = T, safe for large T
            residual = (math.log(w) + w - exp_arg) if w > 0 else w * math.exp(w) - math.exp(exp_arg)
            pairs = [("T", format_number(exp_arg)), ("branch", LambertBranch.principal.value)]
        else:
            w = float(lambert_w(z, branch))
            residual = w * math.exp(w) - z
            pairs = [("z", format_number(z)), ("branch", branch.value)]
    pairs += [("w", format_number(w, 17)), ("residual", format_number(residual, 3))]
    for line in kv_aligned(pairs, width=8):
        typer.echo(line)

"""Exponential surrogates of a risk model and their ruin-probability formulas.

Each surrogate keeps a few moments of the claim law and swaps it for an
exponential one; scale functions of a surrogate come from the same
`build_scale_basis` as the exact model.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

from riskscale.core.claims import Exponential, RiskModel
from riskscale.core.scale import ScaleBasis, build_scale_basis, de_finetti_barrier
from riskscale.utils.errors import (
    InvalidApproximationError,
    NoRuinFormulaError,
    UnsupportedError,
)

logger = logging.getLogger("riskscale.approx")


class ApproxKind(str, Enum):
    naive = "naive"
    renyi = "renyi"
    devylder = "devylder"


def fit_exponential_model(model: RiskModel, kind: ApproxKind) -> RiskModel:
    """
    Replace the claims of `model` by an exponential law.

    naive:    rate 1/m1, lam and c kept.
    renyi:    rate 1/hm2, lam scaled to lam m1/hm2, c kept (ρ and θ preserved).
    devylder: rate 1/hm3, lam and c chosen so the first three cumulants match.

    Raises:
        UnsupportedError: the model carries a diffusion part.
        InvalidApproximationError: the surrogate rate or premium is not positive.
    """
    kind = ApproxKind(kind)
    if model.diffusion > 0:
        raise UnsupportedError("exponential surrogates need diffusion = 0")
    claims = model.claims
    lam, c = model.lam, model.c
    m1 = claims.moment(1)
    if kind is ApproxKind.naive:
        rate = 1.0 / m1
    elif kind is ApproxKind.renyi:
        hm2 = claims.normalized_moment(2)
        rate = 1.0 / hm2
        lam = model.lam * m1 / hm2
    else:
        m2, m3 = claims.moment(2), claims.moment(3)
        hm3 = claims.normalized_moment(3)
        rate = 1.0 / hm3
        lam = model.lam * 9.0 * m2**3 / (2.0 * m3**2)
        c = model.c - model.lam * m1 + lam * hm3
    if not (math.isfinite(rate) and rate > 0) or not c > 0 or not lam > 0:
        raise InvalidApproximationError(
            f"{kind.value} surrogate is degenerate (rate={rate!r}, lam={lam!r}, c={c!r})"
        )
    if isinstance(claims, Exponential) and kind is ApproxKind.naive:
        rate = claims.rate
    return RiskModel(c=c, lam=lam, claims=Exponential(rate))


def ruin_probability(model: RiskModel, x, kind: Optional[ApproxKind] = None):
    """
    Ψ(x) = exp(-x θ r / (1 + θ)) / (1 + θ) for the exponential surrogate of `kind`.

    kind=None evaluates the exact formula and needs exponential claims.

    Raises:
        UnsupportedError: kind=None with non-exponential claims.
        NoRuinFormulaError: the surrogate loading is not positive.
    """
    if kind is None:
        if not isinstance(model.claims, Exponential):
            raise UnsupportedError("exact ruin formula needs exponential claims; pick a surrogate kind")
        surrogate = model
    else:
        surrogate = fit_exponential_model(model, kind)
    theta = surrogate.loading
    if not theta > 0:
        raise NoRuinFormulaError(f"loading {theta!r} is not positive, ruin is certain")
    rate = surrogate.claims.rate
    x = np.asarray(x, dtype=float)
    val = np.exp(-x * theta * rate / (1.0 + theta)) / (1.0 + theta)
    return float(val) if np.ndim(x) == 0 else val


def approximate_basis(model: RiskModel, q: float, kind: ApproxKind) -> ScaleBasis:
    return build_scale_basis(fit_exponential_model(model, kind), q)


@dataclass(frozen=True)
class ApproxRow:
    method: str
    phi: float
    b_def: float
    phi_error_pct: float
    b_def_error_pct: float


def _pct(value: float, exact: float) -> float:
    if exact == 0:
        return 0.0 if value == 0 else math.inf
    return 100.0 * (value - exact) / exact


def compare_approximations(model: RiskModel, q: float) -> List[ApproxRow]:
    """Φ_q and the de Finetti barrier for the exact model and each surrogate, with errors in %."""
    exact = build_scale_basis(model, q)
    phi, b_def = exact.phi, de_finetti_barrier(exact)
    rows = [ApproxRow("exact", phi, b_def, 0.0, 0.0)]
    for kind in ApproxKind:
        basis = approximate_basis(model, q, kind)
        b = de_finetti_barrier(basis)
        rows.append(ApproxRow(kind.value, basis.phi, b, _pct(basis.phi, phi), _pct(b, b_def)))
        logger.debug("[approx] %s phi=%.9g b=%.9g", kind.value, basis.phi, b)
    return rows

"""Value function of a (-a, 0, b) policy and an HJB residual check.

The value is -P below -a, k x + J0 on [-a, 0], G_a + J0 S_a on [0, b] and
grows with slope 1 above b.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from riskscale.core.claims import Exponential, RiskModel
from riskscale.core.policy_exponential import PolicyIngredients
from riskscale.core.policy_matrix import MatrixKernel
from riskscale.core.policy_search import J0Form
from riskscale.core.scale import build_scale_basis
from riskscale.models.policy import Method, PolicyParams, PolicySolution
from riskscale.utils.errors import UnsupportedError

logger = logging.getLogger("riskscale.policy")

HJB_STEP = 1e-3
HJB_SKIP = 2


@dataclass(frozen=True)
class ValueFunction:
    form: J0Form
    a: float
    b: float
    J0: float

    @property
    def params(self) -> PolicyParams:
        return self.form.params

    def _body(self, x: float, nu: int) -> float:
        """G_a + J0 S_a on [0, b] (nu = 0) or its derivative (nu = 1)."""
        basis = self.form.basis
        u, e = self.form.loads(self.a)
        vec = self.form.row(x, nu)
        k = self.params.k
        diffusion = basis.model.diffusion
        return float(vec @ u) + k * diffusion * basis.w_q(x, nu) + self.J0 * (basis.z_q(x, nu) + float(vec @ e))

    def _value(self, x: float) -> float:
        if x < -self.a:
            return -self.params.P
        if x <= 0:
            return self.params.k * x + self.J0
        if x <= self.b:
            return self._body(x, 0)
        return self._body(self.b, 0) + (x - self.b)

    def _derivative(self, x: float) -> float:
        if x < -self.a:
            return 0.0
        if x <= 0:
            return self.params.k
        if x <= self.b:
            return self._body(x, 1)
        return 1.0

    def value(self, x):
        if np.ndim(x) == 0:
            return self._value(float(x))
        return np.array([self._value(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))

    def derivative(self, x):
        if np.ndim(x) == 0:
            return self._derivative(float(x))
        return np.array([self._derivative(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


def _form_for(model: RiskModel, solution: PolicySolution, params: PolicyParams) -> J0Form:
    if solution.method is Method.expo_pure and not isinstance(model.claims, Exponential):
        model = model.with_claims(Exponential(1.0 / model.mean_claim))
    basis = build_scale_basis(model, params.q)
    if solution.method is Method.matrix_exact:
        return MatrixKernel(basis).j0_form(params)
    return PolicyIngredients(basis).j0_form(params)


def value_function(
    solution: PolicySolution,
    ingredients: PolicyIngredients,
    params: PolicyParams,
    x,
):
    """V(x) for the scalar-ingredient policy of `solution`."""
    vf = ValueFunction(ingredients.j0_form(params), solution.a_star, solution.b_star, solution.J0)
    return vf.value(x)


def build_value_function(model: RiskModel, solution: PolicySolution, params: Optional[PolicyParams] = None) -> ValueFunction:
    """Value function matching the engine that produced `solution`."""
    params = params or solution.params
    if params is None:
        raise UnsupportedError("solution carries no policy parameters")
    return ValueFunction(_form_for(model, solution, params), solution.a_star, solution.b_star, solution.J0)


@dataclass(frozen=True)
class _Piece:
    """V(u) = alpha + slope u + Σ coefs e^{rates u} on [lo, hi]."""

    lo: float
    hi: float
    alpha: float
    slope: float = 0.0
    rates: Optional[np.ndarray] = None
    coefs: Optional[np.ndarray] = None

    def primitive(self, u: float, x: float, mu: float) -> float:
        """Antiderivative in u of V(u) μ e^{μ(u - x)}."""
        if u == -math.inf:
            return 0.0
        val = math.exp(mu * (u - x)) * (self.alpha + self.slope * u - self.slope / mu)
        if self.rates is not None:
            growth = np.exp((self.rates + mu) * u - mu * x)
            val += float(np.real(np.sum(self.coefs * mu / (self.rates + mu) * growth)))
        return val


def _pieces(vf: ValueFunction) -> List[_Piece]:
    basis = vf.form.basis
    model = basis.model
    params = vf.params
    u, e = vf.form.loads(vf.a)
    w = float(u[0]) + vf.J0 * float(e[0])
    roots, coefs = basis.roots, basis.coefficients
    q, c = basis.q, model.c
    z_const = 1.0 - q * float(np.real(np.sum(coefs / roots)))
    body = vf.J0 * q * coefs / roots + w * (c * coefs - q * coefs / roots)
    top = vf.value(vf.b)
    return [
        _Piece(-math.inf, -vf.a, -params.P),
        _Piece(-vf.a, 0.0, vf.J0, params.k),
        _Piece(0.0, vf.b, (vf.J0 - w) * z_const, 0.0, roots, body),
        _Piece(vf.b, math.inf, top - vf.b, 1.0),
    ]


def _convolution(pieces: List[_Piece], x: float, mu: float) -> float:
    """∫_{-inf}^{x} V(u) μ e^{-μ(x - u)} du, piece by piece."""
    total = 0.0
    for piece in pieces:
        hi = min(piece.hi, x)
        if hi <= piece.lo:
            continue
        total += piece.primitive(hi, x, mu) - piece.primitive(piece.lo, x, mu)
    return total


def hjb_residual(
    model: RiskModel,
    params: PolicyParams,
    solution: PolicySolution,
    step: float = HJB_STEP,
    skip: int = HJB_SKIP,
) -> float:
    """
    Largest |max{H, 1 - V', V' - k}| on x >= 0 and |max{V' - k, -P - V}| on
    x < 0 over a grid on [-a - 1, b + 2], skipping `skip` steps around -a, 0
    and b. H(x) = c V' + λ ∫ V(x - y) μ e^{-μy} dy - (q + λ) V.

    Raises:
        UnsupportedError: claims are not exponential.
    """
    if not isinstance(model.claims, Exponential) or model.diffusion > 0:
        raise UnsupportedError("HJB residual needs exponential claims and diffusion = 0")
    mu, lam, c = model.claims.rate, model.lam, model.c
    ing = PolicyIngredients.from_model(model, params.q)
    vf = ValueFunction(ing.j0_form(params), solution.a_star, solution.b_star, solution.J0)
    pieces = _pieces(vf)

    a, b = solution.a_star, solution.b_star
    grid = np.arange(-a - 1.0, b + 2.0 + step / 2, step)
    kinks = np.array([-a, 0.0, b])
    keep = np.min(np.abs(grid[:, None] - kinks[None, :]), axis=1) > skip * step
    worst = 0.0
    where = math.nan
    for x in grid[keep]:
        x = float(x)
        v, dv = vf.value(x), vf.derivative(x)
        if x >= 0:
            h = c * dv + lam * _convolution(pieces, x, mu) - (params.q + lam) * v
            term = max(h, 1.0 - dv, dv - params.k)
        else:
            term = max(dv - params.k, -params.P - v)
        if abs(term) > worst:
            worst, where = abs(term), x
    logger.debug("[policy] HJB residual %.3e at x=%.6g", worst, where)
    return worst

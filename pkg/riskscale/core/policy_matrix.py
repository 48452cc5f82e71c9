"""Exact (-a, 0, b) policy values for matrix-exponential claims.

The row vector vecC(x) = λ β ∫_0^x W_q(x - y) e^{yB} dy carries the whole
dependence on the barrier: with M(a) = -B⁻¹ - e^{aB}(aI - B⁻¹),

    J0 = (1 - vecC'(b) (k M(a) + P e^{aB}) 1) / (q W_q(b) + vecC'(b) e^{aB} 1).

Each exponential term A e^{γ x} of W_q integrates against e^{yB} through the
resolvent (B - γI)⁻¹; terms with γ next to an eigenvalue of B are integrated
numerically instead.
"""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad_vec

from riskscale.core import env
from riskscale.core.claims import Exponential, MatrixExponential, RiskModel
from riskscale.core.policy_exponential import (
    c2_root,
    expo_ci,
    expo_pure,
    optimize_exponential,
)
from riskscale.core.policy_search import (
    J0Form,
    barrier_cap,
    default_a_max,
    maximize_j0,
)
from riskscale.core.scale import ScaleBasis, build_scale_basis
from riskscale.models.policy import Method, PolicyParams, PolicySolution, pick_best
from riskscale.utils.errors import UnsupportedError

logger = logging.getLogger("riskscale.policy")

RESOLVENT_TOL = 1e-8
QUAD_EPSREL = 1e-12
OPTIMUM_CHECK_TOL = 1e-6


class MatrixKernel:
    """vecC and its derivatives for one scale basis."""

    def __init__(self, basis: ScaleBasis):
        model = basis.model
        if model.diffusion > 0:
            raise UnsupportedError("matrix policy formulas need diffusion = 0")
        self.basis = basis
        self.law: MatrixExponential = model.claims.as_matrix_exponential()
        self.lam = model.lam
        beta, B = self.law.to_matrix_form()
        self.beta = beta
        self.B = B
        self.n = B.shape[0]
        self.ones = np.ones(self.n)
        eigs = np.linalg.eigvals(B)
        # (γ, A, weight, β(B - γI)⁻¹ or None for the quadrature terms)
        self._terms = []
        for gamma, coef, weight in basis.terms():
            if np.min(np.abs(eigs - gamma)) < RESOLVENT_TOL:
                logger.warning(
                    "[policy] root %.6g%+.6gj sits on an eigenvalue of B; using quadrature",
                    gamma.real, gamma.imag,
                )
                resolved = None
            else:
                shifted = B.astype(complex) - gamma * np.eye(self.n)
                resolved = np.linalg.solve(shifted.T, beta.astype(complex))
            self._terms.append((gamma, coef, weight, resolved))

    def _integral(self, gamma: complex, x: float) -> np.ndarray:
        """β ∫_0^x e^{γ(x-y)} e^{yB} dy by adaptive quadrature."""

        def integrand(y: float) -> np.ndarray:
            row = np.exp(gamma * (x - y)) * (self.beta @ self.law.expm(y))
            return np.concatenate([row.real, row.imag])

        val, _ = quad_vec(integrand, 0.0, x, epsrel=QUAD_EPSREL)
        return val[: self.n] + 1j * val[self.n :]

    def row(self, x: float, nu: int = 0) -> np.ndarray:
        """ν-th derivative of vecC at x."""
        x = float(x)
        ex = self.law.expm(x)
        powered = np.linalg.matrix_power(self.B, nu) @ ex
        total = np.zeros(self.n)
        for gamma, coef, weight, resolved in self._terms:
            if resolved is not None:
                term = resolved @ powered - gamma**nu * np.exp(gamma * x) * resolved
            else:
                # I_ν = Σ_{k<ν} γ^k β B^{ν-1-k} e^{xB} + γ^ν I_0
                term = gamma**nu * self._integral(gamma, x)
                for k in range(nu):
                    term = term + gamma**k * (self.beta @ np.linalg.matrix_power(self.B, nu - 1 - k) @ ex)
            total = total + weight * np.real(coef * term)
        return self.lam * total

    def loads(self, a: float, params: PolicyParams) -> Tuple[np.ndarray, np.ndarray]:
        """(k M(a) 1 + P e^{aB} 1, e^{aB} 1)."""
        tail = self.law.expm(a) @ self.ones
        return params.k * (self.law.mean_matrix(a) @ self.ones) + params.P * tail, tail

    def j0_form(self, params: PolicyParams) -> J0Form:
        return J0Form(
            basis=self.basis,
            params=params,
            row=self.row,
            loads=lambda a: self.loads(a, params),
        )


def matrix_ingredients(
    model: RiskModel,
    basis: ScaleBasis,
    a: float,
    x: float,
    params: PolicyParams,
    kernel: Optional[MatrixKernel] = None,
) -> Tuple[float, float, float]:
    """
    (C_a(x), G_a(x), S_a(x)) for the injection limit a.

    C_a = vecC(x) e^{aB} 1, G_a = vecC(x)(k M(a) + P e^{aB}) 1 + k·diffusion·W_q(x),
    S_a = Z_q(x) + C_a(x).
    """
    if kernel is None:
        kernel = MatrixKernel(basis)
    vec = kernel.row(x, 0)
    u, e = kernel.loads(a, params)
    c_a = float(vec @ e)
    g_a = float(vec @ u) + params.k * model.diffusion * basis.w_q(x)
    return c_a, g_a, basis.z_q(x) + c_a


def j0_matrix(
    model: RiskModel,
    params: PolicyParams,
    a: float,
    b: float,
    basis: Optional[ScaleBasis] = None,
) -> float:
    """
    Value at 0 of the (-a, 0, b) policy for matrix-exponential claims.

    Raises:
        DegeneratePolicyError: nonpositive denominator.
    """
    if basis is None:
        basis = build_scale_basis(model, params.q)
    return MatrixKernel(basis).j0_form(params).value(a, b)


def b_stationarity_value(kernel: MatrixKernel, params: PolicyParams, a: float, b: float) -> float:
    """
    -vecC''(b)(k M(a) + P e^{aB}) 1 / (q W_q'(b) + vecC''(b) e^{aB} 1).

    Equals J0 at a barrier where ∂J0/∂b = 0.
    """
    return kernel.j0_form(params).stationarity(a, b)


def optimum_gaps(form: J0Form, solution: PolicySolution) -> Tuple[float, float]:
    """
    First-order gaps of a returned optimum: |J0 - (k a* - P)| when a* > 0 and
    |J0 - N_b/D_b| when b* > 0 (0.0 where the condition does not apply).

    A gap above OPTIMUM_CHECK_TOL (relative to max(1, |J0|)) is logged as a warning.
    """
    params = solution.params or form.params
    a, b, j0 = solution.a_star, solution.b_star, solution.J0
    fit = abs(j0 - (params.k * a - params.P)) if a > 0 else 0.0
    stationary = abs(j0 - form.stationarity(a, b)) if b > 0 else 0.0
    tol = OPTIMUM_CHECK_TOL * max(1.0, abs(j0))
    if fit > tol:
        logger.warning("[policy] smooth fit off by %.3e at a=%.9g", fit, a)
    if stationary > tol:
        logger.warning("[policy] b-stationarity off by %.3e at b=%.9g", stationary, b)
    return fit, stationary


def optimize_matrix(model: RiskModel, params: PolicyParams) -> PolicySolution:
    """
    Numeric optimum over (a, b) for matrix-exponential claims.

    The barrier range ends at the first rising root of C'' (or the 5/Φ_q
    horizon), the injection range starts at 8 m_1 k.
    """
    params.check_against(model.c)
    basis = build_scale_basis(model, params.q)
    kernel = MatrixKernel(basis)
    cap = barrier_cap(c2_root(basis), env.search_horizon(basis.phi))
    form = kernel.j0_form(params)
    candidates = maximize_j0(form, default_a_max(model.mean_claim, params.k), cap)
    solution = pick_best(candidates, Method.matrix_exact, params)
    optimum_gaps(form, solution)
    logger.debug(
        "[policy] matrix optimum a=%.9g b=%.9g J0=%.9g", solution.a_star, solution.b_star, solution.J0
    )
    return solution


def solve_policy(model: RiskModel, params: PolicyParams, method: Method) -> PolicySolution:
    """Dispatch to the engine of `method`."""
    method = Method(method)
    if method is Method.exact_exponential:
        if not isinstance(model.claims, Exponential):
            raise UnsupportedError("exact-exponential needs exponential claims; use matrix")
        return optimize_exponential(model, params)
    if method is Method.expo_pure:
        return expo_pure(model, params)
    if method is Method.expo_ci:
        return expo_ci(model, params)
    return optimize_matrix(model, params)

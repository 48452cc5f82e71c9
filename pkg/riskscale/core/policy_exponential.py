"""(-a, 0, b) policies valued with scalar ingredients.

The curves γ = 1/C', θ = W_q/C' and j = γ'/(q θ') of a scale basis turn the
value at 0 of a policy into the scalar formula

    J0 = (1 - C'(b) (k m(a) + P F̄(a))) / (F̄(a) C'(b) + q W_q(b)).

It is exact for exponential claims, where the optimal a(b) is a Lambert-W
expression and the optimal barriers are roots of η. For other claim laws
the same formula with the true W_q, F̄ and m is the "expo CI" surrogate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from riskscale.core import env
from riskscale.core.claims import Exponential, RiskModel
from riskscale.core.lambertw import lambert_w0, lambert_w0_exp
from riskscale.core.policy_search import (
    J0Form,
    barrier_cap,
    default_a_max,
    maximize_1d,
    maximize_j0,
)
from riskscale.core.scale import (
    ScaleBasis,
    bracketed_roots,
    build_scale_basis,
    search_grid,
)
from riskscale.models.policy import (
    Candidate,
    Method,
    PolicyParams,
    PolicySolution,
    pick_best,
)
from riskscale.utils.errors import (
    DegeneratePolicyError,
    InfeasibleError,
    KcUndefinedError,
    NoPenaltyError,
    UnsupportedError,
)

logger = logging.getLogger("riskscale.policy")

ETA_SCAN_STEPS = 2000
ETA_XTOL = 1e-12


@dataclass(frozen=True)
class PolicyIngredients:
    """Scalar curves of one scale basis; needs a model without diffusion."""

    basis: ScaleBasis

    def __post_init__(self):
        if self.basis.model.diffusion > 0:
            raise UnsupportedError("policy ingredients need diffusion = 0")

    @classmethod
    def from_model(cls, model: RiskModel, q: float) -> "PolicyIngredients":
        return cls(build_scale_basis(model, q))

    @property
    def model(self) -> RiskModel:
        return self.basis.model

    @property
    def q(self) -> float:
        return self.basis.q

    def c_prime(self, b: float) -> float:
        return self.basis.c_q(b, 1)

    def gamma(self, b: float) -> float:
        return 1.0 / self.c_prime(b)

    def theta(self, b: float) -> float:
        return self.basis.w_q(b) / self.c_prime(b)

    def j(self, b: float) -> float:
        """j = γ'/(q θ') = -C''/(q (W' C' - W C''))."""
        w, w1 = self.basis.w_q(b), self.basis.w_q(b, 1)
        c1, c2 = self.c_prime(b), self.basis.c_q(b, 2)
        return -c2 / (self.q * (w1 * c1 - w * c2))

    def s(self, b: float, params: PolicyParams) -> float:
        return (self.j(b) + params.P) / params.k

    def survival(self, a: float) -> float:
        return float(self.model.claims.survival(a)) if math.isfinite(a) else 0.0

    def mean_function(self, a: float) -> float:
        return float(self.model.claims.mean_function(a))

    def j0_form(self, params: PolicyParams) -> J0Form:
        """The scalar formula in the separable shape used by the numeric search."""

        def row(b: float, nu: int) -> np.ndarray:
            return np.array([self.basis.c_q(b, nu)])

        def loads(a: float) -> Tuple[np.ndarray, np.ndarray]:
            tail = self.survival(a)
            return (
                np.array([params.k * self.mean_function(a) + params.P * tail]),
                np.array([tail]),
            )

        return J0Form(basis=self.basis, params=params, row=row, loads=loads)


def _exponential_rate(model: RiskModel) -> float:
    if not isinstance(model.claims, Exponential):
        raise UnsupportedError(
            f"exponential claims required, got {type(model.claims).__name__}"
        )
    if model.diffusion > 0:
        raise UnsupportedError("exponential policy formulas need diffusion = 0")
    return model.claims.rate


def j0_value(ingredients: PolicyIngredients, params: PolicyParams, a: float, b: float) -> float:
    """
    Value at 0 of the (-a, 0, b) policy from the scalar formula.

    a = inf gives the policy that always injects (F̄ = 0, m = m_1).

    Raises:
        DegeneratePolicyError: F̄(a) C'(b) + q W_q(b) <= 0.
    """
    c1 = ingredients.c_prime(b)
    tail = ingredients.survival(a)
    num = 1.0 - c1 * (params.k * ingredients.mean_function(a) + params.P * tail)
    den = tail * c1 + ingredients.q * ingredients.basis.w_q(b)
    if not den > 0:
        raise DegeneratePolicyError(f"J0 denominator {den!r} <= 0 at a={a!r}, b={b!r}")
    return num / den


def a_of_b(ingredients: PolicyIngredients, params: PolicyParams, b: float) -> float:
    """
    Optimal injection limit for the barrier b (exponential claims).

    a(b) = (-h + L0(e^h / (q θ))) / μ with h = 1/(q θ) - (μ/k)(γ/(q θ) + P).
    The value is clamped at 0 when P <= -1/(q W_q(b)).

    Raises:
        UnsupportedError: claims are not exponential.
        InfeasibleError: the Lambert argument is not finite.
    """
    mu = _exponential_rate(ingredients.model)
    qtheta = ingredients.q * ingredients.theta(b)
    h = 1.0 / qtheta - (mu / params.k) * (ingredients.gamma(b) / qtheta + params.P)
    t = h - math.log(qtheta)
    if not math.isfinite(t):
        raise InfeasibleError(f"Lambert argument exp({t!r}) out of range at b={b!r}")
    a = (-h + lambert_w0_exp(t)) / mu
    if a < 0:
        logger.debug("[policy] a(b) clamped at 0 for b=%.6g (raw %.3e)", b, a)
        return 0.0
    return a


def eta_at(ingredients: PolicyIngredients, params: PolicyParams, b: float, a: float) -> float:
    """η(b, a) = γ/θ - (k/(μθ))(1 - e^{-μa}) - q(k a - P); zero along a = a(b)."""
    mu = _exponential_rate(ingredients.model)
    theta = ingredients.theta(b)
    return (
        ingredients.gamma(b) / theta
        + (params.k / (mu * theta)) * math.expm1(-mu * a)
        - ingredients.q * (params.k * a - params.P)
    )


def eta(ingredients: PolicyIngredients, params: PolicyParams, b: float) -> float:
    """η(b) = η(b, s(b)); its roots are the interior barrier candidates."""
    return eta_at(ingredients, params, b, ingredients.s(b, params))


def delta_kp(model: RiskModel, params: PolicyParams) -> float:
    """δ_{k,P}: negative exactly when injections are cheap enough (k > k_c)."""
    mu = _exponential_rate(model)
    lam, q, k = model.lam, params.q, params.k
    c_eff = params.effective_premium(model.c)
    x = (c_eff * mu - lam - q) / q
    return (lam + q - lam * k * (-math.expm1(-x / k))) / mu


def _kc_ratio(model: RiskModel, q: float, P: float) -> float:
    mu = _exponential_rate(model)
    lam = model.lam
    return (lam / (q + lam)) * ((model.c + q * P) * mu - lam - q) / q


def penalty_lower_bound(model: RiskModel, q: float) -> float:
    """P_l: k_c exists exactly for P > P_l."""
    mu = _exponential_rate(model)
    lam = model.lam
    return ((lam + q) ** 2 / (mu * lam) - model.c) / q


def k_critical(model: RiskModel, q: float, P: float) -> float:
    """
    Critical injection cost k_c = ((q+λ)/λ) f / (f + L0(-f e^{-f})).

    Raises:
        KcUndefinedError: f <= 1 (P <= P_l); carries P_l.
    """
    f = _kc_ratio(model, q, P)
    if not f > 1:
        p_lower = penalty_lower_bound(model, q)
        raise KcUndefinedError(
            f"k_c undefined: f={f:.6g} <= 1 (needs P > {p_lower:.6g})", p_lower=p_lower
        )
    lam = model.lam
    return ((q + lam) / lam) * f / (f + lambert_w0(-f * math.exp(-f)))


def k_critical_curve(
    model: RiskModel, q: float, penalties: Iterable[float]
) -> List[Tuple[float, Optional[float]]]:
    """(P, k_c) pairs; k_c is None where it does not exist."""
    out: List[Tuple[float, Optional[float]]] = []
    for P in penalties:
        try:
            out.append((float(P), k_critical(model, q, P)))
        except KcUndefinedError:
            out.append((float(P), None))
    return out


def q_limit(model: RiskModel, P: float) -> float:
    """
    Discount rate q_l above which k_c stops existing.

    Positive root of q² + q(2λ - μλP) + λ² - μλc = 0; NaN when no positive root.
    """
    mu = _exponential_rate(model)
    lam, c = model.lam, model.c
    bq = 2.0 * lam - mu * lam * P
    cq = lam * lam - mu * lam * c
    disc = bq * bq - 4.0 * cq
    if disc < 0:
        return math.nan
    root = (-bq + math.sqrt(disc)) / 2.0
    return root if root > 0 else math.nan


def b_bar(basis: ScaleBasis, x_max: Optional[float] = None) -> float:
    """
    Right end of the barrier search: the root of C'' where it turns from
    negative to positive, 0 when C''(0) >= 0.

    Exponential claims use log(ρ²/Φ²)/(Φ - ρ) with ρ the negative root.
    Returns the search horizon when C'' stays negative on it.
    """
    if basis.c_q(0.0, 2) >= 0:
        return 0.0
    model = basis.model
    if isinstance(model.claims, Exponential) and model.diffusion == 0 and basis.rho_minus is not None:
        phi, rho = basis.phi, basis.rho_minus
        return math.log(rho * rho / (phi * phi)) / (phi - rho)
    root = c2_root(basis, x_max)
    if root is None:
        horizon = env.search_horizon(basis.phi, x_max)
        logger.debug("[policy] C'' negative up to the horizon %.6g", horizon)
        return horizon
    return root


def c2_root(basis: ScaleBasis, x_max: Optional[float] = None) -> Optional[float]:
    """First rising root of C'' on the search grid, None when there is none."""
    horizon = env.search_horizon(basis.phi, x_max)
    roots = bracketed_roots(lambda x: basis.c_q(x, 2), search_grid(horizon), direction=1)
    return roots[0] if roots else None


def optimize_exponential(model: RiskModel, params: PolicyParams) -> PolicySolution:
    """
    Optimal (-a, 0, b) policy for exponential claims.

    Candidates are b = 0 with a = a(0), and every root b of η on (0, b̄] with
    a = s(b). The J0-maximal candidate wins.
    """
    _exponential_rate(model)
    params.check_against(model.c)
    ing = PolicyIngredients.from_model(model, params.q)

    a0 = a_of_b(ing, params, 0.0)
    candidates = [Candidate(a=a0, b=0.0, J0=j0_value(ing, params, a0, 0.0), source="b=0")]

    top = b_bar(ing.basis)
    if top > 0:
        grid = np.linspace(0.0, top, ETA_SCAN_STEPS + 1)
        roots = bracketed_roots(
            np.vectorize(lambda b: eta(ing, params, float(b))), grid, xtol=ETA_XTOL
        )
        for b in roots:
            if b <= 0:
                continue
            a = max(ing.s(b, params), 0.0)
            candidates.append(
                Candidate(a=a, b=b, J0=j0_value(ing, params, a, b), source="eta-root")
            )
    logger.debug("[policy] exponential candidates: %s", candidates)
    return pick_best(candidates, Method.exact_exponential, params)


def solve_P_of_b(ingredients: PolicyIngredients, params: PolicyParams, b: float) -> float:
    """
    Penalty P for which b is a root of η (the other parameters fixed).

    P = -(k/μ) log[1 + (q θ j - γ)/(k/μ)] - j

    Raises:
        NoPenaltyError: the log argument is not positive.
    """
    mu = _exponential_rate(ingredients.model)
    scale = params.k / mu
    j = ingredients.j(b)
    arg = 1.0 + (ingredients.q * ingredients.theta(b) * j - ingredients.gamma(b)) / scale
    if not arg > 0:
        raise NoPenaltyError(f"no penalty makes b={b!r} a critical barrier (log argument {arg:.6g})")
    return -scale * math.log(arg) - j


def _relabel(solution: PolicySolution, method: Method) -> PolicySolution:
    return PolicySolution(
        a_star=solution.a_star,
        b_star=solution.b_star,
        J0=solution.J0,
        regime=solution.regime,
        method=method,
        candidates=solution.candidates,
        params=solution.params,
    )


def expo_pure(model: RiskModel, params: PolicyParams) -> PolicySolution:
    """Exact exponential optimum after replacing the claims by Exponential(1/m_1)."""
    if isinstance(model.claims, Exponential):
        return _relabel(optimize_exponential(model, params), Method.expo_pure)
    surrogate = model.with_claims(Exponential(1.0 / model.mean_claim))
    return _relabel(optimize_exponential(surrogate, params), Method.expo_pure)


def expo_ci(model: RiskModel, params: PolicyParams) -> PolicySolution:
    """Numeric maximization of the scalar formula with the model's own W_q, F̄ and m."""
    if isinstance(model.claims, Exponential):
        return _relabel(optimize_exponential(model, params), Method.expo_ci)
    params.check_against(model.c)
    ing = PolicyIngredients.from_model(model, params.q)
    horizon = env.search_horizon(ing.basis.phi)
    cap = barrier_cap(c2_root(ing.basis), horizon)
    candidates = maximize_j0(ing.j0_form(params), default_a_max(model.mean_claim, params.k), cap)
    return pick_best(candidates, Method.expo_ci, params)


@dataclass(frozen=True)
class BenchmarkReport:
    de_finetti: Candidate
    slg: Candidate
    optimal: PolicySolution
    improvement_pct: float


def benchmark_policies(model: RiskModel, params: PolicyParams) -> BenchmarkReport:
    """
    Compare the optimum with the two classic benchmarks (exponential claims):
    no injections (a = 0) and injections without bankruptcy (a = inf), each
    with its best barrier.
    """
    _exponential_rate(model)
    ing = PolicyIngredients.from_model(model, params.q)
    horizon = env.search_horizon(ing.basis.phi)

    b_def, j_def = maximize_1d(lambda b: j0_value(ing, params, 0.0, b), 0.0, horizon)
    b_slg, j_slg = maximize_1d(lambda b: j0_value(ing, params, math.inf, b), 0.0, horizon)
    optimal = optimize_exponential(model, params)
    reference = max(j_def, j_slg)
    improvement = 100.0 * (optimal.J0 - reference) / abs(reference) if reference else math.inf
    return BenchmarkReport(
        de_finetti=Candidate(a=0.0, b=b_def, J0=j_def, source="de-finetti"),
        slg=Candidate(a=math.inf, b=b_slg, J0=j_slg, source="slg"),
        optimal=optimal,
        improvement_pct=improvement,
    )

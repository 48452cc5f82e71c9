import math

import pytest
from scipy.optimize import brentq

from riskscale.core.claims import Exponential, RiskModel
from riskscale.core.policy_exponential import (
    PolicyIngredients,
    a_of_b,
    b_bar,
    benchmark_policies,
    delta_kp,
    eta,
    expo_ci,
    expo_pure,
    j0_value,
    k_critical,
    k_critical_curve,
    optimize_exponential,
    penalty_lower_bound,
    q_limit,
    solve_P_of_b,
)
from riskscale.core.scale import de_finetti_barrier, de_finetti_value
from riskscale.models.policy import Method, PolicyParams
from riskscale.utils.errors import KcUndefinedError, UnsupportedError, ValidationError


@pytest.fixture()
def ing(exp_model):
    return PolicyIngredients.from_model(exp_model, 0.1)


@pytest.fixture()
def kc_model():
    return RiskModel(c=1.5, lam=1.0, claims=Exponential(2.0))


def test_reference_curves_at_zero(ing):
    assert ing.c_prime(0.0) == pytest.approx(0.5 / 0.75)
    assert ing.gamma(0.0) == pytest.approx(1.5)
    assert ing.theta(0.0) == pytest.approx(2.0)
    assert ing.basis.c_q(0.0, 2) == pytest.approx(-0.8)
    assert ing.j(0.0) == pytest.approx(4.5)
    assert b_bar(ing.basis) == pytest.approx(2.5046, abs=1e-4)


@pytest.mark.parametrize("P", [0.0, 1.0])
@pytest.mark.parametrize("b", [0.0, 0.5, 2.0])
def test_a_of_b_satisfies_smooth_fit(ing, P, b):
    params = PolicyParams(q=0.1, k=1.5, P=P)
    a = a_of_b(ing, params, b)
    assert a > 0
    assert j0_value(ing, params, a, b) == pytest.approx(params.k * a - P, abs=1e-9)
    # a(b) maximizes J0 for the fixed barrier
    best = j0_value(ing, params, a, b)
    assert best >= j0_value(ing, params, a + 0.05, b)
    assert best >= j0_value(ing, params, max(a - 0.05, 0.0), b)


def test_a_of_b_clamps_at_zero(ing):
    # threshold -1/(q W(2)) is about -3.74
    params = PolicyParams(q=0.1, k=1.5, P=-5.0)
    assert a_of_b(ing, params, 2.0) == 0.0


def test_eta_root_and_penalty_inverse(ing):
    params = PolicyParams(q=0.1, k=1.5, P=1.0)
    root = brentq(lambda b: eta(ing, params, b), 0.3, 0.6, xtol=1e-13)
    assert root == pytest.approx(0.469843, abs=1e-4)
    assert ing.s(root, params) == pytest.approx(a_of_b(ing, params, root), abs=1e-7)
    assert solve_P_of_b(ing, params, root) == pytest.approx(1.0, abs=1e-7)


def test_optimizer_candidates(exp_model):
    params = PolicyParams(q=0.1, k=1.5, P=1.0)
    sol = optimize_exponential(exp_model, params)
    assert sol.method is Method.exact_exponential
    assert sol.J0 == max(c.J0 for c in sol.candidates)
    assert sol.candidates[0].source == "b=0"
    roots = [c for c in sol.candidates if c.source == "eta-root"]
    assert roots
    assert min(c.b for c in roots) == pytest.approx(0.469843, abs=1e-4)
    for c in roots:
        assert c.J0 == pytest.approx(params.k * c.a - params.P, abs=1e-7)


def test_optimizer_rejects_low_penalty(exp_model):
    # -c/q = -7.5
    with pytest.raises(ValidationError):
        optimize_exponential(exp_model, PolicyParams(q=0.1, k=1.5, P=-8.0))


def test_exponential_only(hyperexp2_model):
    params = PolicyParams(q=0.1, k=1.5)
    with pytest.raises(UnsupportedError):
        optimize_exponential(hyperexp2_model, params)
    with pytest.raises(UnsupportedError):
        k_critical(hyperexp2_model, 0.1, 1.0)
    ingredients = PolicyIngredients.from_model(hyperexp2_model, 0.1)
    with pytest.raises(UnsupportedError):
        a_of_b(ingredients, params, 0.5)


def test_ingredients_reject_diffusion():
    model = RiskModel(c=1.0, lam=0.5, claims=Exponential(2.0), diffusion=0.1)
    with pytest.raises(UnsupportedError):
        PolicyIngredients.from_model(model, 0.1)


@pytest.mark.parametrize(
    "q, expected",
    [(0.5, 1.56394), (0.8, 2.30482), (1.0, 3.43164), (1.4, 102.403)],
)
def test_k_critical_table(kc_model, q, expected):
    assert k_critical(kc_model, q, 1.0) == pytest.approx(expected, abs=2e-3)


def test_k_critical_small_intensity():
    model = RiskModel(c=1.5, lam=0.01, claims=Exponential(2.0))
    assert k_critical(model, 0.1, 1.0) == pytest.approx(11.882, abs=2e-3)


def test_k_critical_undefined(kc_model):
    assert penalty_lower_bound(kc_model, 0.1) == pytest.approx(-8.95)
    with pytest.raises(KcUndefinedError) as err:
        k_critical(kc_model, 0.1, -9.0)
    assert err.value.p_lower == pytest.approx(-8.95)
    curve = k_critical_curve(kc_model, 0.1, [-9.0, 1.0])
    assert curve[0] == (-9.0, None)
    assert curve[1][1] == pytest.approx(k_critical(kc_model, 0.1, 1.0))


def test_q_limit(kc_model):
    assert q_limit(kc_model, 1.0) == pytest.approx(math.sqrt(2.0))
    small_premium = RiskModel(c=0.4, lam=1.0, claims=Exponential(2.0))
    assert math.isnan(q_limit(small_premium, 0.0))


def test_delta_changes_sign_at_k_critical(kc_model):
    kc = k_critical(kc_model, 0.5, 1.0)
    assert delta_kp(kc_model, PolicyParams(q=0.5, k=2.0, P=1.0)) < 0
    assert delta_kp(kc_model, PolicyParams(q=0.5, k=1.2, P=1.0)) > 0
    assert delta_kp(kc_model, PolicyParams(q=0.5, k=kc, P=1.0)) == pytest.approx(0.0, abs=1e-10)


def test_surrogate_methods_on_exponential_claims(exp_model):
    params = PolicyParams(q=0.1, k=1.5, P=0.0)
    exact = optimize_exponential(exp_model, params)
    pure = expo_pure(exp_model, params)
    ci = expo_ci(exp_model, params)
    assert pure.method is Method.expo_pure
    assert ci.method is Method.expo_ci
    assert pure.J0 == exact.J0 == ci.J0
    assert (pure.a_star, pure.b_star) == (exact.a_star, exact.b_star)


def test_expo_pure_on_hyperexponential(hyperexp2_model):
    sol = expo_pure(hyperexp2_model, PolicyParams(q=0.1, k=1.5, P=0.0))
    assert sol.J0 == pytest.approx(5.99151, abs=2e-3)


def test_benchmarks(exp_model):
    params = PolicyParams(q=0.1, k=1.5, P=0.0)
    report = benchmark_policies(exp_model, params)
    assert report.de_finetti.a == 0.0
    assert math.isinf(report.slg.a)
    assert report.optimal.J0 >= max(report.de_finetti.J0, report.slg.J0) - 1e-9
    assert report.improvement_pct >= -1e-7
    # with P = 0 the no-injection benchmark is the de Finetti policy
    ing = PolicyIngredients.from_model(exp_model, 0.1)
    b_def = de_finetti_barrier(ing.basis)
    assert report.de_finetti.b == pytest.approx(b_def, abs=1e-4)
    assert report.de_finetti.J0 == pytest.approx(de_finetti_value(ing.basis, b_def), abs=1e-9)


def test_huge_penalty_matches_always_inject_policy(exp_model):
    report = benchmark_policies(exp_model, PolicyParams(q=0.1, k=1.5, P=1e6))
    assert report.optimal.J0 == pytest.approx(report.slg.J0, rel=1e-7)
    assert report.optimal.a_star > 1e5


def test_prohibitive_injection_cost_shrinks_injection_limit(exp_model):
    params = PolicyParams(q=0.1, k=1e6, P=1.0)
    ing = PolicyIngredients.from_model(exp_model, 0.1)
    for b in (0.0, 0.5, 1.0, 2.0):
        assert 0.0 <= a_of_b(ing, params, b) < 1e-4

import math

import numpy as np
import pytest
from scipy.integrate import quad

from riskscale.core.claims import (
    Exponential,
    Hyperexponential,
    MatrixExponential,
    RiskModel,
    epsilon_mixture,
    oscillating_density,
)
from riskscale.utils.errors import PoleError, ValidationError


def test_exponential_moments_and_functions():
    law = Exponential(2.0)
    assert law.moment(1) == 0.5
    assert law.moment(3) == pytest.approx(6 / 8)
    assert law.normalized_moment(2) == pytest.approx(0.5)
    assert law.survival(0.0) == 1.0
    assert law.density(1.0) == pytest.approx(2 * math.exp(-2))
    assert law.laplace_transform(1.0).real == pytest.approx(2 / 3)
    assert law.mean_function(math.inf) == 0.5
    with pytest.raises(PoleError):
        law.laplace_transform(-2.0)


def test_hyperexponential_from_density_normalizes():
    law = Hyperexponential.from_density([2 / 3, 2 / 3], [1.0, 2.0])
    assert law.weights == pytest.approx((2 / 3, 1 / 3))
    assert law.mean == pytest.approx(5 / 6)
    assert law.density(0.0) == pytest.approx(4 / 3)
    assert law.survival(0.0) == pytest.approx(1.0)


def test_hyperexponential_merges_duplicate_rates():
    law = Hyperexponential((0.25, 0.25, 0.5), (1.0, 1.0, 3.0))
    assert law.rates == (1.0, 3.0)
    assert law.weights == pytest.approx((0.5, 0.5))


@pytest.mark.parametrize(
    "weights, rates",
    [((0.5, 0.6), (1.0, 2.0)), ((1.0,), (-1.0,)), ((0.5,), (1.0, 2.0))],
)
def test_hyperexponential_rejects_bad_input(weights, rates):
    with pytest.raises(ValidationError):
        Hyperexponential(weights, rates)


def test_mean_function_matches_quadrature():
    law = Hyperexponential.from_density([12 / 83, 42 / 83, 150 / 83], [1.0, 2.0, 3.0])
    for a in (0.0, 0.3, 1.7, 6.0):
        expected, _ = quad(lambda y: y * law.density(y), 0.0, a)
        assert law.mean_function(a) == pytest.approx(expected, abs=1e-12)
    assert law.mean_function(math.inf) == pytest.approx(law.mean)


def test_matrix_form_agrees_with_hyperexponential():
    law = Hyperexponential.from_density([2 / 3, 2 / 3], [1.0, 2.0])
    me = law.as_matrix_exponential()
    xs = np.linspace(0.0, 5.0, 11)
    assert np.allclose(me.survival(xs), law.survival(xs), atol=1e-14)
    assert np.allclose(me.density(xs), law.density(xs), atol=1e-14)
    for i in (1, 2, 3):
        assert me.moment(i) == pytest.approx(law.moment(i), rel=1e-12)
    assert me.mean_function(1.3) == pytest.approx(law.mean_function(1.3), abs=1e-13)
    ones = np.ones(me.order)
    assert float(np.asarray(me.beta) @ me.mean_matrix(1.3) @ ones) == pytest.approx(law.mean_function(1.3), abs=1e-13)
    assert me.laplace_transform(0.7) == pytest.approx(law.laplace_transform(0.7))


def test_transform_polynomials_ratio():
    law = Hyperexponential.from_density([12 / 83, 42 / 83, 150 / 83], [1.0, 2.0, 3.0])
    num, den = law.transform_polynomials()
    assert den.degree() == 3
    assert den.coef[-1] == pytest.approx(1.0)
    for s in (0.0, 0.5, 2.0):
        assert num(s) / den(s) == pytest.approx(law.laplace_transform(s).real, rel=1e-12)
    assert sorted(law.poles().real) == pytest.approx([-3.0, -2.0, -1.0])


def test_from_realization_builds_unit_mass():
    # f(x) = 2 e^{-x} - 2 e^{-2x}
    law = MatrixExponential.from_realization([1.0, 1.0], [[-1.0, 0.0], [0.0, -2.0]], [2.0, -2.0])
    assert sum(law.beta) == pytest.approx(1.0)
    assert law.survival(0.0) == pytest.approx(1.0)
    assert law.density(0.5) == pytest.approx(2 * math.exp(-0.5) - 2 * math.exp(-1.0), rel=1e-12)
    assert law.mean == pytest.approx(1.5)


def test_matrix_exponential_rejects_negative_density():
    with pytest.raises(ValidationError):
        MatrixExponential.from_realization([1.0, 1.0], [[-1.0, 0.0], [0.0, -2.0]], [2.0, -3.0])


def test_oscillating_density_is_a_law():
    law = oscillating_density(1.0, 2.0, 20.0)
    assert law.survival(0.0) == pytest.approx(1.0, abs=1e-12)
    mass, _ = quad(law.density, 0.0, 60.0, limit=500)
    assert mass == pytest.approx(1.0, abs=1e-6)
    mean, _ = quad(lambda y: y * law.density(y), 0.0, 60.0, limit=500)
    assert mean == pytest.approx(law.mean, abs=1e-6)
    xs = np.linspace(0.0, 10.0, 2001)
    assert np.min(law.density(xs)) >= -1e-12


def test_epsilon_mixtures():
    assert epsilon_mixture(1, 1.0).weights == pytest.approx((2 / 3, 1 / 3))
    f2 = epsilon_mixture(2, 1.0)
    ref = Hyperexponential.from_density([12 / 83, 42 / 83, 150 / 83], [1.0, 2.0, 3.0])
    assert f2.weights == pytest.approx(ref.weights)
    assert epsilon_mixture(1, 1e-3).mean == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValidationError):
        epsilon_mixture(3, 1.0)
    with pytest.raises(ValidationError):
        epsilon_mixture(1, 0.0)


def test_risk_model_loading_and_validation():
    claims = Hyperexponential.from_density([2 / 3, 2 / 3], [1.0, 2.0])
    model = RiskModel.from_loading(1.0, claims, 1.0)
    assert model.c == pytest.approx(5 / 3)
    assert model.loading == pytest.approx(1.0)
    assert model.rho == pytest.approx(0.5)
    other = model.with_claims(Exponential(1.2))
    assert other.c == model.c and other.lam == model.lam
    with pytest.raises(ValidationError):
        RiskModel(c=-1.0, lam=1.0, claims=claims)
    with pytest.raises(ValidationError):
        RiskModel(c=1.0, lam=1.0, claims=claims, diffusion=-0.1)


@pytest.fixture(params=["hyperexp3_model", "oscillating_model"])
def rational_law(request):
    return request.getfixturevalue(request.param).claims


@pytest.mark.parametrize("X", [1.0, 5.0, 20.0])
def test_density_integrates_to_distribution_function(rational_law, X):
    total, _ = quad(lambda y: rational_law.density(y), 0.0, X, limit=500, epsabs=1e-12, epsrel=1e-12)
    assert total == pytest.approx(1.0 - rational_law.survival(X), abs=1e-8)


def test_laplace_transform_decreases_on_positive_axis(rational_law):
    values = rational_law.laplace_transform(np.linspace(0.0, 10.0, 41))
    assert np.allclose(values.imag, 0.0, atol=1e-12)
    assert values[0].real == pytest.approx(1.0, abs=1e-10)
    assert np.all(np.diff(values.real) < 0)

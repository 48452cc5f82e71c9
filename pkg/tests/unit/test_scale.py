import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial
from scipy.integrate import quad

from riskscale.core import env
from riskscale.core.claims import Hyperexponential, RiskModel
from riskscale.core.model_config import load_model_config
from riskscale.core.scale import (
    bracketed_roots,
    build_scale_basis,
    cl_roots,
    de_finetti_barrier,
    de_finetti_value,
    initial_values,
    laplace_exponent,
    search_grid,
)
from riskscale.utils.errors import ConfigError, MultiplicityError, UnsupportedError, ValidationError


def test_exponential_roots_closed_form(exp_model):
    # 0.75 s^2 + 0.9 s - 0.2 = 0
    roots = cl_roots(exp_model, 0.1)
    disc = math.sqrt(0.81 + 0.6)
    assert roots.size == 2
    assert roots[0].real == pytest.approx((-0.9 + disc) / 1.5, abs=1e-12)
    assert roots[1].real == pytest.approx((-0.9 - disc) / 1.5, abs=1e-12)
    basis = build_scale_basis(exp_model, 0.1)
    assert basis.phi == pytest.approx(0.191623, abs=1e-6)
    assert basis.rho_minus == pytest.approx(-1.391623, abs=1e-6)


@pytest.mark.parametrize("fixture", ["exp_model", "hyperexp2_model", "hyperexp3_model"])
def test_initial_values_match_basis(fixture, request):
    model = request.getfixturevalue(fixture)
    basis = build_scale_basis(model, 0.1)
    w0, w1, w2 = initial_values(model, 0.1)
    assert basis.w_q(0.0) == pytest.approx(w0, abs=1e-10)
    assert basis.w_q(0.0, 1) == pytest.approx(w1, abs=1e-10)
    assert basis.w_q(0.0, 2) == pytest.approx(w2, abs=1e-10)
    assert basis.z_q(0.0) == pytest.approx(1.0)
    assert basis.c_q(0.0) == pytest.approx(0.0, abs=1e-10)
    assert laplace_exponent(model, basis.phi).real == pytest.approx(0.1, abs=1e-10)


def test_hyperexp3_basis(hyperexp3_model):
    basis = build_scale_basis(hyperexp3_model, 0.1)
    assert basis.roots.size == 4
    assert np.all(basis.roots.imag == 0.0)
    total = sum(w * a.real for _, a, w in basis.terms())
    assert total == pytest.approx(1.0 / hyperexp3_model.c, abs=1e-10)
    assert basis.rho_minus < -2.0


def test_z_and_c_derivatives(hyperexp2_model):
    basis = build_scale_basis(hyperexp2_model, 0.2)
    xs = np.array([0.5, 1.0, 3.0])
    h = 1e-5
    dz = (basis.z_q(xs + h) - basis.z_q(xs - h)) / (2 * h)
    assert np.allclose(dz, basis.z_q(xs, 1), atol=1e-7)
    assert np.allclose(dz, 0.2 * basis.w_q(xs), atol=1e-7)
    dc = (basis.c_q(xs + h) - basis.c_q(xs - h)) / (2 * h)
    assert np.allclose(dc, basis.c_q(xs, 1), atol=1e-7)


def test_oscillating_roots_come_in_pairs(data_dir):
    model = load_model_config(data_dir / "oscillating.yaml").build()
    basis = build_scale_basis(model, 0.1)
    assert basis.roots.size == 4
    assert np.sum(basis.roots.imag > 0) == np.sum(basis.roots.imag < 0)
    xs = np.linspace(0.0, 5.0, 7)
    assert np.all(np.isreal(basis.w_q(xs)))
    assert basis.w_q(0.0) == pytest.approx(1.0 / model.c, abs=1e-10)


def test_cl_roots_rejects_nonpositive_q(exp_model):
    with pytest.raises(ValidationError):
        cl_roots(exp_model, 0.0)


def test_initial_values_need_no_diffusion():
    model = RiskModel(c=1.0, lam=0.5, claims=Hyperexponential((1.0,), (2.0,)), diffusion=0.1)
    with pytest.raises(UnsupportedError):
        initial_values(model, 0.1)


def test_de_finetti_closed_form_matches_grid_search(exp_model):
    closed = de_finetti_barrier(build_scale_basis(exp_model, 0.1))
    # same law as a one-phase mixture takes the numeric route
    twin = exp_model.with_claims(Hyperexponential((1.0,), (2.0,)))
    numeric = de_finetti_barrier(build_scale_basis(twin, 0.1))
    assert closed == pytest.approx(1.6951, abs=1e-3)
    assert numeric == pytest.approx(closed, abs=1e-8)


def test_de_finetti_barrier_at_zero():
    # (q + lam)^2 >= c lam mu
    model = RiskModel(c=1.2, lam=1.0, claims=Hyperexponential((1.0,), (1.0,)))
    basis = build_scale_basis(model, 0.5)
    assert de_finetti_barrier(basis) == 0.0


def test_de_finetti_value(exp_model):
    basis = build_scale_basis(exp_model, 0.1)
    b = de_finetti_barrier(basis)
    assert de_finetti_value(basis, b) == pytest.approx(basis.w_q(0.0) / basis.w_q(b, 1))
    assert de_finetti_value(basis, b) > de_finetti_value(basis, b + 1.0)


def test_bracketed_roots_directions():
    grid = np.linspace(0.0, 10.0, 101)
    both = bracketed_roots(np.sin, grid)
    assert both == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-10)
    assert bracketed_roots(np.sin, grid, direction=1) == pytest.approx([2 * math.pi], abs=1e-10)
    assert bracketed_roots(np.sin, grid, direction=-1) == pytest.approx([math.pi, 3 * math.pi], abs=1e-10)


def test_search_grid_bounds():
    assert search_grid(1.0).size == 4001
    assert search_grid(100.0).size == 20001
    assert search_grid(1e6).size == 200_001


def test_search_horizon_precedence(monkeypatch):
    monkeypatch.delenv("RISKSCALE_XMAX", raising=False)
    assert env.search_horizon(0.5) == pytest.approx(10.0)
    monkeypatch.setenv("RISKSCALE_XMAX", "7.5")
    assert env.search_horizon(0.5) == 7.5
    assert env.search_horizon(0.5, x_max=3.0) == 3.0


@pytest.mark.parametrize("raw", ["abc", "-1", "0"])
def test_search_horizon_rejects_bad_env(monkeypatch, raw):
    monkeypatch.setenv("RISKSCALE_XMAX", raw)
    with pytest.raises(ConfigError):
        env.search_horizon(0.5)


def test_cl_roots_flags_repeated_roots(exp_model, monkeypatch):
    # 0.75 s^2 + 0.9 s - 0.2 with the positive root doubled
    phi = (-0.9 + math.sqrt(1.41)) / 1.5
    rho = (-0.9 - math.sqrt(1.41)) / 1.5
    doubled = Polynomial.fromroots([phi, phi, rho])
    monkeypatch.setattr("riskscale.core.scale._Exponent.characteristic", lambda self, q: doubled)
    with pytest.raises(MultiplicityError, match="perturb q"):
        cl_roots(exp_model, 0.1)


ROUGH_MODELS = [("hyperexp2_model", 0.1), ("hyperexp3_model", 5 / 48), ("oscillating_model", 0.1)]


@pytest.mark.parametrize("fixture, q", ROUGH_MODELS[1:])
def test_c_is_claim_tail_convolved_with_w(fixture, q, request):
    model = request.getfixturevalue(fixture)
    basis = build_scale_basis(model, q)
    for x in (0.5, 2.0, 4.0):
        conv, _ = quad(
            lambda y: basis.w_q(x - y) * model.claims.survival(y),
            0.0, x, limit=400, epsabs=1e-12, epsrel=1e-12,
        )
        assert model.lam * conv == pytest.approx(basis.c_q(x), abs=1e-8)


@pytest.mark.parametrize("fixture, q", ROUGH_MODELS)
def test_partial_fractions_reproduce_resolvent(fixture, q, request):
    model = request.getfixturevalue(fixture)
    basis = build_scale_basis(model, q)
    for s in (0.5 + 1.0j, 2.0 - 0.7j, -0.3 + 2.0j, 1.5 + 0.2j):
        expected = 1.0 / (laplace_exponent(model, s) - q)
        total = 0.0j
        for gamma, coef, weight in basis.terms():
            total += coef / (s - gamma)
            if weight == 2.0:
                total += np.conj(coef) / (s - np.conj(gamma))
        assert abs(total - expected) <= 1e-10 * abs(expected)


@pytest.mark.parametrize("fixture, q", ROUGH_MODELS)
def test_w_grows_like_dominant_exponential(fixture, q, request):
    model = request.getfixturevalue(fixture)
    basis = build_scale_basis(model, q)
    phi, h = basis.phi, 1e-5
    slope = (laplace_exponent(model, phi + h) - laplace_exponent(model, phi - h)).real / (2 * h)
    assert math.exp(-phi * 300.0) * basis.w_q(300.0) == pytest.approx(1.0 / slope, rel=1e-7)

import math

import numpy as np
import pytest

from riskscale.core.policy_exponential import PolicyIngredients, a_of_b
from riskscale.core.policy_search import (
    barrier_cap,
    best_a,
    default_a_max,
    grid_values,
    maximize_1d,
    skewed_grid,
)
from riskscale.models.policy import Candidate, Method, PolicyParams, Regime, pick_best
from riskscale.utils.errors import ValidationError


def test_skewed_grid():
    grid = skewed_grid(10.0, 11)
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(10.0)
    steps = np.diff(grid)
    assert np.all(steps > 0)
    assert np.all(np.diff(steps) > 0)


def test_maximize_1d():
    x, val = maximize_1d(lambda t: -(t - 1.234) ** 2 + 2.0, 0.0, 5.0)
    assert x == pytest.approx(1.234, abs=1e-6)
    assert val == pytest.approx(2.0)
    # maximum on the boundary
    x, val = maximize_1d(lambda t: t, 0.0, 3.0)
    assert x == pytest.approx(3.0, abs=1e-6)


@pytest.mark.parametrize("P, b", [(0.0, 0.0), (1.0, 0.8), (-5.0, 2.0)])
def test_best_a_matches_closed_form(exp_model, P, b):
    params = PolicyParams(q=0.1, k=1.5, P=P)
    ing = PolicyIngredients.from_model(exp_model, 0.1)
    form = ing.j0_form(params)
    expected = a_of_b(ing, params, b)
    found = best_a(form, b, default_a_max(exp_model.mean_claim, params.k))
    assert found == pytest.approx(expected, abs=1e-9)


def test_best_a_expands_bracket(exp_model, caplog):
    params = PolicyParams(q=0.1, k=1.5, P=0.0)
    ing = PolicyIngredients.from_model(exp_model, 0.1)
    form = ing.j0_form(params)
    expected = a_of_b(ing, params, 0.5)
    with caplog.at_level("WARNING", logger="riskscale.policy"):
        found = best_a(form, 0.5, expected / 3)
    assert found == pytest.approx(expected, abs=1e-9)
    assert "expanding a_max" in caplog.text


def test_grid_values_match_form(exp_model):
    params = PolicyParams(q=0.1, k=1.5, P=0.0)
    form = PolicyIngredients.from_model(exp_model, 0.1).j0_form(params)
    a_grid = np.array([0.0, 1.0, 3.0])
    b_grid = np.array([0.0, 0.5])
    values = grid_values(form, a_grid, b_grid)
    assert values.shape == (3, 2)
    assert values[1, 1] == pytest.approx(form.value(1.0, 0.5))


def test_barrier_cap():
    assert barrier_cap(None, 7.0) == 7.0
    assert barrier_cap(0.0, 7.0) == 7.0
    assert barrier_cap(2.5, 7.0) == 2.5


def test_pick_best_prefers_smaller_barrier_on_ties():
    params = PolicyParams(q=0.1, k=1.5)
    sol = pick_best(
        [Candidate(1.0, 0.0, 2.0, "b=0"), Candidate(1.0, 0.5, 2.0, "grid"), Candidate(1.0, 0.2, 1.0)],
        Method.expo_ci,
        params,
    )
    assert sol.b_star == 0.0
    assert sol.regime is Regime.zero_barrier
    assert len(sol.candidates) == 3
    with pytest.raises(ValidationError):
        pick_best([], Method.expo_ci, params)


def test_pick_best_tie_window():
    params = PolicyParams(q=0.1, k=1.5)
    near = pick_best([Candidate(1.0, 0.3, 2.0), Candidate(1.0, 0.8, 2.0 + 1e-14)], Method.matrix_exact, params)
    assert near.b_star == 0.3
    clear = pick_best([Candidate(1.0, 0.3, 2.0), Candidate(1.0, 0.8, 2.0 + 1e-9)], Method.matrix_exact, params)
    assert clear.b_star == 0.8
    assert clear.J0 == 2.0 + 1e-9


@pytest.mark.parametrize("kwargs", [{"q": 0.0, "k": 1.5}, {"q": 0.1, "k": 0.9}, {"q": 0.1, "k": 1.5, "P": math.nan}])
def test_policy_params_validation(kwargs):
    with pytest.raises(ValidationError):
        PolicyParams(**kwargs)


def test_policy_params_penalty_bound():
    params = PolicyParams(q=0.1, k=1.5, P=-7.0)
    assert params.check_against(0.75) is params
    assert params.effective_premium(0.75) == pytest.approx(0.05)
    with pytest.raises(ValidationError):
        PolicyParams(q=0.1, k=1.5, P=-7.5).check_against(0.75)

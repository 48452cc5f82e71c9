"""Grid-plus-bracketing maximizer of J0(a, b) shared by the numeric policy paths.

Every J0 handled here has the separable shape

    J0(a, b) = (1 - X'(b)·u(a)) / (q W_q(b) + X'(b)·e(a))

where X is the expected scale after a jump (a scalar C for the exponential
ingredients, a row vector for matrix-exponential claims), u(a) collects the
injection cost and penalty loads and e(a) the tail beyond the injection limit.
For a fixed b the a-derivative is a positive multiple of J0 - (k a - P), so the
best a is the unique root of that difference; the search therefore works on
the profile b -> J0(a(b), b) only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from riskscale.core.scale import ScaleBasis
from riskscale.models.policy import Candidate, PolicyParams
from riskscale.utils.errors import DegeneratePolicyError, NumericError

logger = logging.getLogger("riskscale.policy")

GRID_POINTS = 60
GRID_CURVATURE = 3.0
MAX_A_DOUBLINGS = 8
A_XTOL = 1e-13
B_XTOL = 1e-12

Loads = Tuple[np.ndarray, np.ndarray]


def skewed_grid(hi: float, points: int = GRID_POINTS) -> np.ndarray:
    """Points on [0, hi] packed towards 0."""
    t = np.linspace(0.0, 1.0, points)
    return hi * np.expm1(GRID_CURVATURE * t) / math.expm1(GRID_CURVATURE)


@dataclass(frozen=True)
class J0Form:
    """
    J0 in separable form.

    `row(b, nu)` returns the ν-th derivative of X at b as a 1-d array and
    `loads(a)` returns (u(a), e(a)) with the same length.
    """

    basis: ScaleBasis
    params: PolicyParams
    row: Callable[[float, int], np.ndarray]
    loads: Callable[[float], Loads]

    def parts(self, a: float, b: float) -> Tuple[float, float]:
        u, e = self.loads(a)
        x1 = self.row(b, 1)
        num = 1.0 - float(x1 @ u)
        den = self.params.q * self.basis.w_q(b) + float(x1 @ e)
        return num, den

    def value(self, a: float, b: float) -> float:
        num, den = self.parts(a, b)
        if not den > 0:
            raise DegeneratePolicyError(f"J0 denominator {den!r} <= 0 at a={a!r}, b={b!r}")
        return num / den

    def b_parts(self, a: float, b: float) -> Tuple[float, float]:
        """b-derivatives of numerator and denominator."""
        u, e = self.loads(a)
        x2 = self.row(b, 2)
        return -float(x2 @ u), self.params.q * self.basis.w_q(b, 1) + float(x2 @ e)

    def b_slope(self, a: float, b: float) -> float:
        """∂J0/∂b at (a, b)."""
        num, den = self.parts(a, b)
        dnum, dden = self.b_parts(a, b)
        return (dnum * den - num * dden) / (den * den)

    def stationarity(self, a: float, b: float) -> float:
        """N_b / D_b: equals J0 wherever ∂J0/∂b vanishes."""
        dnum, dden = self.b_parts(a, b)
        return dnum / dden


def best_a(form: J0Form, b: float, a_max: float) -> float:
    """
    Unique root of J0(a, b) - (k a - P) on a >= 0; 0 when the difference is
    already nonpositive at a = 0.

    The bracket starts at a_max and doubles up to MAX_A_DOUBLINGS times.
    """
    k, P = form.params.k, form.params.P

    def gap(a: float) -> float:
        return form.value(a, b) - (k * a - P)

    if gap(0.0) <= 0:
        return 0.0
    hi = a_max
    for attempt in range(MAX_A_DOUBLINGS + 1):
        if gap(hi) < 0:
            break
        if attempt == MAX_A_DOUBLINGS:
            raise NumericError(f"no injection limit bracket below a={hi:.6g} at b={b:.6g}")
        logger.warning("[policy] expanding a_max %.6g -> %.6g at b=%.6g", hi, 2 * hi, b)
        hi *= 2.0
    return float(brentq(gap, 0.0, hi, xtol=A_XTOL))


def _profile_max(form: J0Form, lo: float, hi: float, a_max: float) -> float:
    """Refine a local maximum of b -> J0(a(b), b) inside [lo, hi]."""

    def slope(b: float) -> float:
        return form.b_slope(best_a(form, b, a_max), b)

    s_lo, s_hi = slope(lo), slope(hi)
    if s_lo > 0 > s_hi:
        return float(brentq(slope, lo, hi, xtol=B_XTOL))
    if s_lo <= 0 and s_hi <= 0:
        return lo
    if s_lo >= 0 and s_hi >= 0:
        return hi
    res = minimize_scalar(
        lambda b: -form.value(best_a(form, b, a_max), b),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": B_XTOL},
    )
    return float(res.x)


def grid_values(form: J0Form, a_grid: np.ndarray, b_grid: np.ndarray) -> np.ndarray:
    """J0 on the tensor grid, rows indexed by a; degenerate cells are -inf."""
    loads = [form.loads(a) for a in a_grid]
    u = np.array([l[0] for l in loads])
    e = np.array([l[1] for l in loads])
    x1 = np.array([form.row(b, 1) for b in b_grid])
    w = np.asarray(form.basis.w_q(b_grid))
    num = 1.0 - u @ x1.T
    den = form.params.q * w[None, :] + e @ x1.T
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / den, -np.inf)
    return out


def maximize_j0(
    form: J0Form,
    a_max: float,
    b_cap: float,
) -> List[Candidate]:
    """
    Candidate ledger of the numeric search: the b = 0 candidate plus every
    refined local maximum of the profile over [0, b_cap].
    """
    a_grid = skewed_grid(a_max)
    b_grid = skewed_grid(b_cap) if b_cap > 0 else np.zeros(1)
    coarse = grid_values(form, a_grid, b_grid)
    i, j = np.unravel_index(int(np.argmax(coarse)), coarse.shape)
    logger.debug("[policy] coarse grid best a=%.6g b=%.6g J0=%.9g", a_grid[i], b_grid[j], coarse[i, j])

    profile = []
    for b in b_grid:
        a = best_a(form, float(b), a_max)
        profile.append(form.value(a, float(b)))
    profile = np.asarray(profile)

    a0 = best_a(form, 0.0, a_max)
    candidates = [
        Candidate(a=a0, b=0.0, J0=form.value(a0, 0.0), source="b=0"),
        Candidate(a=float(a_grid[i]), b=float(b_grid[j]), J0=float(coarse[i, j]), source="grid"),
    ]
    n = b_grid.size
    for m in range(n):
        left = profile[m - 1] if m > 0 else -math.inf
        right = profile[m + 1] if m + 1 < n else -math.inf
        if n == 1 or not (profile[m] >= left and profile[m] > right):
            continue
        lo = float(b_grid[max(m - 1, 0)])
        hi = float(b_grid[m + 1]) if m + 1 < n else float(b_grid[m])
        if m + 1 == n:
            logger.warning("[policy] profile maximum at the barrier cap b=%.6g", hi)
        b = _profile_max(form, lo, hi, a_max)
        if b == 0.0:
            continue
        a = best_a(form, b, a_max)
        candidates.append(Candidate(a=a, b=b, J0=form.value(a, b), source="profile"))
    return candidates


def maximize_1d(fn: Callable[[float], float], lo: float, hi: float, points: int = 201) -> Tuple[float, float]:
    """Global maximizer of a smooth scalar function on [lo, hi]: grid then bounded refinement."""
    grid = np.linspace(lo, hi, points)
    vals = np.array([fn(float(x)) for x in grid])
    m = int(np.argmax(vals))
    left, right = grid[max(m - 1, 0)], grid[min(m + 1, points - 1)]
    if right > left:
        res = minimize_scalar(lambda x: -fn(x), bounds=(left, right), method="bounded", options={"xatol": B_XTOL})
        if -res.fun >= vals[m]:
            return float(res.x), float(-res.fun)
    return float(grid[m]), float(vals[m])


def default_a_max(mean_claim: float, k: float) -> float:
    return 8.0 * mean_claim * k


def barrier_cap(b_bar: Optional[float], horizon: float) -> float:
    return b_bar if b_bar is not None and b_bar > 0 else horizon

"""Real branches of the Lambert-W function.

Both branches start from a series or asymptotic guess and are refined with
Halley's iteration until the step is below one ulp of the iterate. Near the
branch point -1/e the expansion in p = sqrt(2(e z + 1)) is accurate enough
on its own, so Halley (whose denominator degenerates at w = -1) is skipped.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable

import numpy as np
from scipy.special import wrightomega

from riskscale.utils.errors import DomainError

INV_E = math.exp(-1.0)
BRANCH_TOL = 1e-15
_MAX_ITER = 60
_SERIES_ONLY = 1e-3
# exp() overflows past this argument
_EXP_LIMIT = 700.0


class LambertBranch(str, Enum):
    principal = "principal"
    lower = "lower"


def _branch_series(p: float) -> float:
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3 - 43.0 / 540.0 * p**4 + 769.0 / 17280.0 * p**5


def _halley(z: float, w: float) -> float:
    for _ in range(_MAX_ITER):
        ew = math.exp(w)
        f = w * ew - z
        if f == 0.0:
            break
        w1 = w + 1.0
        if w1 == 0.0:
            break
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if abs(dw) <= 2.3e-16 * max(abs(w), 1e-300):
            break
    return w


def _branch_p(z: float) -> float:
    return math.sqrt(max(2.0 * (math.e * z + 1.0), 0.0))


def _w0(z: float) -> float:
    if math.isnan(z):
        raise DomainError("Lambert W0 of NaN")
    if z < -INV_E - BRANCH_TOL:
        raise DomainError(f"Lambert W0 is defined for z >= -1/e, got z={z!r}")
    if z <= -INV_E:
        return -1.0
    if z == 0.0:
        return 0.0
    if math.isinf(z):
        return math.inf
    p = _branch_p(z)
    if p < _SERIES_ONLY:
        return _branch_series(p)
    if z < -0.25:
        w = _branch_series(p)
    elif z < 3.0:
        w = math.log1p(z)
    else:
        l1 = math.log(z)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    return _halley(z, w)


def _wm1(z: float) -> float:
    if math.isnan(z):
        raise DomainError("Lambert W-1 of NaN")
    if z >= 0.0 or z < -INV_E - BRANCH_TOL:
        raise DomainError(f"Lambert W-1 is defined for -1/e <= z < 0, got z={z!r}")
    if z <= -INV_E:
        return -1.0
    p = _branch_p(z)
    if p < _SERIES_ONLY:
        return _branch_series(-p)
    if z < -0.25:
        w = _branch_series(-p)
    else:
        l1 = math.log(-z)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    return _halley(z, w)


def _apply(fn: Callable[[float], float], z):
    if np.ndim(z) == 0:
        return fn(float(z))
    arr = np.asarray(z, dtype=float)
    return np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)


def lambert_w0(z):
    """
    Principal branch L0: the w >= -1 solving w * e^w = z, for z >= -1/e.

    Arguments within 1e-15 below -1/e are clamped to the branch point.
    Accepts scalars or array-likes.

    Raises:
        DomainError: z < -1/e.
    """
    return _apply(_w0, z)


def lambert_wm1(z):
    """
    Lower real branch L-1: the w <= -1 solving w * e^w = z, for -1/e <= z < 0.

    Raises:
        DomainError: z outside [-1/e, 0).
    """
    return _apply(_wm1, z)


def lambert_w(z, branch: LambertBranch = LambertBranch.principal):
    if LambertBranch(branch) is LambertBranch.lower:
        return lambert_wm1(z)
    return lambert_w0(z)


def lambert_w0_exp(t: float) -> float:
    """L0(e^t) without overflowing exp for large t (Wright omega on the real line)."""
    if t <= _EXP_LIMIT:
        return _w0(math.exp(t))
    return float(np.real(wrightomega(t)))

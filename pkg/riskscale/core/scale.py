"""q-scale functions W_q, Z_q and the expected scale after a jump C.

For a claim transform f̂ = N/D the function 1/(κ(s) - q) is rational with
denominator (κ(s) - q) D(s). Its simple roots γ_j and residues
A_j = 1/κ'(γ_j) give W_q(x) = Σ A_j e^{γ_j x}. Conjugate pairs are kept as one
representative and evaluated as 2 Re(A e^{γ x}), so evaluations are real.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from riskscale.core import env
from riskscale.core.claims import Exponential, RiskModel
from riskscale.utils.errors import (
    MultiplicityError,
    NumericError,
    UnsupportedError,
    ValidationError,
)

logger = logging.getLogger("riskscale.scale")

NEWTON_STEPS = 3
REAL_TOL = 1e-10
MULTIPLICITY_TOL = 1e-8
ROOT_RESIDUAL_TOL = 1e-9
GRID_STEP = 5e-3
GRID_MIN_POINTS = 4001
GRID_MAX_POINTS = 200_001


def laplace_exponent(model: RiskModel, s):
    """κ(s) = diffusion·s² + c s - lam (1 - f̂(s)); raises PoleError at poles of f̂."""
    s = np.asarray(s, dtype=complex)
    fhat = np.asarray(model.claims.laplace_transform(s))
    val = model.diffusion * s * s + model.c * s - model.lam * (1.0 - fhat)
    return complex(val) if np.ndim(val) == 0 else val


class _Exponent:
    """κ and κ' evaluated through the transform polynomials (no pole checks)."""

    def __init__(self, model: RiskModel):
        self.model = model
        self.num, self.den = model.claims.transform_polynomials()
        self.dnum = self.num.deriv()
        self.dden = self.den.deriv()

    def characteristic(self, q: float) -> Polynomial:
        m = self.model
        return Polynomial([-m.lam - q, m.c, m.diffusion]) * self.den + m.lam * self.num

    def __call__(self, s):
        m = self.model
        n, d = self.num(s), self.den(s)
        dn, dd = self.dnum(s), self.dden(s)
        kappa = m.diffusion * s * s + m.c * s - m.lam + m.lam * n / d
        dkappa = 2.0 * m.diffusion * s + m.c + m.lam * (dn * d - n * dd) / (d * d)
        return kappa, dkappa


def _clean(root: complex) -> complex:
    if abs(root.imag) <= REAL_TOL * max(1.0, abs(root)):
        return complex(root.real, 0.0)
    return root


def cl_roots(model: RiskModel, q: float) -> np.ndarray:
    """
    Roots of κ(s) = q, sorted by decreasing real part (Φ_q first).

    Companion-matrix eigenvalues of the numerator polynomial, polished by a
    few Newton steps on κ(s) - q.

    Raises:
        ValidationError: q <= 0.
        MultiplicityError: two roots closer than 1e-8 (relative to the largest).
        NumericError: a polished root misses κ(γ) = q.
    """
    q = float(q)
    if not q > 0:
        raise ValidationError(f"discount rate q must be positive, got {q!r}")
    kappa = _Exponent(model)
    raw = kappa.characteristic(q).roots().astype(complex)
    polished = []
    for root in raw:
        for _ in range(NEWTON_STEPS):
            val, slope = kappa(root)
            if slope == 0:
                break
            root = root - (val - q) / slope
        val, _ = kappa(root)
        if abs(val - q) > ROOT_RESIDUAL_TOL * (1.0 + abs(q)):
            raise NumericError(f"root polish failed at s={root:.6g}: |kappa(s)-q|={abs(val - q):.3e}")
        polished.append(_clean(complex(root)))
    upper = [r for r in polished if r.imag > 0]
    lower = [r for r in polished if r.imag < 0]
    if len(upper) != len(lower):
        raise NumericError("complex Cramer-Lundberg roots are not in conjugate pairs")
    # lower half of each pair is rebuilt as the exact conjugate
    reals = [r for r in polished if r.imag == 0]
    roots = np.array(reals + upper + [r.conjugate() for r in upper], dtype=complex)

    scale = max(1.0, float(np.max(np.abs(roots))))
    gaps = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(gaps, np.inf)
    if np.min(gaps) < MULTIPLICITY_TOL * scale:
        raise MultiplicityError(
            f"repeated Cramer-Lundberg roots at q={q!r}; perturb q by about 1e-9 and retry"
        )
    order = np.lexsort((-roots.imag, -roots.real))
    return roots[order]


@dataclass(frozen=True, eq=False)
class ScaleBasis:
    """Exponential-sum representation of W_q for one model and discount rate."""

    model: RiskModel
    q: float
    roots: np.ndarray
    coefficients: np.ndarray
    phi: float
    rho_minus: Optional[float] = None
    _real_rates: np.ndarray = field(init=False, repr=False)
    _real_coefs: np.ndarray = field(init=False, repr=False)
    _pair_rates: np.ndarray = field(init=False, repr=False)
    _pair_coefs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        real = self.roots.imag == 0.0
        upper = self.roots.imag > 0.0
        object.__setattr__(self, "_real_rates", self.roots[real].real.copy())
        object.__setattr__(self, "_real_coefs", self.coefficients[real].real.copy())
        object.__setattr__(self, "_pair_rates", self.roots[upper].copy())
        object.__setattr__(self, "_pair_coefs", self.coefficients[upper].copy())

    def terms(self) -> Iterator[tuple[complex, complex, float]]:
        """Yield (γ, A, weight): weight 1 for real roots, 2 for a pair taken as 2 Re(.)."""
        for g, a in zip(self._real_rates, self._real_coefs):
            yield complex(g), complex(a), 1.0
        for g, a in zip(self._pair_rates, self._pair_coefs):
            yield complex(g), complex(a), 2.0

    def _expsum(self, x, real_coefs, pair_coefs):
        x = np.asarray(x, dtype=float)
        grid = x[..., None]
        total = np.exp(grid * self._real_rates) @ real_coefs
        if self._pair_rates.size:
            total = total + 2.0 * np.real(np.exp(grid * self._pair_rates) @ pair_coefs)
        return float(total) if np.ndim(x) == 0 else total

    def w_q(self, x, nu: int = 0):
        """ν-th derivative of W_q."""
        return self._expsum(
            x, self._real_coefs * self._real_rates**nu, self._pair_coefs * self._pair_rates**nu
        )

    def z_q(self, x, nu: int = 0):
        """Z_q(x) = 1 + q ∫_0^x W_q, or its ν-th derivative."""
        if nu > 0:
            return self.q * self.w_q(x, nu - 1)
        x = np.asarray(x, dtype=float)
        grid = x[..., None]
        total = np.expm1(grid * self._real_rates) @ (self._real_coefs / self._real_rates)
        if self._pair_rates.size:
            growth = np.exp(grid * self._pair_rates) - 1.0
            total = total + 2.0 * np.real(growth @ (self._pair_coefs / self._pair_rates))
        val = 1.0 + self.q * total
        return float(val) if np.ndim(x) == 0 else val

    def c_q(self, x, nu: int = 0):
        """Expected scale after a jump, C = c W_q - Z_q + diffusion·W_q', or its ν-th derivative."""
        m = self.model
        val = m.c * np.asarray(self.w_q(x, nu)) - np.asarray(self.z_q(x, nu))
        if m.diffusion:
            val = val + m.diffusion * np.asarray(self.w_q(x, nu + 1))
        return float(val) if np.ndim(x) == 0 else val


def build_scale_basis(model: RiskModel, q: float) -> ScaleBasis:
    """Roots and residues of 1/(κ(s) - q) for `model`."""
    roots = cl_roots(model, q)
    kappa = _Exponent(model)
    _, slopes = kappa(roots)
    coefficients = 1.0 / np.asarray(slopes, dtype=complex)
    on_axis = roots.imag == 0.0
    coefficients[on_axis] = coefficients[on_axis].real

    phi_root = roots[0]
    if phi_root.imag != 0.0 or not phi_root.real > 0:
        raise NumericError(f"dominant root is not real and positive: {phi_root!r}")
    reals = roots[roots.imag == 0.0].real
    negatives = reals[reals < 0]
    rho_minus = float(np.min(negatives)) if negatives.size else None

    basis = ScaleBasis(
        model=model,
        q=float(q),
        roots=roots,
        coefficients=coefficients,
        phi=float(phi_root.real),
        rho_minus=rho_minus,
    )
    logger.debug("[scale] q=%g phi=%.9g roots=%d", q, basis.phi, roots.size)
    return basis


def initial_values(model: RiskModel, q: float) -> tuple[float, float, float]:
    """
    Closed forms of W_q(0), W_q'(0), W_q''(0) for a model without diffusion.

    Raises:
        UnsupportedError: diffusion > 0.
    """
    if model.diffusion > 0:
        raise UnsupportedError("initial values in closed form need diffusion = 0")
    c, lam = model.c, model.lam
    f0 = float(model.claims.density(0.0))
    return 1.0 / c, (q + lam) / c**2, ((lam + q) ** 2 - c * lam * f0) / c**3


def de_finetti_value(basis: ScaleBasis, b: float, x: float = 0.0) -> float:
    """Value W_q(x)/W_q'(b) of paying everything above the barrier b, without injections."""
    return basis.w_q(x) / basis.w_q(b, 1)


def search_grid(horizon: float) -> np.ndarray:
    points = int(min(GRID_MAX_POINTS, max(GRID_MIN_POINTS, math.ceil(horizon / GRID_STEP) + 1)))
    return np.linspace(0.0, horizon, points)


def bracketed_roots(
    fn: Callable[[np.ndarray], np.ndarray],
    grid: np.ndarray,
    direction: int = 0,
    xtol: float = 1e-12,
) -> list[float]:
    """
    Locate sign changes of `fn` on `grid` and refine each with Brent's method.

    direction > 0 keeps only crossings from negative to nonnegative,
    direction < 0 only the opposite ones, 0 keeps both.
    """
    values = np.asarray(fn(grid), dtype=float)
    negative = values < 0
    found: list[float] = []
    for i in range(grid.size - 1):
        if negative[i] == negative[i + 1]:
            continue
        rising = bool(negative[i])
        if (direction > 0 and not rising) or (direction < 0 and rising):
            continue
        found.append(float(brentq(lambda t: float(fn(t)), grid[i], grid[i + 1], xtol=xtol)))
    return found


def de_finetti_barrier(basis: ScaleBasis, x_max: Optional[float] = None) -> float:
    """
    Last global minimizer of W_q' on [0, x_max].

    Exponential claims use the closed form; otherwise the sign changes of
    W_q'' are bracketed on a grid and compared with the endpoint 0.
    """
    model = basis.model
    claims = model.claims
    if isinstance(claims, Exponential) and model.diffusion == 0 and basis.rho_minus is not None:
        mu, lam, c, q = claims.rate, model.lam, model.c, basis.q
        if (q + lam) ** 2 - c * lam * mu >= 0:
            return 0.0
        g1, g2 = basis.phi, basis.rho_minus
        return math.log(g2**2 * (mu + g2) / (g1**2 * (mu + g1))) / (g1 - g2)

    horizon = env.search_horizon(basis.phi, x_max)
    minima = bracketed_roots(lambda x: basis.w_q(x, 2), search_grid(horizon), direction=1)
    candidates = np.array([0.0] + minima)
    slopes = np.asarray(basis.w_q(candidates, 1))
    best = float(np.min(slopes))
    ties = np.flatnonzero(slopes <= best + 1e-12 * abs(best))
    b = float(candidates[ties[-1]])
    logger.debug("[scale] de Finetti barrier %.9g among %d candidate(s)", b, candidates.size)
    return b

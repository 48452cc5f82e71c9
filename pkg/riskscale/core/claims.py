"""Claim-size laws with rational Laplace transforms, and the risk model built on them.

Three variants share one interface: exponential, hyperexponential (finite
mixture of exponentials) and matrix-exponential with survival beta e^{xB} 1.
Every method accepts a scalar or an array and returns the same shape.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import linalg, signal

from riskscale.utils.errors import PoleError, ValidationError

logger = logging.getLogger("riskscale.claims")

POLE_TOL = 1e-12
MASS_TOL = 1e-9
EIG_COND_MAX = 1e8
DEFAULT_CHECK_POINTS = 10_000
DEFAULT_CHECK_SPAN = 50.0


def _shaped(x, value):
    """Return a float for scalar input, the array otherwise."""
    if np.ndim(x) == 0:
        return float(value)
    return value


def _check_order(i: int) -> int:
    if int(i) != i or i < 1:
        raise ValidationError(f"moment order must be a positive integer, got {i!r}")
    return int(i)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be a positive finite number, got {value!r}")
    return value


class ClaimDistribution(ABC):
    """Common interface of the claim-size laws."""

    @property
    @abstractmethod
    def order(self) -> int:
        """Number of phases n (degree of the transform denominator)."""

    @abstractmethod
    def moment(self, i: int) -> float:
        """Raw moment m_i."""

    @abstractmethod
    def survival(self, x):
        """Tail probability F̄(x)."""

    @abstractmethod
    def density(self, x):
        """Density f(x)."""

    @abstractmethod
    def laplace_transform(self, s):
        """f̂(s) = E[e^{-s Y}]."""

    @abstractmethod
    def mean_function(self, a):
        """Truncated mean m(a) = ∫_0^a y f(y) dy."""

    @abstractmethod
    def to_matrix_form(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (beta, B) with survival beta e^{xB} 1."""

    @property
    def mean(self) -> float:
        return self.moment(1)

    def normalized_moment(self, i: int) -> float:
        """m_i / (i m_{i-1}); order 1 returns the mean (m_0 = 1)."""
        i = _check_order(i)
        if i == 1:
            return self.moment(1)
        return self.moment(i) / (i * self.moment(i - 1))

    def poles(self) -> np.ndarray:
        """Poles of the transform (eigenvalues of B)."""
        _, B = self.to_matrix_form()
        return np.linalg.eigvals(B)

    def transform_polynomials(self) -> tuple[Polynomial, Polynomial]:
        """
        Return (N, D) with f̂ = N/D, D monic of degree n.

        Built from the state-space realization beta (sI - B)^{-1} (-B) 1.
        """
        beta, B = self.to_matrix_form()
        n = B.shape[0]
        closing = (-B @ np.ones(n)).reshape(n, 1)
        num, den = signal.ss2tf(B, closing, beta.reshape(1, n), np.zeros((1, 1)))
        return Polynomial(np.real(num[0][::-1])).trim(), Polynomial(np.real(den[::-1]))

    def as_matrix_exponential(self) -> "MatrixExponential":
        beta, B = self.to_matrix_form()
        return MatrixExponential(tuple(beta), tuple(map(tuple, B)), check_points=0)


@dataclass(frozen=True)
class Exponential(ClaimDistribution):
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    @property
    def order(self) -> int:
        return 1

    def moment(self, i: int) -> float:
        i = _check_order(i)
        return math.factorial(i) / self.rate**i

    def normalized_moment(self, i: int) -> float:
        _check_order(i)
        return 1.0 / self.rate

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, np.exp(-self.rate * x))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return _shaped(x, self.rate * np.exp(-self.rate * x))

    def laplace_transform(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(np.abs(s + self.rate) < POLE_TOL):
            raise PoleError(f"transform pole at s={-self.rate!r}")
        return _transform_out(s, self.rate / (self.rate + s))

    def mean_function(self, a):
        a = np.asarray(a, dtype=float)
        mu = self.rate
        finite = np.isfinite(a)
        safe = np.where(finite, a, 0.0)
        body = -np.expm1(-mu * safe) / mu - safe * np.exp(-mu * safe)
        return _shaped(a, np.where(finite, body, 1.0 / mu))

    def to_matrix_form(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([1.0]), np.array([[-self.rate]])


def _transform_out(s: np.ndarray, value):
    if np.ndim(s) == 0:
        return complex(value)
    return value


@dataclass(frozen=True)
class Hyperexponential(ClaimDistribution):
    """Mixture Σ p_j Exp(μ_j); duplicate rates are merged by summing their weights."""

    weights: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        p = np.asarray(self.weights, dtype=float).ravel()
        mu = np.asarray(self.rates, dtype=float).ravel()
        if p.size == 0 or p.size != mu.size:
            raise ValidationError("hyperexponential needs as many weights as rates (at least one)")
        if not (np.all(np.isfinite(p)) and np.all(p > 0)):
            raise ValidationError(f"hyperexponential weights must be positive, got {p.tolist()}")
        if not (np.all(np.isfinite(mu)) and np.all(mu > 0)):
            raise ValidationError(f"hyperexponential rates must be positive, got {mu.tolist()}")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise ValidationError(f"hyperexponential weights must sum to 1, got {p.sum()!r}")
        p = p / p.sum()
        order = np.argsort(mu, kind="stable")
        merged_p: list[float] = []
        merged_mu: list[float] = []
        for j in order:
            if merged_mu and abs(mu[j] - merged_mu[-1]) <= 1e-12 * mu[j]:
                merged_p[-1] += float(p[j])
                continue
            merged_p.append(float(p[j]))
            merged_mu.append(float(mu[j]))
        if len(merged_mu) < mu.size:
            logger.debug("[claims] merged %d duplicate rate(s)", mu.size - len(merged_mu))
        object.__setattr__(self, "weights", tuple(merged_p))
        object.__setattr__(self, "rates", tuple(merged_mu))
        object.__setattr__(self, "_p", np.array(merged_p))
        object.__setattr__(self, "_mu", np.array(merged_mu))

    @classmethod
    def from_density(cls, coefficients: Sequence[float], rates: Sequence[float]) -> "Hyperexponential":
        """Build from f(x) = Σ k_j e^{-μ_j x}; the k_j are normalized internally."""
        k = np.asarray(coefficients, dtype=float).ravel()
        mu = np.asarray(rates, dtype=float).ravel()
        if k.size != mu.size:
            raise ValidationError("density needs as many coefficients as rates")
        if not (np.all(mu > 0) and np.all(k > 0)):
            raise ValidationError("density coefficients and rates must be positive")
        mass = k / mu
        return cls(tuple((mass / mass.sum()).tolist()), tuple(mu.tolist()))

    @property
    def order(self) -> int:
        return len(self.rates)

    def moment(self, i: int) -> float:
        i = _check_order(i)
        return math.factorial(i) * float(np.sum(self._p * self._mu ** (-i)))

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        val = np.exp(-np.multiply.outer(x, self._mu)) @ self._p
        return _shaped(x, val)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        val = np.exp(-np.multiply.outer(x, self._mu)) @ (self._p * self._mu)
        return _shaped(x, val)

    def laplace_transform(self, s):
        s = np.asarray(s, dtype=complex)
        gaps = np.abs(np.add.outer(s, self._mu))
        if np.any(gaps < POLE_TOL):
            raise PoleError(f"transform pole near s={s!r}")
        val = (1.0 / np.add.outer(s, self._mu)) @ (self._p * self._mu)
        return _transform_out(s, val)

    def mean_function(self, a):
        a = np.asarray(a, dtype=float)
        finite = np.isfinite(a)
        safe = np.where(finite, a, 0.0)
        ma = np.multiply.outer(safe, self._mu)
        terms = -np.expm1(-ma) / self._mu - safe[..., None] * np.exp(-ma)
        val = terms @ self._p
        return _shaped(a, np.where(finite, val, self.moment(1)))

    def to_matrix_form(self) -> tuple[np.ndarray, np.ndarray]:
        return self._p.copy(), np.diag(-self._mu)


@dataclass(frozen=True)
class MatrixExponential(ClaimDistribution):
    """
    Law with survival beta e^{xB} 1 and density beta e^{xB} (-B) 1.

    Construction checks that beta 1 = 1, that every eigenvalue of B has a
    negative real part, and that the density is nonnegative on
    `check_points` points of [0, check_span * m_1] (0 disables the check).
    """

    beta: tuple[float, ...]
    generator: tuple[tuple[float, ...], ...]
    check_points: int = field(default=DEFAULT_CHECK_POINTS, compare=False)
    check_span: float = field(default=DEFAULT_CHECK_SPAN, compare=False)

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).ravel()
        B = np.asarray(self.generator, dtype=float)
        n = beta.size
        if n == 0 or B.shape != (n, n):
            raise ValidationError(f"generator must be {n}x{n} to match beta, got shape {B.shape}")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(B))):
            raise ValidationError("beta and generator must be finite")
        if abs(beta.sum() - 1.0) > MASS_TOL:
            raise ValidationError(f"beta must sum to 1 (survival(0)=1), got {beta.sum()!r}")
        vals, V = np.linalg.eig(B)
        if np.max(vals.real) >= 0.0:
            raise ValidationError(f"generator eigenvalues need negative real parts, got {vals.tolist()}")
        object.__setattr__(self, "beta", tuple(beta.tolist()))
        object.__setattr__(self, "generator", tuple(tuple(r) for r in B.tolist()))
        object.__setattr__(self, "_beta", beta)
        object.__setattr__(self, "_B", B)
        object.__setattr__(self, "_Binv", np.linalg.inv(B))
        object.__setattr__(self, "_vals", vals)
        eig = None
        if np.linalg.cond(V) < EIG_COND_MAX:
            eig = (V, np.linalg.inv(V))
        else:
            logger.debug("[claims] generator ill-conditioned for eigen route, using expm")
        object.__setattr__(self, "_eig", eig)
        if self.check_points:
            self._check_density()

    def _check_density(self) -> None:
        grid = np.linspace(0.0, self.check_span * self.moment(1), int(self.check_points))
        dens = self.density(grid)
        floor = -1e-10 * max(1.0, float(np.max(np.abs(dens))))
        if np.min(dens) < floor:
            x_bad = float(grid[int(np.argmin(dens))])
            raise ValidationError(
                f"matrix-exponential density is negative at x={x_bad:.6g} ({np.min(dens):.3e})"
            )

    @classmethod
    def from_realization(
        cls,
        row: Sequence[float],
        generator: Sequence[Sequence[float]],
        column: Sequence[float],
        **options,
    ) -> "MatrixExponential":
        """
        Build from any density realization f(x) = row e^{xB} column.

        A similarity T with T 1 = -B^{-1} column moves the closing vector to
        (-B) 1; the density is normalized to unit mass on the way.
        """
        v = np.asarray(row, dtype=float).ravel()
        B = np.asarray(generator, dtype=float)
        w = np.asarray(column, dtype=float).ravel()
        n = v.size
        if B.shape != (n, n) or w.size != n:
            raise ValidationError("row, generator and column dimensions do not match")
        u = -np.linalg.solve(B, w)
        mass = float(v @ u)
        if not mass > 0:
            raise ValidationError(f"density realization has nonpositive mass {mass!r}")
        u = u / mass
        i = int(np.argmax(np.abs(u)))
        T = np.eye(n)
        T[:, i] += u - 1.0
        Tinv = np.linalg.inv(T)
        beta = v @ T
        return cls(tuple(beta.tolist()), tuple(map(tuple, (Tinv @ B @ T).tolist())), **options)

    @property
    def order(self) -> int:
        return self._beta.size

    def expm(self, x: float) -> np.ndarray:
        """e^{xB} for a scalar x."""
        if self._eig is not None:
            V, Vinv = self._eig
            return np.real((V * np.exp(self._vals * x)) @ Vinv)
        return linalg.expm(x * self._B)

    def row_exp(self, x, u: np.ndarray):
        """beta e^{xB} u, vectorized over x."""
        x = np.asarray(x, dtype=float)
        if self._eig is not None:
            V, Vinv = self._eig
            weights = (self._beta @ V) * (Vinv @ u)
            val = np.real(np.exp(np.multiply.outer(x, self._vals)) @ weights)
        else:
            flat = [self._beta @ linalg.expm(xi * self._B) @ u for xi in x.ravel()]
            val = np.asarray(flat, dtype=float).reshape(x.shape)
        return _shaped(x, val)

    def moment(self, i: int) -> float:
        i = _check_order(i)
        power = np.linalg.matrix_power(-self._Binv, i)
        return math.factorial(i) * float(self._beta @ power @ np.ones(self.order))

    def survival(self, x):
        return self.row_exp(x, np.ones(self.order))

    def density(self, x):
        return self.row_exp(x, -self._B @ np.ones(self.order))

    def laplace_transform(self, s):
        s = np.asarray(s, dtype=complex)
        if np.any(np.abs(np.subtract.outer(s, self._vals)) < POLE_TOL):
            raise PoleError(f"transform pole near s={s!r}")
        closing = -self._B @ np.ones(self.order)
        eye = np.eye(self.order)
        flat = [self._beta @ np.linalg.solve(si * eye - self._B, closing) for si in s.ravel()]
        return _transform_out(s, np.asarray(flat, dtype=complex).reshape(s.shape))

    def mean_function(self, a):
        a = np.asarray(a, dtype=float)
        finite = np.isfinite(a)
        safe = np.where(finite, a, 0.0)
        ones = np.ones(self.order)
        m1 = self.moment(1)
        val = m1 - safe * np.asarray(self.survival(safe)) + np.asarray(self.row_exp(safe, self._Binv @ ones))
        return _shaped(a, np.where(finite, val, m1))

    def mean_matrix(self, a: float) -> np.ndarray:
        """M(a) = -B^{-1} - e^{aB}(aI - B^{-1}), so that m(a) = beta M(a) 1."""
        eye = np.eye(self.order)
        return -self._Binv - self.expm(a) @ (a * eye - self._Binv)

    def to_matrix_form(self) -> tuple[np.ndarray, np.ndarray]:
        return self._beta.copy(), self._B.copy()

    def poles(self) -> np.ndarray:
        return self._vals.copy()

    def as_matrix_exponential(self) -> "MatrixExponential":
        return self


def oscillating_density(decay: float, phase: float, frequency: float, **options) -> MatrixExponential:
    """
    f(x) = u e^{-a x} (1 + cos(ω x + φ)), a three-phase matrix-exponential law.

    u = a(a²+ω²)/(a²+ω²+a² cos φ - a ω sin φ) normalizes the mass.
    """
    a = _positive("decay", decay)
    w = float(frequency)
    phi = float(phase)
    u = a * (a * a + w * w) / (a * a + w * w + a * a * math.cos(phi) - a * w * math.sin(phi))
    generator = [[-a, 0.0, 0.0], [0.0, -a, w], [0.0, -w, -a]]
    column = [u, u * math.cos(phi), -u * math.sin(phi)]
    return MatrixExponential.from_realization([1.0, 1.0, 0.0], generator, column, **options)


_EPSILON_FAMILIES = {
    1: (lambda eps: (1.0, eps), (1.0, 2.0)),
    2: (lambda eps: (12.0 / 83.0, eps * 42.0 / 83.0, eps * 150.0 / 83.0), (1.0, 2.0, 3.0)),
}


def epsilon_mixture(family: int, eps: float) -> Hyperexponential:
    """
    Perturbation families interpolating between exponential and heavier mixtures.

    family 1: f ∝ e^{-x} + eps e^{-2x}
    family 2: f ∝ (12/83) e^{-x} + eps ((42/83) e^{-2x} + (150/83) e^{-3x})
    """
    if family not in _EPSILON_FAMILIES:
        raise ValidationError(f"unknown epsilon family {family!r} (choose 1 or 2)")
    coefs, rates = _EPSILON_FAMILIES[family]
    return Hyperexponential.from_density(coefs(_positive("eps", eps)), rates)


@dataclass(frozen=True)
class RiskModel:
    """
    Cramér-Lundberg surplus x + c t - (compound Poisson claims) + optional diffusion.

    `diffusion` stores σ²/2, so the Laplace exponent reads
    κ(s) = diffusion·s² + c s - lam (1 - f̂(s)).
    """

    c: float
    lam: float
    claims: ClaimDistribution
    diffusion: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", _positive("premium rate c", self.c))
        object.__setattr__(self, "lam", _positive("claim intensity lam", self.lam))
        diffusion = float(self.diffusion)
        if not math.isfinite(diffusion) or diffusion < 0:
            raise ValidationError(f"diffusion must be >= 0, got {diffusion!r}")
        object.__setattr__(self, "diffusion", diffusion)
        if not isinstance(self.claims, ClaimDistribution):
            raise ValidationError(f"claims must be a ClaimDistribution, got {type(self.claims).__name__}")
        if self.loading <= 0:
            logger.warning(
                "[model] nonpositive loading theta=%.6g (c=%g, lam=%g, m1=%g): ruin is certain",
                self.loading, self.c, self.lam, self.mean_claim,
            )

    @classmethod
    def from_loading(
        cls, lam: float, claims: ClaimDistribution, loading: float, diffusion: float = 0.0
    ) -> "RiskModel":
        """Premium c = lam m_1 (1 + loading)."""
        return cls(c=lam * claims.mean * (1.0 + float(loading)), lam=lam, claims=claims, diffusion=diffusion)

    @property
    def mean_claim(self) -> float:
        return self.claims.mean

    @property
    def loading(self) -> float:
        """θ = (c - lam m_1) / (lam m_1)."""
        drift = self.lam * self.mean_claim
        return (self.c - drift) / drift

    @property
    def rho(self) -> float:
        return self.lam * self.mean_claim / self.c

    def with_claims(
        self, claims: ClaimDistribution, *, lam: Optional[float] = None, c: Optional[float] = None
    ) -> "RiskModel":
        return replace(
            self,
            claims=claims,
            lam=self.lam if lam is None else lam,
            c=self.c if c is None else c,
        )

"""Plain records of the policy engines: parameters, candidates and solutions."""

from __future__ import annotations
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from riskscale.utils.errors import ValidationError

TIE_TOL = 1e-12


class Regime(str, Enum):
    positive_barrier = "PositiveBarrier"
    zero_barrier = "ZeroBarrier"


class Method(str, Enum):
    exact_exponential = "ExactExponential"
    expo_pure = "ExpoPure"
    expo_ci = "ExpoCI"
    matrix_exact = "MatrixExact"


# CLI spelling of each method
METHOD_ALIASES: Dict[str, Method] = {
    "exact-exponential": Method.exact_exponential,
    "expo-pure": Method.expo_pure,
    "expo-ci": Method.expo_ci,
    "matrix": Method.matrix_exact,
}


@dataclass(frozen=True)
class PolicyParams:
    """
    Discount q > 0, proportional injection cost k >= 1 and bankruptcy penalty P.

    P may be negative (a terminal reward) but must exceed -c/q; that bound
    depends on the model and is checked with `check_against`.
    """
    q: float
    k: float
    P: float = 0.0

    def __post_init__(self):
        q, k, P = float(self.q), float(self.k), float(self.P)
        if not (math.isfinite(q) and q > 0):
            raise ValidationError(f"discount rate q must be positive, got {self.q!r}")
        if not (k >= 1 and math.isfinite(k)):
            raise ValidationError(f"injection cost k must be >= 1, got {self.k!r}")
        if not math.isfinite(P):
            raise ValidationError(f"penalty P must be finite, got {self.P!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "P", P)

    def check_against(self, c: float) -> "PolicyParams":
        if not self.P > -c / self.q:
            raise ValidationError(f"penalty P={self.P!r} must exceed -c/q={-c / self.q!r}")
        return self

    def effective_premium(self, c: float) -> float:
        """c̃ = c + q P."""
        return c + self.q * self.P


@dataclass(frozen=True)
class Candidate:
    a: float
    b: float
    J0: float
    source: str = ""            # "b=0", "eta-root", "grid", ...


@dataclass(frozen=True)
class PolicySolution:
    a_star: float
    b_star: float
    J0: float
    regime: Regime
    method: Method
    candidates: List[Candidate] = field(default_factory=list)
    params: Optional[PolicyParams] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "method": self.method.value,
            "regime": self.regime.value,
            "a_star": self.a_star,
            "b_star": self.b_star,
            "J0": self.J0,
            "q": self.params.q if self.params else None,
            "k": self.params.k if self.params else None,
            "P": self.params.P if self.params else None,
            "candidates": [
                {"a": c.a, "b": c.b, "J0": c.J0, "source": c.source} for c in self.candidates
            ],
        }


def pick_best(
    candidates: List[Candidate], method: Method, params: PolicyParams
) -> PolicySolution:
    """Solution from the J0-maximal candidate; values within TIE_TOL go to the smaller barrier."""
    if not candidates:
        raise ValidationError("no policy candidates to choose from")
    top = max(c.J0 for c in candidates)
    tied = [c for c in candidates if c.J0 >= top - TIE_TOL * max(1.0, abs(top))]
    best = min(tied, key=lambda c: c.b)
    regime = Regime.positive_barrier if best.b > 0 else Regime.zero_barrier
    return PolicySolution(
        a_star=best.a,
        b_star=best.b,
        J0=best.J0,
        regime=regime,
        method=method,
        candidates=list(candidates),
        params=params,
    )

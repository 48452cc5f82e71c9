from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Union

from riskscale.core.claims import (
    ClaimDistribution,
    Exponential,
    Hyperexponential,
    MatrixExponential,
    RiskModel,
    epsilon_mixture,
    oscillating_density,
)
from riskscale.io.yamlio import safe_dump_yaml, safe_load_yaml
from riskscale.utils.errors import ConfigError, ValidationError

Number = Union[int, float, str]

VARIANTS = ("exponential", "hyperexponential", "matrix_exponential", "oscillating", "epsilon_mixture")


def parse_number(value: Any, name: str = "value") -> float:
    """Float from a number or a string such as "0.1", "263/235" or "-1/3"."""
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"{name}: cannot parse number {value!r}") from e
    else:
        raise ConfigError(f"{name}: expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigError(f"{name}: must be finite, got {value!r}")
    return out


def _numbers(raw: Any, name: str) -> list:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError(f"{name}: expected a non-empty list of numbers")
    return [parse_number(v, f"{name}[{i}]") for i, v in enumerate(raw)]


def _matrix(raw: Any, name: str) -> list:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError(f"{name}: expected a list of rows")
    return [_numbers(row, f"{name}[{i}]") for i, row in enumerate(raw)]


def _need(spec: Dict[str, Any], *keys: str) -> None:
    missing = [k for k in keys if k not in spec]
    if missing:
        raise ConfigError(f"claims ({spec.get('variant')}): missing {', '.join(missing)}")


def build_claims(spec: Dict[str, Any]) -> ClaimDistribution:
    """Claim law from a `claims` mapping with a `variant` tag."""
    if not isinstance(spec, dict):
        raise ConfigError("claims must be a mapping")
    variant = spec.get("variant")
    if variant == "exponential":
        _need(spec, "rate")
        return Exponential(parse_number(spec["rate"], "claims.rate"))
    if variant == "hyperexponential":
        _need(spec, "rates")
        rates = _numbers(spec["rates"], "claims.rates")
        if "weights" in spec and "coefficients" in spec:
            raise ConfigError("claims (hyperexponential): give weights or coefficients, not both")
        if "coefficients" in spec:
            return Hyperexponential.from_density(_numbers(spec["coefficients"], "claims.coefficients"), rates)
        _need(spec, "weights")
        return Hyperexponential(tuple(_numbers(spec["weights"], "claims.weights")), tuple(rates))
    if variant == "matrix_exponential":
        _need(spec, "generator")
        generator = _matrix(spec["generator"], "claims.generator")
        if "density_row" in spec or "density_column" in spec:
            _need(spec, "density_row", "density_column")
            return MatrixExponential.from_realization(
                _numbers(spec["density_row"], "claims.density_row"),
                generator,
                _numbers(spec["density_column"], "claims.density_column"),
            )
        _need(spec, "beta")
        return MatrixExponential(
            tuple(_numbers(spec["beta"], "claims.beta")), tuple(map(tuple, generator))
        )
    if variant == "oscillating":
        _need(spec, "decay", "phase", "frequency")
        return oscillating_density(
            parse_number(spec["decay"], "claims.decay"),
            parse_number(spec["phase"], "claims.phase"),
            parse_number(spec["frequency"], "claims.frequency"),
        )
    if variant == "epsilon_mixture":
        _need(spec, "family", "eps")
        family = spec["family"]
        if family not in (1, 2):
            raise ConfigError(f"claims (epsilon_mixture): family must be 1 or 2, got {family!r}")
        return epsilon_mixture(family, parse_number(spec["eps"], "claims.eps"))
    raise ConfigError(f"claims.variant must be one of {', '.join(VARIANTS)}; got {variant!r}")


@dataclass(frozen=True)
class ModelConfig:
    """
    Serializable description of a risk model.

    Numbers are kept as written (fraction strings included) so a config
    survives load -> save -> load unchanged; `build()` turns it into a
    RiskModel. Exactly one of `c` and `loading` is set.
    """
    claims: Dict[str, Any]
    lam: Number
    c: Optional[Number] = None
    loading: Optional[Number] = None
    diffusion: Number = 0
    name: Optional[str] = None

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "ModelConfig":
        if not isinstance(raw, dict):
            raise ConfigError("model config must be a mapping")
        known = {"claims", "lam", "c", "loading", "diffusion", "name"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown model config key(s): {', '.join(unknown)}")
        if "claims" not in raw or "lam" not in raw:
            raise ConfigError("model config needs 'claims' and 'lam'")
        cfg = cls(
            claims=copy.deepcopy(raw["claims"]),
            lam=raw["lam"],
            c=raw.get("c"),
            loading=raw.get("loading"),
            diffusion=raw.get("diffusion", 0),
            name=raw.get("name"),
        )
        cfg.validate()
        return cfg

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        if self.name is not None:
            out["name"] = self.name
        out["claims"] = copy.deepcopy(self.claims)
        out["lam"] = self.lam
        if self.c is not None:
            out["c"] = self.c
        if self.loading is not None:
            out["loading"] = self.loading
        if self.diffusion != 0:
            out["diffusion"] = self.diffusion
        return out

    def validate(self) -> None:
        if (self.c is None) == (self.loading is None):
            raise ConfigError("model config needs exactly one premium mode: 'c' or 'loading'")
        self.build()

    def build(self) -> RiskModel:
        claims = build_claims(self.claims)
        lam = parse_number(self.lam, "lam")
        diffusion = parse_number(self.diffusion, "diffusion")
        if self.loading is not None:
            model = RiskModel.from_loading(lam, claims, parse_number(self.loading, "loading"), diffusion)
        else:
            model = RiskModel(c=parse_number(self.c, "c"), lam=lam, claims=claims, diffusion=diffusion)
        return model


def load_model_config(path: str | Path) -> ModelConfig:
    raw = safe_load_yaml(path)
    try:
        return ModelConfig.from_dict(raw)
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def save_model_config(path: str | Path, cfg: ModelConfig) -> Path:
    path = Path(path)
    safe_dump_yaml(path, cfg.to_dict())
    return path

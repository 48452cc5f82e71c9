from __future__ import annotations
import os
from pathlib import Path
from typing import Optional

from riskscale.utils.errors import ConfigError

HORIZON_FACTOR = 5.0
DEFAULT_TARGETS = Path(__file__).resolve().parent.parent / "data" / "repro_targets.yaml"


def search_horizon(phi: float, x_max: Optional[float] = None) -> float:
    """
    Return the right end of barrier searches.

    Precedence: explicit `x_max` > $RISKSCALE_XMAX > 5/phi.
    """
    if x_max is not None:
        return float(x_max)
    raw = os.environ.get("RISKSCALE_XMAX")
    if raw:
        try:
            value = float(raw)
        except ValueError as e:
            raise ConfigError(f"RISKSCALE_XMAX must be a number, got {raw!r}") from e
        if value <= 0:
            raise ConfigError(f"RISKSCALE_XMAX must be positive, got {raw!r}")
        return value
    return HORIZON_FACTOR / phi


def get_targets_path() -> Path:
    """Return the reproduction manifest ($RISKSCALE_TARGETS or the bundled one)."""
    override = os.environ.get("RISKSCALE_TARGETS")
    if override:
        return Path(override).expanduser().resolve()
    return DEFAULT_TARGETS

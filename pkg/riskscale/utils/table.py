from __future__ import annotations
import math
from typing import List, Sequence


def format_number(x: float, digits: int = 9) -> str:
    """Format a number with `digits` significant digits ('inf'/'nan' passed through)."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return str(x)
    if x == 0.0:
        return "0"
    return f"{x:.{digits}g}"


def kv_aligned(pairs: Sequence[tuple[str, str]], width: int) -> List[str]:
    """
    Render key/value lines where keys are padded to 'width'.

    Example with width=6:
      ("J0", "5.95") -> "J0    : 5.95"
      ("regime", "positive_barrier") -> "regime: positive_barrier"
    """
    out: List[str] = []
    for k, v in pairs:
        out.append(f"{k:<{width}}: {v}")
    return out


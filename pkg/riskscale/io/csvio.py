from __future__ import annotations
import csv
import io
from typing import Iterable, Sequence

from riskscale.utils.table import format_number


def _cell(value: object) -> str:
    if isinstance(value, (float, int)) and not isinstance(value, bool):
        return format_number(value)
    return "" if value is None else str(value)


def render_csv(
    headers: Sequence[str],
    rows: Iterable[Sequence[object]],
    comments: Sequence[str] = (),
) -> str:
    """
    Render rows as CSV text. Numbers are printed with 9 significant digits.

    Comment lines are emitted first, each prefixed with '# '.
    """
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(headers))
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()

"""
Common utility functions
"""
from typing import List, Optional, Sequence

import math


def format_float(value: float) -> str:
    """Shortest text that reads back as the same float"""
    return repr(float(value))


def format_steps(steps: Optional[float]) -> str:
    """Compact step count: 2200 -> '2.2k', 300000 -> '300k'"""
    if steps is None or (isinstance(steps, float) and math.isinf(steps)):
        return "unreached"
    if steps < 1000:
        return str(int(steps))
    if steps < 1_000_000:
        return f"{steps / 1000:.4g}k"
    return f"{steps / 1_000_000:.4g}M"


def format_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned plain-text table"""
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()

    out: List[str] = [line(header), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out)
